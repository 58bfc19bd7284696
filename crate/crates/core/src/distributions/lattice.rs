//! Lattice-supported step laws: the Pareto lattice, its spiked variant, and
//! the finite-mean contrast laws (geometric, point mass).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::quad::adaptive;
use crate::numeric::Kahan;
use crate::regvar::{EpsKind, RegVarFunction};

use super::{assemble, Family, Law, StepDistribution, SupportDesc, SymbolicReal};

/// Truncated-moment sums switch from the direct loop to an integral form
/// past this many lattice terms; the integral's relative error is below
/// d/(2s) ≤ 2.5e-8 there.
const DIRECT_CAP: f64 = 2.0e7;

fn symbolic_span(d: f64) -> Result<SymbolicReal> {
    SymbolicReal::from_f64_exact(d)
        .ok_or_else(|| Error::config(format!("span {d} has no exact rational form")))
}

/// P{X ≥ k·d} = k^{-alpha} on {d, 2d, ...}: masses k^{-alpha} - (k+1)^{-alpha}.
#[derive(Debug)]
struct ParetoLattice {
    alpha: f64,
    d: f64,
    inv_alpha: f64,
}

pub(super) fn build_pareto(family: Family, alpha: f64, span: f64) -> Result<StepDistribution> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("pareto_lattice alpha must lie in (0,1), got {alpha}")));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::config(format!("pareto_lattice span must be positive, got {span}")));
    }
    let sym = symbolic_span(span)?;
    // bar F(x) = (floor(x/d)+1)^{-alpha} ~ (x/d)^{-alpha}, so R carries d^{-alpha}
    let regvar = RegVarFunction::with_scale(alpha, EpsKind::Zero, 0.5, span.powf(-alpha))?;
    let law = ParetoLattice { alpha, d: span, inv_alpha: 1.0 / alpha };
    let support = SupportDesc::Lattice { offset: SymbolicReal::integer(0), span: sym };
    Ok(assemble(family, Arc::new(law), Some((alpha, regvar)), 0.0, 1.0, support))
}

impl Law for ParetoLattice {
    fn right_tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        ((x / self.d).floor() + 1.0).powf(-self.alpha)
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, u: f64) -> f64 {
        let v = 1.0 - u;
        // K = ceil(v^{-1/alpha}) - 1 satisfies P{K >= k} = k^{-alpha}
        let t = if self.inv_alpha == 2.0 {
            let w = 1.0 / v;
            w * w
        } else {
            v.powf(-self.inv_alpha)
        };
        (t.ceil() - 1.0).max(1.0) * self.d
    }

    fn lattice_span(&self) -> Option<f64> {
        Some(self.d)
    }

    fn lattice_masses(&self, kmax: usize) -> Option<Vec<f64>> {
        let mut v = Vec::with_capacity(kmax + 1);
        v.push(0.0);
        for k in 1..=kmax {
            v.push(pareto_mass(self.alpha, k as f64));
        }
        Some(v)
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        pareto_trunc_power(self.alpha, self.d, p, s, DIRECT_CAP)
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        pareto_tilt(self.alpha, self.d, s, DIRECT_CAP)
    }
}

fn pareto_mass(alpha: f64, k: f64) -> f64 {
    k.powf(-alpha) - (k + 1.0).powf(-alpha)
}

/// Σ_{k ≤ s/d} (kd)^p (k^{-α} - (k+1)^{-α}): direct up to `cap` terms, then
/// the exact identity m(k) = ∫_k^{k+1} α u^{-α-1} du turns the remainder
/// into an integral with midpoint weight, relative error ≤ d/(2s) per term.
pub(super) fn pareto_trunc_power(alpha: f64, d: f64, p: f64, s: f64, cap: f64) -> Result<f64> {
    if s < d {
        return Ok(0.0);
    }
    let kmax = (s / d).floor();
    let k_direct = kmax.min(cap);
    let mut acc = Kahan::new();
    let mut k = 1.0f64;
    while k <= k_direct {
        acc.add((k * d).powf(p) * pareto_mass(alpha, k));
        k += 1.0;
    }
    let mut total = acc.value();
    if kmax > cap {
        let est = adaptive(
            |t| {
                let u = t.exp();
                alpha * u.powf(-alpha - 1.0) * ((u - 0.5) * d).powf(p) * u
            },
            (k_direct + 1.0).ln(),
            (kmax + 1.0).ln(),
            1e-10,
            1e-300,
            4000,
        )?;
        total += est.value;
    }
    Ok(total)
}

/// Σ_{k ≤ s/d} e^{kd/s} (k^{-α} - (k+1)^{-α}), same direct/integral split.
pub(super) fn pareto_tilt(alpha: f64, d: f64, s: f64, cap: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("tilt moment needs s > 0"));
    }
    if s < d {
        return Ok(0.0);
    }
    let kmax = (s / d).floor();
    let k_direct = kmax.min(cap);
    let mut acc = Kahan::new();
    let mut k = 1.0f64;
    while k <= k_direct {
        acc.add((k * d / s).exp() * pareto_mass(alpha, k));
        k += 1.0;
    }
    let mut total = acc.value();
    if kmax > cap {
        let est = adaptive(
            |t| {
                let u = t.exp();
                alpha * u.powf(-alpha - 1.0) * ((u - 0.5) * d / s).exp() * u
            },
            (k_direct + 1.0).ln(),
            (kmax + 1.0).ln(),
            1e-10,
            1e-300,
            4000,
        )?;
        total += est.value;
    }
    Ok(total)
}

/// Pareto lattice plus masses r^j at n = 2^j (j ≥ J0), r = 2^{kappa-1-alpha},
/// renormalized. Interval probabilities at the spikes are of order x^kappa
/// relative to the smooth level.
#[derive(Debug)]
struct SpikedPareto {
    alpha: f64,
    r: f64,
    z: f64,
    inv_alpha: f64,
}

const SPIKE_J0: i32 = 4;

pub(super) fn build_spiked(family: Family, alpha: f64, kappa: f64) -> Result<StepDistribution> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("spiked_pareto alpha must lie in (0,1), got {alpha}")));
    }
    if !(kappa >= 0.0 && kappa < 1.0) {
        return Err(Error::config(format!(
            "spiked_pareto kappa must lie in [0,1) so spikes stay below the tail, got {kappa}"
        )));
    }
    let r = 2.0f64.powf(kappa - 1.0 - alpha);
    let z = 1.0 + r.powi(SPIKE_J0) / (1.0 - r);
    let regvar = RegVarFunction::with_scale(alpha, EpsKind::Zero, 0.5, z)?;
    let law = SpikedPareto { alpha, r, z, inv_alpha: 1.0 / alpha };
    let support = SupportDesc::Lattice {
        offset: SymbolicReal::integer(0),
        span: SymbolicReal::integer(1),
    };
    Ok(assemble(family, Arc::new(law), Some((alpha, regvar)), 0.0, 1.0, support))
}

impl SpikedPareto {
    /// Smallest j ≥ J0 with 2^j > x; the spike tail is r^j/(1-r).
    fn spike_tail(&self, x: f64) -> f64 {
        let mut j = if x < 1.0 { 0 } else { x.log2().floor() as i32 + 1 };
        while 2.0f64.powi(j) <= x {
            j += 1;
        }
        while j > 0 && 2.0f64.powi(j - 1) > x {
            j -= 1;
        }
        let j = j.max(SPIKE_J0);
        self.r.powi(j) / (1.0 - self.r)
    }

    fn spike_mass(&self, n: f64) -> f64 {
        if n >= 16.0 && n.log2().fract() == 0.0 {
            self.r.powi(n.log2() as i32)
        } else {
            0.0
        }
    }
}

impl Law for SpikedPareto {
    fn right_tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        ((x.floor() + 1.0).powf(-self.alpha) + self.spike_tail(x)) / self.z
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, u: f64) -> f64 {
        // mixture form: weight 1/z on the pareto part, r^j/(z-1)-proportional
        // weights on the spikes; measure-preserving rather than monotone
        let w = 1.0 / self.z;
        if u < w {
            let v = 1.0 - u * self.z;
            let t = v.powf(-self.inv_alpha);
            (t.ceil() - 1.0).max(1.0)
        } else {
            let v = ((u - w) / (1.0 - w)).max(f64::MIN_POSITIVE);
            // P{J = J0 + i} ∝ r^i: inverse of the geometric tail
            let i = ((1.0 - v).ln() / self.r.ln()).floor().max(0.0) as i32;
            2.0f64.powi(SPIKE_J0 + i.min(1000))
        }
    }

    fn lattice_span(&self) -> Option<f64> {
        Some(1.0)
    }

    fn lattice_masses(&self, kmax: usize) -> Option<Vec<f64>> {
        let mut v = Vec::with_capacity(kmax + 1);
        v.push(0.0);
        for k in 1..=kmax {
            let n = k as f64;
            v.push((pareto_mass(self.alpha, n) + self.spike_mass(n)) / self.z);
        }
        Some(v)
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        let mut total = pareto_trunc_power(self.alpha, 1.0, p, s, DIRECT_CAP)?;
        let mut j = SPIKE_J0;
        loop {
            let n = 2.0f64.powi(j);
            if n > s {
                break;
            }
            total += n.powf(p) * self.r.powi(j);
            j += 1;
        }
        Ok(total / self.z)
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        let mut total = pareto_tilt(self.alpha, 1.0, s, DIRECT_CAP)?;
        let mut j = SPIKE_J0;
        loop {
            let n = 2.0f64.powi(j);
            if n > s {
                break;
            }
            total += (n / s).exp() * self.r.powi(j);
            j += 1;
        }
        Ok(total / self.z)
    }
}

/// P{X = k} = p(1-p)^{k-1} on {1, 2, ...}: finite mean 1/p.
#[derive(Debug)]
struct Geometric {
    p: f64,
    lq: f64,
}

pub(super) fn build_geometric(family: Family, p: f64) -> Result<StepDistribution> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::config(format!("geometric p must lie in (0,1), got {p}")));
    }
    let law = Geometric { p, lq: (1.0 - p).ln() };
    let support = SupportDesc::Lattice {
        offset: SymbolicReal::integer(0),
        span: SymbolicReal::integer(1),
    };
    Ok(assemble(family, Arc::new(law), None, 0.0, 1.0, support))
}

impl Law for Geometric {
    fn right_tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        (self.lq * x.floor()).exp()
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, u: f64) -> f64 {
        ((1.0 - u).ln() / self.lq).ceil().max(1.0)
    }

    fn lattice_span(&self) -> Option<f64> {
        Some(1.0)
    }

    fn lattice_masses(&self, kmax: usize) -> Option<Vec<f64>> {
        let mut v = Vec::with_capacity(kmax + 1);
        v.push(0.0);
        for k in 1..=kmax {
            v.push(self.p * (self.lq * (k as f64 - 1.0)).exp());
        }
        Some(v)
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        let mut acc = Kahan::new();
        let mut k = 1.0f64;
        while k <= s {
            let term = k.powf(p) * self.p * (self.lq * (k - 1.0)).exp();
            acc.add(term);
            if term < 1e-320 {
                break;
            }
            k += 1.0;
        }
        Ok(acc.value())
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("tilt moment needs s > 0"));
        }
        let mut acc = Kahan::new();
        let mut k = 1.0f64;
        while k <= s {
            let term = (k / s).exp() * self.p * (self.lq * (k - 1.0)).exp();
            acc.add(term);
            if term < 1e-320 && k > 64.0 {
                break;
            }
            k += 1.0;
        }
        Ok(acc.value())
    }

    fn mean(&self) -> Option<f64> {
        Some(1.0 / self.p)
    }
}

/// Deterministic step of size c.
#[derive(Debug)]
struct PointMass {
    c: f64,
}

pub(super) fn build_point_mass(family: Family, c: f64) -> Result<StepDistribution> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::config(format!("point_mass c must be positive, got {c}")));
    }
    let sym = SymbolicReal::from_f64_exact(c)
        .ok_or_else(|| Error::config(format!("point_mass c = {c} has no exact rational form")))?;
    let law = PointMass { c };
    let support = SupportDesc::FiniteAtoms { atoms: vec![sym] };
    Ok(assemble(family, Arc::new(law), None, 0.0, 1.0, support))
}

impl Law for PointMass {
    fn right_tail(&self, x: f64) -> f64 {
        if x < self.c {
            1.0
        } else {
            0.0
        }
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, _u: f64) -> f64 {
        self.c
    }

    fn lattice_span(&self) -> Option<f64> {
        Some(self.c)
    }

    fn lattice_masses(&self, kmax: usize) -> Option<Vec<f64>> {
        let mut v = vec![0.0; kmax + 1];
        if kmax >= 1 {
            v[1] = 1.0;
        }
        Some(v)
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        Ok(if self.c <= s { self.c.powf(p) } else { 0.0 })
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("tilt moment needs s > 0"));
        }
        Ok(if self.c <= s { (self.c / s).exp() } else { 0.0 })
    }

    fn mean(&self) -> Option<f64> {
        Some(self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{sample_walk, LatticeClass, StepDistribution};
    use super::*;
    use crate::regvar::karamata_truncated_moment;

    fn pareto(alpha: f64, span: f64) -> StepDistribution {
        StepDistribution::from_family(Family::ParetoLattice { alpha, span }).unwrap()
    }

    #[test]
    fn pareto_tail_matches_definition() {
        let d = pareto(0.4, 1.0);
        assert_eq!(d.right_tail(-2.0), 1.0);
        assert_eq!(d.right_tail(0.3), 1.0);
        // frozen: 4^{-0.4} and 5^{-0.4}
        assert!((d.right_tail(3.5) - 0.5743491775).abs() < 1e-10);
        assert!((d.right_tail(4.0) - 0.5253055609).abs() < 1e-10);
        let half = pareto(0.4, 0.5);
        assert!((half.right_tail(1.0) - 3.0f64.powf(-0.4)).abs() < 1e-15);
    }

    #[test]
    fn pareto_masses_telescope() {
        let d = pareto(0.37, 1.0);
        let m = d.lattice_masses(500).unwrap();
        assert_eq!(m[0], 0.0);
        let sum: f64 = m.iter().sum();
        assert!((sum - (1.0 - 501.0f64.powf(-0.37))).abs() < 1e-14);
    }

    #[test]
    fn pareto_quantile_steps_at_cdf_boundaries() {
        let d = pareto(0.4, 2.0);
        for k in [1.0f64, 2.0, 5.0, 100.0] {
            let boundary = 1.0 - (k + 1.0).powf(-0.4);
            assert_eq!(d.law().quantile(boundary - 1e-9), k * 2.0);
            assert_eq!(d.law().quantile(boundary + 1e-9), (k + 1.0) * 2.0);
        }
    }

    #[test]
    fn pareto_sampler_matches_tail() {
        let d = pareto(0.5, 1.0);
        let n = 100_000usize;
        let mut s = d.steps(11, 0);
        let draws: Vec<f64> = (0..n).map(|_| s.next_step()).collect();
        for x in [1.0, 3.0, 10.0] {
            let p = d.right_tail(x);
            let emp = draws.iter().filter(|&&v| v > x).count() as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() < 4.0 * sigma, "x={x}: emp {emp} vs {p}");
        }
    }

    #[test]
    fn pareto_truncated_moment_matches_brute_force() {
        let d = pareto(0.4, 1.0);
        let brute: f64 = (1..=10).map(|k| k as f64 * pareto_mass(0.4, k as f64)).sum();
        assert!((d.truncated_moment(1.0, 10.5).unwrap() - brute).abs() < 1e-14);
    }

    #[test]
    fn pareto_truncated_moment_approaches_karamata() {
        let d = pareto(0.4, 1.0);
        let m = karamata_truncated_moment(&d, 1.0, 1e6).unwrap();
        assert!(
            (m.value / m.karamata - 1.0).abs() < 0.03,
            "ratio {}",
            m.value / m.karamata
        );
    }

    #[test]
    fn integral_extension_agrees_with_direct_sum() {
        // same sums with the crossover forced early vs fully direct
        let direct = pareto_trunc_power(0.5, 1.0, 1.0, 31623.0, 1e9).unwrap();
        let split = pareto_trunc_power(0.5, 1.0, 1.0, 31623.0, 1000.0).unwrap();
        assert!(((split - direct) / direct).abs() < 1e-4);
        let direct_t = pareto_tilt(0.5, 1.0, 31623.0, 1e9).unwrap();
        let split_t = pareto_tilt(0.5, 1.0, 31623.0, 1000.0).unwrap();
        assert!(((split_t - direct_t) / direct_t).abs() < 1e-4);
    }

    #[test]
    fn spiked_pareto_masses_account_for_all_probability() {
        let d = StepDistribution::from_family(Family::SpikedPareto { alpha: 0.4, kappa: 0.3 })
            .unwrap();
        assert_eq!(d.right_tail(0.5), 1.0);
        let m = d.lattice_masses(100).unwrap();
        let sum: f64 = m.iter().sum();
        assert!((sum + d.right_tail(100.0) - 1.0).abs() < 1e-12);
        // tail minus next tail equals the mass at each point, spike or not
        for n in [15.0, 16.0, 17.0, 31.0, 32.0] {
            let diff = d.right_tail(n - 1.0) - d.right_tail(n);
            assert!((diff - m[n as usize]).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn spiked_pareto_spikes_dominate_neighbors() {
        let d = StepDistribution::from_family(Family::SpikedPareto { alpha: 0.4, kappa: 0.3 })
            .unwrap();
        let m = d.lattice_masses(1025).unwrap();
        // spike at 1024 carries ~1024^0.3/0.4 times the smooth mass
        assert!(m[1024] > 4.0 * m[1023]);
        assert!(m[1024] > 4.0 * m[1025]);
    }

    #[test]
    fn spiked_pareto_sampler_matches_tail() {
        let d = StepDistribution::from_family(Family::SpikedPareto { alpha: 0.4, kappa: 0.3 })
            .unwrap();
        let n = 100_000usize;
        let mut s = d.steps(5, 0);
        let draws: Vec<f64> = (0..n).map(|_| s.next_step()).collect();
        for x in [1.0, 10.0, 16.0, 100.0] {
            let p = d.right_tail(x);
            let emp = draws.iter().filter(|&&v| v > x).count() as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() < 4.5 * sigma, "x={x}: emp {emp} vs {p}");
        }
    }

    #[test]
    fn geometric_basics() {
        let d = StepDistribution::from_family(Family::Geometric { p: 0.5 }).unwrap();
        assert_eq!(d.mean(), Some(2.0));
        assert!((d.right_tail(2.5) - 0.25).abs() < 1e-15);
        assert_eq!(d.law().quantile(0.5), 1.0);
        assert_eq!(d.law().quantile(0.500001), 2.0);
        assert!(d.alpha().is_none());
        assert!(d.regvar().is_err());
    }

    #[test]
    fn geometric_tilt_matches_brute_force() {
        let d = StepDistribution::from_family(Family::Geometric { p: 0.3 }).unwrap();
        let s = 50.0;
        let brute: f64 = (1..=50)
            .map(|k| (k as f64 / s).exp() * 0.3 * 0.7f64.powi(k - 1))
            .sum();
        assert!((d.tilt_moment(s).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn point_mass_basics() {
        let d = StepDistribution::from_family(Family::PointMass { c: 1.5 }).unwrap();
        assert_eq!(d.right_tail(1.0), 1.0);
        assert_eq!(d.right_tail(1.5), 0.0);
        assert_eq!(d.mean(), Some(1.5));
        let w = sample_walk(&d, 5, 1);
        assert_eq!(w.sums, vec![1.5, 3.0, 4.5, 6.0, 7.5]);
        match d.classify() {
            LatticeClass::Arithmetic { span } => assert_eq!(span.value(), 1.5),
            other => panic!("expected arithmetic, got {other:?}"),
        }
    }

    #[test]
    fn fractional_span_classifies_exactly() {
        let d = pareto(0.4, 0.5);
        match d.classify() {
            LatticeClass::Arithmetic { span } => {
                assert_eq!((span.num, span.den), (1, 2));
            }
            other => panic!("expected arithmetic, got {other:?}"),
        }
    }
}
