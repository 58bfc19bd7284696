//! Exponential tilting at scale s and the capped local concentration bound
//! P{S_n ∈ x + I, M_n ≤ s_n} ≤ C′(1/s_n + 1/a_n)·e^{−x/s_n + C·n/R(s_n)},
//! where M_n is the largest step. The constants are not computed from theory:
//! [`verify_lemma32`] fits them on a calibration grid of Monte Carlo
//! estimates and validates the fitted bound on a disjoint grid. Exact FFT
//! routes for lattice laws back the MC estimates and the tilted identity.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::distributions::StepDistribution;
use crate::numeric::fit::pava_nonincreasing;
use crate::numeric::quad::adaptive;
use crate::regvar::RegVarFunction;
use crate::{Error, Result};

/// Default exponent for [`zeta_cut`]; valid for every tail index above 1/6.
pub const ZETA_GAMMA_DEFAULT: f64 = 0.875;

/// Grid searched for the exponential constant C when fitting.
const C_EXP_GRID_STEP: f64 = 0.05;
const C_EXP_GRID_MAX: f64 = 3.0;

/// Inflation applied to the fitted prefactor before validation.
const FIT_SAFETY: f64 = 2.0;

/// ψ(s) = ln E[e^{X/s}; X ≤ s]. Domain error when no mass sits at or below
/// s (then the tilted law is empty; for a point mass at c this means c > s).
pub fn psi(dist: &StepDistribution, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("tilt scale s must be positive and finite"));
    }
    let m = dist.tilt_moment(s)?;
    if !(m > 0.0) {
        return Err(Error::domain("no mass at or below s, the tilted law is empty"));
    }
    Ok(m.ln())
}

/// The law F̃(dx) = e^{x/s − ψ(s)}·1{x ≤ s}·F(dx): steps rewarded for size
/// but barred from exceeding s. Walks under F̃ dominate capped windows of
/// the original walk through the identity
/// P{S_n ∈ x+I, M_n ≤ s} = e^{nψ}·E[e^{−S̃_n/s}; S̃_n ∈ x+I].
#[derive(Clone, Debug)]
pub struct TiltedLaw {
    source: StepDistribution,
    s: f64,
    psi: f64,
}

/// Build the tilted law at scale s.
pub fn tilt(dist: &StepDistribution, s: f64) -> Result<TiltedLaw> {
    let psi = psi(dist, s)?;
    Ok(TiltedLaw { source: dist.clone(), s, psi })
}

impl TiltedLaw {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn source(&self) -> &StepDistribution {
        &self.source
    }

    /// Total mass, recomputed through a route independent of the ψ used to
    /// normalize: lattice sum or quantile-transform quadrature. Deviation
    /// from 1 measures the agreement of the two integration paths.
    pub fn total_mass(&self) -> Result<f64> {
        self.cdf(self.s)
    }

    /// P{X̃ ≤ x}. Equals 1 at x = s: the tilted law has no mass beyond s.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let cap = x.min(self.s);
        match self.lattice_masses()? {
            Some(masses) => {
                let d = self.source.lattice_span().expect("masses imply a span");
                let hi = (cap / d * (1.0 + 1e-12)).floor();
                let hi = if hi < 0.0 { return Ok(0.0) } else { hi as usize };
                Ok(masses.iter().take(hi + 1).sum())
            }
            None => {
                let top = 1.0 - self.source.right_tail(cap);
                if top <= 0.0 {
                    return Ok(0.0);
                }
                let law = self.source.law();
                let (s, psi) = (self.s, self.psi);
                let est = adaptive(
                    |u: f64| (law.quantile(u) / s - psi).exp(),
                    0.0,
                    top,
                    1e-12,
                    1e-15,
                    40_000,
                )?;
                Ok(est.value)
            }
        }
    }

    /// Tilted mean E[X̃]. Always at least the source's conditional mean
    /// given X ≤ s: the tilt weights larger steps up.
    pub fn mean(&self) -> Result<f64> {
        match self.lattice_masses()? {
            Some(masses) => {
                let d = self.source.lattice_span().expect("masses imply a span");
                Ok(masses.iter().enumerate().map(|(k, &m)| k as f64 * d * m).sum())
            }
            None => {
                let top = 1.0 - self.source.right_tail(self.s);
                if top <= 0.0 {
                    return Err(Error::domain("tilted law carries no mass"));
                }
                let law = self.source.law();
                let (s, psi) = (self.s, self.psi);
                let est = adaptive(
                    |u: f64| {
                        let q = law.quantile(u);
                        q * (q / s - psi).exp()
                    },
                    0.0,
                    top,
                    1e-12,
                    1e-15,
                    40_000,
                )?;
                Ok(est.value)
            }
        }
    }

    /// Tilted masses at 0, d, ..., floor(s/d)·d for lattice sources; None
    /// for continuous ones. Cells beyond s hold nothing by construction.
    pub fn lattice_masses(&self) -> Result<Option<Vec<f64>>> {
        let Some(d) = self.source.lattice_span() else { return Ok(None) };
        let kcap = (self.s / d * (1.0 + 1e-12)).floor() as usize;
        let raw = self.source.lattice_masses(kcap)?;
        let out: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(k, &p)| p * (k as f64 * d / self.s - self.psi).exp())
            .collect();
        Ok(Some(out))
    }
}

/// The cut scale ζ = a_n^{1−γ}·x^γ interpolating between the walk's bulk
/// scale a_n and the window position x. The exponent must lie in
/// ((1+α)/(1+2α), 1); below that the tilt is too weak for the bound's
/// exponent to win, at 1 the cut degenerates to x itself.
pub fn zeta_cut(rv: &RegVarFunction, n: u64, x: f64, gamma: f64) -> Result<f64> {
    let alpha = rv.alpha();
    let lo = (1.0 + alpha) / (1.0 + 2.0 * alpha);
    if !(gamma > lo && gamma < 1.0) {
        return Err(Error::domain(format!(
            "cut exponent must lie in ({lo:.4}, 1) for tail index {alpha}, got {gamma}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::domain("cut position x must be positive"));
    }
    let a = rv.norming(n)?;
    Ok(a.powf(1.0 - gamma) * x.powf(gamma))
}

/// Q(x) = x^{−2}·E[X²; |X| ≤ x] + P{|X| > x}, the local-limit control
/// function whose 1/n level set is the concentration scale.
pub fn q_function(dist: &StepDistribution, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("Q needs x > 0"));
    }
    let m2 = dist.truncated_abs_moment(2.0, x)?;
    Ok(m2 / (x * x) + dist.right_tail(x) + dist.left_tail(x))
}

/// r_n solving Q(r) = 1/n. Q is made monotone first (a nonincreasing
/// envelope over a log grid absorbs lattice ripple), then inverted by
/// linear interpolation in (ln x, ln Q). Comparable to a_n: F̄ ≤ Q ≲ C/R
/// pins r_n within constant multiples of the norming sequence.
pub fn concentration_scale(dist: &StepDistribution, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("concentration scale needs n >= 2"));
    }
    let target = (n as f64).recip();
    let mut lo = 1e-3;
    while q_function(dist, lo)? < target {
        lo /= 8.0;
        if lo < 1e-12 {
            return Err(Error::domain("Q never rises above 1/n near zero"));
        }
    }
    let mut hi = lo.max(1.0);
    for _ in 0..600 {
        if q_function(dist, hi)? < target {
            break;
        }
        hi *= 2.0;
    }
    if q_function(dist, hi)? >= target {
        return Err(Error::numeric("Q level-set bracketing", hi, target));
    }
    let pts = 96usize;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut qs = Vec::with_capacity(pts + 1);
    for i in 0..=pts {
        let x = (llo + (lhi - llo) * i as f64 / pts as f64).exp();
        qs.push(q_function(dist, x)?.max(1e-300));
    }
    let env = pava_nonincreasing(&qs);
    let mut idx = env.len() - 1;
    for (i, &q) in env.iter().enumerate() {
        if q <= target {
            idx = i;
            break;
        }
    }
    if idx == 0 {
        return Ok(lo);
    }
    let (q0, q1) = (env[idx - 1].ln(), env[idx].ln());
    let t = if q0 > q1 { (q0 - target.ln()) / (q0 - q1) } else { 1.0 };
    let step = (lhi - llo) / pts as f64;
    Ok((llo + step * ((idx - 1) as f64 + t)).exp())
}

/// Fitted constants of the concentration bound: `c_exp` scales n/R(s_n) in
/// the exponent, `c_pre` multiplies the local term 1/s_n + 1/a_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub c_exp: f64,
    pub c_pre: f64,
}

/// The bound C′(1/s_n + 1/a_n)·e^{−x/s_n + C·n/R(s_n)} at one point.
/// Nonincreasing in x for fixed (n, s_n).
pub fn lemma32_bound(
    dist: &StepDistribution,
    n: u64,
    x: f64,
    s_n: f64,
    fit: &FittedConstants,
) -> Result<f64> {
    if !(x > 0.0 && s_n > 0.0) {
        return Err(Error::domain("bound needs x > 0 and s_n > 0"));
    }
    let (_, rv) = dist.heavy_tail()?;
    let a = rv.norming(n)?;
    let r = rv.eval(s_n)?;
    Ok(fit.c_pre * (1.0 / s_n + 1.0 / a) * (-x / s_n + fit.c_exp * n as f64 / r).exp())
}

/// Default verification grid: for each n, one cut s = ζ_{n, 10·a_n} and
/// window positions x/a_n ∈ {1/2, 1, 2, 5, 10, 20}.
pub fn default_lemma32_grid(
    dist: &StepDistribution,
    n_list: &[u64],
    gamma: f64,
) -> Result<Vec<(u64, f64, f64)>> {
    let (_, rv) = dist.heavy_tail()?;
    let mut out = Vec::with_capacity(n_list.len() * 6);
    for &n in n_list {
        let a = rv.norming(n)?;
        let s = zeta_cut(rv, n, 10.0 * a, gamma)?;
        for m in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            out.push((n, m * a, s));
        }
    }
    Ok(out)
}

/// One grid point of a verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointEstimate {
    pub n: u64,
    pub x: f64,
    pub s: f64,
    /// MC estimate of P{S_n ∈ [x, x+h), M_n ≤ s}.
    pub prob: f64,
    /// 95% half-width (rule of three when no walk hits).
    pub ci: f64,
    /// Fitted bound at this point.
    pub bound: f64,
    /// True when the point shaped the constants rather than testing them.
    pub calibration: bool,
}

/// Outcome of [`verify_lemma32`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma32Report {
    pub constants: FittedConstants,
    pub points: Vec<PointEstimate>,
    /// True when every validation point satisfies prob − ci ≤ bound.
    pub holds: bool,
    pub violations: usize,
    /// Smallest n from which the bound holds on every validation point at
    /// that n and beyond.
    pub smallest_uniform_n: Option<u64>,
    pub samples_per_point: u64,
    /// Window width h of the target event (the lattice span, or 1).
    pub window: f64,
}

/// Estimate P{S_n ∈ x + [0,h), M_n ≤ s} by Monte Carlo on every grid point,
/// fit the smallest constants on the calibration half (within each n: points
/// sorted by x, alternating calibration/validation), inflate the prefactor
/// by a factor of two, and check the bound on the validation half.
///
/// Points sharing (n, s) are answered from a single MC pass: each walk is
/// scored against all of that group's windows, so every point still sees the
/// full sample count. A walk dies the moment a step exceeds s; for laws with
/// no mass below zero it also dies once the partial sum passes the last
/// window.
pub fn verify_lemma32(
    dist: &StepDistribution,
    points: &[(u64, f64, f64)],
    samples_per_point: u64,
    seed: u64,
) -> Result<Lemma32Report> {
    if points.is_empty() {
        return Err(Error::config("verification needs at least one grid point"));
    }
    if samples_per_point == 0 {
        return Err(Error::config("verification needs samples_per_point >= 1"));
    }
    for &(n, x, s) in points {
        if n == 0 || !(x > 0.0) || !(s > 0.0) {
            return Err(Error::config("grid points need n >= 1, x > 0, s > 0"));
        }
    }
    let h = dist.lattice_span().unwrap_or(1.0);
    let nonneg = dist.left_tail(0.0) == 0.0;

    // group point indices by (n, s)
    let mut groups: Vec<((u64, u64), Vec<usize>)> = Vec::new();
    for (i, &(n, _, s)) in points.iter().enumerate() {
        let key = (n, s.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(i),
            None => groups.push((key, vec![i])),
        }
    }

    let mut probs = vec![0.0f64; points.len()];
    let mut cis = vec![0.0f64; points.len()];
    for (gi, ((n, sbits), idxs)) in groups.iter().enumerate() {
        let s = f64::from_bits(*sbits);
        let windows: Vec<(usize, f64)> = idxs.iter().map(|&i| (i, points[i].1)).collect();
        let xmax = windows.iter().map(|&(_, x)| x).fold(0.0f64, f64::max) + h;
        let mut hits = vec![0u64; windows.len()];
        let mut sampler = dist.steps(seed, gi as u64);
        for _ in 0..samples_per_point {
            let mut sum = 0.0;
            let mut alive = true;
            for _ in 0..*n {
                let v = sampler.next_step();
                if v > s {
                    alive = false;
                    break;
                }
                sum += v;
                if nonneg && sum >= xmax {
                    alive = false;
                    break;
                }
            }
            if alive {
                for (wi, &(_, x)) in windows.iter().enumerate() {
                    if sum >= x && sum < x + h {
                        hits[wi] += 1;
                    }
                }
            }
        }
        let m = samples_per_point as f64;
        for (wi, &(i, _)) in windows.iter().enumerate() {
            let p = hits[wi] as f64 / m;
            probs[i] = p;
            cis[i] = if hits[wi] == 0 { 3.0 / m } else { 1.96 * (p * (1.0 - p) / m).sqrt() };
        }
    }

    // calibration split: within each n, alternate over x-sorted points
    let mut calibration_mask = vec![false; points.len()];
    let mut ns: Vec<u64> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        let mut idxs: Vec<usize> =
            (0..points.len()).filter(|&i| points[i].0 == n).collect();
        idxs.sort_by(|&a, &b| points[a].1.total_cmp(&points[b].1));
        for (rank, &i) in idxs.iter().enumerate() {
            calibration_mask[i] = rank % 2 == 0;
        }
    }

    let (_, rv) = dist.heavy_tail()?;
    // bound skeleton per point: (1/s + 1/a_n)e^{-x/s}, and the e^{n/R(s)}
    // growth rate thatC multiplies
    let mut base = vec![0.0f64; points.len()];
    let mut rate = vec![0.0f64; points.len()];
    for (i, &(n, x, s)) in points.iter().enumerate() {
        let a = rv.norming(n)?;
        base[i] = (1.0 / s + 1.0 / a) * (-x / s).exp();
        rate[i] = n as f64 / rv.eval(s)?;
    }

    let steps = (C_EXP_GRID_MAX / C_EXP_GRID_STEP).round() as usize;
    let mut best = (f64::INFINITY, 0.0f64);
    for ci in 0..=steps {
        let c = ci as f64 * C_EXP_GRID_STEP;
        let mut req: f64 = 0.0;
        for i in 0..points.len() {
            if calibration_mask[i] && probs[i] > 0.0 {
                req = req.max(probs[i] / (base[i] * (c * rate[i]).exp()));
            }
        }
        if req < best.0 {
            best = (req, c);
        }
    }
    let constants =
        FittedConstants { c_exp: best.1, c_pre: (FIT_SAFETY * best.0).max(1e-12) };

    let mut out = Vec::with_capacity(points.len());
    let mut violations = 0usize;
    for (i, &(n, x, s)) in points.iter().enumerate() {
        let bound = constants.c_pre * base[i] * (constants.c_exp * rate[i]).exp();
        if !calibration_mask[i] && probs[i] - cis[i] > bound {
            violations += 1;
        }
        out.push(PointEstimate {
            n,
            x,
            s,
            prob: probs[i],
            ci: cis[i],
            bound,
            calibration: calibration_mask[i],
        });
    }
    let smallest_uniform_n = ns
        .iter()
        .enumerate()
        .find(|&(k, _)| {
            out.iter().all(|p| {
                p.calibration || p.n < ns[k] || p.prob - p.ci <= p.bound
            })
        })
        .map(|(_, &n)| n);
    Ok(Lemma32Report {
        constants,
        points: out,
        holds: violations == 0,
        violations,
        smallest_uniform_n,
        samples_per_point,
        window: h,
    })
}

/// n-fold convolution power of a cell vector, truncated to `keep` cells.
/// Dropping high cells is exact for nonnegative support: mass out there can
/// never come back. Tiny FFT residue is swept to zero.
fn pmf_power(pmf: &[f64], n: u64, keep: usize) -> Vec<f64> {
    assert!(n >= 1 && !pmf.is_empty());
    let mut planner = FftPlanner::<f64>::new();
    let conv = |a: &[f64], b: &[f64], planner: &mut FftPlanner<f64>| -> Vec<f64> {
        let full = a.len() + b.len() - 1;
        let out_len = full.min(keep);
        let m = full.next_power_of_two();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        let mut fa: Vec<Complex64> = Vec::with_capacity(m);
        fa.extend(a.iter().map(|&v| Complex64::new(v, 0.0)));
        fa.resize(m, Complex64::new(0.0, 0.0));
        let mut fb: Vec<Complex64> = Vec::with_capacity(m);
        fb.extend(b.iter().map(|&v| Complex64::new(v, 0.0)));
        fb.resize(m, Complex64::new(0.0, 0.0));
        fft.process(&mut fa);
        fft.process(&mut fb);
        for (za, zb) in fa.iter_mut().zip(&fb) {
            *za *= zb;
        }
        ifft.process(&mut fa);
        let scale = 1.0 / m as f64;
        fa.iter()
            .take(out_len)
            .map(|z| {
                let v = z.re * scale;
                if v < 1e-15 {
                    0.0
                } else {
                    v
                }
            })
            .collect()
    };
    let mut acc: Option<Vec<f64>> = None;
    let mut sq = pmf.to_vec();
    let mut rem = n;
    loop {
        if rem & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => conv(&a, &sq, &mut planner),
            });
        }
        rem >>= 1;
        if rem == 0 {
            break;
        }
        sq = conv(&sq, &sq, &mut planner);
    }
    acc.expect("n >= 1")
}

/// Masses of the step law on cells 0..=kcap with everything above s removed
/// (the defective step of a capped walk), plus the span.
fn capped_cells(dist: &StepDistribution, s: f64) -> Result<(Vec<f64>, f64)> {
    let d = dist
        .lattice_span()
        .ok_or_else(|| Error::config("exact capped windows need a lattice law on d·Z"))?;
    let kcap = (s / d * (1.0 + 1e-12)).floor() as usize;
    if kcap == 0 {
        return Err(Error::domain("cap s lies below the first lattice site"));
    }
    Ok((dist.lattice_masses(kcap)?, d))
}

/// P{S_n ∈ [x, x+h), M_n ≤ s} for a nonnegative lattice law, exact via FFT
/// powers of the capped step masses.
pub fn exact_capped_window(
    dist: &StepDistribution,
    n: u64,
    x: f64,
    h: f64,
    s: f64,
) -> Result<f64> {
    if n == 0 || !(h > 0.0) || !(x >= 0.0) {
        return Err(Error::config("exact window needs n >= 1, x >= 0, h > 0"));
    }
    let (cells, d) = capped_cells(dist, s)?;
    let k_lo = ((x - d * 1e-9) / d).ceil().max(0.0) as usize;
    let k_hi = (((x + h) - d * 1e-9) / d).ceil().max(0.0) as usize;
    if k_hi <= k_lo {
        return Ok(0.0);
    }
    let power = pmf_power(&cells, n, k_hi);
    Ok(power.iter().skip(k_lo).take(k_hi - k_lo).sum())
}

/// sup over t of P{S̃_n ∈ [t, t+d)} for the tilted walk of a lattice law:
/// the largest cell mass of the n-fold tilted convolution.
pub fn tilted_sup_window(dist: &StepDistribution, n: u64, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::config("sup window needs n >= 1"));
    }
    let tl = tilt(dist, s)?;
    let cells = tl.lattice_masses()?.ok_or_else(|| {
        Error::config("tilted sup windows need a lattice law on d·Z")
    })?;
    let keep = cells
        .len()
        .checked_mul(n as usize)
        .ok_or_else(|| Error::config("support too large"))?;
    let power = pmf_power(&cells, n, keep);
    Ok(power.iter().fold(0.0f64, |m, &v| m.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    fn pareto_lattice(alpha: f64) -> StepDistribution {
        StepDistribution::from_family(Family::ParetoLattice { alpha, span: 1.0 }).unwrap()
    }

    fn pareto_cont(alpha: f64, q_f: f64) -> StepDistribution {
        let regvar = crate::regvar::RegVarSpec {
            alpha,
            eps: crate::regvar::EpsKind::Zero,
            base: 0.5,
            scale: 1.0,
        };
        StepDistribution::from_family(Family::TwoSided { alpha, q_f, regvar }).unwrap()
    }

    #[test]
    fn psi_of_point_mass_is_exact() {
        let d = StepDistribution::from_family(Family::PointMass { c: 3.0 }).unwrap();
        let p = psi(&d, 6.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(psi(&d, 2.0).is_err(), "cap below the atom must be a domain error");
    }

    #[test]
    fn tilted_mass_is_unit_and_support_capped() {
        let lat = tilt(&pareto_lattice(0.5), 40.0).unwrap();
        let m = lat.total_mass().unwrap();
        assert!((m - 1.0).abs() < 1e-10, "lattice mass {m}");
        let cells = lat.lattice_masses().unwrap().unwrap();
        assert_eq!(cells.len(), 41);

        let cont = tilt(&pareto_cont(0.5, 0.3), 25.0).unwrap();
        let m = cont.total_mass().unwrap();
        assert!((m - 1.0).abs() < 1e-10, "continuous mass {m}");
        assert!(cont.cdf(1e9).unwrap() <= m + 1e-14, "mass beyond s");
        let lo = cont.cdf(5.0).unwrap();
        assert!(lo > 0.0 && lo < m);
    }

    #[test]
    fn tilted_mean_dominates_conditional_mean() {
        for s in [20.0, 50.0, 200.0] {
            let d = pareto_lattice(0.5);
            let tl = tilt(&d, s).unwrap();
            let cond = d.truncated_moment(1.0, s).unwrap() / (1.0 - d.right_tail(s));
            let mean = tl.mean().unwrap();
            assert!(mean >= cond - 1e-12, "s={s}: tilted {mean} < conditional {cond}");
        }
    }

    #[test]
    fn psi_obeys_karamata_truncated_bound() {
        let d = pareto_cont(0.5, 0.0);
        let (_, rv) = d.heavy_tail().unwrap();
        let mut worst = 0.0f64;
        for e in 1..=5 {
            let s = 10f64.powi(e);
            let p = psi(&d, s).unwrap();
            let trunc = d.truncated_moment(1.0, s).unwrap();
            assert!(p > 0.0);
            assert!(p <= 2.0 * trunc / s, "s={s}: psi {p} > 2E/s {}", 2.0 * trunc / s);
            worst = worst.max(p * rv.eval(s).unwrap());
        }
        // Karamata: ψ·R tends to a constant below 2α/(1−α) = 2
        assert!(worst < 2.5, "psi·R peaked at {worst}");
    }

    #[test]
    fn zeta_cut_domain_and_collapse() {
        let d = pareto_cont(0.5, 0.0);
        let (_, rv) = d.heavy_tail().unwrap();
        assert!(zeta_cut(rv, 100, 1e4, 0.7).is_err(), "below (1+α)/(1+2α)");
        assert!(zeta_cut(rv, 100, 1e4, 1.0).is_err());
        // γ → 1 collapses ζ to x
        let z = zeta_cut(rv, 100, 1e4, 0.999).unwrap();
        assert!(z / 1e4 > 0.99 && z <= 1e4);
        // n ≤ R(δx) keeps the cut below x/2 once δ^{1−γ} < 1/2
        let x = 1e6;
        let delta = 0.002;
        let nmax = rv.eval(delta * x).unwrap().floor() as u64;
        for n in [2, nmax / 2, nmax] {
            let z = zeta_cut(rv, n.max(2), x, ZETA_GAMMA_DEFAULT).unwrap();
            assert!(z < x / 2.0, "n={n}: ζ={z}");
        }
    }

    #[test]
    fn concentration_scale_tracks_norming() {
        for (d, lo, hi) in [
            (pareto_lattice(0.5), 1.0, 4.0),
            (pareto_cont(0.7, 0.0), 1.0, 4.0),
        ] {
            let (_, rv) = d.heavy_tail().unwrap();
            let mut ratios = Vec::new();
            for n in [10u64, 100, 1_000, 10_000] {
                let r = concentration_scale(&d, n).unwrap();
                let a = rv.norming(n).unwrap();
                ratios.push(r / a);
            }
            let (rmin, rmax) = ratios
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
            assert!(rmin >= lo && rmax <= hi, "ratios {ratios:?}");
            assert!(rmax / rmin < 1.3, "r_n/a_n drifts: {ratios:?}");
        }
    }

    #[test]
    fn bound_is_nonincreasing_in_x() {
        let d = pareto_lattice(0.5);
        let fit = FittedConstants { c_exp: 0.5, c_pre: 1.0 };
        let mut last = f64::INFINITY;
        for k in 1..=20 {
            let b = lemma32_bound(&d, 64, 50.0 * k as f64, 300.0, &fit).unwrap();
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn capped_power_obeys_tilted_identity_cellwise() {
        // defective^n and tilted^n are FFT-powered separately; the identity
        // defective_k = tilted_k·e^{−kd/s + nψ} ties them cell by cell
        let d = pareto_lattice(0.5);
        let (n, s) = (16u64, 40.0);
        let p = psi(&d, s).unwrap();
        let (cells, _) = capped_cells(&d, s).unwrap();
        let keep = cells.len() * n as usize;
        let def = pmf_power(&cells, n, keep);
        let tl = tilt(&d, s).unwrap();
        let tilted = pmf_power(&tl.lattice_masses().unwrap().unwrap(), n, keep);
        let npsi = n as f64 * p;
        let mut checked = 0usize;
        for (k, (&dv, &tv)) in def.iter().zip(&tilted).enumerate() {
            if tv > 1e-14 && dv > 1e-14 {
                let back = tv * (-(k as f64) / s + npsi).exp();
                // relative agreement down to the FFT noise floor
                assert!(
                    (back - dv).abs() < 1e-10 * dv + 2e-13,
                    "cell {k}: defective {dv:.6e} vs via-tilt {back:.6e}"
                );
                checked += 1;
            }
        }
        assert!(checked > 300, "only {checked} cells carried mass");
        // and the window form of the inequality
        for x in [20.0, 60.0, 120.0] {
            let lhs = exact_capped_window(&d, n, x, 1.0, s).unwrap();
            let window: f64 = {
                let k = x as usize;
                tilted[k.min(tilted.len() - 1)]
            };
            let rhs = (-x / s + npsi).exp() * window;
            assert!(lhs <= rhs * (1.0 + 1e-9), "x={x}: {lhs:.3e} > {rhs:.3e}");
        }
    }

    #[test]
    fn mc_estimates_match_exact_windows() {
        let d = pareto_lattice(0.5);
        let s = 40.0;
        let mut grid = Vec::new();
        for n in [8u64, 32] {
            for x in [60.0, 100.0, 140.0] {
                grid.push((n, x, s));
            }
        }
        let rep = verify_lemma32(&d, &grid, 1_000_000, 17).unwrap();
        for pt in &rep.points {
            let exact = exact_capped_window(&d, pt.n, pt.x, 1.0, pt.s).unwrap();
            assert!(
                (pt.prob - exact).abs() <= 3.0 * pt.ci.max(1e-9),
                "n={} x={}: mc {:.4e} vs exact {:.4e} (ci {:.1e})",
                pt.n,
                pt.x,
                pt.prob,
                exact,
                pt.ci
            );
        }
    }

    #[test]
    fn verify_fits_then_validates_disjointly() {
        let d = pareto_lattice(0.5);
        let grid = default_lemma32_grid(&d, &[32, 64], ZETA_GAMMA_DEFAULT).unwrap();
        let rep = verify_lemma32(&d, &grid, 200_000, 99).unwrap();
        assert!(rep.holds, "violations: {}", rep.violations);
        assert_eq!(rep.smallest_uniform_n, Some(32));
        assert!(rep.constants.c_pre > 0.0);
        let ncal = rep.points.iter().filter(|p| p.calibration).count();
        assert_eq!(ncal, rep.points.len() / 2);
        // reported bounds must be reproducible through the public function
        for pt in &rep.points {
            let b = lemma32_bound(&d, pt.n, pt.x, pt.s, &rep.constants).unwrap();
            assert!((b / pt.bound - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_window_has_zero_mass_but_positive_bound() {
        let d = pareto_lattice(0.5);
        let (n, s) = (16u64, 10.0);
        let x = n as f64 * s + 5.0;
        assert_eq!(exact_capped_window(&d, n, x, 1.0, s).unwrap(), 0.0);
        let rep = verify_lemma32(&d, &[(n, x, s), (n, x / 8.0, s)], 20_000, 3).unwrap();
        let far = rep.points.iter().find(|p| p.x == x).unwrap();
        assert_eq!(far.prob, 0.0);
        assert!(lemma32_bound(&d, n, x, s, &rep.constants).unwrap() > 0.0);
    }

    #[test]
    fn local_limit_constant_is_stable_across_n_ranges() {
        // sup_t P{S̃_n ∈ t+I} against 1/s_n + 1/r_n with s_n = a_n (so
        // R(s_n) = n exactly): the implied constant from a small-n range
        // must match the large-n range
        let d = pareto_lattice(0.7);
        let (_, rv) = d.heavy_tail().unwrap();
        let c_of = |ns: &[u64]| -> f64 {
            ns.iter()
                .map(|&n| {
                    let a = rv.norming(n).unwrap();
                    let r = concentration_scale(&d, n).unwrap();
                    let sup = tilted_sup_window(&d, n, a).unwrap();
                    sup / (1.0 / a + 1.0 / r)
                })
                .fold(0.0f64, f64::max)
        };
        let small = c_of(&[32, 48, 64]);
        let large = c_of(&[256, 384, 512]);
        let ratio = large / small;
        assert!(
            (0.8..=1.25).contains(&ratio),
            "constant drifts: small {small:.4} large {large:.4}"
        );
    }
}
