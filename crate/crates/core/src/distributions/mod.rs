//! Step-law catalogue for heavy-tailed random walks.
//!
//! Every law exposes exact tails (no sampling involved), an inverse-CDF
//! sampler driven by explicit uniforms so walks are reproducible across
//! platforms, truncated moments for Karamata-style checks, and a symbolic
//! support description for lattice classification.

mod lattice;
mod section1;
pub mod support;
mod two_sided;
mod williamson;

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regvar::{RegVarFunction, RegVarSpec};
pub use support::{classify, Irrational, LatticeClass, SupportDesc, SymbolicReal};

/// One step law. Tails are exact analytic expressions; `quantile` inverts the
/// CDF so sampling is a pure function of a uniform in (0,1).
pub trait Law: Send + Sync + std::fmt::Debug {
    /// P{X > x} for any real x.
    fn right_tail(&self, x: f64) -> f64;

    /// P{X < -x} for x ≥ 0.
    fn left_tail(&self, x: f64) -> f64;

    /// P{x < X ≤ x + h}, h > 0.
    fn interval_prob(&self, x: f64, h: f64) -> f64 {
        (self.right_tail(x) - self.right_tail(x + h)).max(0.0)
    }

    /// Smallest x with P{X ≤ x} ≥ u, for u ∈ (0,1).
    fn quantile(&self, u: f64) -> f64;

    /// Lattice span d when the support lies in d·Z (offset 0), else None.
    fn lattice_span(&self) -> Option<f64> {
        None
    }

    /// Masses at 0, d, 2d, ..., kmax·d for lattice laws on d·Z.
    fn lattice_masses(&self, _kmax: usize) -> Option<Vec<f64>> {
        None
    }

    /// Breakpoints of the density/mass structure inside [lo, hi], used by
    /// sweep code to place grid points; empty when the tail is smooth there.
    fn density_knots(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// ∫ over (0, s] of u^p dF.
    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64>;

    /// ∫ over [-s, s] of |u|^p dF. Defaults to the positive part, which is
    /// exact for laws with no mass below zero.
    fn trunc_abs_moment(&self, p: f64, s: f64) -> Result<f64> {
        self.trunc_power_moment(p, s)
    }

    /// E[exp(X/s); X ≤ s].
    fn tilt_moment(&self, s: f64) -> Result<f64>;

    /// Mean when finite.
    fn mean(&self) -> Option<f64> {
        None
    }
}

/// Serializable family specification. This is the external interface: every
/// distribution a run accepts is one of these, so configs hash canonically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// P{X ≥ k·span} = k^{-alpha} on {span, 2·span, ...}.
    ParetoLattice {
        alpha: f64,
        #[serde(default = "default_span")]
        span: f64,
    },
    /// Integer law with P{X=1} = 1/2 and, for n ≥ 2, masses proportional to
    /// n^{-3/2} ln n off powers of two and n^{-1/2} (ln n)^{-q} at n = 2^k.
    Williamson { q: f64 },
    /// Continuous density c·h(x) with h = n^{-alpha-1} on [n, n+1) and an
    /// extra factor k on [2^k, 2^k + 1).
    Section1 {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Two-sided continuous law with P{X > x} = 1/R(x+m) and
    /// P{X < -x} = q_f/R(x+m), m = R^{-1}(1 + q_f).
    TwoSided {
        alpha: f64,
        q_f: f64,
        regvar: RegVarSpec,
    },
    /// Pareto lattice plus mass spikes n^{kappa-1-alpha} at n = 2^j, j ≥ 4,
    /// giving interval-probability bumps of order x^kappa.
    SpikedPareto { alpha: f64, kappa: f64 },
    /// P{X = k} = p(1-p)^{k-1} on {1, 2, ...}; finite-mean contrast case.
    Geometric { p: f64 },
    /// Deterministic step of size c > 0.
    PointMass { c: f64 },
}

fn default_span() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    0.4
}

/// A fully constructed step distribution: the law plus its declared tail
/// structure (index, slowly varying scale, tail balance) and support.
#[derive(Clone)]
pub struct StepDistribution {
    family: Family,
    law: Arc<dyn Law>,
    heavy: Option<HeavyTail>,
    q_f: f64,
    p_plus: f64,
    support: SupportDesc,
    drifts_up: bool,
}

#[derive(Clone)]
struct HeavyTail {
    alpha: f64,
    regvar: Arc<RegVarFunction>,
}

impl std::fmt::Debug for StepDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepDistribution")
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

impl StepDistribution {
    pub fn from_family(family: Family) -> Result<Self> {
        match &family {
            Family::ParetoLattice { alpha, span } => {
                lattice::build_pareto(family.clone(), *alpha, *span)
            }
            Family::Williamson { q } => williamson::build(family.clone(), *q),
            Family::Section1 { alpha } => section1::build(family.clone(), *alpha),
            Family::TwoSided { alpha, q_f, regvar } => {
                two_sided::build(family.clone(), *alpha, *q_f, regvar.clone())
            }
            Family::SpikedPareto { alpha, kappa } => {
                lattice::build_spiked(family.clone(), *alpha, *kappa)
            }
            Family::Geometric { p } => lattice::build_geometric(family.clone(), *p),
            Family::PointMass { c } => lattice::build_point_mass(family.clone(), *c),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let family: Family =
            serde_json::from_str(text).map_err(|e| Error::config(format!("bad family spec: {e}")))?;
        Self::from_family(family)
    }

    /// Canonical JSON of the family spec; cache keys hash this.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.family).expect("family serializes")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn law(&self) -> &dyn Law {
        self.law.as_ref()
    }

    /// Declared tail index, when the right tail is regularly varying with
    /// index -alpha, alpha ∈ (0,1).
    pub fn alpha(&self) -> Option<f64> {
        self.heavy.as_ref().map(|h| h.alpha)
    }

    /// Declared R with bar F(x)·R(x) → 1; errors for finite-mean laws.
    pub fn heavy_tail(&self) -> Result<(f64, &RegVarFunction)> {
        self.heavy
            .as_ref()
            .map(|h| (h.alpha, h.regvar.as_ref()))
            .ok_or_else(|| Error::domain("law has no declared heavy right tail"))
    }

    pub fn regvar(&self) -> Result<&RegVarFunction> {
        Ok(self.heavy_tail()?.1)
    }

    /// Left/right tail balance q with P{X < -x}/P{X > x} → q.
    pub fn q_f(&self) -> f64 {
        self.q_f
    }

    /// P{X > 0}.
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Whether S_n → +∞ a.s. (declared, not estimated).
    pub fn drifts_up(&self) -> bool {
        self.drifts_up
    }

    pub fn support(&self) -> &SupportDesc {
        &self.support
    }

    pub fn classify(&self) -> LatticeClass {
        classify(&self.support)
    }

    pub fn right_tail(&self, x: f64) -> f64 {
        self.law.right_tail(x)
    }

    pub fn left_tail(&self, x: f64) -> f64 {
        self.law.left_tail(x)
    }

    pub fn interval_prob(&self, x: f64, h: f64) -> f64 {
        self.law.interval_prob(x, h)
    }

    pub fn mean(&self) -> Option<f64> {
        self.law.mean()
    }

    /// ∫ over (0, s] of u^p dF.
    pub fn truncated_moment(&self, p: f64, s: f64) -> Result<f64> {
        self.law.trunc_power_moment(p, s)
    }

    /// ∫ over [-s, s] of |u|^p dF.
    pub fn truncated_abs_moment(&self, p: f64, s: f64) -> Result<f64> {
        self.law.trunc_abs_moment(p, s)
    }

    /// E[exp(X/s); X ≤ s].
    pub fn tilt_moment(&self, s: f64) -> Result<f64> {
        self.law.tilt_moment(s)
    }

    pub fn lattice_span(&self) -> Option<f64> {
        self.law.lattice_span()
    }

    /// Mass vector on {0, d, ..., kmax·d} for lattice laws.
    pub fn lattice_masses(&self, kmax: usize) -> Result<Vec<f64>> {
        self.law
            .lattice_masses(kmax)
            .ok_or_else(|| Error::domain("law is not lattice-supported"))
    }

    pub fn density_knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.law.density_knots(lo, hi)
    }

    /// Deterministic step stream; (seed, stream) fully determine the output.
    pub fn steps(&self, seed: u64, stream: u64) -> StepSampler {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        StepSampler { rng, law: Arc::clone(&self.law) }
    }
}

/// Borrowable builder used by family modules.
pub(crate) fn assemble(
    family: Family,
    law: Arc<dyn Law>,
    heavy: Option<(f64, RegVarFunction)>,
    q_f: f64,
    p_plus: f64,
    support: SupportDesc,
) -> StepDistribution {
    StepDistribution {
        family,
        law,
        heavy: heavy.map(|(alpha, r)| HeavyTail { alpha, regvar: Arc::new(r) }),
        q_f,
        p_plus,
        support,
        drifts_up: q_f == 0.0,
    }
}

/// Streaming sampler over one (seed, stream) lane.
pub struct StepSampler {
    rng: ChaCha8Rng,
    law: Arc<dyn Law>,
}

impl StepSampler {
    pub fn next_step(&mut self) -> f64 {
        self.law.quantile(unit_open(&mut self.rng))
    }
}

/// Uniform in the open interval (0,1): 53-bit mantissa centered off zero so
/// inverse-CDF maps never see 0 or 1.
pub(crate) fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    (((rng.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
}

/// A simulated walk prefix S_1, ..., S_n.
pub struct WalkSample {
    pub sums: Vec<f64>,
    pub max_step: f64,
}

pub fn sample_walk(dist: &StepDistribution, n: usize, seed: u64) -> WalkSample {
    let mut s = dist.steps(seed, 0);
    let mut sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut max_step = f64::NEG_INFINITY;
    for _ in 0..n {
        let x = s.next_step();
        acc += x;
        max_step = max_step.max(x);
        sums.push(acc);
    }
    WalkSample { sums, max_step }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_specs_round_trip_json() {
        let specs = [
            r#"{"family":"pareto_lattice","alpha":0.4}"#,
            r#"{"family":"williamson","q":2.0}"#,
            r#"{"family":"section1","alpha":0.5}"#,
            r#"{"family":"spiked_pareto","alpha":0.4,"kappa":0.3}"#,
            r#"{"family":"geometric","p":0.25}"#,
            r#"{"family":"point_mass","c":2.0}"#,
        ];
        for s in specs {
            let d = StepDistribution::from_json(s).unwrap();
            let again = StepDistribution::from_json(&d.canonical_json()).unwrap();
            assert_eq!(d.family(), again.family(), "{s}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = StepDistribution::from_json(r#"{"family":"geometric","p":0.5,"alpha":0.4}"#);
        assert!(err.is_err());
    }

    #[test]
    fn walks_are_reproducible_and_streams_differ() {
        let d = StepDistribution::from_json(r#"{"family":"pareto_lattice","alpha":0.4}"#).unwrap();
        let a = sample_walk(&d, 64, 7);
        let b = sample_walk(&d, 64, 7);
        assert_eq!(a.sums, b.sums);
        let mut s1 = d.steps(7, 1);
        let first_other: Vec<f64> = (0..8).map(|_| s1.next_step()).collect();
        assert_ne!(&a.sums[..8], &first_other[..]);
    }

    #[test]
    fn unit_open_stays_inside_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let u = unit_open(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
