//! Stable limit of a centered heavy-tailed walk: characteristic exponent,
//! positivity parameter, density, and the interval-renewal constant.
//!
//! A step law with right tail ~ 1/R(x) and left tail ~ q/R(x), R regularly
//! varying of index α ∈ (0,1), has partial sums S_n/a_n converging to the law
//! with E e^{iθY} = exp(−(b + i c̃) θ^α) for θ > 0, where
//!   b = Γ(1−α)(1+q)cos(πα/2),   c̃ = Γ(1−α)(q−1)sin(πα/2).
//! Everything here is parametrized by (α, q).

use std::f64::consts::PI;

use crate::numeric::quad::{adaptive, gl16};
use crate::numeric::Kahan;
use statrs::function::gamma::{gamma, ln_gamma};
use crate::{Error, Result};

/// e^{−bθ^α} below e^{−DECAY_CUTOFF} is treated as zero.
const DECAY_CUTOFF: f64 = 45.0;
/// Fourier inversion is used while x·θ_max/2π stays under this; past it the
/// power series in x^{−α} has long since converged.
const OSC_LIMIT: f64 = 3000.0;
const SERIES_MAX_TERMS: usize = 1200;

/// Two-sided α-stable law in the tail-weight parametrization: weight p on the
/// right tail, q on the left. Walk limits use p = 1.
#[derive(Clone, Debug)]
pub struct StableLimit {
    alpha: f64,
    p: f64,
    q: f64,
    b: f64,
    c_tilde: f64,
    r: f64,
    /// Series phase: π + arg(b + i c̃) − πα/2.
    phi: f64,
    theta_max: f64,
}

impl StableLimit {
    /// Limit law of S_n/a_n for steps whose left tail is q_f times the right.
    pub fn new(alpha: f64, q_f: f64) -> Result<Self> {
        Self::weighted(alpha, 1.0, q_f)
    }

    fn weighted(alpha: f64, p: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config("stable index must lie in (0,1)"));
        }
        if !(p.is_finite() && q.is_finite() && p >= 0.0 && q >= 0.0 && p + q > 0.0) {
            return Err(Error::config(
                "tail weights must be nonnegative and not both zero",
            ));
        }
        let gam = gamma(1.0 - alpha);
        let half = PI * alpha / 2.0;
        let b = gam * (p + q) * half.cos();
        let c_tilde = gam * (q - p) * half.sin();
        let r = b.hypot(c_tilde);
        let phi = PI + c_tilde.atan2(b) - half;
        let theta_max = (DECAY_CUTOFF / b).powf(1.0 / alpha);
        Ok(StableLimit { alpha, p, q, b, c_tilde, r, phi, theta_max })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficients of the exponent: E e^{iθY} = exp(−(b + i c̃)θ^α), θ > 0.
    pub fn cf_coefficients(&self) -> (f64, f64) {
        (self.b, self.c_tilde)
    }

    /// ρ = P{Y > 0}. Equals 1 for q = 0 and 1/2 for q = 1.
    pub fn positivity(&self) -> f64 {
        let skew = (self.p - self.q) / (self.p + self.q);
        0.5 + (skew * (PI * self.alpha / 2.0).tan()).atan() / (PI * self.alpha)
    }

    /// The law of −Y: tail weights swapped.
    fn mirrored(&self) -> StableLimit {
        StableLimit::weighted(self.alpha, self.q, self.p).expect("mirror of a valid law")
    }

    /// Density at x. Fourier inversion while the integrand's oscillation
    /// count is moderate, the convergent power series in x^{−α} beyond.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain("density needs finite x"));
        }
        if x < 0.0 {
            return self.mirrored().density(-x);
        }
        if x * self.theta_max <= OSC_LIMIT * 2.0 * PI {
            self.density_fourier(x)
        } else {
            self.density_series(x)
        }
    }

    /// (1/π)∫₀^{θ_max} e^{−bθ^α} cos(xθ + c̃θ^α) dθ. The head is handled by
    /// adaptive quadrature (the θ^α slope is singular at 0); past it, panels
    /// sized to one phase cycle and at most an e-fold of amplitude feed GL16.
    fn density_fourier(&self, x: f64) -> Result<f64> {
        let a = self.alpha;
        let (b, c) = (self.b, self.c_tilde);
        let f = |t: f64| (-b * t.powf(a)).exp() * (x * t + c * t.powf(a)).cos();
        let mut t0 = self.theta_max.min((PI / (4.0 * (b + c.abs()))).powf(1.0 / a));
        if x > 0.0 {
            t0 = t0.min(PI / (2.0 * x));
        }
        let head = adaptive(f, 0.0, t0, 1e-12, 1e-16, 4000)?.value;
        // Panel cap from local phase rate, phase curvature (the phase can be
        // stationary when c̃ < 0), and amplitude decay.
        let step = |t: f64| -> f64 {
            let dphase = (x + a * c * t.powf(a - 1.0)).abs();
            let curv = (a * (a - 1.0) * c * t.powf(a - 2.0)).abs();
            let damp = a * b * t.powf(a - 1.0);
            (2.0 * PI / (dphase + 1e-300))
                .min((4.0 * PI / (curv + 1e-300)).sqrt())
                .min(1.0 / damp)
                .min(t)
        };
        let mut sum = Kahan::new();
        let mut t = t0;
        let mut panels = 0usize;
        while t < self.theta_max {
            let probe = step(t);
            let h = 0.8 * probe.min(step((t + probe).min(self.theta_max)));
            let upper = (t + h).min(self.theta_max);
            if upper <= t {
                return Err(Error::numeric("stable density panel underflow", t, 0.0));
            }
            sum.add(gl16(f, t, upper));
            t = upper;
            panels += 1;
            if panels > 200_000 {
                return Err(Error::numeric(
                    "stable density inversion panel budget",
                    f64::NAN,
                    0.0,
                ));
            }
        }
        Ok((head + sum.value()) / PI)
    }

    /// (1/πx) Σ_{k≥1} Γ(αk+1)/k! · (r x^{−α})^k · sin(kφ). Converges for all
    /// x > 0 when α < 1; used once r x^{−α} is small enough that the largest
    /// term causes no cancellation.
    fn density_series(&self, x: f64) -> Result<f64> {
        let a = self.alpha;
        let ln_w = self.r.ln() - a * x.ln();
        let mut sum = Kahan::new();
        let mut small = 0usize;
        for k in 1..=SERIES_MAX_TERMS {
            let kf = k as f64;
            let mag = (ln_gamma(a * kf + 1.0) - ln_gamma(kf + 1.0) + kf * ln_w).exp();
            sum.add(mag * (kf * self.phi).sin());
            if mag <= 1e-17 * sum.value().abs().max(1e-300) {
                small += 1;
                if small >= 3 && k >= 8 {
                    return Ok(sum.value() / (PI * x));
                }
            } else {
                small = 0;
            }
        }
        Err(Error::numeric("stable density series", f64::NAN, 1e-17))
    }

    /// Λ = α ∫₀^∞ x^{−α} g(x) dx, the constant such that interval renewal
    /// masses satisfy U(x + (0,h]) ~ hΛ / (x F̄(x)). One-sided laws (q = 0)
    /// give sin(πα)/π.
    pub fn lambda(&self) -> Result<f64> {
        let a = self.alpha;
        // x = u^{1/(1−α)} flattens the x^{−α} endpoint singularity on (0,1].
        let pow = 1.0 / (1.0 - a);
        let head = adaptive(
            |u: f64| self.density(u.powf(pow)).unwrap_or(f64::NAN),
            0.0,
            1.0,
            1e-9,
            1e-13,
            3000,
        )?
        .value
            * pow;
        let cut = 4.0f64.max((2.0 * self.r).powf(1.0 / a));
        let mid = adaptive(
            |x: f64| x.powf(-a) * self.density(x).unwrap_or(f64::NAN),
            1.0,
            cut,
            1e-9,
            1e-13,
            4000,
        )?
        .value;
        let tail = self.series_tail_moment(a, cut)?;
        Ok(a * (head + mid + tail))
    }

    /// ∫_cut^∞ x^{−γ} g(x) dx by termwise integration of the density series.
    fn series_tail_moment(&self, power: f64, cut: f64) -> Result<f64> {
        let a = self.alpha;
        let ln_w = self.r.ln() - a * cut.ln();
        let lead = -power * cut.ln();
        let mut sum = Kahan::new();
        let mut small = 0usize;
        for k in 1..=SERIES_MAX_TERMS {
            let kf = k as f64;
            let mag = (ln_gamma(a * kf + 1.0) - ln_gamma(kf + 1.0) + kf * ln_w + lead)
                .exp()
                / (a * kf + power);
            sum.add(mag * (kf * self.phi).sin());
            if mag <= 1e-17 * sum.value().abs().max(1e-300) {
                small += 1;
                if small >= 3 && k >= 8 {
                    return Ok(sum.value() / PI);
                }
            } else {
                small = 0;
            }
        }
        Err(Error::numeric("stable tail series", f64::NAN, 1e-17))
    }
}
