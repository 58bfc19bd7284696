//! Regularly varying functions in representation form.
//!
//! `RegVarFunction` is R(x) = x^α · exp(∫₁ˣ ε(v) dv/v) for x ≥ 1, with ε
//! drawn from a small catalogue of bounded functions vanishing at infinity,
//! extended to [0,1) by linear interpolation between R(0) = base and
//! R(1) = 1. Everything downstream (norming sequences, tail comparisons,
//! inverse scaling) is phrased in terms of this one type.
//!
//! An optional asymptotic scale A is representable without breaking
//! R(1) = 1: adding ln(A)/v to ε multiplies R by A^{1-1/x}, which tends to
//! A. Families whose tails carry constants (spans, normalizers) use this
//! to keep F̄(x)·R(x) → 1 exact.

use crate::distributions::StepDistribution;
use crate::error::{Error, Result};
use crate::numeric::quad::gl16;
use serde::{Deserialize, Serialize};

/// Catalogue of ε(v) shapes. All are bounded on [1,∞) and tend to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsKind {
    /// ε ≡ 0: pure power R(x) = x^α.
    Zero,
    /// ε(v) = c / ln(e + v): slowly varying correction exp(~c·ln ln x).
    InvLog { c: f64 },
    /// ε(v) = beta / ln(mult·v), mult > 1: ℓ(x) = (ln(mult·x)/ln mult)^beta
    /// in closed form. beta = -1, mult = e² gives the 1/(ln x + 2) shape.
    LogPow { beta: f64, mult: f64 },
    /// ε(v) = c · sin(ln ln(e + v)) / ln(e + v): oscillating slowly varying
    /// factor that never settles; exercises checkers that must not assume
    /// monotone ℓ.
    SinLogLog { c: f64 },
}

impl EpsKind {
    fn eval(&self, v: f64) -> f64 {
        match *self {
            EpsKind::Zero => 0.0,
            EpsKind::InvLog { c } => c / (std::f64::consts::E + v).ln(),
            EpsKind::LogPow { beta, mult } => beta / (mult * v).ln(),
            EpsKind::SinLogLog { c } => {
                let l = (std::f64::consts::E + v).ln();
                c * l.ln().sin() / l
            }
        }
    }
}

/// Serialized form of [`RegVarFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegVarSpec {
    pub alpha: f64,
    pub eps: EpsKind,
    #[serde(default = "default_base")]
    pub base: f64,
    /// Asymptotic multiplicative scale, folded into ε as ln(scale)/v.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_base() -> f64 {
    0.5
}
fn default_scale() -> f64 {
    1.0
}

/// Knot spacing for the cached cumulative integral, in t = ln v.
const KNOT_DT: f64 = 0.5;
/// Cached up to ln x = 45 (x ≈ 3.5e19); larger arguments extend on the fly.
const KNOT_MAX_T: f64 = 45.0;

/// Strictly increasing regularly varying function of index α ∈ (0,1],
/// R(0) = base ∈ (0,1), R(1) = 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RegVarSpec", into = "RegVarSpec")]
pub struct RegVarFunction {
    alpha: f64,
    eps: EpsKind,
    base: f64,
    ln_scale: f64,
    #[serde(skip)]
    knots: Vec<f64>,
}

impl TryFrom<RegVarSpec> for RegVarFunction {
    type Error = Error;
    fn try_from(s: RegVarSpec) -> Result<Self> {
        RegVarFunction::with_scale(s.alpha, s.eps, s.base, s.scale)
    }
}

impl From<RegVarFunction> for RegVarSpec {
    fn from(r: RegVarFunction) -> RegVarSpec {
        RegVarSpec {
            alpha: r.alpha,
            eps: r.eps,
            base: r.base,
            scale: r.ln_scale.exp(),
        }
    }
}

impl RegVarFunction {
    pub fn new(alpha: f64, eps: EpsKind, base: f64) -> Result<Self> {
        Self::with_scale(alpha, eps, base, 1.0)
    }

    /// Pure power x^α with the default base.
    pub fn pure(alpha: f64) -> Result<Self> {
        Self::new(alpha, EpsKind::Zero, default_base())
    }

    pub fn with_scale(alpha: f64, eps: EpsKind, base: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!("regvar alpha must lie in (0,1], got {alpha}")));
        }
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::config(format!(
                "regvar base must lie in (0,1) for strict monotonicity, got {base}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::config(format!("regvar scale must be positive, got {scale}")));
        }
        if let EpsKind::LogPow { mult, .. } = eps {
            if mult <= 1.0 {
                return Err(Error::config(format!("logpow mult must exceed 1, got {mult}")));
            }
        }
        let ln_scale = scale.ln();
        // Monotonicity needs α + ε(v) + ln(scale)/v >= 0 on [1,∞); ε and the
        // scale term decay, so a log grid check is decisive. An isolated zero
        // of the slope (several catalogue members touch it at v = 1) still
        // leaves the function strictly increasing.
        let mut v = 1.0f64;
        while v <= 1e12 {
            let d = alpha + eps.eval(v) + ln_scale / v;
            if d < -1e-12 {
                return Err(Error::config(format!(
                    "regvar not increasing: alpha + eps({v:.3e}) = {d:.3e} < 0"
                )));
            }
            v *= 1.05;
        }
        let mut f = RegVarFunction { alpha, eps, base, ln_scale, knots: Vec::new() };
        f.build_knots();
        Ok(f)
    }

    fn build_knots(&mut self) {
        let n = (KNOT_MAX_T / KNOT_DT).round() as usize;
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        let mut acc = 0.0;
        for j in 0..n {
            let t0 = j as f64 * KNOT_DT;
            let t1 = t0 + KNOT_DT;
            acc += gl16(|t| self.eps.eval(t.exp()), t0, t1);
            knots.push(acc);
        }
        self.knots = knots;
    }

    /// ∫₁ˣ ε(v)/v dv for the catalogue part (scale handled in closed form).
    fn eps_integral(&self, x: f64) -> f64 {
        let t = x.ln();
        let j = ((t / KNOT_DT).floor() as usize).min(self.knots.len() - 1);
        let mut acc = self.knots[j];
        let mut t0 = j as f64 * KNOT_DT;
        // beyond the cache: whole panels first, then the fractional one
        while t - t0 > KNOT_DT {
            acc += gl16(|u| self.eps.eval(u.exp()), t0, t0 + KNOT_DT);
            t0 += KNOT_DT;
        }
        if t > t0 {
            acc += gl16(|u| self.eps.eval(u.exp()), t0, t);
        }
        acc
    }

    /// R(x) on [0, ∞).
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("regvar eval needs x >= 0, got {x}")));
        }
        if x < 1.0 {
            return Ok(self.base + (1.0 - self.base) * x);
        }
        let i = self.eps_integral(x) + self.ln_scale * (1.0 - 1.0 / x);
        Ok((self.alpha * x.ln() + i).exp())
    }

    /// Logarithmic derivative d ln R / d ln x = α + ε(x) for x ≥ 1.
    pub fn log_slope(&self, x: f64) -> f64 {
        self.alpha + self.eps.eval(x) + self.ln_scale / x
    }

    /// R⁻¹(y) for y ≥ R(0). Bracketed bisection with Newton acceleration
    /// inside the bracket; stops at 1e-12 relative width.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= self.base) {
            return Err(Error::domain(format!(
                "regvar inverse needs y >= R(0) = {}, got {y}",
                self.base
            )));
        }
        if y < 1.0 {
            return Ok((y - self.base) / (1.0 - self.base));
        }
        // bracket around the power-law guess
        let mut lo = 1.0f64;
        let mut hi = y.powf(1.0 / self.alpha).max(1.0);
        let mut r_hi = self.eval(hi)?;
        let mut guard = 0;
        while r_hi < y {
            lo = hi;
            hi *= 4.0;
            r_hi = self.eval(hi)?;
            guard += 1;
            if guard > 600 {
                return Err(Error::numeric("regvar inverse bracketing", r_hi, y));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.eval(x)?;
            if r > y {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
            // Newton step on ln R - ln y, kept only inside the bracket
            let step = x * (y.ln() - r.ln()) / self.log_slope(x);
            let xn = x + step;
            x = if xn > lo && xn < hi { xn } else { 0.5 * (lo + hi) };
        }
        Ok(x)
    }

    /// Norming sequence a_n = R⁻¹(n); n = 0 clamps to R⁻¹(1) = 1.
    pub fn norming(&self, n: u64) -> Result<f64> {
        self.inverse((n.max(1)) as f64)
    }

    /// Slowly varying part of the inverse: ℓ̃(y) = R⁻¹(y) / y^{1/α}.
    pub fn ell_tilde(&self, y: f64) -> Result<f64> {
        Ok(self.inverse(y)? / y.powf(1.0 / self.alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn eps(&self) -> &EpsKind {
        &self.eps
    }

    pub fn scale(&self) -> f64 {
        self.ln_scale.exp()
    }
}

/// Truncated moment ∫_{(0,s]} u^p F(du) of a step law, with the Karamata
/// comparison value α s^p / ((p-α) R(s)) exposed alongside. The comparison
/// uses the law's declared R, so the ratio of the two tends to 1 whenever
/// p > α.
pub fn karamata_truncated_moment(dist: &StepDistribution, p: f64, s: f64) -> Result<KaramataMoment> {
    if !(s > 0.0) {
        return Err(Error::domain("karamata_truncated_moment needs s > 0"));
    }
    let (alpha, regvar) = dist.heavy_tail()?;
    if !(p > alpha) {
        return Err(Error::domain(format!(
            "karamata_truncated_moment needs p > alpha = {alpha}, got p = {p}"
        )));
    }
    let value = dist.truncated_moment(p, s)?;
    let r = regvar.eval(s)?;
    let karamata = alpha * s.powf(p) / ((p - alpha) * r);
    Ok(KaramataMoment { value, karamata })
}

#[derive(Clone, Copy, Debug)]
pub struct KaramataMoment {
    /// ∫_{(0,s]} u^p F(du), computed from the law itself.
    pub value: f64,
    /// α s^p / ((p-α) R(s)) from the declared tail.
    pub karamata: f64,
}
