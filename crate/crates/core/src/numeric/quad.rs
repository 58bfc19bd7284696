//! Gauss-Legendre and adaptive Gauss-Kronrod quadrature.
//!
//! The integrands in this crate are piecewise smooth; panels are placed so
//! that kinks and support breakpoints fall on panel boundaries, and each
//! smooth panel is handled by fixed-order rules. The adaptive driver exists
//! for integrands whose scale is not known in advance (stable densities,
//! tilted moments of continuous laws) and reports an error estimate so
//! callers can fail loudly instead of returning garbage.

use crate::error::{Error, Result};

/// 16-point Gauss-Legendre abscissas on [0,1] folded from the symmetric rule.
const GL16_X: [f64; 8] = [
    0.095012509837637440185,
    0.281603550779258913230,
    0.458016777657227386342,
    0.617876244402643748447,
    0.755404408355003033895,
    0.865631202387831743880,
    0.944575023073232576078,
    0.989400934991649932596,
];
const GL16_W: [f64; 8] = [
    0.189450610455068496285,
    0.182603415044923588867,
    0.169156519395002538189,
    0.149595988816576732081,
    0.124628971255533872052,
    0.095158511682492784810,
    0.062253523938647892863,
    0.027152459411754094852,
];

/// Fixed 16-point Gauss-Legendre integral of `f` over [a,b].
pub fn gl16<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        let dx = hw * GL16_X[i];
        acc += GL16_W[i] * (f(c + dx) + f(c - dx));
    }
    acc * hw
}

// Gauss 7 / Kronrod 15 pair.
const K15_X: [f64; 8] = [
    0.0,
    0.207784955007898467601,
    0.405845151377397166907,
    0.586087235467691130295,
    0.741531185599394439864,
    0.864864423359769072790,
    0.949107912342758524526,
    0.991455371120812639207,
];
const K15_W: [f64; 8] = [
    0.209482141084727828013,
    0.204432940075298892414,
    0.190350578064785409913,
    0.169004726639267902827,
    0.140653259715525918745,
    0.104790010322250183840,
    0.063092092629978553291,
    0.022935322010529224964,
];
const G7_W: [f64; 4] = [
    0.417959183673469387755,
    0.381830050505118944950,
    0.279705391489276667901,
    0.129484966168869693271,
];

/// One Gauss-Kronrod panel: returns (K15 value, |K15 - G7| error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let f0 = f(c);
    let mut k = K15_W[0] * f0;
    let mut g = G7_W[0] * f0;
    for i in 1..8 {
        let dx = hw * K15_X[i];
        let s = f(c + dx) + f(c - dx);
        k += K15_W[i] * s;
        if i % 2 == 0 {
            g += G7_W[i / 2] * s;
        }
    }
    (k * hw, (k - g).abs() * hw)
}

/// Adaptive Gauss-Kronrod on [a,b]. Splits the worst panel until the summed
/// error estimate satisfies the tolerance `abs_tol + rel_tol * |integral|`,
/// or fails with the achieved error once `max_panels` is exhausted.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("adaptive quadrature needs finite endpoints"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    // (neg error, a, b, value) — simple worst-first queue.
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    panels.push((e, a, b, v));
    loop {
        let value: f64 = panels.iter().map(|p| p.3).sum();
        let error: f64 = panels.iter().map(|p| p.0).sum();
        let tol = abs_tol + rel_tol * value.abs();
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= max_panels {
            return Err(Error::numeric("adaptive quadrature", error, tol));
        }
        // split worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("nonempty");
        let (_, pa, pb, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integral of an (eventually) decaying integrand over [a, ∞), a > 0, by
/// geometrically growing panels [a, qa], [qa, q²a], … Each panel uses GL16;
/// the run stops when `consecutive_small` successive panels contribute less
/// than `rel_tol` of the running total. Suited to regularly varying tails
/// where successive panel contributions shrink by a fixed factor; the error
/// estimate extrapolates the trailing geometric decay.
pub fn integrate_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if a <= 0.0 {
        return Err(Error::domain("tail integration needs a > 0"));
    }
    let q = 2.0f64;
    let mut lo = a;
    let mut total = 0.0;
    let mut last: f64 = f64::INFINITY;
    let mut small_streak = 0;
    for i in 0..max_panels {
        let hi = lo * q;
        let p = gl16(&mut f, lo, hi);
        total += p;
        // ratio of successive panel contributions, for the geometric tail bound
        let ratio = if last.abs() > 0.0 { (p / last).abs() } else { 0.0 };
        if p.abs() <= rel_tol * total.abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 3 {
                let r = ratio.min(0.999);
                let tail_bound = p.abs() * r / (1.0 - r);
                return Ok(Estimate { value: total, error: tail_bound + rel_tol * total.abs() });
            }
        } else {
            small_streak = 0;
        }
        last = p;
        lo = hi;
        if i + 1 == max_panels {
            let achieved = (p / total.max(f64::MIN_POSITIVE)).abs();
            return Err(Error::numeric("tail integration", achieved, rel_tol));
        }
    }
    unreachable!()
}
