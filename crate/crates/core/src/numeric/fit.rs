//! Regression and tail-index estimation helpers used by the grid-based
//! condition checkers and the ladder harness.

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Ordinary least squares line fit with the slope's standard error.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::domain("line fit needs >= 3 paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("line fit: degenerate abscissas"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let df = xs.len() - 2;
    let slope_se = if df > 0 { (rss / df as f64 / sxx).sqrt() } else { f64::NAN };
    Ok(LineFit { slope, intercept, slope_se, n: xs.len() })
}

/// Fit ln y against ln x, dropping non-positive pairs. Errors if fewer than
/// three usable points remain.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    fit_line(&lx, &ly)
}

/// One-sided 95% check that the fitted slope is negative: slope plus the
/// 95% Student-t quantile times its standard error stays below zero.
pub fn slope_negative_95(fit: &LineFit) -> bool {
    if fit.n < 3 || !fit.slope_se.is_finite() {
        return false;
    }
    let df = (fit.n - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df).expect("valid dof").inverse_cdf(0.95);
    fit.slope + t * fit.slope_se < 0.0
}

/// Two-sided 95% confidence interval for the slope.
pub fn slope_ci95(fit: &LineFit) -> (f64, f64) {
    let df = (fit.n.max(3) - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df).expect("valid dof").inverse_cdf(0.975);
    (fit.slope - t * fit.slope_se, fit.slope + t * fit.slope_se)
}

/// Hill estimator of a right tail index from the k largest observations.
/// Input must be sorted descending; returns the reciprocal mean log-excess.
pub fn hill_index(sorted_desc: &[f64], k: usize) -> Result<f64> {
    if k + 1 > sorted_desc.len() || k < 2 {
        return Err(Error::domain("hill_index needs 2 <= k < n"));
    }
    let xk = sorted_desc[k];
    if xk <= 0.0 {
        return Err(Error::domain("hill_index needs positive order statistics"));
    }
    let mean_log: f64 = sorted_desc[..k].iter().map(|x| (x / xk).ln()).sum::<f64>() / k as f64;
    if mean_log <= 0.0 {
        return Err(Error::domain("hill_index: degenerate tail (ties at the cutoff)"));
    }
    Ok(1.0 / mean_log)
}

/// Pool-adjacent-violators: least-squares projection onto nonincreasing
/// sequences. Used to monotone-smooth empirical survival curves.
pub fn pava_nonincreasing(ys: &[f64]) -> Vec<f64> {
    let n = ys.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    for &y in ys {
        level.push(y);
        weight.push(1.0);
        while level.len() >= 2 {
            let m = level.len();
            if level[m - 2] >= level[m - 1] {
                break;
            }
            let w = weight[m - 2] + weight[m - 1];
            let v = (level[m - 2] * weight[m - 2] + level[m - 1] * weight[m - 1]) / w;
            level.truncate(m - 1);
            weight.truncate(m - 1);
            *level.last_mut().expect("nonempty") = v;
            *weight.last_mut().expect("nonempty") = w;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (v, w) in level.iter().zip(&weight) {
        for _ in 0..(*w as usize) {
            out.push(*v);
        }
    }
    out
}

/// Per-decade maxima of (x, y) points: groups by floor(log10 x) and keeps
/// the max y with the geometric decade center. Spike families alternate
/// between spike and off-spike magnitudes on mixed grids; aggregating to
/// decade maxima is what makes envelope slopes fittable at all.
pub fn decade_maxima(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    use std::collections::BTreeMap;
    let mut by_decade: BTreeMap<i64, f64> = BTreeMap::new();
    for &(x, y) in points {
        if x <= 0.0 || !y.is_finite() {
            continue;
        }
        let d = x.log10().floor() as i64;
        let e = by_decade.entry(d).or_insert(f64::NEG_INFINITY);
        if y > *e {
            *e = y;
        }
    }
    by_decade
        .into_iter()
        .map(|(d, m)| (10f64.powf(d as f64 + 0.5), m))
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 8 || b.len() < 8 {
        return Err(Error::domain("ks_two_sample needs >= 8 points per sample"));
    }
    let mut sa: Vec<f64> = a.to_vec();
    let mut sb: Vec<f64> = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let t = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= t {
            i += 1;
        }
        while j < sb.len() && sb[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok((d, kolmogorov_p((ne + 0.12 + 0.11 / ne) * d)))
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p against a given
/// CDF. The CDF must be the continuous null law, not fitted to the data.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<(f64, f64)> {
    if xs.len() < 8 {
        return Err(Error::domain("ks_one_sample needs >= 8 points"));
    }
    let mut s: Vec<f64> = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    let ne = n.sqrt();
    Ok((d, kolmogorov_p((ne + 0.12 + 0.11 / ne) * d)))
}

/// P{K > λ} for the Kolmogorov law.
fn kolmogorov_p(lambda: f64) -> f64 {
    // the alternating series only converges for λ away from 0; below that
    // use the dual theta expansion (p → 1 as λ → 0)
    let p = if lambda < 1e-3 {
        1.0
    } else if lambda < 0.18 {
        let mut s = 0.0;
        for k in 1..=20u32 {
            let m = (2 * k - 1) as f64;
            s += (-m * m * std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let mut acc = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = 2.0 * (-1.0f64).powi(k + 1) * (-2.0 * kf * kf * lambda * lambda).exp();
            acc += term;
            if term.abs() < 1e-12 {
                break;
            }
        }
        acc
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-10);
    }

    #[test]
    fn loglog_fit_recovers_power_exponent() {
        let xs: Vec<f64> = (1..50).map(|i| 1.5f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x.powf(-0.7)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-10);
        assert!(slope_negative_95(&f));
    }

    #[test]
    fn hill_matches_pareto_tail() {
        // deterministic Pareto quantiles: x_i = u_i^{-1/α}, α = 0.5
        let n = 20_000;
        let mut xs: Vec<f64> = (1..n)
            .map(|i| ((i as f64 - 0.5) / n as f64).powf(-2.0))
            .collect();
        xs.sort_by(|p, q| q.total_cmp(p));
        let alpha = hill_index(&xs, 500).unwrap();
        assert!((alpha - 0.5).abs() < 0.02, "hill {alpha}");
    }

    #[test]
    fn pava_projects_onto_nonincreasing() {
        let y = [5.0, 3.0, 4.0, 1.0, 2.0];
        let z = pava_nonincreasing(&y);
        assert_eq!(z.len(), y.len());
        for w in z.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // projection preserves the total (equal weights)
        let sy: f64 = y.iter().sum();
        let sz: f64 = z.iter().sum();
        assert!((sy - sz).abs() < 1e-12);
    }

    #[test]
    fn ks_separates_shifted_samples() {
        let a: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let b: Vec<f64> = (0..200).map(|i| i as f64 / 200.0 + 0.5).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert!(d > 0.4);
        assert!(p < 1e-6);
        let (d2, p2) = ks_two_sample(&a, &a).unwrap();
        assert!(d2 < 1e-12);
        assert!(p2 > 0.999);
    }
}
