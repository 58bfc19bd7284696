//! Continuous step law with a piecewise-constant density on integer cells:
//! height c·n^{-alpha-1} on [n, n+1), boosted by the factor k on the cells
//! starting at n = 2^k. The boosted cells make interval probabilities along
//! [2^k, 2^k + 1) of order ln x relative to the smooth level while the tail
//! stays ~ (c/alpha) x^{-alpha}.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::quad::adaptive;
use crate::numeric::sums::zeta_tail;
use crate::numeric::Kahan;
use crate::regvar::{EpsKind, RegVarFunction};

use super::{assemble, Family, Law, StepDistribution, SupportDesc};

/// Integer tails tabulated up to here (the sigma sweeps in the acceptance
/// grid stay inside); beyond, zeta-based closed forms.
const TABLE_N: usize = 1 << 21;
/// Cell sums switch from the direct loop to an integral past this point.
const DIRECT_CAP: f64 = 2.0e7;

#[derive(Debug)]
struct Section1 {
    alpha: f64,
    c: f64,
    /// tail[n] = P{X > n} for n = 0..=TABLE_N.
    tail: Vec<f64>,
}

pub(super) fn build(family: Family, alpha: f64) -> Result<StepDistribution> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("section1 alpha must lie in (0,1), got {alpha}")));
    }
    // 1/c = zeta(alpha+1) - Σ z^k + Σ k z^k, z = 2^{-(alpha+1)}
    let z = 2.0f64.powf(-(alpha + 1.0));
    let inv_c = zeta_tail(alpha + 1.0, 1)? - z / (1.0 - z) + z / ((1.0 - z) * (1.0 - z));
    let c = 1.0 / inv_c;
    let mut law = Section1 { alpha, c, tail: Vec::new() };
    law.build_table()?;
    let regvar = RegVarFunction::with_scale(alpha, EpsKind::Zero, 0.5, alpha / c)?;
    Ok(assemble(
        family,
        Arc::new(law),
        Some((alpha, regvar)),
        0.0,
        1.0,
        SupportDesc::Continuous,
    ))
}

fn is_pow2(n: u64) -> bool {
    n >= 2 && n & (n - 1) == 0
}

/// Smallest k ≥ 1 with 2^k ≥ m.
fn first_spike_at_or_above(m: f64) -> i32 {
    if m <= 2.0 {
        return 1;
    }
    let mut k = m.log2().ceil() as i32;
    while 2.0f64.powi(k) >= m && k > 1 {
        k -= 1;
    }
    while 2.0f64.powi(k) < m {
        k += 1;
    }
    k
}

impl Section1 {
    /// Density height on the cell [n, n+1), without the normalizer c.
    fn height(&self, n: u64) -> f64 {
        let base = (n as f64).powf(-self.alpha - 1.0);
        if is_pow2(n) {
            n.ilog2() as f64 * base
        } else {
            base
        }
    }

    /// P{X > n} for integers n past the table, via zeta tails.
    fn analytic_tail(&self, n: f64) -> Result<f64> {
        let z = 2.0f64.powf(-(self.alpha + 1.0));
        let zt = if n < 4.0e18 {
            zeta_tail(self.alpha + 1.0, n.max(1.0) as u64)?
        } else {
            // beyond u64: integral form is exact to f64 here
            n.powf(-self.alpha) / self.alpha
        };
        let k0 = first_spike_at_or_above(n);
        let zk = z.powi(k0);
        let sp_smooth = zk / (1.0 - z);
        let sp = zk * (k0 as f64 / (1.0 - z) + z / ((1.0 - z) * (1.0 - z)));
        Ok(self.c * (zt - sp_smooth + sp))
    }

    fn build_table(&mut self) -> Result<()> {
        let mut tail = vec![0.0; TABLE_N + 1];
        tail[TABLE_N] = self.analytic_tail(TABLE_N as f64)?;
        // P{X > n-1} = P{X > n} + c·height(n-1): the cell [n-1, n)
        for n in (2..=TABLE_N as u64).rev() {
            tail[n as usize - 1] = tail[n as usize] + self.c * self.height(n - 1);
        }
        // cells cover [1, ∞), so the accumulated mass at 0 equals that at 1
        tail[0] = tail[1];
        self.tail = tail;
        Ok(())
    }

    fn tail_at_integer(&self, n: f64) -> f64 {
        if n <= 1.0 {
            1.0
        } else if n <= TABLE_N as f64 {
            self.tail[n as usize]
        } else {
            self.analytic_tail(n).expect("tail asymptotics in range")
        }
    }
}

impl Law for Section1 {
    fn right_tail(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 1.0;
        }
        let n = x.floor();
        let frac = (n + 1.0 - x) * self.c * self.height(n as u64);
        frac + self.tail_at_integer(n + 1.0)
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, u: f64) -> f64 {
        let v = 1.0 - u;
        if v >= 1.0 {
            return 1.0;
        }
        let n = if v >= self.tail[TABLE_N] {
            // first integer with tail <= v; the containing cell starts before it
            (self.tail.partition_point(|&t| t > v).max(2)) as f64
        } else {
            let mut lo = TABLE_N as f64;
            let mut hi = 2.0 * lo;
            while self.analytic_tail(hi).unwrap_or(0.0) > v {
                lo = hi;
                hi *= 2.0;
                if hi > 4.0e18 {
                    break;
                }
            }
            while hi - lo > 1.0 {
                let mid = ((lo + hi) / 2.0).floor();
                if mid <= lo || mid >= hi {
                    // past 2^53 adjacent floats differ by more than 1
                    break;
                }
                if self.analytic_tail(mid).unwrap_or(0.0) > v {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        // linear within the cell [n-1, n)
        let m = n - 1.0;
        let h = self.c * self.height(m as u64);
        let x = n - (v - self.tail_at_integer(n)) / h;
        x.clamp(m, n)
    }

    fn density_knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let a = lo.ceil().max(1.0);
        let b = hi.floor();
        let mut v = Vec::new();
        let mut x = a;
        while x <= b && v.len() < 4_000_000 {
            v.push(x);
            x += 1.0;
        }
        v
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        self.cell_sum(s, DIRECT_CAP, |a, b| {
            ((b).powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
        })
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("tilt moment needs s > 0"));
        }
        self.cell_sum(s, DIRECT_CAP, |a, b| s * ((b / s).exp() - (a / s).exp()))
    }
}

impl Section1 {
    /// Σ over cells [n, n+1) ∩ (0, s] of c·height(n)·g_int(a, b), where
    /// g_int is the exact integral of the weight over [a, b]. Beyond `cap`
    /// cells the smooth part becomes an integral (relative cell error
    /// ~ (alpha+1)/cap) and spike cells are corrected exactly.
    fn cell_sum(&self, s: f64, cap: f64, g_int: impl Fn(f64, f64) -> f64) -> Result<f64> {
        if s <= 1.0 {
            return Ok(0.0);
        }
        let nmax = s.floor();
        let mut acc = Kahan::new();
        let direct_end = nmax.min(cap);
        let mut n = 1u64;
        while (n as f64) <= direct_end {
            let a = n as f64;
            let b = (a + 1.0).min(s);
            acc.add(self.c * self.height(n) * g_int(a, b));
            if b == s {
                break;
            }
            n += 1;
        }
        let mut total = acc.value();
        if nmax > cap {
            let alpha = self.alpha;
            let c = self.c;
            let est = adaptive(
                |t: f64| {
                    let x = t.exp();
                    c * x.powf(-alpha - 1.0) * g_int(x, x + 1.0) * x
                },
                (direct_end + 1.0).ln(),
                s.ln(),
                1e-9,
                1e-300,
                4000,
            )?;
            total += est.value;
            let mut k = first_spike_at_or_above(direct_end + 1.0);
            loop {
                let site = 2.0f64.powi(k);
                if site > nmax {
                    break;
                }
                let b = (site + 1.0).min(s);
                total +=
                    self.c * (k as f64 - 1.0) * site.powf(-alpha - 1.0) * g_int(site, b);
                k += 1;
            }
        }
        Ok(total)
    }
}
