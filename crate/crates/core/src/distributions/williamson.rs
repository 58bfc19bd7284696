//! Integer step law with tail index 1/2 and mass spikes at powers of two.
//!
//! P{X = 1} = 1/2. For n ≥ 2, masses are C·n^{-3/2} ln n off powers of two
//! and C·n^{-1/2} (ln n)^{-q} at n = 2^k, with C chosen so the n ≥ 2 part
//! carries the remaining 1/2. The tail is bar F(x) ~ 2C x^{-1/2}(ln x + 2);
//! the spikes sit a factor (ln x)^{-q-1} below it, so q tunes how visible
//! they are to interval-probability diagnostics.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::quad::adaptive;
use crate::numeric::sums::tail_sum;
use crate::numeric::Kahan;
use crate::regvar::{EpsKind, RegVarFunction};

use super::{assemble, Family, Law, StepDistribution, SupportDesc, SymbolicReal};

/// Integer tails are tabulated up to here; beyond, closed-form asymptotics.
const TABLE_N: u64 = 1 << 17;
/// Weighted sums switch from the direct loop to an integral past this point.
const DIRECT_CAP: f64 = 2.0e7;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug)]
struct Williamson {
    q: f64,
    /// Normalizer: masses for n ≥ 2 are c·w(n), summing to 1/2.
    c: f64,
    /// tail[n] = P{X > n} for n = 0..=TABLE_N.
    tail: Vec<f64>,
}

pub(super) fn build(family: Family, q: f64) -> Result<StepDistribution> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::config(format!("williamson q must be >= 0, got {q}")));
    }
    let w_total = smooth_total()? - spike_smooth_part_total() + spike_total(q);
    let c = 0.5 / w_total;
    let mut law = Williamson { q, c, tail: Vec::new() };
    law.build_table();
    // bar F ~ 2C x^{-1/2} (ln x + 2) and (ln(e²x)/ln e²)^{-1} = 2/(ln x + 2),
    // so R(x) = x^{1/2} · 2/(ln x + 2) · 1/(4C) makes bar F · R → 1
    let regvar = RegVarFunction::with_scale(
        0.5,
        EpsKind::LogPow { beta: -1.0, mult: std::f64::consts::E * std::f64::consts::E },
        0.5,
        1.0 / (4.0 * c),
    )?;
    let support = SupportDesc::Lattice {
        offset: SymbolicReal::integer(0),
        span: SymbolicReal::integer(1),
    };
    Ok(assemble(family, Arc::new(law), Some((0.5, regvar)), 0.0, 1.0, support))
}

fn is_pow2(n: u64) -> bool {
    n >= 2 && n & (n - 1) == 0
}

fn w_smooth(n: f64) -> f64 {
    n.powf(-1.5) * n.ln()
}

fn w_spike(k: i32, q: f64) -> f64 {
    2.0f64.powf(-0.5 * k as f64) * (k as f64 * LN2).powf(-q)
}

/// Σ_{n≥2} n^{-3/2} ln n.
fn smooth_total() -> Result<f64> {
    Ok(tail_sum(w_smooth, |x| x.powf(-2.5) * (1.0 - 1.5 * x.ln()), 2, 4096, 1e-13)?.value)
}

/// Σ_{k≥1} 2^{-3k/2} · k ln 2, the smooth weights sitting at spike sites.
fn spike_smooth_part_total() -> f64 {
    let z = 2.0f64.powf(-1.5);
    LN2 * z / ((1.0 - z) * (1.0 - z))
}

/// Σ_{k≥1} 2^{-k/2} (k ln 2)^{-q}.
fn spike_total(q: f64) -> f64 {
    let mut acc = Kahan::new();
    for k in 1..400 {
        let t = w_spike(k, q);
        acc.add(t);
        if t < 1e-25 {
            break;
        }
    }
    acc.value()
}

/// Σ_{j≥m} j^{-3/2} ln j by Euler-Maclaurin through the f‴ term; relative
/// error ~ m^{-4} ln m, negligible from m = TABLE_N on.
fn smooth_tail(m: f64) -> f64 {
    let (l, s) = (m.ln(), m.sqrt());
    let integral = 2.0 / s * (l + 2.0);
    let half = 0.5 * l / (m * s);
    let fp = (1.5 * l - 1.0) / (m * m * s) / 12.0;
    let fppp = (17.75 - 13.125 * l) / (m * m * m * m * s) / 720.0;
    integral + half + fp + fppp
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

/// Σ_{k≥k0} k z^k = z^{k0} (k0/(1-z) + z/(1-z)²).
fn spike_smooth_part_tail(m: f64) -> f64 {
    let z = 2.0f64.powf(-1.5);
    let k0 = first_spike_at_or_above(m);
    LN2 * z.powi(k0) * (k0 as f64 / (1.0 - z) + z / ((1.0 - z) * (1.0 - z)))
}

fn spike_tail(m: f64, q: f64) -> f64 {
    let k0 = first_spike_at_or_above(m);
    let mut acc = Kahan::new();
    for k in k0..k0 + 400 {
        let t = w_spike(k, q);
        acc.add(t);
        if t < 1e-25 * acc.value().max(1e-300) {
            break;
        }
    }
    acc.value()
}

impl Williamson {
    fn mass(&self, n: u64) -> f64 {
        if n == 1 {
            0.5
        } else if is_pow2(n) {
            self.c * w_spike(n.ilog2() as i32, self.q)
        } else if n >= 2 {
            self.c * w_smooth(n as f64)
        } else {
            0.0
        }
    }

    /// P{X > n} for integer n ≥ TABLE_N, from the asymptotic pieces.
    fn analytic_tail(&self, n: f64) -> f64 {
        let m = n + 1.0;
        self.c * (smooth_tail(m) - spike_smooth_part_tail(m) + spike_tail(m, self.q))
    }

    fn build_table(&mut self) {
        let mut tail = vec![0.0; TABLE_N as usize + 1];
        // anchor at the analytic region, then accumulate masses backward so
        // the table and the analytic branch agree exactly at the seam
        tail[TABLE_N as usize] = self.analytic_tail(TABLE_N as f64);
        for n in (2..=TABLE_N).rev() {
            tail[n as usize - 1] = tail[n as usize] + self.mass(n);
        }
        tail[0] = 1.0;
        self.tail = tail;
    }
}

impl Law for Williamson {
    fn right_tail(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 1.0;
        }
        if x < TABLE_N as f64 {
            return self.tail[x.floor() as usize];
        }
        self.analytic_tail(x.floor())
    }

    fn left_tail(&self, _x: f64) -> f64 {
        0.0
    }

    fn quantile(&self, u: f64) -> f64 {
        let v = 1.0 - u;
        if v >= 0.5 {
            return 1.0;
        }
        if v >= self.tail[TABLE_N as usize] {
            // first n with tail[n] <= v
            let n = self.tail.partition_point(|&t| t > v);
            return n as f64;
        }
        // deep tail: integer bisection on the analytic branch
        let mut lo = TABLE_N as f64;
        let mut hi = 2.0 * lo;
        while self.analytic_tail(hi) > v {
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
            if self.analytic_tail(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn lattice_span(&self) -> Option<f64> {
        Some(1.0)
    }

    fn lattice_masses(&self, kmax: usize) -> Option<Vec<f64>> {
        Some((0..=kmax as u64).map(|n| self.mass(n)).collect())
    }

    fn trunc_power_moment(&self, p: f64, s: f64) -> Result<f64> {
        self.weighted_sum(s, |n| n.powf(p))
    }

    fn tilt_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("tilt moment needs s > 0"));
        }
        self.weighted_sum(s, |n| (n / s).exp())
    }
}

impl Williamson {
    /// Σ_{n ≤ s} g(n) · mass(n): direct loop, with the smooth part beyond
    /// DIRECT_CAP handled by midpoint-rule integration (spikes stay exact).
    fn weighted_sum(&self, s: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        if s < 1.0 {
            return Ok(0.0);
        }
        let nmax = s.floor();
        let mut acc = Kahan::new();
        acc.add(0.5 * g(1.0));
        let direct_end = nmax.min(DIRECT_CAP);
        let mut n = 2u64;
        while (n as f64) <= direct_end {
            acc.add(self.mass(n) * g(n as f64));
            n += 1;
        }
        let mut total = acc.value();
        if nmax > DIRECT_CAP {
            let a = direct_end + 1.0;
            let est = adaptive(
                |t| {
                    let u = t.exp();
                    self.c * w_smooth(u - 0.5) * g(u - 0.5) * u
                },
                a.ln(),
                (nmax + 1.0).ln(),
                1e-10,
                1e-300,
                4000,
            )?;
            total += est.value;
            // spikes in (a-1, nmax]: exact, replacing their smooth weights
            let mut k = first_spike_at_or_above(a);
            loop {
                let site = 2.0f64.powi(k);
                if site > nmax {
                    break;
                }
                total += self.c * g(site) * (w_spike(k, self.q) - w_smooth(site));
                k += 1;
            }
        }
        Ok(total)
    }
}
