//! Shared numerical machinery: quadrature, tail sums, regression fits.

pub mod fit;
pub mod quad;
pub mod sums;

/// Compensated (Kahan) accumulator. Positive-term sums in this crate run to
/// 1e6 terms and feed tolerances near 1e-12, where naive f64 accumulation
/// is not reliably below the tolerance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for Kahan {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = Kahan::new();
        for x in iter {
            k.add(x);
        }
        k
    }
}
