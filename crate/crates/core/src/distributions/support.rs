//! Symbolic support descriptions and lattice classification.
//!
//! Whether a lattice's shift is a rational multiple of its span cannot be
//! decided from f64 values; constructors therefore declare support points
//! symbolically as `irrational + rational`. Classification is exact within
//! that catalogue: atom sets carrying two distinct irrational displacements
//! are conservatively reported as non-lattice.

use serde::{Deserialize, Serialize};

/// Irrational displacement catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Irrational {
    Sqrt2,
    /// (1 + √5)/2
    Golden,
}

impl Irrational {
    pub fn value(self) -> f64 {
        match self {
            Irrational::Sqrt2 => std::f64::consts::SQRT_2,
            Irrational::Golden => 0.5 * (1.0 + 5.0f64.sqrt()),
        }
    }
}

/// Exact real of the form `irrational + num/den`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SymbolicReal {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irrational: Option<Irrational>,
    #[serde(default)]
    pub num: i64,
    #[serde(default = "one")]
    pub den: i64,
}

fn one() -> i64 {
    1
}

impl SymbolicReal {
    pub fn rational(num: i64, den: i64) -> Self {
        let (num, den) = reduce(num, den);
        SymbolicReal { irrational: None, num, den }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn irrational(i: Irrational) -> Self {
        SymbolicReal { irrational: Some(i), num: 0, den: 1 }
    }

    pub fn shifted(i: Irrational, num: i64, den: i64) -> Self {
        let (num, den) = reduce(num, den);
        SymbolicReal { irrational: Some(i), num, den }
    }

    pub fn value(&self) -> f64 {
        self.irrational.map_or(0.0, Irrational::value) + self.num as f64 / self.den as f64
    }

    /// Exact rational form of a finite f64 (every finite f64 is rational).
    /// None when numerator or denominator would overflow i64.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let mut num = x;
        let mut den: i64 = 1;
        while num.fract() != 0.0 {
            num *= 2.0;
            den = den.checked_mul(2)?;
        }
        if num.abs() >= 9.0e18 {
            return None;
        }
        Some(Self::rational(num as i64, den))
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_none()
    }
}

impl PartialEq for SymbolicReal {
    fn eq(&self, other: &Self) -> bool {
        let a = reduce(self.num, self.den);
        let b = reduce(other.num, other.den);
        self.irrational == other.irrational && a == b
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    assert!(den != 0, "zero denominator");
    let g = gcd(num, den).max(1);
    let s = den.signum();
    (s * num / g, s * den / g)
}

/// gcd of two rationals: gcd(a/b, c/d) = gcd(ad, cb)/(bd).
fn rat_gcd((an, ad): (i64, i64), (bn, bd): (i64, i64)) -> (i64, i64) {
    if an == 0 {
        return reduce(bn, bd);
    }
    if bn == 0 {
        return reduce(an, ad);
    }
    reduce(gcd(an * bd, bn * ad), ad * bd)
}

fn rat_sub((an, ad): (i64, i64), (bn, bd): (i64, i64)) -> (i64, i64) {
    reduce(an * bd - bn * ad, ad * bd)
}

/// Declared support of a step law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SupportDesc {
    /// Absolutely continuous law.
    Continuous,
    /// Support contained in offset + span·Z.
    Lattice { offset: SymbolicReal, span: SymbolicReal },
    /// Explicit finite atom list (test and classification use).
    FiniteAtoms { atoms: Vec<SymbolicReal> },
}

/// Classification outcome. Spans are maximal: `Arithmetic` means support ⊆
/// span·Z with the largest such span; `LatticeNonArithmetic` means support ⊆
/// offset + span·Z with offset/span irrational (span maximal for that form).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum LatticeClass {
    Arithmetic { span: SymbolicReal },
    LatticeNonArithmetic { offset: SymbolicReal, span: SymbolicReal },
    NonLattice,
}

pub fn classify(support: &SupportDesc) -> LatticeClass {
    match support {
        SupportDesc::Continuous => LatticeClass::NonLattice,
        SupportDesc::Lattice { offset, span } => classify_offset_span(*offset, *span),
        SupportDesc::FiniteAtoms { atoms } => classify_atoms(atoms),
    }
}

fn classify_offset_span(offset: SymbolicReal, span: SymbolicReal) -> LatticeClass {
    if !span.is_rational() {
        // spans in the catalogue are rational; irrational spans only arise
        // from hand-built descriptors, where offset 0 keeps them arithmetic
        return if offset.num == 0 && offset.is_rational() {
            LatticeClass::Arithmetic { span }
        } else {
            LatticeClass::NonLattice
        };
    }
    match offset.irrational {
        None => {
            // rational offset folds into the lattice: largest d with
            // support ⊆ dZ is gcd(offset, span)
            let d = rat_gcd((offset.num, offset.den), (span.num, span.den));
            LatticeClass::Arithmetic { span: SymbolicReal::rational(d.0, d.1) }
        }
        Some(irr) => {
            let m = reduce_mod_span(irr, (offset.num, offset.den), (span.num, span.den));
            LatticeClass::LatticeNonArithmetic {
                offset: SymbolicReal { irrational: offset.irrational, num: m.0, den: m.1 },
                span,
            }
        }
    }
}

/// Reduce irr + num/den into [0, span) by an integer multiple of span. The
/// floor is taken in floating point; the catalogue's irrational constants sit
/// far from the integer boundaries this could misjudge.
fn reduce_mod_span(irr: Irrational, rational: (i64, i64), span: (i64, i64)) -> (i64, i64) {
    let total = irr.value() + rational.0 as f64 / rational.1 as f64;
    let sv = span.0 as f64 / span.1 as f64;
    let k = (total / sv).floor() as i64;
    rat_sub(rational, (k * span.0, span.1))
}

fn classify_atoms(atoms: &[SymbolicReal]) -> LatticeClass {
    if atoms.is_empty() {
        return LatticeClass::NonLattice;
    }
    let tag = atoms[0].irrational;
    if atoms.iter().any(|a| a.irrational != tag) {
        // two distinct irrational displacements: outside the catalogue
        return LatticeClass::NonLattice;
    }
    // differences are rational; their gcd is the candidate span
    let base = (atoms[0].num, atoms[0].den);
    let mut d = (0i64, 1i64);
    for a in &atoms[1..] {
        let diff = rat_sub((a.num, a.den), base);
        d = rat_gcd(d, diff);
    }
    match tag {
        None => {
            // arithmetic span: largest d with all atoms in dZ
            let mut g = d;
            for a in atoms {
                g = rat_gcd(g, (a.num, a.den));
            }
            if g.0 == 0 {
                // single atom at 0
                return LatticeClass::Arithmetic { span: SymbolicReal::integer(1) };
            }
            LatticeClass::Arithmetic { span: SymbolicReal::rational(g.0, g.1) }
        }
        Some(irr) => {
            if d.0 == 0 {
                // single shifted atom: span 1 by convention
                d = (1, 1);
            }
            let m = reduce_mod_span(irr, base, d);
            LatticeClass::LatticeNonArithmetic {
                offset: SymbolicReal { irrational: Some(irr), num: m.0, den: m.1 },
                span: SymbolicReal::rational(d.0, d.1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(vs: &[SymbolicReal]) -> SupportDesc {
        SupportDesc::FiniteAtoms { atoms: vs.to_vec() }
    }

    #[test]
    fn integer_support_is_arithmetic_span_one() {
        let s = atoms(&[1, 2, 3].map(SymbolicReal::integer));
        assert_eq!(
            classify(&s),
            LatticeClass::Arithmetic { span: SymbolicReal::integer(1) }
        );
    }

    #[test]
    fn even_support_has_maximal_span_two() {
        let s = atoms(&[2, 4, 6].map(SymbolicReal::integer));
        assert_eq!(
            classify(&s),
            LatticeClass::Arithmetic { span: SymbolicReal::integer(2) }
        );
    }

    #[test]
    fn shifted_by_sqrt2_is_nonarithmetic_lattice() {
        let s = atoms(&[
            SymbolicReal::shifted(Irrational::Sqrt2, 0, 1),
            SymbolicReal::shifted(Irrational::Sqrt2, 1, 1),
            SymbolicReal::shifted(Irrational::Sqrt2, 3, 1),
        ]);
        let got = classify(&s);
        // offset reduces mod the span: √2 - 1 ∈ [0, 1)
        assert_eq!(
            got,
            LatticeClass::LatticeNonArithmetic {
                offset: SymbolicReal::shifted(Irrational::Sqrt2, -1, 1),
                span: SymbolicReal::integer(1),
            }
        );
    }

    #[test]
    fn half_integers_fold_into_half_span() {
        let s = atoms(&[SymbolicReal::rational(3, 2), SymbolicReal::rational(5, 2)]);
        assert_eq!(
            classify(&s),
            LatticeClass::Arithmetic { span: SymbolicReal::rational(1, 2) }
        );
    }

    #[test]
    fn mixed_irrational_parts_report_nonlattice() {
        let s = atoms(&[
            SymbolicReal::integer(0),
            SymbolicReal::irrational(Irrational::Sqrt2),
        ]);
        assert_eq!(classify(&s), LatticeClass::NonLattice);
    }

    #[test]
    fn continuous_is_nonlattice() {
        assert_eq!(classify(&SupportDesc::Continuous), LatticeClass::NonLattice);
    }

    #[test]
    fn symbolic_values_evaluate() {
        assert!((SymbolicReal::shifted(Irrational::Sqrt2, -1, 1).value() - 0.41421356).abs() < 1e-8);
        assert!((SymbolicReal::rational(6, 4).value() - 1.5).abs() < 1e-15);
        assert_eq!(SymbolicReal::rational(6, 4), SymbolicReal::rational(3, 2));
    }
}
