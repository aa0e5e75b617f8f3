//! Complex scalars for convolution algebras.
//!
//! Exact values are formal rational combinations of roots of unity,
//! normalized so every phase angle lies in [0, 1/2) via ζ_{a+1/2} = −ζ_a.
//! Sums, products, and conjugates stay in this form, so algebraic identities
//! whose two sides produce the same collected terms compare exactly.
//! Everything else (or anything built from floating input) lives in f64
//! complex arithmetic with a fixed comparison tolerance.

use crate::phase::{rat_mod1, CircleValue, Rat, RealValue};
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

/// A complex coefficient: exact formal sum of phased rationals, or a float.
#[derive(Clone, Debug)]
pub enum Coef {
    /// angle in [0, 1/2) -> rational coefficient, zero coefficients pruned.
    Exact(BTreeMap<Rat, Rat>),
    Approx(Complex64),
}

/// Fold an arbitrary angle into ([0,1/2) angle, sign).
fn fold(angle: Rat) -> (Rat, Rat) {
    let a = rat_mod1(angle);
    let half = Rat::new(1, 2);
    if a < half {
        (a, Rat::one())
    } else {
        (a - half, -Rat::one())
    }
}

impl Coef {
    pub fn zero() -> Self {
        Coef::Exact(BTreeMap::new())
    }

    pub fn one() -> Self {
        Coef::from_rat(Rat::one())
    }

    pub fn from_rat(q: Rat) -> Self {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(Rat::zero(), q);
        }
        Coef::Exact(m)
    }

    /// q·e^{2πi·angle}.
    pub fn phased_rat(q: Rat, angle: Rat) -> Self {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            let (a, sign) = fold(angle);
            m.insert(a, q * sign);
        }
        Coef::Exact(m)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Coef::Approx(z)
    }

    pub fn from_phase(p: CircleValue) -> Self {
        match p {
            CircleValue::Exact(a) => Coef::phased_rat(Rat::one(), a),
            CircleValue::Approx(x) => Coef::Approx(Complex64::from_polar(1.0, TAU * x)),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coef::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(m) => m.is_empty(),
            Coef::Approx(z) => z.norm() == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coef::Exact(m) => m
                .iter()
                .map(|(a, q)| {
                    Complex64::from_polar(1.0, TAU * rat_to_f64(*a)) * rat_to_f64(*q)
                })
                .sum(),
            Coef::Approx(z) => *z,
        }
    }

    pub fn to_approx(&self) -> Coef {
        Coef::Approx(self.to_complex())
    }

    pub fn add(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => {
                let mut m = a.clone();
                for (angle, q) in b {
                    let entry = m.entry(*angle).or_insert_with(Rat::zero);
                    *entry += q;
                    if entry.is_zero() {
                        m.remove(angle);
                    }
                }
                Coef::Exact(m)
            }
            (Coef::Approx(a), Coef::Approx(b)) => Coef::Approx(a + b),
            _ => panic!("mixed exact/approximate scalar arithmetic; promote with to_approx first"),
        }
    }

    pub fn neg(&self) -> Coef {
        match self {
            Coef::Exact(m) => Coef::Exact(m.iter().map(|(a, q)| (*a, -q)).collect()),
            Coef::Approx(z) => Coef::Approx(-z),
        }
    }

    pub fn sub(&self, other: &Coef) -> Coef {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => {
                let mut m: BTreeMap<Rat, Rat> = BTreeMap::new();
                for (a1, q1) in a {
                    for (a2, q2) in b {
                        let (angle, sign) = fold(*a1 + *a2);
                        let entry = m.entry(angle).or_insert_with(Rat::zero);
                        *entry += *q1 * *q2 * sign;
                        if entry.is_zero() {
                            m.remove(&angle);
                        }
                    }
                }
                Coef::Exact(m)
            }
            (Coef::Approx(a), Coef::Approx(b)) => Coef::Approx(a * b),
            _ => panic!("mixed exact/approximate scalar arithmetic; promote with to_approx first"),
        }
    }

    pub fn mul_phase(&self, p: CircleValue) -> Coef {
        self.mul(&Coef::from_phase(p))
    }

    pub fn conj(&self) -> Coef {
        match self {
            Coef::Exact(m) => {
                let mut out = BTreeMap::new();
                for (a, q) in m {
                    let (angle, sign) = fold(-*a);
                    out.insert(angle, *q * sign);
                }
                Coef::Exact(out)
            }
            Coef::Approx(z) => Coef::Approx(z.conj()),
        }
    }

    /// |z|, exact for a single phased rational and for Gaussian rationals
    /// with a perfect-square norm; a float otherwise.
    pub fn modulus(&self) -> RealValue {
        match self {
            Coef::Exact(m) => match m.len() {
                0 => RealValue::Exact(Rat::zero()),
                1 => {
                    let q = m.values().next().unwrap();
                    RealValue::Exact(q.abs())
                }
                2 => {
                    let mut it = m.iter();
                    let (a1, q1) = it.next().unwrap();
                    let (a2, q2) = it.next().unwrap();
                    if a1.is_zero() && *a2 == Rat::new(1, 4) {
                        let norm2 = q1 * q1 + q2 * q2;
                        match rat_sqrt(norm2) {
                            Some(r) => RealValue::Exact(r),
                            None => RealValue::Approx(self.to_complex().norm()),
                        }
                    } else {
                        RealValue::Approx(self.to_complex().norm())
                    }
                }
                _ => RealValue::Approx(self.to_complex().norm()),
            },
            Coef::Approx(z) => RealValue::Approx(z.norm()),
        }
    }

    pub fn approx_eq(&self, other: &Coef, tol: f64) -> bool {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => a == b,
            _ => (self.to_complex() - other.to_complex()).norm() <= tol,
        }
    }
}

impl PartialEq for Coef {
    /// Exact values compare as collected formal sums; anything else within
    /// zero tolerance.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => a == b,
            (Coef::Approx(a), Coef::Approx(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Exact(m) => {
                if m.is_empty() {
                    return write!(f, "0");
                }
                let terms: Vec<String> = m
                    .iter()
                    .map(|(a, q)| {
                        if a.is_zero() {
                            format!("{}", q)
                        } else {
                            format!("{}·e({})", q, a)
                        }
                    })
                    .collect();
                write!(f, "{}", terms.join(" + "))
            }
            Coef::Approx(z) => write!(f, "{:.6}{:+.6}i", z.re, z.im),
        }
    }
}

fn rat_to_f64(q: Rat) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// The exact square root of a nonnegative rational, if it is rational.
fn rat_sqrt(q: Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = isqrt(*q.numer() as u64)?;
    let d = isqrt(*q.denom() as u64)?;
    Some(Ratio::new(n as i64, d as i64))
}

fn isqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    for c in r.saturating_sub(1)..=r + 1 {
        if c * c == n {
            return Some(c);
        }
    }
    None
}
