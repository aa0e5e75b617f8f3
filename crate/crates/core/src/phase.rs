//! Values on the unit circle and in the real line, in exact or approximate
//! arithmetic.
//!
//! A `CircleValue` is stored as its angle: the fraction of a full turn, so the
//! complex number is e^(2*pi*i*angle). Exact values keep the angle as a
//! rational reduced mod 1; approximate values keep an f64 in [0, 1). The two
//! modes never mix silently: arithmetic on mixed operands panics, and callers
//! promote explicitly with `to_approx`.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::fmt;

pub type Rat = Rational64;

/// Comparison tolerance used throughout approximate mode.
pub const APPROX_TOL: f64 = 1e-12;

/// Reduce a rational to the half-open interval [0, 1).
pub fn rat_mod1(q: Rat) -> Rat {
    let f = q.floor();
    q - f
}

fn f64_mod1(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Distance between two angles on the circle, both in [0, 1).
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// A point on the unit circle T.
#[derive(Clone, Copy, PartialEq)]
pub enum CircleValue {
    /// e^(2*pi*i*q) with q rational in [0, 1).
    Exact(Rat),
    /// e^(2*pi*i*x) with x an f64 in [0, 1).
    Approx(f64),
}

impl CircleValue {
    pub fn one() -> Self {
        CircleValue::Exact(Rat::zero())
    }

    pub fn from_angle(q: Rat) -> Self {
        CircleValue::Exact(rat_mod1(q))
    }

    pub fn from_angle_f64(x: f64) -> Self {
        CircleValue::Approx(f64_mod1(x))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CircleValue::Exact(_))
    }

    pub fn is_one(&self) -> bool {
        match self {
            CircleValue::Exact(q) => q.is_zero(),
            CircleValue::Approx(x) => circle_dist(*x, 0.0) <= APPROX_TOL,
        }
    }

    /// Angle as an f64 in [0, 1), for either mode.
    pub fn angle_f64(&self) -> f64 {
        match self {
            CircleValue::Exact(q) => *q.numer() as f64 / *q.denom() as f64,
            CircleValue::Approx(x) => *x,
        }
    }

    pub fn to_approx(&self) -> Self {
        CircleValue::Approx(f64_mod1(self.angle_f64()))
    }

    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (CircleValue::Exact(a), CircleValue::Exact(b)) => CircleValue::from_angle(a + b),
            (CircleValue::Approx(a), CircleValue::Approx(b)) => CircleValue::from_angle_f64(a + b),
            _ => panic!("mixed exact/approximate circle arithmetic; promote with to_approx first"),
        }
    }

    pub fn conj(self) -> Self {
        match self {
            CircleValue::Exact(q) => CircleValue::from_angle(-q),
            CircleValue::Approx(x) => CircleValue::from_angle_f64(-x),
        }
    }

    /// Equality at the mode's native precision: exact pairs compare exactly,
    /// anything else compares circle distance within `tol`.
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        match (self, other) {
            (CircleValue::Exact(a), CircleValue::Exact(b)) => a == b,
            _ => circle_dist(self.angle_f64(), other.angle_f64()) <= tol,
        }
    }
}

impl fmt::Debug for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleValue::Exact(q) => {
                if q.is_zero() {
                    write!(f, "1")
                } else {
                    write!(f, "e({})", q)
                }
            }
            CircleValue::Approx(x) => write!(f, "e~({})", x),
        }
    }
}

/// A real scalar, exact or approximate; the value space of R-valued cocycles.
/// Unlike `CircleValue` it is not reduced mod 1.
#[derive(Clone, Copy, PartialEq)]
pub enum RealValue {
    Exact(Rat),
    Approx(f64),
}

impl RealValue {
    pub fn zero() -> Self {
        RealValue::Exact(Rat::zero())
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (RealValue::Exact(a), RealValue::Exact(b)) => RealValue::Exact(a + b),
            (RealValue::Approx(a), RealValue::Approx(b)) => RealValue::Approx(a + b),
            _ => panic!("mixed exact/approximate real arithmetic; promote with to_approx first"),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            RealValue::Exact(a) => RealValue::Exact(-a),
            RealValue::Approx(a) => RealValue::Approx(-a),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealValue::Exact(q) => *q.numer() as f64 / *q.denom() as f64,
            RealValue::Approx(x) => *x,
        }
    }

    pub fn to_approx(&self) -> Self {
        RealValue::Approx(self.to_f64())
    }

    /// Scale by a rational, staying in the current mode.
    pub fn scale(self, t: Rat) -> Self {
        match self {
            RealValue::Exact(a) => RealValue::Exact(a * t),
            RealValue::Approx(a) => {
                RealValue::Approx(a * (*t.numer() as f64 / *t.denom() as f64))
            }
        }
    }

    /// e^(2*pi*i*self).
    pub fn exp_turn(self) -> CircleValue {
        match self {
            RealValue::Exact(q) => CircleValue::from_angle(q),
            RealValue::Approx(x) => CircleValue::from_angle_f64(x),
        }
    }
}

impl fmt::Debug for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealValue::Exact(q) => write!(f, "{}", q),
            RealValue::Approx(x) => write!(f, "~{}", x),
        }
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Parse "p/q" or "p" into a rational. Used by the CLI and fixtures.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let n: i64 = num.trim().parse().ok()?;
            let d: i64 = den.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => {
            let n: i64 = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

/// Render a rational as "p/q" or "p", the inverse of `parse_rat`.
pub fn format_rat(q: &Rat) -> String {
    if q.denom() == &1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// True when |q| is small enough to matter for strictly-positive checks.
pub fn rat_is_nonneg(q: &Rat) -> bool {
    !q.is_negative()
}
