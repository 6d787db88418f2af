//! Exact arithmetic tags for circle rotation angles.
//!
//! The continuity criterion for cohomological equations on a rotation base
//! is arithmetic, not metric: it asks whether a number lies in `Z + αZ`.
//! Floats cannot decide that, so rotation angles carry an optional exact tag
//! `r + s·α₀` with rational `r`, `s` and a named irrational `α₀`. Membership
//! tests run on the tag; without one they fail with an explicit "inexact"
//! error instead of guessing.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A handful of named irrationals, enough for desk-scale experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedIrrational {
    /// `(√5 − 1)/2 ≈ 0.618…`, the golden rotation number.
    GoldenMean,
    /// `√2 − 1 ≈ 0.414…`, kept in `(0, 1)`.
    Sqrt2Minus1,
    /// `√3 − 1 ≈ 0.732…`.
    Sqrt3Minus1,
    /// `π − 3 ≈ 0.14159…`.
    PiMinus3,
    /// `e − 2 ≈ 0.71828…`.
    EMinus2,
}

impl NamedIrrational {
    pub fn value(self) -> f64 {
        match self {
            NamedIrrational::GoldenMean => (5.0_f64.sqrt() - 1.0) / 2.0,
            NamedIrrational::Sqrt2Minus1 => std::f64::consts::SQRT_2 - 1.0,
            NamedIrrational::Sqrt3Minus1 => 3.0_f64.sqrt() - 1.0,
            NamedIrrational::PiMinus3 => std::f64::consts::PI - 3.0,
            NamedIrrational::EMinus2 => std::f64::consts::E - 2.0,
        }
    }
}

/// An exact element of `Q + Q·α₀`: the value `rational + scale·α₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactScalar {
    pub rational: Rational64,
    pub scale: Rational64,
}

impl ExactScalar {
    pub fn new(rational: Rational64, scale: Rational64) -> Self {
        Self { rational, scale }
    }

    pub fn rational(r: Rational64) -> Self {
        Self {
            rational: r,
            scale: Rational64::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::rational(Rational64::zero())
    }

    pub fn value(&self, base: NamedIrrational) -> f64 {
        rational_to_f64(self.rational) + rational_to_f64(self.scale) * base.value()
    }

    pub fn scaled_by_int(&self, n: i64) -> Self {
        let n = Rational64::from_integer(n);
        Self {
            rational: self.rational * n,
            scale: self.scale * n,
        }
    }
}

/// An exactly tagged rotation angle `α = rational + scale·α₀` with `α₀`
/// irrational and `scale ≠ 0` (so `α` itself is irrational).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAlpha {
    pub rational: Rational64,
    pub scale: Rational64,
    pub irrational: NamedIrrational,
}

impl ExactAlpha {
    pub fn new(rational: Rational64, scale: Rational64, irrational: NamedIrrational) -> Result<Self> {
        if scale.is_zero() {
            return Err(Error::invalid(
                "exact rotation tag must have a nonzero irrational part",
            ));
        }
        Ok(Self {
            rational,
            scale,
            irrational,
        })
    }

    /// The golden-mean rotation, the default exactly tagged example.
    pub fn golden() -> Self {
        Self {
            rational: Rational64::zero(),
            scale: Rational64::from_integer(1),
            irrational: NamedIrrational::GoldenMean,
        }
    }

    pub fn value(&self) -> f64 {
        rational_to_f64(self.rational) + rational_to_f64(self.scale) * self.irrational.value()
    }

    /// Decides whether `c + d·α ∈ Z` for some integer `d`, where `c` is an
    /// exact scalar over the same named irrational. Returns the witness `d`
    /// when one exists.
    ///
    /// Writing `c = p₀ + p₁·α₀` and `α = r + s·α₀`, the combination
    /// `c + d·α = (p₀ + d·r) + (p₁ + d·s)·α₀` is rational only when
    /// `p₁ + d·s = 0`, which pins `d`, and lands in `Z` only if the rational
    /// part is an integer.
    pub fn integer_shift_witness(&self, c: &ExactScalar) -> Option<i64> {
        let d = -c.scale / self.scale;
        if !d.is_integer() {
            return None;
        }
        let rational_part = c.rational + d * self.rational;
        if rational_part.is_integer() {
            Some(d.to_integer())
        } else {
            None
        }
    }
}

pub(crate) fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Ensures the tag and the stored float agree; a drifted tag is a data error.
pub fn check_tag_consistency(alpha: f64, tag: &ExactAlpha) -> Result<()> {
    let v = tag.value();
    if (v - alpha).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "exact tag value {v} disagrees with stored angle {alpha}"
        )));
    }
    Ok(())
}

/// `|x|` rounded distance to the nearest integer, used in tests and
/// ill-conditioning notes.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64 as Q;

    #[test]
    fn golden_tag_matches_float() {
        let a = ExactAlpha::golden();
        assert!((a.value() - 0.6180339887498949).abs() < 1e-15);
        check_tag_consistency(a.value(), &a).unwrap();
    }

    #[test]
    fn membership_zero_scalar_always_integer_shift() {
        let a = ExactAlpha::golden();
        assert_eq!(a.integer_shift_witness(&ExactScalar::zero()), Some(0));
    }

    #[test]
    fn membership_alpha_multiple() {
        // c = 3α - 2 lies in Z + αZ with d = -3.
        let a = ExactAlpha::golden();
        let c = ExactScalar::new(Q::from_integer(-2), Q::from_integer(3));
        assert_eq!(a.integer_shift_witness(&c), Some(-3));
    }

    #[test]
    fn membership_rejects_generic_rational() {
        let a = ExactAlpha::golden();
        // 1/3 requires d = 0 and 1/3 is not an integer.
        let c = ExactScalar::rational(Q::new(1, 3));
        assert_eq!(a.integer_shift_witness(&c), None);
    }

    #[test]
    fn membership_rejects_incommensurate_scale() {
        // α = α₀/2: c = α₀/3 would need d = -2/3, not an integer.
        let a = ExactAlpha::new(Q::zero(), Q::new(1, 2), NamedIrrational::GoldenMean).unwrap();
        let c = ExactScalar::new(Q::zero(), Q::new(1, 3));
        assert_eq!(a.integer_shift_witness(&c), None);
    }
}
