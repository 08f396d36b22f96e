//! Extended-precision scalar context.
//!
//! Every [`BigScalar`] created through a [`Precision`] carries the same
//! mantissa width, so mixed arithmetic (`a.clone() * &b`) stays at that width.
//! Rounding is MPFR's default round-to-nearest-even.

use rug::{Float, Rational};

use crate::error::{Result, VtdError};

/// Binary floating-point number with a configurable mantissa width.
pub type BigScalar = Float;

/// Mantissa width shared by all scalars of one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
        }
    }
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 512;
    pub const MIN_BITS: u32 = 128;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(VtdError::PrecisionTooLow(bits));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn zero(&self) -> BigScalar {
        Float::new(self.bits)
    }

    pub fn one(&self) -> BigScalar {
        Float::with_val(self.bits, 1)
    }

    pub fn int(&self, value: i64) -> BigScalar {
        Float::with_val(self.bits, value)
    }

    pub fn f64(&self, value: f64) -> BigScalar {
        Float::with_val(self.bits, value)
    }

    /// `num / den`, correctly rounded.
    pub fn ratio(&self, num: i64, den: i64) -> BigScalar {
        Float::with_val(self.bits, Rational::from((num, den)))
    }

    pub fn rational(&self, value: &Rational) -> BigScalar {
        Float::with_val(self.bits, value)
    }

    /// Re-rounds a scalar of any width to this precision.
    pub fn convert(&self, value: &Float) -> BigScalar {
        Float::with_val(self.bits, value)
    }

    /// `2^exp`, exact.
    pub fn pow2(&self, exp: i32) -> BigScalar {
        Float::with_val(self.bits, 1) << exp
    }

    pub fn pi(&self) -> BigScalar {
        Float::with_val(self.bits, rug::float::Constant::Pi)
    }

    /// Machine epsilon of the width, `2^(1-bits)`.
    pub fn epsilon(&self) -> BigScalar {
        self.pow2(1 - self.bits as i32)
    }

    /// Threshold below which a quantity of magnitude `scale` counts as an exact zero:
    /// `2^(-bits+64) * scale`.
    pub fn zero_tolerance(&self, scale: &Float) -> BigScalar {
        self.pow2(64 - self.bits as i32) * scale
    }

    /// Default Newton tolerance `2^(-3 bits / 4)`.
    pub fn newton_tolerance(&self) -> BigScalar {
        self.pow2(-(3 * self.bits as i32) / 4)
    }

    /// Factorial as a scalar.
    pub fn factorial(&self, n: u32) -> BigScalar {
        Float::with_val(self.bits, rug::Integer::from(rug::Integer::factorial(n)))
    }
}

/// Maximum absolute value of a slice, zero for an empty slice.
pub fn norm_inf(prec: Precision, values: &[Float]) -> Float {
    values
        .iter()
        .map(|v| v.clone().abs())
        .fold(prec.zero(), |acc, v| if v > acc { v } else { acc })
}

/// Euclidean norm.
pub fn norm2(prec: Precision, values: &[Float]) -> Float {
    values
        .iter()
        .fold(prec.zero(), |acc, v| acc + v.clone().square())
        .sqrt()
}

/// Dot product of two equally long slices.
pub fn dot(prec: Precision, a: &[Float], b: &[Float]) -> Float {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = prec.zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.clone() * y;
    }
    acc
}
