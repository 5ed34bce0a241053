//! Scalar abstractions.
//!
//! Continuous quantities (simplex coordinates, `phi`/`psi`, entropies) are
//! generic over [`Real`], i.e. `f32` or `f64`. Piecewise-affine Psi-class
//! functions and exact shuffle laws only need field operations and ordering,
//! so they are generic over [`Field`], which is also implemented by
//! [`num_rational::BigRational`] for exact arithmetic.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

/// IEEE floating point scalar.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field: enough for exact piecewise-linear algebra and probability
/// bookkeeping.
pub trait Field: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Lossy conversion for reporting.
    fn to_f64(&self) -> f64;
    /// Parse a decimal literal such as `"0.005"` exactly where possible.
    fn from_decimal(s: &str) -> Option<Self>;
}

impl Field for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Field for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn from_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Field for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Huge numerators/denominators: go through the string form.
            let n: f64 = self.numer().to_string().parse().unwrap_or(f64::NAN);
            let d: f64 = self.denom().to_string().parse().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn from_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac)
            .parse()
            .ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(digits, den);
        Some(if neg { -r } else { r })
    }
}

/// Converts a finite `f64` into any [`Field`] (exact for dyadic values).
pub fn field_from_f64<F: Field + FromPrimitive>(x: f64) -> F {
    F::from_f64(x).expect("finite value")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        let r = BigRational::from_decimal("0.005").unwrap();
        assert_eq!(r, BigRational::from_ratio(1, 200));
        let r = BigRational::from_decimal("-6.5").unwrap();
        assert_eq!(r, BigRational::from_ratio(-13, 2));
        assert_eq!(BigRational::from_decimal("3").unwrap(), BigRational::from_ratio(3, 1));
        assert!(BigRational::from_decimal("x").is_none());
    }

    #[test]
    fn real_constant() {
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
    }
}
