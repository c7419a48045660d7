//! Exact-or-enclosed scalars.
//!
//! Quantities that stay rational in the inputs (circle positions,
//! distances, shear constants) are carried exactly; anything that went
//! through a logarithm is an outward-rounded [`Interval`]. Mixing the
//! two demotes to an enclosure at the interval's precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::interval::{Interval, IntervalError};

/// Outcome of an error-aware comparison. `Indeterminate` means the
/// enclosures overlap at the working precision; callers retry at higher
/// precision or surface a precision error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TernaryOrder {
    Less,
    Greater,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx(Interval),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(r)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_zero())
    }

    /// The underlying rational if this scalar is exact.
    pub fn exact_value(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn as_interval(&self, prec: u32) -> Interval {
        match self {
            Scalar::Exact(r) => Interval::from_rational(r, prec),
            Scalar::Approx(i) => i.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(i) => i.to_f64(),
        }
    }

    /// Absolute half-width of the enclosure (zero for exact values).
    pub fn err_rational(&self) -> BigRational {
        match self {
            Scalar::Exact(_) => BigRational::zero(),
            Scalar::Approx(i) => i.width_rational() / BigRational::from_integer(BigInt::from(2)),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => {
                let p = self.join_prec(other);
                Scalar::Approx(self.as_interval(p).add(&other.as_interval(p)))
            }
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => {
                let p = self.join_prec(other);
                Scalar::Approx(self.as_interval(p).sub(&other.as_interval(p)))
            }
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (Scalar::Approx(i), Scalar::Exact(r)) | (Scalar::Exact(r), Scalar::Approx(i)) => {
                Scalar::Approx(i.mul_rational(r))
            }
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a.mul(b)),
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, IntervalError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if b.is_zero() {
                    Err(IntervalError::DivByZero)
                } else {
                    Ok(Scalar::Exact(a / b))
                }
            }
            _ => {
                let p = self.join_prec(other);
                Ok(Scalar::Approx(self.as_interval(p).div(&other.as_interval(p))?))
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(i) => Scalar::Approx(i.neg()),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(i) => Scalar::Approx(i.abs()),
        }
    }

    pub fn ln(&self, prec: u32) -> Result<Scalar, IntervalError> {
        Ok(Scalar::Approx(self.as_interval(prec).ln()?))
    }

    /// Error-aware ordering. Exactly equal rationals compare
    /// `Indeterminate` here; use [`Scalar::cmp_exact`] when both sides
    /// are exact and a total order is wanted.
    pub fn cmp(&self, other: &Scalar) -> TernaryOrder {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => match a.cmp(b) {
                std::cmp::Ordering::Less => TernaryOrder::Less,
                std::cmp::Ordering::Greater => TernaryOrder::Greater,
                std::cmp::Ordering::Equal => TernaryOrder::Indeterminate,
            },
            (Scalar::Exact(a), Scalar::Approx(i)) => match i.cmp_rational(a) {
                Some(std::cmp::Ordering::Less) => TernaryOrder::Less,
                Some(std::cmp::Ordering::Greater) => TernaryOrder::Greater,
                _ => TernaryOrder::Indeterminate,
            },
            (Scalar::Approx(i), Scalar::Exact(b)) => match i.cmp_rational(b) {
                Some(std::cmp::Ordering::Less) => TernaryOrder::Greater,
                Some(std::cmp::Ordering::Greater) => TernaryOrder::Less,
                _ => TernaryOrder::Indeterminate,
            },
            (Scalar::Approx(a), Scalar::Approx(b)) => match a.partial_cmp_itv(b) {
                Some(std::cmp::Ordering::Less) => TernaryOrder::Less,
                Some(std::cmp::Ordering::Greater) => TernaryOrder::Greater,
                _ => TernaryOrder::Indeterminate,
            },
        }
    }

    /// Total order for two exact scalars; None if either is an enclosure.
    pub fn cmp_exact(&self, other: &Scalar) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    fn join_prec(&self, other: &Scalar) -> u32 {
        let p = |s: &Scalar| match s {
            Scalar::Exact(_) => 0,
            Scalar::Approx(i) => i.prec(),
        };
        p(self).max(p(other)).max(64)
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", decimal_string(r, 24)),
            Scalar::Approx(i) => write!(f, "{}", i),
        }
    }
}

/// Render a rational in plain decimal with `digits` fractional digits,
/// truncating toward zero. Deterministic across platforms.
pub fn decimal_string(r: &BigRational, digits: u32) -> String {
    let neg = r.is_negative();
    let abs = r.abs();
    let scaled = abs.numer() * BigInt::from(10u8).pow(digits) / abs.denom();
    let s = scaled.to_string();
    let digits = digits as usize;
    let (int_part, frac_part) = if s.len() > digits {
        (s[..s.len() - digits].to_string(), s[s.len() - digits..].to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", s, width = digits))
    };
    let sign = if neg && (int_part != "0" || frac_part.bytes().any(|b| b != b'0')) {
        "-"
    } else {
        ""
    };
    format!("{sign}{int_part}.{frac_part}")
}

/// Parse a plain or scientific decimal literal into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0i64),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = joined.parse().ok()?;
    let shift = exp10 - frac_part.len() as i64;
    let r = if shift >= 0 {
        BigRational::from_integer(numer * BigInt::from(10u8).pow(shift as u32))
    } else {
        BigRational::new(numer, BigInt::from(10u8).pow((-shift) as u32))
    };
    Some(r * BigRational::from_integer(BigInt::from(sign)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::from_rational(rat(1, 3));
        let b = Scalar::from_rational(rat(1, 6));
        let s = a.add(&b);
        assert!(s.is_exact());
        assert_eq!(s.cmp_exact(&Scalar::from_rational(rat(1, 2))), Some(std::cmp::Ordering::Equal));
    }

    #[test]
    fn mixing_demotes_to_enclosure() {
        let a = Scalar::from_rational(rat(2, 1)).ln(128).unwrap();
        let b = Scalar::from_rational(rat(1, 2));
        assert!(!a.add(&b).is_exact());
    }

    #[test]
    fn ternary_comparison_detects_separation() {
        let l2 = Scalar::from_rational(rat(2, 1)).ln(128).unwrap();
        assert_eq!(l2.cmp(&Scalar::from_rational(rat(7, 10))), TernaryOrder::Less);
        assert_eq!(l2.cmp(&Scalar::from_rational(rat(6, 10))), TernaryOrder::Greater);
        assert_eq!(
            Scalar::from_int(1).cmp(&Scalar::from_int(1)),
            TernaryOrder::Indeterminate
        );
    }

    #[test]
    fn decimal_roundtrip() {
        assert_eq!(decimal_string(&rat(1, 8), 6), "0.125000");
        assert_eq!(decimal_string(&rat(-22, 7), 4), "-3.1428");
        assert_eq!(parse_decimal("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_decimal("-3.5e-2").unwrap(), rat(-7, 200));
        assert_eq!(parse_decimal("1e3").unwrap(), rat(1000, 1));
        assert_eq!(parse_decimal("2.5E+1").unwrap(), rat(25, 1));
        assert!(parse_decimal("abc").is_none());
    }
}
