//! Extended-precision reals and conversions from exact integers/rationals.

use dashu_base::{Abs, Approximation};
use dashu_float::{round::mode::HalfAway, FBig};
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;

/// Binary arbitrary-precision float.
pub type Real = FBig<HalfAway, 2>;

/// Working precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Precision(pub usize);

impl Precision {
    /// Enough bits for `digits` significant decimal digits plus guard bits.
    pub fn from_digits(digits: usize) -> Self {
        Precision((digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 16)
    }

    pub fn bits(self) -> usize {
        self.0
    }
}

impl Default for Precision {
    /// 60 significant digits.
    fn default() -> Self {
        Precision::from_digits(60)
    }
}

fn unwrap<T>(a: Approximation<T, dashu_float::round::Rounding>) -> T {
    a.value()
}

pub fn ubig(x: &BigUint) -> UBig {
    UBig::from_le_bytes(&x.to_bytes_le())
}

pub fn ibig(x: &BigInt) -> IBig {
    let (sign, mag) = x.to_bytes_le();
    let m = IBig::from(UBig::from_le_bytes(&mag));
    if sign == Sign::Minus {
        -m
    } else {
        m
    }
}

pub fn from_biguint(x: &BigUint, prec: Precision) -> Real {
    unwrap(Real::from(ubig(x)).with_precision(prec.0))
}

pub fn from_bigint(x: &BigInt, prec: Precision) -> Real {
    unwrap(Real::from(ibig(x)).with_precision(prec.0))
}

pub fn from_ratio(x: &BigRational, prec: Precision) -> Real {
    from_bigint(x.numer(), prec) / from_bigint(x.denom(), prec)
}

/// Quotient of two non-negative integers without forming a reduced fraction.
pub fn quotient(num: &BigUint, den: &BigUint, prec: Precision) -> Real {
    from_biguint(num, prec) / from_biguint(den, prec)
}

pub fn from_i64(x: i64, prec: Precision) -> Real {
    unwrap(Real::from(x).with_precision(prec.0))
}

pub fn from_u64(x: u64, prec: Precision) -> Real {
    unwrap(Real::from(x).with_precision(prec.0))
}

/// Exact conversion of an `f64` (finite values only).
pub fn from_f64(x: f64, prec: Precision) -> Real {
    let r = Real::try_from(x).expect("finite f64");
    unwrap(r.with_precision(prec.0))
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

/// `x^(num/den)` for positive `x`.
pub fn pow_ratio(x: &Real, num: i64, den: i64, prec: Precision) -> Real {
    let e = from_i64(num, prec) / from_i64(den, prec);
    x.powf(&e)
}

pub fn pi(prec: Precision) -> Real {
    // 4 atan(1) via Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    fn atan_inv(k: i64, prec: Precision) -> Real {
        let x = from_i64(1, prec) / from_i64(k, prec);
        let x2 = &x * &x;
        let mut term = x.clone();
        let mut sum = x;
        let eps = from_i64(1, prec) >> (prec.0 as isize + 8);
        let mut n = 1i64;
        loop {
            term = -(&term * &x2);
            let t = &term / from_i64(2 * n + 1, prec);
            if t.clone().abs() < eps {
                break;
            }
            sum += t;
            n += 1;
        }
        sum
    }
    from_i64(16, prec) * atan_inv(5, prec) - from_i64(4, prec) * atan_inv(239, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Num;

    #[test]
    fn conversions_are_exact_enough() {
        let p = Precision::from_digits(50);
        let big = BigUint::from_str_radix("123456789012345678901234567890123456789", 10).unwrap();
        let r = from_biguint(&big, p);
        assert!((to_f64(&r) - 1.2345678901234568e38).abs() < 1e23);
        let q = BigRational::new(BigInt::from(-1), BigInt::from(3));
        assert!((to_f64(&from_ratio(&q, p)) + 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn pi_to_many_digits() {
        let p = Precision::from_digits(60);
        let v = pi(p);
        let err = v - from_f64(std::f64::consts::PI, p);
        assert!(to_f64(&err).abs() < 1.3e-16);
        assert!((to_f64(&pow_ratio(&from_i64(8, p), 1, 3, p)) - 2.0).abs() < 1e-15);
    }
}
