//! Truncated formal power series with exact rational coefficients.
//!
//! A series is a coefficient vector `a_0, a_1, ...`; every operation takes
//! the truncation length `len` of its output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Series = Vec<BigRational>;

fn at(a: &[BigRational], k: usize) -> BigRational {
    a.get(k).cloned().unwrap_or_else(BigRational::zero)
}

fn int(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

pub fn mul(a: &[BigRational], b: &[BigRational], len: usize) -> Series {
    (0..len)
        .map(|k| {
            let mut acc = BigRational::zero();
            for i in 0..=k.min(a.len().saturating_sub(1)) {
                if k - i < b.len() && !a[i].is_zero() && !b[k - i].is_zero() {
                    acc += &a[i] * &b[k - i];
                }
            }
            acc
        })
        .collect()
}

/// Multiplicative inverse; requires `a_0 ≠ 0`.
pub fn inverse(a: &[BigRational], len: usize) -> Result<Series> {
    let a0 = at(a, 0);
    if a0.is_zero() {
        return Err(Error::Domain("series with zero constant term has no inverse".into()));
    }
    let inv0 = a0.recip();
    let mut out: Series = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            out.push(inv0.clone());
            continue;
        }
        let mut acc = BigRational::zero();
        for j in 1..=k.min(a.len().saturating_sub(1)) {
            acc += &a[j] * &out[k - j];
        }
        out.push(-acc * &inv0);
    }
    Ok(out)
}

/// `exp(a)` for `a_0 = 0`, from `f' = a' f`.
pub fn exp(a: &[BigRational], len: usize) -> Result<Series> {
    if !at(a, 0).is_zero() {
        return Err(Error::Domain("exp needs a series with zero constant term".into()));
    }
    let mut f: Series = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            f.push(BigRational::one());
            continue;
        }
        let mut acc = BigRational::zero();
        for j in 1..=k.min(a.len().saturating_sub(1)) {
            acc += int(j) * &a[j] * &f[k - j];
        }
        f.push(acc / int(k));
    }
    Ok(f)
}

/// `log(a)` for `a_0 = 1`.
pub fn log(a: &[BigRational], len: usize) -> Result<Series> {
    if !at(a, 0).is_one() {
        return Err(Error::Domain("log needs a series with constant term 1".into()));
    }
    let mut b: Series = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            b.push(BigRational::zero());
            continue;
        }
        let mut acc = BigRational::zero();
        for j in 1..k {
            acc += int(j) * &b[j] * at(a, k - j);
        }
        b.push(at(a, k) - acc / int(k));
    }
    Ok(b)
}

/// `a^p` for rational `p` and `a_0 = 1`, by the recurrence
/// `k f_k = Σ_{j=1}^k ((p+1) j - k) a_j f_{k-j}`.
pub fn pow(a: &[BigRational], p: &BigRational, len: usize) -> Result<Series> {
    if !at(a, 0).is_one() {
        return Err(Error::Domain("fractional power needs a series with constant term 1".into()));
    }
    let p1 = p + BigRational::one();
    let mut f: Series = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            f.push(BigRational::one());
            continue;
        }
        let mut acc = BigRational::zero();
        for j in 1..=k.min(a.len().saturating_sub(1)) {
            if !a[j].is_zero() {
                acc += (&p1 * int(j) - int(k)) * &a[j] * &f[k - j];
            }
        }
        f.push(acc / int(k));
    }
    Ok(f)
}

/// `a(b(z))` for `b_0 = 0`, by Horner's rule.
pub fn compose(a: &[BigRational], b: &[BigRational], len: usize) -> Result<Series> {
    if !at(b, 0).is_zero() {
        return Err(Error::Domain("inner series of a composition must have zero constant term".into()));
    }
    let mut acc: Series = vec![BigRational::zero(); len];
    for c in a.iter().rev() {
        acc = mul(&acc, b, len);
        if len > 0 {
            acc[0] += c;
        }
    }
    Ok(acc)
}

/// The series `z(w) = Σ_ν (β_ν/ν) w^ν` solving `z = w φ(z)`, with
/// `β_ν = [z^{ν-1}] φ^ν`. Returns `(z, β)` where `z[0] = 0` and `β[0]` is
/// unused (zero).
pub fn lagrange_inversion(phi: &[BigRational], len: usize) -> Result<(Series, Series)> {
    if at(phi, 0).is_zero() {
        return Err(Error::Domain("Lagrange inversion needs φ(0) ≠ 0".into()));
    }
    let mut z = vec![BigRational::zero(); len];
    let mut beta = vec![BigRational::zero(); len];
    let mut power: Series = vec![BigRational::one()];
    for nu in 1..len {
        power = mul(&power, phi, len);
        beta[nu] = at(&power, nu - 1);
        z[nu] = &beta[nu] / int(nu);
    }
    Ok((z, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn inverse_and_mul() {
        let a = vec![q(1, 1), q(1, 1)];
        let inv = inverse(&a, 5).unwrap();
        assert_eq!(inv, vec![q(1, 1), q(-1, 1), q(1, 1), q(-1, 1), q(1, 1)]);
        let one = mul(&a, &inv, 5);
        assert_eq!(one, vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
        assert!(inverse(&[q(0, 1)], 3).is_err());
    }

    #[test]
    fn exp_log_roundtrip() {
        let a = vec![q(0, 1), q(1, 1)];
        let e = exp(&a, 6).unwrap();
        assert_eq!(e, vec![q(1, 1), q(1, 1), q(1, 2), q(1, 6), q(1, 24), q(1, 120)]);
        assert_eq!(log(&e, 6).unwrap()[..2], a[..]);
        let b = vec![q(1, 1), q(2, 3), q(-1, 5), q(7, 2)];
        assert_eq!(exp(&log(&b, 8).unwrap(), 8).unwrap()[..4], b[..]);
    }

    #[test]
    fn fractional_power() {
        // (1+z)^{1/2} squared is 1+z
        let a = vec![q(1, 1), q(1, 1)];
        let h = pow(&a, &q(1, 2), 8).unwrap();
        assert_eq!(mul(&h, &h, 8), vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let cube = pow(&[q(1, 1), q(3, 1), q(0, 1), q(1, 5)], &q(1, 3), 7).unwrap();
        let back = mul(&mul(&cube, &cube, 7), &cube, 7);
        assert_eq!(back[..4], [q(1, 1), q(3, 1), q(0, 1), q(1, 5)]);
        assert!(back[4..].iter().all(Zero::is_zero));
    }

    #[test]
    fn compose_with_inverse_function() {
        // z/(1-z) composed with z/(1+z) is z
        let a: Series = (0..8).map(|k| if k == 0 { q(0, 1) } else { q(1, 1) }).collect();
        let b: Series = (0..8).map(|k| if k == 0 { q(0, 1) } else { q(if k % 2 == 1 { 1 } else { -1 }, 1) }).collect();
        let c = compose(&a, &b, 8).unwrap();
        assert_eq!(c[1], q(1, 1));
        assert!(c.iter().enumerate().all(|(k, x)| k == 1 || x.is_zero()));
        assert!(compose(&a, &a.iter().map(|x| x + q(1, 1)).collect::<Vec<_>>(), 3).is_err());
    }

    #[test]
    fn lagrange_square_root() {
        // z = w (1+z)^{1/2}: z = w + w^2/2 + w^3/8 + ...
        let phi = pow(&[q(1, 1), q(1, 1)], &q(1, 2), 8).unwrap();
        let (z, beta) = lagrange_inversion(&phi, 6).unwrap();
        assert_eq!(z[..4], [q(0, 1), q(1, 1), q(1, 2), q(1, 8)]);
        assert_eq!(beta[1..4], [q(1, 1), q(1, 1), q(3, 8)]);
        // z = w φ(z) coefficientwise
        let rhs = compose(&phi, &z, 6).unwrap();
        let mut shifted = vec![q(0, 1)];
        shifted.extend(rhs[..5].iter().cloned());
        assert_eq!(shifted, z);
    }
}
