use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::precision::{self, Precision, Real};

/// Coefficient field for [`FracSeries`]: exact rationals or
/// extended-precision reals.
pub trait Scalar: Clone + Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_ratio_like(&self, r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_real(&self, prec: Precision) -> Real;
    fn is_exact_one(&self) -> bool;
}

impl Scalar for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_ratio_like(&self, r: &BigRational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_real(&self, prec: Precision) -> Real {
        precision::from_ratio(self, prec)
    }
    fn is_exact_one(&self) -> bool {
        self.is_one()
    }
}

fn prec_of(x: &Real) -> Precision {
    Precision(x.precision().max(64))
}

impl Scalar for Real {
    fn zero_like(&self) -> Self {
        precision::from_i64(0, prec_of(self))
    }
    fn one_like(&self) -> Self {
        precision::from_i64(1, prec_of(self))
    }
    fn from_ratio_like(&self, r: &BigRational) -> Self {
        precision::from_ratio(r, prec_of(self))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn to_real(&self, prec: Precision) -> Real {
        self.clone().with_precision(prec.0).value()
    }
    fn is_exact_one(&self) -> bool {
        *self == self.one_like()
    }
}

/// Truncated expansion `Σ_{k<s} b_k n^{-k/q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracSeries<T: Scalar> {
    q: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> FracSeries<T> {
    pub fn new(q: usize, coeffs: Vec<T>) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("branching order q must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("a series needs at least one coefficient".into()));
        }
        Ok(FracSeries { q, coeffs })
    }

    /// `[1, 0, ..., 0]` of length `s`, built in the field of `like`.
    pub fn unit(q: usize, s: usize, like: &T) -> Self {
        let mut coeffs = vec![like.zero_like(); s.max(1)];
        coeffs[0] = like.one_like();
        FracSeries { q: q.max(1), coeffs }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Truncation length.
    pub fn s(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.coeffs[0].is_exact_one()
    }

    pub fn truncate(&self, s: usize) -> Self {
        FracSeries { q: self.q, coeffs: self.coeffs[..s.min(self.s())].to_vec() }
    }

    /// `Σ b_k n^{-k/q}` in extended precision.
    pub fn eval(&self, n: u64, prec: Precision) -> Real {
        let u = precision::pow_ratio(&precision::from_u64(n, prec), -1, self.q as i64, prec);
        let mut acc = precision::from_i64(0, prec);
        for b in self.coeffs.iter().rev() {
            acc = &acc * &u + b.to_real(prec);
        }
        acc
    }
}

/// Cauchy product, truncated to the shorter input.
pub fn fe_product<T: Scalar>(f: &FracSeries<T>, g: &FracSeries<T>) -> Result<FracSeries<T>> {
    if f.q != g.q {
        return Err(Error::Domain(format!("mismatched branching orders {} and {}", f.q, g.q)));
    }
    let s = f.s().min(g.s());
    let coeffs = (0..s)
        .map(|k| {
            (0..=k).fold(f.coeffs[0].zero_like(), |acc, i| acc.add(&f.coeffs[i].mul(&g.coeffs[k - i])))
        })
        .collect();
    Ok(FracSeries { q: f.q, coeffs })
}

/// Reciprocal of a normalized series: `e_0 = 1`, `e_k = -Σ_{j=1}^k b_j e_{k-j}`.
pub fn fe_reciprocal<T: Scalar>(f: &FracSeries<T>) -> Result<FracSeries<T>> {
    if !f.is_normalized() {
        return Err(Error::Domain("reciprocal needs a normalized series (b_0 = 1)".into()));
    }
    let mut e: Vec<T> = Vec::with_capacity(f.s());
    e.push(f.coeffs[0].one_like());
    for k in 1..f.s() {
        let acc = (1..=k).fold(f.coeffs[0].zero_like(), |acc, j| acc.add(&f.coeffs[j].mul(&e[k - j])));
        e.push(acc.neg());
    }
    Ok(FracSeries { q: f.q, coeffs: e })
}

/// Generalized binomial coefficient `C(a, j)` for rational `a`.
pub fn binom_ratio(a: &BigRational, j: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..j {
        acc = acc * (a - BigRational::from_integer(BigInt::from(i))) / BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// The series of `n ↦ F(n + ℓ)`, from
/// `(n+ℓ)^{-k/q} = n^{-k/q} Σ_j C(-k/q, j) ℓ^j n^{-j}`.
pub fn fe_shift<T: Scalar>(f: &FracSeries<T>, ell: i64) -> FracSeries<T> {
    if ell == 0 {
        return f.clone();
    }
    let (q, s) = (f.q, f.s());
    let mut out = vec![f.coeffs[0].zero_like(); s];
    for (k, b) in f.coeffs.iter().enumerate() {
        let a = BigRational::new(-BigInt::from(k), BigInt::from(q));
        let mut j = 0;
        while k + q * j < s {
            let c = binom_ratio(&a, j) * BigRational::from_integer(BigInt::from(ell).pow(j as u32));
            let r = k + q * j;
            out[r] = out[r].add(&b.mul(&b.from_ratio_like(&c)));
            j += 1;
        }
    }
    FracSeries { q, coeffs: out }
}

/// Sum of sequences `n^{-e_t/q} β^{(t)}` whose expansions are the given
/// series. Returns the expansion of `(n^{-e/q}/T) Σ_t β^{(t)}` with
/// `e = max e_t` and `T` the number of terms attaining it, truncated to the
/// shortest input.
pub fn fe_sum<T: Scalar>(terms: &[(FracSeries<T>, i64)]) -> Result<(FracSeries<T>, usize)> {
    let Some((first, _)) = terms.first() else {
        return Err(Error::Domain("sum of an empty list".into()));
    };
    let q = first.q;
    if terms.iter().any(|(f, _)| f.q != q) {
        return Err(Error::Domain("mismatched branching orders in sum".into()));
    }
    let e = terms.iter().map(|(_, e)| *e).max().expect("nonempty");
    let t = terms.iter().filter(|(_, et)| *et == e).count();
    let s = terms.iter().map(|(f, _)| f.s()).min().expect("nonempty");
    let zero = first.coeffs[0].zero_like();
    let mut out = vec![zero; s];
    for (f, et) in terms {
        let delta = (e - et) as usize;
        for (k, b) in f.coeffs.iter().enumerate() {
            if k + delta < s {
                out[k + delta] = out[k + delta].add(b);
            }
        }
    }
    let inv_t = first.coeffs[0].from_ratio_like(&BigRational::new(BigInt::one(), BigInt::from(t)));
    let coeffs = out.iter().map(|c| c.mul(&inv_t)).collect();
    Ok((FracSeries { q, coeffs }, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64) -> BigRational {
        BigRational::from_integer(a.into())
    }

    fn ser(q: usize, v: &[i64]) -> FracSeries<BigRational> {
        FracSeries::new(q, v.iter().map(|&a| r(a)).collect()).unwrap()
    }

    #[test]
    fn product_examples() {
        assert_eq!(fe_product(&ser(1, &[1, 1, 0]), &ser(1, &[1, -1, 0])).unwrap(), ser(1, &[1, 0, -1]));
        let f = ser(3, &[1, 4, -2, 7]);
        assert_eq!(fe_product(&f, &FracSeries::unit(3, 4, &r(0))).unwrap(), f);
        assert!(matches!(fe_product(&ser(1, &[1]), &ser(2, &[1])), Err(Error::Domain(_))));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(fe_reciprocal(&ser(1, &[1, 1, 0, 0])).unwrap(), ser(1, &[1, -1, 1, -1]));
        let u = FracSeries::unit(2, 5, &r(0));
        assert_eq!(fe_reciprocal(&u).unwrap(), u);
        assert!(fe_reciprocal(&ser(1, &[2, 1])).is_err());
    }

    #[test]
    fn shift_examples() {
        let f = ser(1, &[1, 1, 0, 0, 0]);
        assert_eq!(fe_shift(&f, 0), f);
        assert_eq!(fe_shift(&f, 1), ser(1, &[1, 1, -1, 1, -1]));
        let u = FracSeries::unit(3, 6, &r(0));
        assert_eq!(fe_shift(&u, -4), u);
    }

    #[test]
    fn sum_examples() {
        let f = ser(2, &[1, 0]);
        assert_eq!(fe_sum(&[(f.clone(), 0)]).unwrap(), (f.clone(), 1));
        assert_eq!(fe_sum(&[(f.clone(), 0), (f.clone(), 0)]).unwrap(), (f.clone(), 2));
        assert_eq!(fe_sum(&[(f.clone(), 0), (f.clone(), 1)]).unwrap(), (ser(2, &[1, 1]), 1));
        assert!(fe_sum::<BigRational>(&[]).is_err());
    }

    #[test]
    fn real_coefficients_behave_like_rationals() {
        let p = Precision::from_digits(40);
        let f = ser(2, &[1, 3, -1, 2]);
        let fr = FracSeries::new(2, f.coeffs().iter().map(|c| c.to_real(p)).collect()).unwrap();
        let inv = fe_reciprocal(&fr).unwrap();
        let exact = fe_reciprocal(&f).unwrap();
        for (a, b) in inv.coeffs().iter().zip(exact.coeffs()) {
            assert!((precision::to_f64(a) - precision::to_f64(&b.to_real(p))).abs() < 1e-30);
        }
        let v = precision::to_f64(&f.eval(4, p));
        assert!((v - (1.0 + 1.5 - 0.25 + 0.25)).abs() < 1e-15);
    }
}
