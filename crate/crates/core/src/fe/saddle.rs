use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use dashu_base::Abs;
use num_traits::{One, Zero};

use super::powser;
use super::series::binom_ratio;
use super::PolyDescriptor;
use crate::error::{Error, Result};
use crate::homcount::CountTable;
use crate::precision::{self, Precision, Real};

fn real_ratio(c: &BigRational, prec: Precision) -> Real {
    precision::from_ratio(c, prec)
}

/// `B_1(r) = r P'(r) = Σ i c_i r^i` and its derivative.
fn b1_and_derivative(p: &PolyDescriptor, r: &Real, prec: Precision) -> (Real, Real) {
    let mut b1 = precision::from_i64(0, prec);
    let mut d = precision::from_i64(0, prec);
    for (i, c) in p.terms() {
        let c = real_ratio(c, prec);
        let ri1 = r.powi((i - 1).into());
        let i = precision::from_u64(i as u64, prec);
        d += &i * &i * &c * &ri1;
        b1 += &i * &c * &ri1 * r;
    }
    (b1, d)
}

/// The unique positive root of `r P'(r) = n + 1`, by Newton's method from
/// `n^{1/q}`.
pub fn rn_solve(p: &PolyDescriptor, n: u64, prec: Precision) -> Result<Real> {
    if n < 1 {
        return Err(Error::Domain("rn_solve needs n ≥ 1".into()));
    }
    let target = precision::from_u64(n + 1, prec);
    let mut r = precision::pow_ratio(&precision::from_u64(n, prec), 1, p.q() as i64, prec);
    let tol_bits = (prec.0 as isize - 12).min(100);
    let tol = precision::from_i64(1, prec) >> tol_bits;
    for _ in 0..200 {
        let (b1, d) = b1_and_derivative(p, &r, prec);
        let step = (b1 - &target) / d;
        r -= &step;
        if step.abs() <= &tol * &r {
            return Ok(r);
        }
    }
    Err(Error::Numeric(format!("Newton iteration for r_{n} did not converge in 200 steps")))
}

/// `ρ_n(s)` together with the expansion data it was built from.
#[derive(Clone, Debug)]
pub struct LagrangeRho {
    pub rho: Real,
    /// `β_ν` for `1 ≤ ν ≤ q+s` (index 0 unused).
    pub beta: Vec<BigRational>,
    /// `γ_i` for `1 ≤ i ≤ q+s-1` (index 0 unused).
    pub gamma: Vec<BigRational>,
}

/// Exact coefficients `γ_1..γ_{q+s-1}` of `G` with
/// `1/r_n = n^{-1/q}(1 + Σ γ_i n^{-i/q})`, plus the `β_ν`.
pub fn saddle_coefficients(p: &PolyDescriptor, s: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let q = p.q();
    // Q(z) = Σ_i i c_i z^{q-i}
    let mut qz = vec![BigRational::zero(); q];
    for (i, c) in p.terms() {
        qz[q - i] = c * BigRational::from_integer(BigInt::from(i));
    }
    let len = q + s + 1;
    let phi = powser::pow(&qz, &BigRational::new(BigInt::one(), BigInt::from(q)), len)?;
    let (z, beta) = powser::lagrange_inversion(&phi, len)?;
    // Σ_ν z_ν u^ν (1 + u^q)^{-ν/q}: coefficient of u^{i+1} is γ_i
    let mut series = vec![BigRational::zero(); len];
    for (nu, zn) in z.iter().enumerate().skip(1) {
        let a = BigRational::new(-BigInt::from(nu), BigInt::from(q));
        let mut j = 0;
        while nu + q * j < len {
            series[nu + q * j] += zn * binom_ratio(&a, j);
            j += 1;
        }
    }
    let mut gamma = vec![BigRational::zero(); q + s];
    for i in 1..q + s {
        gamma[i] = series[i + 1].clone();
    }
    Ok((beta, gamma))
}

/// `ρ_n(s) = n^{1/q} / (1 + G_s(n^{-1/q}))` with `G_s` the first `q+s-1`
/// terms of `G`.
pub fn lagrange_rho(p: &PolyDescriptor, n: u64, s: usize, prec: Precision) -> Result<LagrangeRho> {
    if s < 1 || n < 1 {
        return Err(Error::Domain("lagrange_rho needs s ≥ 1 and n ≥ 1".into()));
    }
    let (beta, gamma) = saddle_coefficients(p, s)?;
    let q = p.q() as i64;
    let nr = precision::from_u64(n, prec);
    let u = precision::pow_ratio(&nr, -1, q, prec);
    let mut g = precision::from_i64(0, prec);
    for c in gamma.iter().skip(1).rev() {
        g = (g + real_ratio(c, prec)) * &u;
    }
    if precision::to_f64(&g).abs() >= 1.0 {
        return Err(Error::Numeric(format!(
            "|G_s(n^(-1/q))| = {} ≥ 1 at n = {n}, s = {s}; n is too small for this truncation",
            precision::to_f64(&g).abs()
        )));
    }
    let rho = precision::pow_ratio(&nr, 1, q, prec) / (precision::from_i64(1, prec) + g);
    Ok(LagrangeRho { rho, beta, gamma })
}

/// `ln n!` in extended precision.
pub fn log_factorial(n: u64, prec: Precision) -> Real {
    let f: BigUint = (2..=n).fold(BigUint::one(), |acc, k| acc * k);
    precision::from_biguint(&f, prec).ln()
}

/// `α_n / M(r_n)` with `α_n = χ_n/n!` and
/// `M(r) = exp(P(r)) / (2 r^n sqrt(π B(r)))`, `B(r) = r B_1'(r)/2`,
/// computed in log space.
pub fn muller_leading_check(p: &PolyDescriptor, table: &CountTable, n: usize, prec: Precision) -> Result<Real> {
    let chi = table.chi(n)?;
    if n < 1 {
        return Err(Error::Domain("muller_leading_check needs n ≥ 1".into()));
    }
    let r = rn_solve(p, n as u64, prec)?;
    let log_alpha = precision::from_biguint(chi, prec).ln() - log_factorial(n as u64, prec);
    let mut pr = precision::from_i64(0, prec);
    let mut b = precision::from_i64(0, prec);
    for (i, c) in p.terms() {
        let term = real_ratio(c, prec) * r.powi(i.into());
        let i2 = precision::from_u64((i * i) as u64, prec);
        b += &i2 * &term;
        pr += term;
    }
    let b = b / precision::from_i64(2, prec);
    let half = precision::from_i64(1, prec) / precision::from_i64(2, prec);
    let log_m = pr
        - precision::from_i64(2, prec).ln()
        - precision::from_u64(n as u64, prec) * r.ln()
        - half * (precision::pi(prec) * b).ln();
    Ok((log_alpha - log_m).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::precision::to_f64;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn rn_closed_forms() {
        let prec = Precision::default();
        let c2 = PolyDescriptor::cyclic(2).unwrap();
        let r = rn_solve(&c2, 100, prec).unwrap();
        let exact = ((4.0f64 * 100.0 + 5.0).sqrt() - 1.0) / 2.0;
        assert!((to_f64(&r) - exact).abs() < 1e-12);
        // r + r^2 = n + 1 to working precision
        let resid = &r + &r * &r - precision::from_u64(101, prec);
        assert!(to_f64(&resid).abs() < 1e-40);
        let triv = PolyDescriptor::cyclic(1).unwrap();
        assert!((to_f64(&rn_solve(&triv, 57, prec).unwrap()) - 58.0).abs() < 1e-30);
        let c3 = PolyDescriptor::cyclic(3).unwrap();
        let mut prev = 0.0;
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let r = to_f64(&rn_solve(&c3, n, prec).unwrap());
            let ratio = r / (n as f64).cbrt();
            assert!(ratio < 1.0 && ratio > prev);
            prev = ratio;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn saddle_coefficients_c2() {
        let c2 = PolyDescriptor::cyclic(2).unwrap();
        let (beta, gamma) = saddle_coefficients(&c2, 2).unwrap();
        assert_eq!(beta[1..4], [q(1, 1), q(1, 1), q(3, 8)]);
        assert_eq!(gamma[1..3], [q(1, 2), q(-3, 8)]);
    }

    #[test]
    fn rho_trivial_and_c2() {
        let prec = Precision::default();
        let triv = PolyDescriptor::cyclic(1).unwrap();
        let rho = lagrange_rho(&triv, 1000, 3, prec).unwrap();
        // (n+1) vs n / (1 - u + u^2 - u^3)
        assert!((to_f64(&rho.rho) - 1001.0).abs() < 1e-5);
        let c2 = PolyDescriptor::cyclic(2).unwrap();
        for s in 1..=3 {
            let r = to_f64(&rn_solve(&c2, 10_000, prec).unwrap());
            let rho = to_f64(&lagrange_rho(&c2, 10_000, s, prec).unwrap().rho);
            assert!((r - rho).abs() < 10f64.powf(-(s as f64) / 2.0 + 0.5), "s={s}");
        }
        assert!(lagrange_rho(&c2, 1, 0, prec).is_err());
    }

    #[test]
    fn muller_ratio_near_one() {
        let prec = Precision::default();
        let t = CountTable::new(&FiniteGroup::cyclic(2).unwrap(), 2000);
        let ratio = to_f64(&muller_leading_check(&t.poly().unwrap(), &t, 2000, prec).unwrap());
        assert!((0.99..=1.01).contains(&ratio), "{ratio}");
        let t = CountTable::new(&FiniteGroup::trivial(), 500);
        let ratio = to_f64(&muller_leading_check(&t.poly().unwrap(), &t, 500, prec).unwrap());
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    }
}
