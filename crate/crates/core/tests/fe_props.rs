//! Property tests for fractional expansions and the saddle-point radius.

use freeprod::fe::{self, powser, FracSeries, PolyDescriptor};
use freeprod::precision::{self, Precision, Real};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn ratio() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=6).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
}

/// Normalized series (`b_0 = 1`) with `q ∈ 1..=3` and `s ∈ 1..=6`.
fn normalized(q: usize, s: usize) -> impl Strategy<Value = FracSeries<BigRational>> {
    prop::collection::vec(ratio(), s - 1).prop_map(move |rest| {
        let mut c = vec![BigRational::one()];
        c.extend(rest);
        FracSeries::new(q, c).unwrap()
    })
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=6)
}

fn pair() -> impl Strategy<Value = (FracSeries<BigRational>, FracSeries<BigRational>)> {
    shape().prop_flat_map(|(q, s)| (normalized(q, s), normalized(q, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reciprocal_is_an_exact_inverse(f in shape().prop_flat_map(|(q, s)| normalized(q, s))) {
        let inv = fe::fe_reciprocal(&f).unwrap();
        let unit = FracSeries::unit(f.q(), f.s(), &BigRational::zero());
        prop_assert_eq!(fe::fe_product(&f, &inv).unwrap(), unit);
        prop_assert_eq!(fe::fe_reciprocal(&inv).unwrap(), f);
    }

    #[test]
    fn product_is_commutative_with_unit((f, g) in pair()) {
        let unit = FracSeries::unit(f.q(), f.s(), &BigRational::zero());
        prop_assert_eq!(fe::fe_product(&f, &g).unwrap(), fe::fe_product(&g, &f).unwrap());
        prop_assert_eq!(fe::fe_product(&f, &unit).unwrap(), f);
    }

    #[test]
    fn product_is_associative((f, g) in pair(), h_tail in prop::collection::vec(ratio(), 5)) {
        let mut hc = vec![BigRational::one()];
        hc.extend(h_tail.into_iter().take(f.s() - 1));
        let h = FracSeries::new(f.q(), hc).unwrap();
        let left = fe::fe_product(&fe::fe_product(&f, &g).unwrap(), &h).unwrap();
        let right = fe::fe_product(&f, &fe::fe_product(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn shifts_compose((f, _) in pair(), a in -4i64..=4, b in -4i64..=4) {
        let ab = fe::fe_shift(&fe::fe_shift(&f, a), b);
        prop_assert_eq!(ab, fe::fe_shift(&f, a + b));
        prop_assert_eq!(fe::fe_shift(&fe::fe_shift(&f, a), -a), f);
    }

    #[test]
    fn reciprocal_commutes_with_shift((f, _) in pair(), ell in 1i64..=4) {
        let a = fe::fe_reciprocal(&fe::fe_shift(&f, ell)).unwrap();
        let b = fe::fe_shift(&fe::fe_reciprocal(&f).unwrap(), ell);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn evaluation_is_consistent_with_product((f, g) in pair()) {
        // the truncation error of the product is O(n^{-s/q}); at n = 10^(6q)
        // that is at most a constant times 10^(-6s)
        let prec = Precision::from_digits(80);
        let n = 10u64.pow(6 * f.q() as u32);
        let fg = fe::fe_product(&f, &g).unwrap();
        let err: Real = fg.eval(n, prec) - f.eval(n, prec) * g.eval(n, prec);
        let bound = 1e3 * 10f64.powi(-6 * f.s() as i32);
        prop_assert!(precision::to_f64(&err).abs() <= bound);
    }

    #[test]
    fn fit_recovers_generating_series(f in (1usize..=3, 1usize..=4).prop_flat_map(|(q, s)| normalized(q, s)), extra in 0usize..=2) {
        let prec = Precision::from_digits(60);
        let vals: Vec<(u64, Real)> = fe::geometric_grid(200, 200_000, 16).into_iter().map(|n| (n, f.eval(n, prec))).collect();
        let fit = fe::fe_fit(&vals, f.q(), f.s() + extra, prec).unwrap();
        let got = fit.coeffs_f64();
        for (k, want) in f.coeffs().iter().enumerate() {
            let w = num_traits::ToPrimitive::to_f64(want).unwrap();
            prop_assert!((got[k] - w).abs() < 1e-15 * (1.0 + w.abs()), "{got:?}");
        }
        for g in &got[f.s()..] {
            prop_assert!(g.abs() < 1e-12);
        }
        prop_assert!(fit.residual < 1e-30);
    }

    #[test]
    fn lagrange_inversion_solves_the_functional_equation(tail in prop::collection::vec(ratio(), 3), c0 in 1i64..=3) {
        let len = 7;
        let mut phi = vec![BigRational::from_integer(c0.into())];
        phi.extend(tail);
        let (z, _) = powser::lagrange_inversion(&phi, len).unwrap();
        // z = w φ(z) coefficientwise up to w^(len-1)
        let phi_z = powser::compose(&phi, &z, len).unwrap();
        let mut w_phi_z = vec![BigRational::zero(); len];
        for k in 1..len {
            w_phi_z[k] = phi_z[k - 1].clone();
        }
        prop_assert_eq!(z, w_phi_z);
    }
}

#[test]
fn saddle_radius_is_increasing() {
    let prec = Precision::from_digits(40);
    for m in [2usize, 3, 4, 6] {
        let p = PolyDescriptor::cyclic(m).unwrap();
        let mut prev = precision::from_i64(0, prec);
        for n in (1..400u64).chain([1_000, 1_001, 100_000, 100_001]) {
            let r = fe::rn_solve(&p, n, prec).unwrap();
            assert!(r > prev, "C{m} at n = {n}");
            prev = r;
        }
    }
}
