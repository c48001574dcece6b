//! Property tests for free-product normal forms and element classification.

use freeprod::{ElementClass, FreeProduct, NormalForm, Syllable};
use proptest::prelude::*;

const GROUPS: [&str; 3] = ["C2*C3", "C2*C2*C2", "S3*C2"];

/// Random syllable sequences; adjacent syllables from the same factor are
/// allowed so that normalization has work to do.
fn raw_word(gp: &FreeProduct, max_len: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let orders: Vec<usize> = gp.factors().iter().map(|g| g.order()).collect();
    let m = orders.len();
    prop::collection::vec((0..m, 1usize..64), 0..=max_len)
        .prop_map(move |v| v.into_iter().map(|(f, e)| (f, 1 + e % (orders[f] - 1))).collect())
}

fn build(gp: &FreeProduct, raw: &[(usize, usize)]) -> NormalForm {
    gp.from_syllables(raw.iter().map(|&(f, e)| Syllable::new(f, e)))
}

fn shape(c: &ElementClass) -> (Option<u32>, u64, u64, bool) {
    match c {
        ElementClass::Torsion { order, .. } => (Some(*order), 1, 1, false),
        ElementClass::Infinite { power, reversible, h_count, .. } => (None, *power, *h_count, *reversible),
    }
}

fn group_and_words(n: usize) -> impl Strategy<Value = (usize, Vec<Vec<(usize, usize)>>)> {
    (0..GROUPS.len()).prop_flat_map(move |i| {
        let gp = FreeProduct::parse(GROUPS[i]).unwrap();
        (Just(i), prop::collection::vec(raw_word(&gp, 30), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization_is_a_homomorphism((gi, ws) in group_and_words(2)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let concat: Vec<(usize, usize)> = ws[0].iter().chain(&ws[1]).copied().collect();
        prop_assert_eq!(build(&gp, &concat), gp.mul(&build(&gp, &ws[0]), &build(&gp, &ws[1])));
    }

    #[test]
    fn word_times_inverse_is_identity((gi, ws) in group_and_words(1)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let w = build(&gp, &ws[0]);
        prop_assert!(gp.mul(&w, &gp.inv(&w)).is_identity());
        prop_assert!(gp.mul(&gp.inv(&w), &w).is_identity());
    }

    #[test]
    fn multiplication_is_associative((gi, ws) in group_and_words(3)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let (a, b, c) = (build(&gp, &ws[0]), build(&gp, &ws[1]), build(&gp, &ws[2]));
        prop_assert_eq!(gp.mul(&gp.mul(&a, &b), &c), gp.mul(&a, &gp.mul(&b, &c)));
    }

    #[test]
    fn classification_is_conjugation_invariant((gi, ws) in group_and_words(2)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let w = build(&gp, &ws[0]);
        let g = build(&gp, &ws[1]);
        let conj = gp.mul(&gp.mul(&g, &w), &gp.inv(&g));
        prop_assert_eq!(shape(&gp.classify(&w)), shape(&gp.classify(&conj)));
    }

    #[test]
    fn classification_is_inverse_invariant((gi, ws) in group_and_words(1)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let w = build(&gp, &ws[0]);
        prop_assert_eq!(shape(&gp.classify(&w)), shape(&gp.classify(&gp.inv(&w))));
    }

    #[test]
    fn root_power_recovers_input((gi, ws) in group_and_words(2), k in 1u64..4) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let w = gp.pow(&build(&gp, &ws[0]), k);
        let g = build(&gp, &ws[1]);
        let w = gp.mul(&gp.mul(&g, &w), &gp.inv(&g));
        match gp.classify(&w) {
            ElementClass::Infinite { power, root, .. } => {
                let (r, d) = gp.extract_root(&w).unwrap();
                prop_assert_eq!(d, power);
                prop_assert_eq!(&r, &root);
                prop_assert_eq!(gp.pow(&r, d), w);
                let (_, d1) = gp.extract_root(&r).unwrap();
                prop_assert_eq!(d1, 1);
                prop_assert!(power % k == 0);
            }
            ElementClass::Torsion { order, .. } => {
                prop_assert!(gp.pow(&w, order as u64).is_identity());
            }
        }
    }

    #[test]
    fn reversibility_witness_is_an_involution_inverting_the_root((gi, ws) in group_and_words(1)) {
        let gp = FreeProduct::parse(GROUPS[gi]).unwrap();
        let w = build(&gp, &ws[0]);
        if let ElementClass::Infinite { root, reversible, .. } = gp.classify(&w) {
            let witness = gp.is_reversible(&root).unwrap();
            prop_assert_eq!(witness.is_some(), reversible);
            if let Some(t) = witness {
                prop_assert!(!t.is_identity());
                prop_assert!(gp.mul(&t, &t).is_identity());
                prop_assert_eq!(gp.mul(&gp.mul(&t, &root), &t), gp.inv(&root));
            }
        }
    }
}

#[test]
fn torsion_elements_have_h_one() {
    for g in GROUPS {
        let gp = FreeProduct::parse(g).unwrap();
        for w in gp.elements_up_to(4) {
            let c = gp.classify(&w);
            if c.is_torsion() {
                assert_eq!(c.h(), 1, "{}", gp.format(&w));
            } else {
                assert!(c.h() >= 1);
            }
        }
    }
}
