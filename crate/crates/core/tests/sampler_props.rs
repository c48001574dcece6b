//! Sampler invariants: homomorphism property, orbit-size marginals,
//! uniformity and reproducibility across thread counts.

use freeprod::homcount::{enumerate_homs, CountTable, ProductTables};
use freeprod::sampler::{FactorSampler, ProductSampler};
use freeprod::{rng, FiniteGroup, FreeProduct};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;

/// `Sym(4)` by multiplication table, composing permutations right to left.
fn s4() -> FiniteGroup {
    let mut perms: Vec<[usize; 4]> = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&x| seen[x] = true);
                    if seen.iter().all(|&s| s) {
                        perms.push(p);
                    }
                }
            }
        }
    }
    let index = |p: [usize; 4]| perms.iter().position(|q| *q == p).unwrap();
    let rows: Vec<Vec<usize>> = perms
        .iter()
        .map(|g| perms.iter().map(|h| index([g[h[0]], g[h[1]], g[h[2]], g[h[3]]])).collect())
        .collect();
    FiniteGroup::from_table("S4", &rows, None).unwrap()
}

fn groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2).unwrap(),
        FiniteGroup::cyclic(3).unwrap(),
        FiniteGroup::cyclic(6).unwrap(),
        FiniteGroup::symmetric3(),
        s4(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_are_homomorphisms(gi in 0usize..5, n in 1usize..60, seed in any::<u64>()) {
        let g = &groups()[gi];
        let table = CountTable::new(g, n);
        let sampler = FactorSampler::new(&table);
        let mut r = rng::stream(seed, 0, 0);
        let h = sampler.sample(n, &mut r).unwrap();
        prop_assert!(h.image(0).iter().enumerate().all(|(i, &v)| v as usize == i));
        for a in 0..g.order() {
            for b in 0..g.order() {
                let (pa, pb, pab) = (h.image(a), h.image(b), h.image(g.mul(a, b)));
                prop_assert!((0..n).all(|p| pa[pb[p] as usize] == pab[p]));
            }
        }
    }
}

/// Orbit size of point 0 under the image of the whole group.
fn orbit_of_zero(images: &[Vec<u32>]) -> usize {
    let mut seen = vec![0u32];
    let mut i = 0;
    while i < seen.len() {
        for img in images {
            let y = img[seen[i] as usize];
            if !seen.contains(&y) {
                seen.push(y);
            }
        }
        i += 1;
    }
    seen.len()
}

#[test]
fn orbit_marginal_matches_exact_law() {
    let draws = 20_000usize;
    for (g, n) in [(FiniteGroup::cyclic(2).unwrap(), 12), (FiniteGroup::cyclic(3).unwrap(), 9), (FiniteGroup::symmetric3(), 8)] {
        let table = CountTable::new(&g, n);
        let chi = BigRational::from_integer(table.chi(n).unwrap().clone().into());
        // exact law: P(orbit of a fixed point has size d) = (N-1)_{d-1} s(d) χ_{N-d} / χ_N;
        // orbit_weight(n, d) counts homs by the orbit of point 0
        let probs: Vec<BigRational> = (1..=n)
            .map(|d| BigRational::from_integer(table.orbit_weight(n, d).unwrap().into()) / &chi)
            .collect();
        assert_eq!(probs.iter().sum::<BigRational>(), BigRational::one());
        let sampler = FactorSampler::new(&table);
        let mut r = rng::stream(7, n as u64, g.order() as u64);
        let mut counts = vec![0usize; n + 1];
        for _ in 0..draws {
            let h = sampler.sample(n, &mut r).unwrap();
            counts[orbit_of_zero(h.images())] += 1;
        }
        let mut stat = 0.0;
        let mut cells = 0;
        for d in 1..=n {
            let p = probs[d - 1].to_f64().unwrap();
            if probs[d - 1].is_zero() {
                assert_eq!(counts[d], 0, "{} N={n}: impossible orbit size {d} observed", g.name());
                continue;
            }
            let e = p * draws as f64;
            stat += (counts[d] as f64 - e).powi(2) / e;
            cells += 1;
        }
        let pval = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
        assert!(pval > 1e-3, "{} N={n}: p = {pval}, counts {counts:?}", g.name());
    }
}

#[test]
fn uniform_over_all_homomorphisms() {
    for (g, n) in [(FiniteGroup::cyclic(2).unwrap(), 5), (FiniteGroup::cyclic(4).unwrap(), 4), (FiniteGroup::symmetric3(), 4)] {
        let table = CountTable::new(&g, n);
        let chi = table.chi(n).unwrap().to_usize().unwrap();
        let homs = enumerate_homs(&g, n);
        assert_eq!(homs.len(), chi);
        let index: HashMap<Vec<Vec<u8>>, usize> = homs.into_iter().enumerate().map(|(i, h)| (h, i)).collect();
        let draws = 200 * chi;
        let sampler = FactorSampler::new(&table);
        let mut r = rng::stream(3, n as u64, 0);
        let mut counts = vec![0usize; chi];
        for _ in 0..draws {
            let h = sampler.sample(n, &mut r).unwrap();
            let key: Vec<Vec<u8>> = h.images().iter().map(|p| p.iter().map(|&v| v as u8).collect()).collect();
            counts[index[&key]] += 1;
        }
        let e = draws as f64 / chi as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let pval = 1.0 - ChiSquared::new((chi - 1) as f64).unwrap().cdf(stat);
        assert!(pval > 1e-3, "{} N={n}: p = {pval}", g.name());
    }
}

#[test]
fn reproducible_across_thread_counts() {
    let gp = FreeProduct::parse("C2*C3").unwrap();
    let n = 300;
    let tables = ProductTables::new(&gp, n);
    let sampler = ProductSampler::new(&tables);
    let run = |threads: usize| -> Vec<Vec<Vec<u32>>> {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            (0..24u64)
                .into_par_iter()
                .map(|t| {
                    let phi = sampler.sample(n, 99, t).unwrap();
                    phi.factors().iter().flat_map(|f| f.images().to_vec()).collect()
                })
                .collect()
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
    assert_ne!(one[0], one[1]);
}
