//! Exact walk invariants and Schreier-graph spectral invariants.

use freeprod::homcount::ProductTables;
use freeprod::sampler::ProductSampler;
use freeprod::spectra::{self, IterativeOptions, Mode, SparseGraph};
use freeprod::walks::{self, WalkGenerator, WALK_BUDGET};
use freeprod::{rng, FreeProduct, NormalForm, Syllable};
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;

/// Every nontrivial factor element, uniformly weighted.
fn uniform_generator(gp: &FreeProduct) -> WalkGenerator {
    let words: Vec<NormalForm> = gp
        .factors()
        .iter()
        .enumerate()
        .flat_map(|(i, g)| (1..g.order()).map(move |e| (i, e)))
        .map(|(i, e)| gp.from_syllables([Syllable::new(i, e)]))
        .collect();
    WalkGenerator::uniform(gp, &words).unwrap()
}

#[test]
fn channel_masses_sum_to_one_and_walks_are_symmetric() {
    for (g, gens) in [("C2*C3", None), ("C2*C2*C2", None), ("S3*C2", None), ("C2*C3", Some("x:1/2,y:1/4,y2:1/4"))] {
        let gp = FreeProduct::parse(g).unwrap();
        let x = match gens {
            Some(t) => WalkGenerator::parse(&gp, t).unwrap(),
            None => uniform_generator(&gp),
        };
        let mut d = walks::WalkDistribution::delta();
        for p in 1..=6 {
            d = walks::convolve_step(&gp, &d, &x, WALK_BUDGET).unwrap();
            assert_eq!(d.total(), BigRational::one(), "{g} p={p}");
            let m = walks::classify_mass(&gp, &d, x.max_len()).unwrap();
            assert_eq!(m.total(), BigRational::one(), "{g} p={p}");
            for (w, mass) in &d.mass {
                assert_eq!(&d.prob(&gp.inv(w)), mass, "{g} p={p} at {}", gp.format(w));
            }
        }
    }
}

#[test]
fn moment_roots_are_monotone_and_at_most_one() {
    for g in ["C2*C3", "C2*C2*C2", "S3*C2"] {
        let gp = FreeProduct::parse(g).unwrap();
        let est = walks::norm_estimate(&gp, &uniform_generator(&gp), 8, WALK_BUDGET).unwrap();
        assert!(est.monotone, "{g}: {:?}", est.m);
        assert!(est.m.windows(2).all(|w| w[0] <= w[1] + 1e-15), "{g}: {:?}", est.m);
        assert!(est.m.iter().all(|&m| m <= 1.0 + 1e-15), "{g}: {:?}", est.m);
    }
}

fn graph(group: &str, gens: &[&str], n: usize, seed: u64) -> SparseGraph {
    let gp = FreeProduct::parse(group).unwrap();
    let s: Vec<NormalForm> = gens.iter().map(|w| gp.normalize(w).unwrap()).collect();
    let tables = ProductTables::new(&gp, n);
    let phi = ProductSampler::new(&tables).sample(n, seed, 0).unwrap();
    spectra::build_schreier(&gp, &phi, &s).unwrap()
}

#[test]
fn adjacency_is_regular() {
    let g = graph("C2*C3", &["x", "y", "y2"], 500, 4);
    let a = g.dense();
    for i in 0..g.n() {
        assert_eq!(a.row(i).sum(), 3.0);
        assert_eq!(a.column(i).sum(), 3.0);
    }
}

#[test]
fn dense_and_iterative_agree_on_fifty_graphs() {
    let opts = IterativeOptions { max_iter: 50_000, ..Default::default() };
    for seed in 0..50u64 {
        let (group, gens): (&str, &[&str]) =
            if seed % 2 == 0 { ("C2*C3", &["x", "y", "y2"]) } else { ("C2*C2*C2", &["a", "b", "c"]) };
        let g = graph(group, gens, 1000, seed);
        let d = spectra::spectral_gap(&g, Mode::Dense, &opts).unwrap();
        let it = spectra::spectral_gap(&g, Mode::Iterative, &opts).unwrap();
        assert!(it.converged, "seed {seed}");
        assert!((d.top_norm - it.top_norm).abs() < 1e-5, "seed {seed}: {} vs {}", d.top_norm, it.top_norm);
    }
}

#[test]
fn top_norm_is_relabeling_invariant() {
    let g = graph("C2*C3", &["x", "y", "y2"], 400, 11);
    let mut sigma: Vec<u32> = (0..g.n() as u32).collect();
    sigma.shuffle(&mut rng::stream(5, 0, 0));
    let mut inv = vec![0u32; g.n()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s as usize] = i as u32;
    }
    // σ p σ⁻¹
    let conj: Vec<Vec<u32>> = g
        .permutations()
        .iter()
        .map(|p| (0..g.n()).map(|i| sigma[p[inv[i] as usize] as usize]).collect())
        .collect();
    let h = SparseGraph::from_permutations(conj).unwrap();
    let opts = IterativeOptions::default();
    let a = spectra::spectral_gap(&g, Mode::Dense, &opts).unwrap();
    let b = spectra::spectral_gap(&h, Mode::Dense, &opts).unwrap();
    assert!((a.top_norm - b.top_norm).abs() < 1e-9);
    assert!((a.lambda_min - b.lambda_min).abs() < 1e-9);
}

#[test]
fn alon_boppana_lower_bound() {
    let bound = 2.0 * 2f64.sqrt() - 0.1;
    for seed in 0..20u64 {
        let g = graph("C2*C2*C2", &["a", "b", "c"], 3000, seed);
        let r = spectra::spectral_gap(&g, Mode::Iterative, &IterativeOptions { seed, ..Default::default() }).unwrap();
        assert!(r.converged, "seed {seed}");
        assert!(r.top_norm >= bound, "seed {seed}: {}", r.top_norm);
    }
}
