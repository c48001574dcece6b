//! Exact uniform sampling of homomorphisms into `Sym(N)`.
//!
//! A homomorphism `G → Sym(N)` is built orbit by orbit. The smallest
//! unassigned point gets an orbit of size `d` with probability
//! `(N'-1)_{d-1} s_G(d) χ_{N'-d} / χ_{N'}` (`N'` points remaining), its
//! stabilizer is a uniform index-`d` subgroup `H`, and a uniform ordered
//! choice of `d-1` further points labels the nontrivial cosets of `H`. All
//! choices are exact integer draws, so the result is exactly uniform.
//!
//! Permutations act on the left: `evaluate(w, p)` applies the last syllable
//! first.

use num_bigint::{BigUint, RandBigInt};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FreeProduct, NormalForm};
use crate::homcount::{falling, CountTable, ProductTables};
use crate::rng::{self, Rng};

/// Coset action of `G` on `G/H` for one subgroup.
#[derive(Clone, Debug)]
struct CosetAction {
    /// `act[g][c]`: coset index of `g · x_c H`; coset 0 is `H`.
    act: Vec<Vec<u32>>,
}

impl CosetAction {
    fn new(table: &CountTable, h: &crate::homcount::Subgroup) -> Self {
        let g = table.group();
        let m = g.order();
        let mut coset_of = vec![u32::MAX; m];
        let mut reps = Vec::new();
        for x in 0..m {
            if coset_of[x] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            reps.push(x);
            for &e in h.elements() {
                coset_of[g.mul(x, e)] = c;
            }
        }
        let act = (0..m).map(|e| reps.iter().map(|&x| coset_of[g.mul(e, x)]).collect()).collect();
        CosetAction { act }
    }
}

/// Precomputed data for sampling one finite group.
#[derive(Clone, Debug)]
pub struct FactorSampler<'a> {
    table: &'a CountTable,
    /// `(d, s_G(d), actions of the index-d subgroups)`.
    orbits: Vec<(usize, usize, Vec<CosetAction>)>,
}

impl<'a> FactorSampler<'a> {
    pub fn new(table: &'a CountTable) -> Self {
        let orbits = table
            .census()
            .by_index()
            .iter()
            .map(|(&d, &c)| (d, c, table.census().of_index(d).map(|h| CosetAction::new(table, h)).collect()))
            .collect();
        FactorSampler { table, orbits }
    }

    /// A uniform element of `hom(G, Sym(n))` as an element-indexed list of
    /// image arrays.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<FactorHom> {
        if n > self.table.nmax() {
            return Err(Error::Domain(format!(
                "N = {n} exceeds the count table for {} (nmax = {}); extend the table first",
                self.table.group().name(),
                self.table.nmax()
            )));
        }
        let m = self.table.group().order();
        let mut perms = vec![vec![0u32; n]; m];
        // pool of unassigned points with positions for O(1) removal
        let mut pool: Vec<u32> = (0..n as u32).collect();
        let mut pos: Vec<usize> = (0..n).collect();
        let mut assigned = vec![false; n];
        let mut next = 0usize;
        let mut labels: Vec<u32> = Vec::new();
        let remove = |pool: &mut Vec<u32>, pos: &mut Vec<usize>, idx: usize| -> u32 {
            let p = pool[idx];
            let last = *pool.last().expect("nonempty pool");
            pool[idx] = last;
            pos[last as usize] = idx;
            pool.pop();
            p
        };
        while !pool.is_empty() {
            while assigned[next] {
                next += 1;
            }
            let remaining = pool.len();
            let total = self.table.chi(remaining)?;
            let mut draw = rng.gen_biguint_below(total);
            let mut chosen = None;
            for (oi, (d, count, _)) in self.orbits.iter().enumerate() {
                if *d > remaining {
                    continue;
                }
                let per_subgroup = falling(remaining - 1, d - 1) * self.table.chi(remaining - d)?;
                let w = &per_subgroup * BigUint::from(*count);
                if draw < w {
                    chosen = Some(oi);
                    break;
                }
                draw -= w;
            }
            let oi = chosen.ok_or_else(|| Error::Numeric("orbit weights do not sum to χ".into()))?;
            let (d, count, actions) = &self.orbits[oi];
            let action = &actions[rng.gen_range(0..*count)];
            labels.clear();
            let idx = pos[next];
            let p = remove(&mut pool, &mut pos, idx);
            assigned[p as usize] = true;
            labels.push(p);
            for _ in 1..*d {
                let idx = rng.gen_range(0..pool.len());
                let q = remove(&mut pool, &mut pos, idx);
                assigned[q as usize] = true;
                labels.push(q);
            }
            for (e, perm) in perms.iter_mut().enumerate() {
                for (c, &pt) in labels.iter().enumerate() {
                    perm[pt as usize] = labels[action.act[e][c] as usize];
                }
            }
        }
        Ok(FactorHom { perms })
    }
}

/// Convenience wrapper: one uniform sample of `hom(G, Sym(n))`.
pub fn sample_hom(table: &CountTable, n: usize, seed: u64) -> Result<FactorHom> {
    FactorSampler::new(table).sample(n, &mut rng::stream(seed, 0, 0))
}

/// Images of every element of a finite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorHom {
    perms: Vec<Vec<u32>>,
}

impl FactorHom {
    pub fn image(&self, elem: usize) -> &[u32] {
        &self.perms[elem]
    }

    pub fn images(&self) -> &[Vec<u32>] {
        &self.perms
    }

    pub fn n(&self) -> usize {
        self.perms.first().map_or(0, Vec::len)
    }
}

/// A homomorphism `Γ → Sym(N)` given factor by factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomImage {
    n: usize,
    factors: Vec<FactorHom>,
}

impl HomImage {
    pub fn new(n: usize, factors: Vec<FactorHom>) -> Self {
        HomImage { n, factors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factor(&self, i: usize) -> &FactorHom {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FactorHom] {
        &self.factors
    }

    /// Image of `point` under `w`, last syllable first.
    pub fn evaluate(&self, w: &NormalForm, point: usize) -> Result<usize> {
        if point >= self.n {
            return Err(Error::Domain(format!("point {point} out of range for N = {}", self.n)));
        }
        Ok(self.apply(w, point))
    }

    #[inline]
    fn apply(&self, w: &NormalForm, point: usize) -> usize {
        w.syllables()
            .iter()
            .rev()
            .fold(point, |p, s| self.factors[s.factor as usize].perms[s.elem as usize][p] as usize)
    }

    /// The full permutation of `w`.
    pub fn permutation(&self, w: &NormalForm) -> Vec<u32> {
        (0..self.n).map(|p| self.apply(w, p) as u32).collect()
    }

    /// Number of points fixed by `w`.
    pub fn fix_count(&self, w: &NormalForm) -> usize {
        (0..self.n).filter(|&p| self.apply(w, p) == p).count()
    }
}

/// Independent uniform samples for every factor, factor `i` drawing from
/// stream `(seed, trial, i)`.
pub fn sample_free_product(
    gp: &FreeProduct,
    tables: &ProductTables,
    n: usize,
    seed: u64,
    trial: u64,
) -> Result<HomImage> {
    if tables.tables().len() != gp.factors().len() {
        return Err(Error::Domain("count tables do not match the free product".into()));
    }
    let factors = tables
        .tables()
        .iter()
        .enumerate()
        .map(|(i, t)| FactorSampler::new(t).sample(n, &mut rng::stream(seed, trial, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HomImage { n, factors })
}

/// Reusable samplers for every factor of a free product.
pub struct ProductSampler<'a> {
    samplers: Vec<FactorSampler<'a>>,
}

impl<'a> ProductSampler<'a> {
    pub fn new(tables: &'a ProductTables) -> Self {
        ProductSampler { samplers: tables.tables().iter().map(FactorSampler::new).collect() }
    }

    /// Same draws as [`sample_free_product`] for the same `(seed, trial)`.
    pub fn sample(&self, n: usize, seed: u64, trial: u64) -> Result<HomImage> {
        let factors = self
            .samplers
            .iter()
            .enumerate()
            .map(|(i, s)| s.sample(n, &mut rng::stream(seed, trial, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(HomImage { n, factors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::homcount::enumerate_homs;
    use std::collections::HashMap;

    fn is_hom(g: &FiniteGroup, h: &FactorHom) -> bool {
        (0..g.order()).all(|a| {
            (0..g.order()).all(|b| {
                let ab = g.mul(a, b);
                (0..h.n()).all(|p| h.image(a)[h.image(b)[p] as usize] == h.image(ab)[p])
            })
        })
    }

    #[test]
    fn trivial_group_gives_identity() {
        let t = CountTable::new(&FiniteGroup::trivial(), 10);
        let h = sample_hom(&t, 10, 5).unwrap();
        assert_eq!(h.image(0), (0..10).collect::<Vec<u32>>().as_slice());
    }

    #[test]
    fn samples_are_homomorphisms() {
        for g in [FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(6).unwrap(), FiniteGroup::symmetric3()] {
            let t = CountTable::new(&g, 60);
            let s = FactorSampler::new(&t);
            for seed in 0..20 {
                let h = s.sample(60, &mut rng::stream(seed, 0, 0)).unwrap();
                assert!(is_hom(&g, &h));
            }
        }
    }

    #[test]
    fn beyond_table_is_refused() {
        let t = CountTable::new(&FiniteGroup::cyclic(2).unwrap(), 5);
        assert!(matches!(sample_hom(&t, 6, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn c2_on_two_points_is_balanced() {
        let t = CountTable::new(&FiniteGroup::cyclic(2).unwrap(), 2);
        let s = FactorSampler::new(&t);
        let swaps = (0..4000).filter(|&i| s.sample(2, &mut rng::stream(1, i, 0)).unwrap().image(1)[0] == 1).count();
        assert!((1800..=2200).contains(&swaps), "{swaps}");
    }

    #[test]
    fn c3_on_four_points_hits_all_nine() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let t = CountTable::new(&g, 4);
        let s = FactorSampler::new(&t);
        let all: HashMap<Vec<Vec<u8>>, usize> =
            enumerate_homs(&g, 4).into_iter().enumerate().map(|(i, h)| (h, i)).collect();
        let mut counts = vec![0usize; all.len()];
        for i in 0..9000 {
            let h = s.sample(4, &mut rng::stream(7, i, 0)).unwrap();
            let key: Vec<Vec<u8>> = h.images().iter().map(|p| p.iter().map(|&x| x as u8).collect()).collect();
            counts[all[&key]] += 1;
        }
        assert!(counts.iter().all(|&c| (850..=1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn free_product_evaluation() {
        let gp = FreeProduct::parse("C2*C3").unwrap();
        let tables = ProductTables::new(&gp, 50);
        let a = sample_free_product(&gp, &tables, 50, 9, 3).unwrap();
        let b = ProductSampler::new(&tables).sample(50, 9, 3).unwrap();
        assert_eq!(a, b);
        let x = gp.normalize("x").unwrap();
        let y = gp.normalize("y").unwrap();
        let xy = gp.normalize("x y").unwrap();
        for p in 0..50 {
            assert_eq!(a.evaluate(&NormalForm::identity(), p).unwrap(), p);
            let q = a.evaluate(&y, p).unwrap();
            assert_eq!(a.evaluate(&xy, p).unwrap(), a.evaluate(&x, q).unwrap());
        }
        assert_eq!(a.fix_count(&gp.normalize("x x").unwrap()), 50);
        assert!(a.evaluate(&x, 50).is_err());
    }
}
