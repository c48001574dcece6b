//! Exact counting of homomorphisms `G → Sym(n)` and exact expectations
//! derived from them.
//!
//! Everything here is arbitrary-precision integer arithmetic. The basic
//! recursion comes from the orbit of the point 1: it has some size `d`
//! dividing `|G|`, its stabilizer is one of the `s_G(d)` subgroups of index
//! `d`, there are `(n-1)_{d-1}` ways to label the rest of the orbit, and the
//! remaining `n-d` points carry an arbitrary action:
//!
//! ```text
//! χ_n = Σ_{d | |G|} s_G(d) · (n-1)_{d-1} · χ_{n-d}
//! ```

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fe::PolyDescriptor;
use crate::group::{FiniteGroup, FreeProduct, NormalForm};

/// A subgroup stored as its sorted element list plus a membership mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    elements: Vec<usize>,
    member: Vec<bool>,
}

impl Subgroup {
    fn from_mask(member: Vec<bool>) -> Self {
        let elements = member.iter().enumerate().filter(|(_, &m)| m).map(|(g, _)| g).collect();
        Subgroup { elements, member }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.member[g]
    }
}

/// All subgroups of a finite group, in canonical order (lexicographic by
/// sorted element list), with counts by index.
#[derive(Clone, Debug)]
pub struct SubgroupCensus {
    group_order: usize,
    subgroups: Vec<Subgroup>,
    by_index: BTreeMap<usize, usize>,
}

impl SubgroupCensus {
    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    /// `d ↦ s_G(d)`, only indices with at least one subgroup.
    pub fn by_index(&self) -> &BTreeMap<usize, usize> {
        &self.by_index
    }

    /// `s_G(d)`; zero when `d` is not the index of any subgroup.
    pub fn count(&self, index: usize) -> usize {
        self.by_index.get(&index).copied().unwrap_or(0)
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    /// Subgroups of index `d`, in canonical order.
    pub fn of_index(&self, d: usize) -> impl Iterator<Item = &Subgroup> {
        let order = self.group_order / d;
        self.subgroups.iter().filter(move |h| self.group_order % d == 0 && h.order() == order)
    }
}

fn closure(g: &FiniteGroup, gens: &[usize]) -> Vec<bool> {
    let m = g.order();
    let mut member = vec![false; m];
    member[0] = true;
    let mut stack = vec![0usize];
    while let Some(h) = stack.pop() {
        for &s in gens {
            let v = g.mul(h, s);
            if !member[v] {
                member[v] = true;
                stack.push(v);
            }
        }
    }
    member
}

/// Enumerates every subgroup by breadth-first closure: each subgroup is
/// reached from a smaller one by adjoining one element, and adjoining any
/// element of the same left coset gives the same subgroup.
pub fn subgroup_census(g: &FiniteGroup) -> SubgroupCensus {
    let m = g.order();
    let trivial = closure(g, &[]);
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(trivial.clone());
    let mut queue: Vec<(Vec<bool>, Vec<usize>)> = vec![(trivial, Vec::new())];
    let mut head = 0;
    while head < queue.len() {
        let (member, gens) = queue[head].clone();
        head += 1;
        let mut covered = member.clone();
        for x in 0..m {
            if covered[x] {
                continue;
            }
            // mark the left coset xH as handled
            for h in (0..m).filter(|&h| member[h]) {
                covered[g.mul(x, h)] = true;
            }
            let mut next_gens = gens.clone();
            next_gens.push(x);
            let next = closure(g, &next_gens);
            if seen.insert(next.clone()) {
                queue.push((next, next_gens));
            }
        }
    }
    let mut subgroups: Vec<Subgroup> = queue.into_iter().map(|(m, _)| Subgroup::from_mask(m)).collect();
    subgroups.sort_by(|a, b| a.elements.cmp(&b.elements));
    let mut by_index = BTreeMap::new();
    for h in &subgroups {
        *by_index.entry(m / h.order()).or_insert(0) += 1;
    }
    SubgroupCensus { group_order: m, subgroups, by_index }
}

/// Falling factorial `(n)_k = n (n-1) ... (n-k+1)`.
pub fn falling(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Exact table `χ_0, ..., χ_nmax` of `|hom(G, Sym(n))|`.
#[derive(Clone, Debug)]
pub struct CountTable {
    group: FiniteGroup,
    census: SubgroupCensus,
    chi: Vec<BigUint>,
}

impl CountTable {
    pub fn new(group: &FiniteGroup, nmax: usize) -> Self {
        let census = subgroup_census(group);
        let mut table = CountTable { group: group.clone(), census, chi: vec![BigUint::one()] };
        table.extend_to(nmax);
        table
    }

    /// Extends the table in place up to `nmax`.
    pub fn extend_to(&mut self, nmax: usize) {
        let indices: Vec<(usize, usize)> = self.census.by_index().iter().map(|(&d, &c)| (d, c)).collect();
        while self.chi.len() <= nmax {
            let n = self.chi.len();
            let mut acc = BigUint::zero();
            for &(d, count) in &indices {
                if d > n {
                    continue;
                }
                let ff = falling(n - 1, d - 1) * BigUint::from(count);
                acc += ff * &self.chi[n - d];
            }
            self.chi.push(acc);
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn census(&self) -> &SubgroupCensus {
        &self.census
    }

    pub fn nmax(&self) -> usize {
        self.chi.len() - 1
    }

    pub fn values(&self) -> &[BigUint] {
        &self.chi
    }

    pub fn chi(&self, n: usize) -> Result<&BigUint> {
        self.chi.get(n).ok_or_else(|| {
            Error::Domain(format!(
                "n = {n} beyond the count table for {} (nmax = {}); extend the table",
                self.group.name(),
                self.nmax()
            ))
        })
    }

    /// Number of homomorphisms on `n` points in which the orbit of a fixed
    /// point has size `d`: `(n-1)_{d-1} s_G(d) χ_{n-d}`.
    pub fn orbit_weight(&self, n: usize, d: usize) -> Result<BigUint> {
        if d == 0 || d > n {
            return Ok(BigUint::zero());
        }
        let count = self.census.count(d);
        if count == 0 {
            return Ok(BigUint::zero());
        }
        Ok(falling(n - 1, d - 1) * BigUint::from(count) * self.chi(n - d)?)
    }

    /// The exponent polynomial `P_G(z) = Σ_d s_G(d)/d z^d`.
    pub fn poly(&self) -> Result<PolyDescriptor> {
        PolyDescriptor::from_census(&self.census)
    }
}

/// `(N)_V χ_{N-V}(G) / χ_N(G)`: the expected number of embeddings of a
/// marked `V`-point configuration.
pub fn embed_lift_expectation(table: &CountTable, v: usize, n: usize) -> Result<BigRational> {
    if v > n {
        return Err(Error::Domain(format!("V = {v} exceeds N = {n}")));
    }
    let num = falling(n, v) * table.chi(n - v)?;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(table.chi(n)?.clone())))
}

/// Count tables for every factor of a free product.
#[derive(Clone, Debug)]
pub struct ProductTables {
    tables: Vec<CountTable>,
}

impl ProductTables {
    pub fn new(gp: &FreeProduct, nmax: usize) -> Self {
        ProductTables { tables: gp.factors().iter().map(|g| CountTable::new(g, nmax)).collect() }
    }

    pub fn extend_to(&mut self, nmax: usize) {
        for t in &mut self.tables {
            t.extend_to(nmax);
        }
    }

    pub fn factor(&self, i: usize) -> &CountTable {
        &self.tables[i]
    }

    pub fn tables(&self) -> &[CountTable] {
        &self.tables
    }

    pub fn nmax(&self) -> usize {
        self.tables.iter().map(CountTable::nmax).min().unwrap_or(0)
    }

    /// Unreduced `(numerator, denominator)` of the expected number of fixed
    /// points of a torsion element on `n` points.
    ///
    /// Marked-orbit formula over the factor `G` that `gamma` conjugates into:
    /// `E = Σ_d C(N,d) (d-1)! W_d χ_{N-d} / χ_N` with
    /// `W_d = Σ_{[G:H]=d} #{x : x⁻¹γx ∈ H} / |H|`. Both sides are scaled by
    /// `|G|` so the numerator is an integer.
    pub fn expected_fix_torsion_parts(
        &self,
        gp: &FreeProduct,
        gamma: &NormalForm,
        n: usize,
    ) -> Result<(BigUint, BigUint)> {
        let Some(rep) = gp.torsion_representative(gamma)? else {
            return Ok((BigUint::from(n), BigUint::one()));
        };
        let table = &self.tables[rep.factor as usize];
        let g = table.group();
        let order = g.order();
        let elem = rep.elem as usize;
        let den = table.chi(n)? * BigUint::from(order);
        let mut num = BigUint::zero();
        for (&d, _) in table.census().by_index() {
            if d > n {
                continue;
            }
            // |G| W_d = d * Σ_H #{x : x⁻¹γx ∈ H}
            let hits: usize = table
                .census()
                .of_index(d)
                .map(|h| (0..order).filter(|&x| h.contains(g.mul(g.mul(g.inv(x), elem), x))).count())
                .sum();
            if hits == 0 {
                continue;
            }
            let coeff = binomial(n, d) * falling(d - 1, d - 1) * BigUint::from(d * hits);
            num += coeff * table.chi(n - d)?;
        }
        Ok((num, den))
    }

    /// Exact expected number of fixed points of the image of a torsion
    /// element under a uniform random homomorphism into `Sym(n)`.
    pub fn expected_fix_torsion(&self, gp: &FreeProduct, gamma: &NormalForm, n: usize) -> Result<BigRational> {
        let (num, den) = self.expected_fix_torsion_parts(gp, gamma, n)?;
        Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

/// Every homomorphism `G → Sym(n)` as an element-indexed list of
/// permutations, found by assigning permutations to a generating set and
/// keeping the assignments that extend to a homomorphism.
pub fn enumerate_homs(g: &FiniteGroup, n: usize) -> Vec<Vec<Vec<u8>>> {
    assert!(n <= u8::MAX as usize);
    let gens = g.generating_set();
    let perms: Vec<Vec<u8>> = all_permutations(n);
    // candidate images per generator: σ with σ^{ord} = id
    let candidates: Vec<Vec<&Vec<u8>>> = gens
        .iter()
        .map(|&s| {
            let k = g.element_order(s) as usize;
            perms.iter().filter(|p| perm_pow_is_identity(p, k)).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    if gens.is_empty() {
        out.push(vec![(0..n as u8).collect()]);
        return out;
    }
    'outer: loop {
        let images: Vec<&Vec<u8>> = choice.iter().enumerate().map(|(i, &c)| candidates[i][c]).collect();
        if let Some(map) = extend_to_hom(g, &gens, &images, n) {
            out.push(map);
        }
        for i in (0..gens.len()).rev() {
            choice[i] += 1;
            if choice[i] < candidates[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    out
}

fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v as u8);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn perm_pow_is_identity(p: &[u8], k: usize) -> bool {
    (0..p.len()).all(|i| {
        let mut j = i;
        for _ in 0..k {
            j = p[j] as usize;
        }
        j == i
    })
}

/// `(a ∘ b)(i) = a(b(i))`.
fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    b.iter().map(|&j| a[j as usize]).collect()
}

/// Extends generator images to a map on all of `G` by breadth-first search
/// over right multiplication, and checks the result is a homomorphism.
fn extend_to_hom(g: &FiniteGroup, gens: &[usize], images: &[&Vec<u8>], n: usize) -> Option<Vec<Vec<u8>>> {
    let m = g.order();
    let mut map: Vec<Option<Vec<u8>>> = vec![None; m];
    map[0] = Some((0..n as u8).collect());
    let mut stack = vec![0usize];
    while let Some(h) = stack.pop() {
        for (s, img) in gens.iter().zip(images) {
            let v = g.mul(h, *s);
            let cand = compose(map[h].as_ref().expect("assigned"), img);
            match &map[v] {
                Some(existing) if *existing != cand => return None,
                Some(_) => {}
                None => {
                    map[v] = Some(cand);
                    stack.push(v);
                }
            }
        }
    }
    let map: Vec<Vec<u8>> = map.into_iter().map(|p| p.expect("generating set")).collect();
    for a in 0..m {
        for b in 0..m {
            if compose(&map[a], &map[b]) != map[g.mul(a, b)] {
                return None;
            }
        }
    }
    Some(map)
}

/// Default enumeration budget for [`brute_expected_fix`].
pub const BRUTE_BUDGET: u128 = 10_000_000;

/// Exact `E[#fix φ(γ)]` by enumerating every tuple of factor homomorphisms.
/// Works for any element, torsion or not.
pub fn brute_expected_fix(gp: &FreeProduct, gamma: &NormalForm, n: usize, budget: u128) -> Result<BigRational> {
    let mut out = brute_expected_fix_all(gp, std::slice::from_ref(gamma), n, budget)?;
    Ok(out.pop().expect("one element in, one value out"))
}

/// [`brute_expected_fix`] for several elements in one pass over the tuples.
pub fn brute_expected_fix_all(
    gp: &FreeProduct,
    gammas: &[NormalForm],
    n: usize,
    budget: u128,
) -> Result<Vec<BigRational>> {
    if n > 8 {
        return Err(Error::Budget {
            what: format!("brute-force enumeration over Sym({n})"),
            projected: (1..=n.min(34) as u128).product(),
            budget,
        });
    }
    let tables = ProductTables::new(gp, n);
    let projected = tables
        .tables()
        .iter()
        .map(|t| t.chi(n).map(|c| c.to_u128().unwrap_or(u128::MAX)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1u128, |a, b| a.saturating_mul(b));
    if projected > budget {
        return Err(Error::Budget { what: format!("hom tuples for {} on {n} points", gp.spec()), projected, budget });
    }
    let homs: Vec<Vec<Vec<Vec<u8>>>> = gp.factors().iter().map(|g| enumerate_homs(g, n)).collect();
    let mut totals = vec![0u128; gammas.len()];
    let mut count: u128 = 0;
    let mut idx = vec![0usize; homs.len()];
    loop {
        for (gamma, total) in gammas.iter().zip(totals.iter_mut()) {
            let fixed = (0..n)
                .filter(|&p| {
                    let mut q = p;
                    for s in gamma.syllables().iter().rev() {
                        q = homs[s.factor as usize][idx[s.factor as usize]][s.elem as usize][q] as usize;
                    }
                    q == p
                })
                .count();
            *total += fixed as u128;
        }
        count += 1;
        let mut i = homs.len();
        loop {
            if i == 0 {
                return Ok(totals
                    .into_iter()
                    .map(|t| BigRational::new(BigInt::from(t), BigInt::from(count)))
                    .collect());
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < homs[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Serializable summary for the `count` command.
#[derive(Clone, Debug, Serialize)]
pub struct CountSummary {
    pub group: String,
    pub s: BTreeMap<String, usize>,
    pub chi: Vec<String>,
}

impl CountSummary {
    pub fn new(table: &CountTable) -> Self {
        CountSummary {
            group: table.group().name().to_string(),
            s: table.census().by_index().iter().map(|(d, c)| (d.to_string(), *c)).collect(),
            chi: table.values().iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Exact `a/b == c/d` without reducing either side.
pub fn ratio_parts_eq(a: (&BigUint, &BigUint), b: (&BigUint, &BigUint)) -> bool {
    a.0 * b.1 == b.0 * a.1
}

/// `gcd`-free check that `num/den` is an integer.
pub fn divides(den: &BigUint, num: &BigUint) -> bool {
    num.is_multiple_of(den)
}
