//! Finite groups given by multiplication tables, their free products, and
//! normal-form arithmetic.
//!
//! Elements of a free product `G_1 * ... * G_m` are stored as reduced
//! alternating words ([`NormalForm`]): a list of syllables `(factor, element)`
//! with non-identity elements and no two adjacent syllables from the same
//! factor. All arithmetic goes through [`FreeProduct`], which owns the factor
//! tables.
//!
//! The classification of [`FreeProduct::classify`] splits elements into
//! torsion elements (conjugate into a factor) and infinite-order elements,
//! the latter carrying their primitive root, the power exponent, whether the
//! root is conjugated to its inverse by an involution, and the number of
//! subgroups containing the element that are isomorphic to `Z` or `C2 * C2`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted table order.
pub const MAX_TABLE_ORDER: usize = 512;

/// Orders up to this bound get an exhaustive associativity check.
const EXHAUSTIVE_ASSOC_ORDER: usize = 24;

/// A finite group given by its full multiplication table. Element 0 is the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<u16>,
    names: Vec<String>,
    inverse: Vec<u16>,
    element_order: Vec<u32>,
    cyclic: bool,
}

impl FiniteGroup {
    /// Builds a group from a row-major table (`rows[g][h] = g*h`), validating
    /// every group axiom.
    pub fn from_table(name: &str, rows: &[Vec<usize>], names: Option<Vec<String>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Input("group table is empty".into()));
        }
        if m > MAX_TABLE_ORDER {
            return Err(Error::Input(format!(
                "group order {m} exceeds the table limit {MAX_TABLE_ORDER}"
            )));
        }
        let mut table = Vec::with_capacity(m * m);
        for (g, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Input(format!(
                    "row {g} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= m {
                    return Err(Error::Input(format!("table entry {v} out of range 0..{m}")));
                }
                table.push(v as u16);
            }
        }
        let names = match names {
            Some(n) if n.len() == m => n,
            Some(n) => {
                return Err(Error::Input(format!(
                    "{} element names given for a group of order {m}",
                    n.len()
                )))
            }
            None => (0..m).map(|g| if g == 0 { "e".to_string() } else { format!("g{g}") }).collect(),
        };
        let mut group = FiniteGroup {
            name: name.to_string(),
            order: m,
            table,
            names,
            inverse: vec![0; m],
            element_order: vec![1; m],
            cyclic: false,
        };
        group.validate()?;
        group.fill_derived();
        Ok(group)
    }

    /// The cyclic group of order `k`, elements `g^0, ..., g^{k-1}` in order.
    pub fn cyclic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("cyclic group of order 0".into()));
        }
        let rows: Vec<Vec<usize>> = (0..k).map(|i| (0..k).map(|j| (i + j) % k).collect()).collect();
        let names = (0..k)
            .map(|i| match i {
                0 => "e".to_string(),
                1 => "g".to_string(),
                _ => format!("g{i}"),
            })
            .collect();
        let mut g = Self::from_table(&format!("C{k}"), &rows, Some(names))?;
        g.cyclic = true;
        Ok(g)
    }

    /// The trivial group.
    pub fn trivial() -> Self {
        Self::cyclic(1).expect("trivial group table is valid")
    }

    /// The symmetric group on three letters. Elements are `e, r, r2, s, rs,
    /// r2s` with `r = (0 1 2)` and `s = (1 2)`, composed right to left.
    pub fn symmetric3() -> Self {
        type P = [usize; 3];
        fn compose(a: &P, b: &P) -> P {
            [a[b[0]], a[b[1]], a[b[2]]]
        }
        let e: P = [0, 1, 2];
        let r: P = [1, 2, 0];
        let s: P = [0, 2, 1];
        let r2 = compose(&r, &r);
        let elems = [e, r, r2, s, compose(&r, &s), compose(&r2, &s)];
        let index = |p: &P| elems.iter().position(|q| q == p).expect("closed");
        let rows: Vec<Vec<usize>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| index(&compose(a, b))).collect())
            .collect();
        let names = ["e", "r", "r2", "s", "rs", "r2s"].iter().map(|s| s.to_string()).collect();
        Self::from_table("S3", &rows, Some(names)).expect("S3 table is valid")
    }

    /// Parses the table file format: first line `m`, then `m` lines of `m`
    /// whitespace-separated indices.
    pub fn parse_table(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let m: usize = lines
            .next()
            .ok_or_else(|| Error::Input("table file is empty".into()))?
            .parse()
            .map_err(|e| Error::Input(format!("bad order line: {e}")))?;
        let mut rows = Vec::with_capacity(m);
        for g in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Input(format!("table has {g} rows, expected {m}")))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Input(format!("row {g}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Input(format!("table has more than {m} rows")));
        }
        Self::from_table(name, &rows, None)
    }

    /// Resolves a single-group spec: `C<k>`, `S3`, `trivial`, or `table:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(path) = spec.strip_prefix("table:") {
            let text = std::fs::read_to_string(Path::new(path))?;
            return Self::parse_table(spec, &text);
        }
        if spec == "S3" {
            return Ok(Self::symmetric3());
        }
        if spec == "trivial" || spec == "1" {
            return Ok(Self::trivial());
        }
        if let Some(k) = spec.strip_prefix('C') {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Input(format!("unknown group spec {spec:?}")))?;
            return Self::cyclic(k);
        }
        Err(Error::Input(format!("unknown group spec {spec:?}")))
    }

    fn validate(&self) -> Result<()> {
        let m = self.order;
        for g in 0..m {
            if self.mul(0, g) != g || self.mul(g, 0) != g {
                return Err(Error::Input(format!(
                    "{}: index 0 is not a two-sided identity at element {g}",
                    self.name
                )));
            }
        }
        let mut seen = vec![false; m];
        for g in 0..m {
            seen.iter_mut().for_each(|s| *s = false);
            for h in 0..m {
                let v = self.mul(g, h);
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Input(format!("{}: row {g} is not a permutation", self.name)));
                }
            }
        }
        for h in 0..m {
            seen.iter_mut().for_each(|s| *s = false);
            for g in 0..m {
                let v = self.mul(g, h);
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Input(format!("{}: column {h} is not a permutation", self.name)));
                }
            }
        }
        // Light's test: for a Latin square with identity, associativity on
        // all (x, g, y) with g ranging over a generating set suffices.
        let middle: Vec<usize> = if m <= EXHAUSTIVE_ASSOC_ORDER {
            (0..m).collect()
        } else {
            self.generating_set()
        };
        for x in 0..m {
            for &g in &middle {
                let xg = self.mul(x, g);
                for y in 0..m {
                    if self.mul(xg, y) != self.mul(x, self.mul(g, y)) {
                        return Err(Error::Input(format!(
                            "{}: associativity fails at ({x}, {g}, {y})",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn fill_derived(&mut self) {
        let m = self.order;
        for g in 0..m {
            let inv = (0..m).find(|&h| self.mul(g, h) == 0).expect("Latin square has inverses");
            self.inverse[g] = inv as u16;
            let mut k = 1;
            let mut p = g;
            while p != 0 {
                p = self.mul(p, g);
                k += 1;
            }
            self.element_order[g] = k;
        }
    }

    /// Greedy generating set: adds the smallest element not yet in the
    /// generated closure until everything is covered. Valid on any Latin
    /// square with identity (closure under products of a finite set).
    pub fn generating_set(&self) -> Vec<usize> {
        let m = self.order;
        let mut gens = Vec::new();
        let mut inside = vec![false; m];
        inside[0] = true;
        let mut count = 1;
        while count < m {
            let g = (0..m).find(|&g| !inside[g]).expect("count < m");
            gens.push(g);
            let mut frontier: Vec<usize> = (0..m).filter(|&h| inside[h]).collect();
            while let Some(h) = frontier.pop() {
                for &s in &gens {
                    let v = self.table[h * m + s] as usize;
                    if !inside[v] {
                        inside[v] = true;
                        count += 1;
                        frontier.push(v);
                    }
                }
            }
        }
        gens
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_cyclic_builtin(&self) -> bool {
        self.cyclic
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h] as usize
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g] as usize
    }

    /// Order of an element, computed by iterated multiplication in the table.
    pub fn element_order(&self, g: usize) -> u32 {
        self.element_order[g]
    }

    pub fn element_name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn element_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Non-identity elements of order two.
    pub fn involutions(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.order).filter(|&g| self.element_order[g] == 2)
    }
}

/// One syllable of a normal form: a non-identity element of one factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: u8,
    pub elem: u16,
}

impl Syllable {
    pub fn new(factor: usize, elem: usize) -> Self {
        Syllable { factor: factor as u8, elem: elem as u16 }
    }
}

/// A reduced alternating word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalForm(Vec<Syllable>);

impl NormalForm {
    pub fn identity() -> Self {
        NormalForm(Vec::new())
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    /// Syllable length.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_syllables(self) -> Vec<Syllable> {
        self.0
    }
}

/// Element classification for a free product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementClass {
    /// Conjugate into a factor. `factor` is `None` for the identity.
    Torsion { factor: Option<usize>, order: u32 },
    /// `element = root^power` up to nothing: the root is the unique primitive
    /// root. `h_count` counts the subgroups containing the element that are
    /// isomorphic to `Z` or `C2 * C2`.
    Infinite {
        power: u64,
        root: NormalForm,
        reversible: bool,
        h_count: u64,
    },
}

impl ElementClass {
    pub fn is_torsion(&self) -> bool {
        matches!(self, ElementClass::Torsion { .. })
    }

    /// The normalization parameter `h`: 1 for torsion, `h_count` otherwise.
    pub fn h(&self) -> u64 {
        match self {
            ElementClass::Torsion { .. } => 1,
            ElementClass::Infinite { h_count, .. } => *h_count,
        }
    }

    /// `|<gamma>|`, with `None` standing for infinite order.
    pub fn order(&self) -> Option<u32> {
        match self {
            ElementClass::Torsion { order, .. } => Some(*order),
            ElementClass::Infinite { .. } => None,
        }
    }
}

/// A free product of finitely many finite groups.
#[derive(Clone, Debug)]
pub struct FreeProduct {
    spec: String,
    factors: Vec<FiniteGroup>,
    letters: Vec<String>,
    labels: HashMap<String, Syllable>,
    mu: u64,
    big_m: u64,
}

impl FreeProduct {
    pub fn new(factors: Vec<FiniteGroup>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Input("a free product needs at least one factor".into()));
        }
        if factors.len() > u8::MAX as usize {
            return Err(Error::Input("too many factors".into()));
        }
        let spec = factors.iter().map(|g| g.name().to_string()).collect::<Vec<_>>().join("*");
        let letters: Vec<String> = if factors.len() <= 2 {
            ["x", "y"][..factors.len()].iter().map(|s| s.to_string()).collect()
        } else if factors.len() <= 26 {
            (0..factors.len()).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
        } else {
            (0..factors.len()).map(|i| format!("f{i}_")).collect()
        };
        let mut labels = HashMap::new();
        for (i, g) in factors.iter().enumerate() {
            for e in 1..g.order() {
                let syl = Syllable::new(i, e);
                labels.insert(format!("{i}.{e}"), syl);
                labels.insert(format!("{i}.{}", g.element_name(e)), syl);
                let letter = &letters[i];
                if g.is_cyclic_builtin() {
                    let label = if e == 1 { letter.clone() } else { format!("{letter}{e}") };
                    labels.insert(label, syl);
                } else {
                    labels.insert(format!("{letter}_{}", g.element_name(e)), syl);
                }
            }
        }
        let mu = factors.iter().fold(1u64, |acc, g| lcm(acc, g.order() as u64));
        let big_m = factors.iter().map(|g| g.order() as u64).sum();
        Ok(FreeProduct { spec, factors, letters, labels, mu, big_m })
    }

    /// Parses `"C2*C3"`, `"S3*C2"`, `"table:path*C2"`, ...
    pub fn parse(spec: &str) -> Result<Self> {
        let factors = spec
            .split('*')
            .map(|s| FiniteGroup::from_spec(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn factors(&self) -> &[FiniteGroup] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &FiniteGroup {
        &self.factors[i]
    }

    /// Least common multiple of the factor orders.
    pub fn mu(&self) -> u64 {
        self.mu
    }

    /// Sum of the factor orders.
    pub fn big_m(&self) -> u64 {
        self.big_m
    }

    /// `C2 * C2` is amenable; spectral statements about it are degenerate.
    pub fn is_amenable_c2c2(&self) -> bool {
        self.factors.len() == 2 && self.factors.iter().all(|g| g.order() == 2)
    }

    pub fn letter(&self, factor: usize) -> &str {
        &self.letters[factor]
    }

    pub fn syllable_by_label(&self, label: &str) -> Result<Syllable> {
        self.labels
            .get(label)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown generator label {label:?} in {}", self.spec)))
    }

    /// Human-readable label of a syllable (the letter name when available).
    pub fn syllable_label(&self, s: Syllable) -> String {
        let g = &self.factors[s.factor as usize];
        let letter = &self.letters[s.factor as usize];
        if g.is_cyclic_builtin() {
            if s.elem == 1 {
                letter.clone()
            } else {
                format!("{letter}{}", s.elem)
            }
        } else {
            format!("{letter}_{}", g.element_name(s.elem as usize))
        }
    }

    /// Space-separated labels; `"1"` for the identity.
    pub fn format(&self, w: &NormalForm) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        w.0.iter().map(|&s| self.syllable_label(s)).collect::<Vec<_>>().join(" ")
    }

    /// Reduces a whitespace-separated word of generator labels. `"1"` and the
    /// empty string denote the identity.
    pub fn normalize(&self, word: &str) -> Result<NormalForm> {
        let mut out = Vec::new();
        for tok in word.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let s = self.syllable_by_label(tok)?;
            self.push_syllable(&mut out, s);
        }
        Ok(NormalForm(out))
    }

    /// Normalizes an arbitrary (possibly unreduced) syllable sequence.
    pub fn from_syllables(&self, syllables: impl IntoIterator<Item = Syllable>) -> NormalForm {
        let mut out = Vec::new();
        for s in syllables {
            self.push_syllable(&mut out, s);
        }
        NormalForm(out)
    }

    /// Right-multiplies a reduced word by one syllable, keeping it reduced.
    #[inline]
    pub fn push_syllable(&self, word: &mut Vec<Syllable>, s: Syllable) {
        if s.elem == 0 {
            return;
        }
        if let Some(last) = word.last_mut() {
            if last.factor == s.factor {
                let g = &self.factors[s.factor as usize];
                let prod = g.mul(last.elem as usize, s.elem as usize);
                if prod == 0 {
                    word.pop();
                } else {
                    last.elem = prod as u16;
                }
                return;
            }
        }
        word.push(s);
    }

    pub fn mul(&self, a: &NormalForm, b: &NormalForm) -> NormalForm {
        let mut out = a.0.clone();
        // Cancellation only happens at the junction; once a syllable survives,
        // the remainder of `b` is appended verbatim.
        for (i, &s) in b.0.iter().enumerate() {
            let before = out.len();
            self.push_syllable(&mut out, s);
            if out.len() >= before {
                out.extend_from_slice(&b.0[i + 1..]);
                break;
            }
        }
        NormalForm(out)
    }

    pub fn inv(&self, a: &NormalForm) -> NormalForm {
        NormalForm(
            a.0.iter()
                .rev()
                .map(|s| Syllable {
                    factor: s.factor,
                    elem: self.factors[s.factor as usize].inv(s.elem as usize) as u16,
                })
                .collect(),
        )
    }

    /// `g * w * g^{-1}`.
    pub fn conj(&self, g: &NormalForm, w: &NormalForm) -> NormalForm {
        self.mul(&self.mul(g, w), &self.inv(g))
    }

    /// `w^k` for `k >= 0`.
    pub fn pow(&self, w: &NormalForm, k: u64) -> NormalForm {
        let mut acc = NormalForm::identity();
        for _ in 0..k {
            acc = self.mul(&acc, w);
        }
        acc
    }

    /// Returns `(core, conjugator)` with `core` cyclically reduced and
    /// `w = conjugator^{-1} * core * conjugator`.
    pub fn cyclic_reduce(&self, w: &NormalForm) -> (NormalForm, NormalForm) {
        let mut core = w.0.clone();
        let mut conj = NormalForm::identity();
        while core.len() >= 2 {
            let first = core[0];
            let last = *core.last().expect("len >= 2");
            if first.factor != last.factor {
                break;
            }
            // core = a m b  ->  a^{-1} core a = m (b a)
            let g = &self.factors[first.factor as usize];
            let a = first;
            let ba = g.mul(last.elem as usize, a.elem as usize);
            let mut next: Vec<Syllable> = core[1..core.len() - 1].to_vec();
            self.push_syllable(&mut next, Syllable { factor: a.factor, elem: ba as u16 });
            core = next;
            let a_inv = NormalForm(vec![Syllable { factor: a.factor, elem: g.inv(a.elem as usize) as u16 }]);
            conj = self.mul(&a_inv, &conj);
        }
        (NormalForm(core), conj)
    }

    /// Returns `(root, d)` with `w = root^d` and `root` not a proper power.
    pub fn extract_root(&self, w: &NormalForm) -> Result<(NormalForm, u64)> {
        let (core, conj) = self.cyclic_reduce(w);
        if core.len() < 2 {
            return Err(Error::Classification(format!(
                "{} is a torsion element; use the torsion branch",
                self.format(w)
            )));
        }
        let l = core.len();
        let period = (1..=l)
            .filter(|p| l % p == 0)
            .find(|&p| (p..l).all(|i| core.0[i] == core.0[i - p]))
            .expect("p = l always works");
        let root_core = NormalForm(core.0[..period].to_vec());
        let root = self.mul(&self.mul(&self.inv(&conj), &root_core), &conj);
        Ok((root, (l / period) as u64))
    }

    /// Decides whether some involution `t` satisfies `t delta t = delta^{-1}`
    /// and returns such a witness. `delta` must have infinite order and not
    /// be a proper power.
    pub fn is_reversible(&self, delta: &NormalForm) -> Result<Option<NormalForm>> {
        let (core, conj) = self.cyclic_reduce(delta);
        if core.len() < 2 {
            return Err(Error::Classification(format!(
                "{} has finite order",
                self.format(delta)
            )));
        }
        let (_, d) = self.extract_root(delta)?;
        if d != 1 {
            return Err(Error::Classification(format!(
                "{} is a proper power (d = {d})",
                self.format(delta)
            )));
        }
        let inv = self.inv(&core);
        let l = core.len();
        for k in 1..l {
            let rotated = core.0[k..].iter().chain(core.0[..k].iter());
            if !rotated.eq(inv.0.iter()) {
                continue;
            }
            // rotation by k is P^{-1} core P with P the length-k prefix, so
            // u = P^{-1} conjugates core to its inverse; every other such
            // conjugator is u core^j, and (u core^j)^2 = core^{-j} u^2 core^j.
            let prefix = NormalForm(core.0[..k].to_vec());
            let u = self.inv(&prefix);
            if self.mul(&u, &u).is_identity() {
                let witness = self.mul(&self.mul(&self.inv(&conj), &u), &conj);
                return Ok(Some(witness));
            }
            return Ok(None);
        }
        Ok(None)
    }

    pub fn classify(&self, w: &NormalForm) -> ElementClass {
        let (core, _) = self.cyclic_reduce(w);
        match core.0.as_slice() {
            [] => ElementClass::Torsion { factor: None, order: 1 },
            [s] => ElementClass::Torsion {
                factor: Some(s.factor as usize),
                order: self.factors[s.factor as usize].element_order(s.elem as usize),
            },
            _ => {
                let (root, power) = self.extract_root(w).expect("infinite order");
                let reversible = self.is_reversible(&root).expect("primitive root").is_some();
                let h_count = if reversible {
                    divisor_count(power) + divisor_sum(power)
                } else {
                    divisor_count(power)
                };
                ElementClass::Infinite { power, root, reversible, h_count }
            }
        }
    }

    /// For a torsion element, a factor syllable it is conjugate to (the
    /// cyclic core). `None` for the identity.
    pub fn torsion_representative(&self, w: &NormalForm) -> Result<Option<Syllable>> {
        let (core, _) = self.cyclic_reduce(w);
        match core.0.as_slice() {
            [] => Ok(None),
            [s] => Ok(Some(*s)),
            _ => Err(Error::Classification(format!(
                "{} has infinite order",
                self.format(w)
            ))),
        }
    }

    /// All elements of syllable length at most `max_len`, in breadth-first
    /// order.
    pub fn elements_up_to(&self, max_len: usize) -> Vec<NormalForm> {
        let mut out = vec![NormalForm::identity()];
        let mut layer = vec![NormalForm::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                let last = w.0.last().map(|s| s.factor as usize);
                for (i, g) in self.factors.iter().enumerate() {
                    if Some(i) == last {
                        continue;
                    }
                    for e in 1..g.order() {
                        let mut v = w.0.clone();
                        v.push(Syllable::new(i, e));
                        next.push(NormalForm(v));
                    }
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for FreeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Number of positive divisors.
pub fn divisor_count(d: u64) -> u64 {
    (1..=d).filter(|k| d % k == 0).count() as u64
}

/// Sum of positive divisors.
pub fn divisor_sum(d: u64) -> u64 {
    (1..=d).filter(|k| d % k == 0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2c3() -> FreeProduct {
        FreeProduct::parse("C2*C3").unwrap()
    }

    fn c2c2c2() -> FreeProduct {
        FreeProduct::parse("C2*C2*C2").unwrap()
    }

    #[test]
    fn table_axioms_are_enforced() {
        let bad_identity = vec![vec![1, 0], vec![0, 1]];
        assert!(FiniteGroup::from_table("bad", &bad_identity, None).is_err());
        let not_latin = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]];
        assert!(FiniteGroup::from_table("bad", &not_latin, None).is_err());
        // A Latin square with identity that is not associative (order 5 loop).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table("loop", &loop5, None), Err(Error::Input(_))));
    }

    #[test]
    fn table_file_round_trip() {
        let text = "3\n0 1 2\n1 2 0\n2 0 1\n";
        let g = FiniteGroup::parse_table("t", text).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.mul(1, 2), 0);
        assert!(FiniteGroup::parse_table("t", "2\n0 1\n").is_err());
    }

    #[test]
    fn large_table_uses_generator_associativity() {
        let g = FiniteGroup::cyclic(60).unwrap();
        assert_eq!(g.generating_set(), vec![1]);
        assert_eq!(g.element_order(12), 5);
    }

    #[test]
    fn s3_structure() {
        let g = FiniteGroup::symmetric3();
        assert_eq!(g.involutions().count(), 3);
        assert_eq!(g.element_order(1), 3);
        let r = g.element_by_name("r").unwrap();
        let s = g.element_by_name("s").unwrap();
        // s r s = r^{-1}
        assert_eq!(g.mul(g.mul(s, r), s), g.inv(r));
    }

    #[test]
    fn mu_and_big_m() {
        let gp = FreeProduct::parse("S3*C2*C4").unwrap();
        assert_eq!(gp.mu(), 12);
        assert_eq!(gp.big_m(), 12);
        assert!(FreeProduct::parse("C2*C2").unwrap().is_amenable_c2c2());
        assert!(!c2c3().is_amenable_c2c2());
    }

    #[test]
    fn normalize_examples() {
        let gp = c2c3();
        assert!(gp.normalize("x x").unwrap().is_identity());
        let yy = gp.normalize("y y").unwrap();
        assert_eq!(yy.syllables(), &[Syllable::new(1, 2)]);
        assert!(gp.normalize("x y y y x").unwrap().is_identity());
        assert!(matches!(gp.normalize("x q"), Err(Error::Input(_))));
        assert_eq!(gp.normalize("0.1 1.2").unwrap(), gp.normalize("x y2").unwrap());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let gp = c2c2c2();
        let (core, conj) = gp.cyclic_reduce(&NormalForm::identity());
        assert!(core.is_identity() && conj.is_identity());
        let w = gp.normalize("c a b a b c").unwrap();
        let (core, conj) = gp.cyclic_reduce(&w);
        assert_eq!(core, gp.normalize("a b a b").unwrap());
        assert_eq!(conj, gp.normalize("c").unwrap());
        assert_eq!(gp.mul(&gp.mul(&gp.inv(&conj), &core), &conj), w);
        let ab = gp.normalize("a b").unwrap();
        assert_eq!(gp.cyclic_reduce(&ab), (ab.clone(), NormalForm::identity()));
    }

    #[test]
    fn cyclic_reduce_fuses_same_factor_ends() {
        let gp = FreeProduct::parse("C3*C2").unwrap();
        // x y x: ends fuse to x^2 -> core is y x^2 up to rotation
        let w = gp.normalize("x y x").unwrap();
        let (core, conj) = gp.cyclic_reduce(&w);
        assert_eq!(core.len(), 2);
        assert_eq!(gp.mul(&gp.mul(&gp.inv(&conj), &core), &conj), w);
        // x y x2 collapses to the torsion element y
        let w = gp.normalize("x y x2").unwrap();
        assert_eq!(gp.cyclic_reduce(&w).0, gp.normalize("y").unwrap());
    }

    #[test]
    fn extract_root_examples() {
        let gp = c2c2c2();
        let ab3 = gp.normalize("a b a b a b").unwrap();
        assert_eq!(gp.extract_root(&ab3).unwrap(), (gp.normalize("a b").unwrap(), 3));
        let ab = gp.normalize("a b").unwrap();
        assert_eq!(gp.extract_root(&ab).unwrap(), (ab.clone(), 1));
        let w = gp.normalize("c a b a b c").unwrap();
        let (root, d) = gp.extract_root(&w).unwrap();
        assert_eq!(root, gp.normalize("c a b c").unwrap());
        assert_eq!(d, 2);
        assert_eq!(gp.pow(&root, 2), w);
        assert!(matches!(
            gp.extract_root(&gp.normalize("a").unwrap()),
            Err(Error::Classification(_))
        ));
    }

    #[test]
    fn reversibility_examples() {
        let gp = c2c2c2();
        let ab = gp.normalize("a b").unwrap();
        assert_eq!(gp.is_reversible(&ab).unwrap(), Some(gp.normalize("a").unwrap()));
        let gp = c2c3();
        assert_eq!(gp.is_reversible(&gp.normalize("x y").unwrap()).unwrap(), None);
        let w = gp.normalize("x y x y2").unwrap();
        assert_eq!(gp.is_reversible(&w).unwrap(), Some(gp.normalize("x").unwrap()));
        assert!(gp.is_reversible(&gp.normalize("y").unwrap()).is_err());
        assert!(gp.is_reversible(&gp.normalize("x y x y").unwrap()).is_err());
    }

    #[test]
    fn classification_examples() {
        let gp = c2c3();
        assert_eq!(
            gp.classify(&gp.normalize("x").unwrap()),
            ElementClass::Torsion { factor: Some(0), order: 2 }
        );
        assert_eq!(gp.classify(&gp.normalize("x").unwrap()).h(), 1);
        assert_eq!(
            gp.classify(&NormalForm::identity()),
            ElementClass::Torsion { factor: None, order: 1 }
        );
        let gp = c2c2c2();
        match gp.classify(&gp.normalize("a b").unwrap()) {
            ElementClass::Infinite { power, reversible, h_count, .. } => {
                assert_eq!((power, reversible, h_count), (1, true, 2));
            }
            c => panic!("unexpected {c:?}"),
        }
        match gp.classify(&gp.normalize("a b a b").unwrap()) {
            ElementClass::Infinite { power, reversible, h_count, .. } => {
                assert_eq!((power, reversible, h_count), (2, true, 5));
            }
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_sum(2), 3);
        assert_eq!(divisor_sum(12), 28);
    }

    /// Brute-force reversibility: search `g t g^{-1}` over all `g` with at most
    /// `|w|` syllables and all factor involutions `t`.
    fn brute_reversible(gp: &FreeProduct, w: &NormalForm, conjugators: &[NormalForm]) -> bool {
        let winv = gp.inv(w);
        for g in conjugators.iter().filter(|g| g.len() <= w.len()) {
            for (i, f) in gp.factors().iter().enumerate() {
                for t in f.involutions() {
                    let tau = gp.conj(g, &NormalForm(vec![Syllable::new(i, t)]));
                    if gp.mul(&gp.mul(&tau, w), &tau) == winv {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn reversibility_matches_brute_force_search() {
        for spec in ["C2*C3", "C2*C2*C2"] {
            let gp = FreeProduct::parse(spec).unwrap();
            let elems = gp.elements_up_to(6);
            for w in &elems {
                if gp.classify(w).is_torsion() {
                    continue;
                }
                let (root, _) = gp.extract_root(w).unwrap();
                let fast = gp.is_reversible(&root).unwrap().is_some();
                // a reversible root is reversed by some involution conjugate,
                // and then so is every power of it
                let brute = brute_reversible(&gp, w, &elems);
                assert_eq!(fast, brute, "{spec}: {}", gp.format(w));
            }
        }
    }
}
