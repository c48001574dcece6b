//! Schreier graphs of sampled actions and the spectrum of their adjacency
//! operators on the complement of the constants.
//!
//! The adjacency operator is `A = Σ_{w∈S} φ(w)` as a sum of permutation
//! matrices, so a fixed point of an involution contributes one loop and a
//! pair `{w, w⁻¹}` with `w ≠ w⁻¹` contributes two edges per vertex.

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FreeProduct, NormalForm};
use crate::rng;
use crate::sampler::HomImage;

/// Largest `N` handled by the dense eigensolver.
pub const DENSE_MAX: usize = 2048;
/// Default half-width for atom detection.
pub const ATOM_EPS: f64 = 1e-8;

/// `|S|`-regular multigraph stored as one permutation per generator.
#[derive(Clone, Debug)]
pub struct SparseGraph {
    n: usize,
    perms: Vec<Vec<u32>>,
}

impl SparseGraph {
    /// Builds the graph from explicit permutations. The permutation list
    /// must be closed under inversion as a multiset.
    pub fn from_permutations(perms: Vec<Vec<u32>>) -> Result<Self> {
        let n = perms.first().map_or(0, Vec::len);
        if perms.iter().any(|p| p.len() != n) {
            return Err(Error::Domain("generator permutations have different sizes".into()));
        }
        let mut fwd: Vec<&[u32]> = perms.iter().map(Vec::as_slice).collect();
        let inverses: Vec<Vec<u32>> = perms
            .iter()
            .map(|p| {
                let mut inv = vec![0u32; n];
                for (i, &j) in p.iter().enumerate() {
                    inv[j as usize] = i as u32;
                }
                inv
            })
            .collect();
        let mut bwd: Vec<&[u32]> = inverses.iter().map(Vec::as_slice).collect();
        fwd.sort();
        bwd.sort();
        if fwd != bwd {
            return Err(Error::Domain("generator permutations are not closed under inversion".into()));
        }
        Ok(SparseGraph { n, perms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.perms.len()
    }

    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.perms
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.perms.iter().map(|p| x[p[i] as usize]).sum();
        });
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for p in &self.perms {
            for (i, &j) in p.iter().enumerate() {
                a[(i, j as usize)] += 1.0;
            }
        }
        a
    }
}

/// Schreier graph of `φ` for a generator multiset `S`, which must be
/// symmetric: `w` and `w⁻¹` occur equally often (involutions pair with
/// themselves).
pub fn build_schreier(gp: &FreeProduct, phi: &HomImage, gens: &[NormalForm]) -> Result<SparseGraph> {
    let mut words: Vec<&NormalForm> = gens.iter().collect();
    let invs: Vec<NormalForm> = gens.iter().map(|w| gp.inv(w)).collect();
    let mut inv_refs: Vec<&NormalForm> = invs.iter().collect();
    words.sort_by_key(|w| w.syllables().to_vec());
    inv_refs.sort_by_key(|w| w.syllables().to_vec());
    if words != inv_refs {
        return Err(Error::Domain("generating multiset S is not symmetric under inversion".into()));
    }
    SparseGraph::from_permutations(gens.iter().map(|w| phi.permutation(w)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dense when `N ≤ DENSE_MAX`, iterative otherwise.
    Auto,
    Dense,
    Iterative,
}

/// Spectral summary on the complement of the constants.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    /// `‖A|_{1⊥}‖`.
    pub top_norm: f64,
    /// Largest eigenvalue on `1⊥`.
    pub lambda_max: f64,
    /// Smallest eigenvalue of `A`.
    pub lambda_min: f64,
    pub method: Method,
    /// Total matrix-vector products (0 in dense mode).
    pub iterations: usize,
    /// Largest final Ritz residual (0 in dense mode).
    pub residual: f64,
    pub converged: bool,
    /// All eigenvalues in ascending order (dense mode only).
    #[serde(skip)]
    pub eigenvalues: Option<Vec<f64>>,
    /// Eigenvalues on `1⊥`, ascending (dense mode only).
    #[serde(skip)]
    pub perp_eigenvalues: Option<Vec<f64>>,
}

pub struct IterativeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions { tol: 1e-6, max_iter: 10_000, seed: 0x5eed }
    }
}

fn dense_report(g: &SparseGraph) -> Result<SpectralReport> {
    if g.n > DENSE_MAX {
        return Err(Error::Domain(format!("dense eigensolve refused for N = {} > {DENSE_MAX}", g.n)));
    }
    if g.n == 0 {
        return Err(Error::Domain("empty graph".into()));
    }
    let mut eig: Vec<f64> = g.dense().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let deg = g.degree() as f64;
    // the constant vector carries eigenvalue |S|; drop one copy
    let drop = eig
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - deg).abs().total_cmp(&(b.1 - deg).abs()))
        .map(|(i, _)| i)
        .expect("nonempty");
    let mut perp = eig.clone();
    perp.remove(drop);
    let (lambda_max, lambda_min, top_norm) = if perp.is_empty() {
        (f64::NAN, eig[0], 0.0)
    } else {
        let hi = *perp.last().expect("nonempty");
        (hi, eig[0], hi.abs().max(perp[0].abs()))
    };
    Ok(SpectralReport {
        n: g.n,
        top_norm,
        lambda_max,
        lambda_min,
        method: Method::Dense,
        iterations: 0,
        residual: 0.0,
        converged: true,
        eigenvalues: Some(eig),
        perp_eigenvalues: Some(perp),
    })
}

fn project_normalize(v: &mut [f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Krylov dimension before an explicit restart.
const KRYLOV_MAX: usize = 400;

/// Orthogonalizes `w` against the constants and every vector in `basis`,
/// twice for stability.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        w.iter_mut().for_each(|x| *x -= mean);
        for b in basis {
            let c: f64 = w.iter().zip(b).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// Extreme Ritz pair of the tridiagonal matrix: `(value, eigenvector)`.
fn ritz_extreme(alpha: &[f64], beta: &[f64], want_max: bool) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let idx = (0..k)
        .max_by(|&a, &b| {
            let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
            if want_max { x.total_cmp(&y) } else { y.total_cmp(&x) }
        })
        .expect("nonempty");
    (eig.eigenvalues[idx], eig.eigenvectors.column(idx).iter().copied().collect())
}

/// Lanczos with full reorthogonalization on `1⊥` for the largest
/// (`want_max`) or smallest eigenvalue of `A`, restarted from the current
/// Ritz vector every `KRYLOV_MAX` steps. Returns
/// `(eigenvalue, matvecs, residual, converged)`.
fn lanczos_extreme(g: &SparseGraph, want_max: bool, opts: &IterativeOptions, stream: u64) -> (f64, usize, f64, bool) {
    let n = g.n;
    let mut r = rng::stream(opts.seed, stream, 0);
    let mut start: Vec<f64> = (0..n).map(|_| r.gen::<f64>() - 0.5).collect();
    let mut matvecs = 0;
    let mut best = (f64::NAN, f64::INFINITY);
    let mut w = vec![0.0; n];
    while matvecs < opts.max_iter {
        reorthogonalize(&mut start, &[]);
        if project_normalize(&mut start) == 0.0 {
            // 1⊥ is trivial or the start vector vanished
            return (0.0, matvecs, 0.0, true);
        }
        let m = KRYLOV_MAX.min(n - 1).min(opts.max_iter - matvecs).max(1);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let (mut alpha, mut beta) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for j in 0..m {
            g.matvec(&basis[j], &mut w);
            matvecs += 1;
            let a: f64 = w.iter().zip(&basis[j]).map(|(x, y)| x * y).sum();
            alpha.push(a);
            reorthogonalize(&mut w, &basis);
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let last = j + 1 == m;
            if last || b <= 1e-12 || (j + 1) % 10 == 0 {
                let (theta, y) = ritz_extreme(&alpha, &beta, want_max);
                let resid = b * y.last().expect("nonempty").abs();
                best = (theta, resid);
                if resid <= opts.tol || b <= 1e-12 {
                    return (theta, matvecs, resid, true);
                }
                if last {
                    start = vec![0.0; n];
                    for (c, v) in y.iter().zip(&basis) {
                        start.iter_mut().zip(v).for_each(|(s, x)| *s += c * x);
                    }
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
    (best.0, matvecs, best.1, false)
}

fn iterative_report(g: &SparseGraph, opts: &IterativeOptions) -> Result<SpectralReport> {
    if g.n < 2 {
        return Err(Error::Domain("iterative mode needs N ≥ 2".into()));
    }
    let (hi, it1, r1, c1) = lanczos_extreme(g, true, opts, 0);
    let (lo, it2, r2, c2) = lanczos_extreme(g, false, opts, 1);
    Ok(SpectralReport {
        n: g.n,
        top_norm: hi.abs().max(lo.abs()),
        lambda_max: hi,
        // the min over 1⊥ is the min overall since |S| is the top eigenvalue
        lambda_min: lo,
        method: Method::Iterative,
        iterations: it1 + it2,
        residual: r1.max(r2),
        converged: c1 && c2,
        eigenvalues: None,
        perp_eigenvalues: None,
    })
}

/// Spectral gap report; non-convergence is reported through
/// `converged = false`, never silently.
pub fn spectral_gap(g: &SparseGraph, mode: Mode, opts: &IterativeOptions) -> Result<SpectralReport> {
    match mode {
        Mode::Dense => dense_report(g),
        Mode::Iterative => iterative_report(g, opts),
        Mode::Auto if g.n <= DENSE_MAX => dense_report(g),
        Mode::Auto => iterative_report(g, opts),
    }
}

/// Fraction `#{λ on 1⊥ : |λ - λ₀| ≤ ε} / N`. Needs a dense report.
pub fn atom_mass(report: &SpectralReport, lambda0: f64, eps: f64) -> Result<f64> {
    let perp = report
        .perp_eigenvalues
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("atom masses need a dense spectrum (N ≤ {DENSE_MAX})")))?;
    Ok(perp.iter().filter(|&&l| (l - lambda0).abs() <= eps).count() as f64 / report.n as f64)
}

/// Equal-width histogram of `values` over `[lo, hi]`.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts.into_iter().enumerate().map(|(b, c)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, c)).collect()
}
