//! Random walks on a free product: exact step distributions, the split of
//! their mass by element class, moment estimates of `‖λ(x)‖`, and the
//! hitting-probability bounds for torsion, `C2*C2` and proper-power
//! elements.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ElementClass, FreeProduct, NormalForm};
use crate::precision::{self, Precision};

/// Default cap on the projected support size of one convolution step.
pub const WALK_BUDGET: u128 = 50_000_000;

/// Symmetric probability measure with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkGenerator {
    support: Vec<(NormalForm, BigRational)>,
}

impl WalkGenerator {
    pub fn new(gp: &FreeProduct, entries: Vec<(NormalForm, BigRational)>) -> Result<Self> {
        let mut merged: BTreeMap<NormalForm, BigRational> = BTreeMap::new();
        for (w, p) in entries {
            if p.is_negative() {
                return Err(Error::Domain(format!("negative weight {p} on {}", gp.format(&w))));
            }
            *merged.entry(w).or_insert_with(BigRational::zero) += p;
        }
        let total: BigRational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        for (w, p) in &merged {
            let q = merged.get(&gp.inv(w)).cloned().unwrap_or_else(BigRational::zero);
            if *p != q {
                return Err(Error::Domain(format!(
                    "generator is not symmetric: weight({}) = {p} but weight of its inverse is {q}",
                    gp.format(w)
                )));
            }
        }
        Ok(WalkGenerator { support: merged.into_iter().filter(|(_, p)| !p.is_zero()).collect() })
    }

    /// Uniform measure on the given words.
    pub fn uniform(gp: &FreeProduct, words: &[NormalForm]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Domain("empty generator".into()));
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(words.len()));
        WalkGenerator::new(gp, words.iter().map(|x| (x.clone(), w.clone())).collect())
    }

    /// Parses `"x:1/3,y:1/3,y2:1/3"`; entries without `:` get equal weight.
    pub fn parse(gp: &FreeProduct, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if parts.is_empty() {
            return Err(Error::Input("empty generator specification".into()));
        }
        let weighted = parts.iter().filter(|p| p.contains(':')).count();
        if weighted != 0 && weighted != parts.len() {
            return Err(Error::Input("either all generator entries carry weights or none do".into()));
        }
        if weighted == 0 {
            let words = parts.iter().map(|p| gp.normalize(p)).collect::<Result<Vec<_>>>()?;
            return WalkGenerator::uniform(gp, &words);
        }
        let entries = parts
            .iter()
            .map(|p| {
                let (w, q) = p.split_once(':').expect("checked");
                let q: BigRational =
                    q.trim().parse().map_err(|_| Error::Input(format!("bad weight `{}` (use a/b)", q.trim())))?;
                Ok((gp.normalize(w)?, q))
            })
            .collect::<Result<Vec<_>>>()?;
        WalkGenerator::new(gp, entries)
    }

    pub fn support(&self) -> &[(NormalForm, BigRational)] {
        &self.support
    }

    /// Largest syllable length in the support.
    pub fn max_len(&self) -> usize {
        self.support.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }
}

/// Law of `X_1 ⋯ X_p`.
#[derive(Clone, Debug)]
pub struct WalkDistribution {
    pub p: usize,
    pub mass: HashMap<NormalForm, BigRational>,
}

impl WalkDistribution {
    pub fn delta() -> Self {
        WalkDistribution { p: 0, mass: HashMap::from([(NormalForm::identity(), BigRational::one())]) }
    }

    pub fn total(&self) -> BigRational {
        self.mass.values().sum()
    }

    pub fn prob(&self, w: &NormalForm) -> BigRational {
        self.mass.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `Σ_γ P(γ)²`, which is `τ(x^{2p})` for a symmetric walk.
    pub fn self_inner(&self) -> BigRational {
        self.mass.values().map(|p| p * p).sum()
    }
}

/// One more step: `d ↦ d * x`.
pub fn convolve_step(gp: &FreeProduct, d: &WalkDistribution, x: &WalkGenerator, budget: u128) -> Result<WalkDistribution> {
    let projected = d.mass.len() as u128 * x.support.len() as u128;
    if projected > budget {
        return Err(Error::Budget { what: format!("walk support at step {}", d.p + 1), projected, budget });
    }
    let mut out: HashMap<NormalForm, BigRational> = HashMap::with_capacity(d.mass.len() * 2);
    for (g, pg) in &d.mass {
        for (s, ps) in &x.support {
            let w = gp.mul(g, s);
            *out.entry(w).or_insert_with(BigRational::zero) += pg * ps;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(WalkDistribution { p: d.p + 1, mass: out })
}

/// Exact law of the walk after `p` steps.
pub fn convolve_power(gp: &FreeProduct, x: &WalkGenerator, p: usize, budget: u128) -> Result<WalkDistribution> {
    let mut d = WalkDistribution::delta();
    for _ in 0..p {
        d = convolve_step(gp, &d, x, budget)?;
    }
    Ok(d)
}

/// Mass split by element class. `pow` holds proper powers `δ^d` (`d ≥ 2`)
/// by exponent, `c2c2` the remaining elements that lie in a `C2*C2`
/// subgroup, `generic` the rest of the infinite-order elements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelMasses {
    #[serde(serialize_with = "ser_ratio")]
    pub torsion: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub c2c2: BigRational,
    #[serde(serialize_with = "ser_ratio_map")]
    pub pow: BTreeMap<u64, BigRational>,
    #[serde(serialize_with = "ser_ratio")]
    pub generic: BigRational,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_ratio_map<S: serde::Serializer>(m: &BTreeMap<u64, BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    map.end()
}

impl ChannelMasses {
    pub fn total(&self) -> BigRational {
        &self.torsion + &self.c2c2 + &self.generic + self.pow.values().sum::<BigRational>()
    }
}

/// Splits the mass of `d` by class. Fails if a proper power with exponent
/// above `p·|x|` carries mass, which the support bound rules out.
pub fn classify_mass(gp: &FreeProduct, d: &WalkDistribution, max_len: usize) -> Result<ChannelMasses> {
    let mut m = ChannelMasses {
        torsion: BigRational::zero(),
        c2c2: BigRational::zero(),
        pow: BTreeMap::new(),
        generic: BigRational::zero(),
    };
    for (w, p) in &d.mass {
        match gp.classify(w) {
            ElementClass::Torsion { .. } => m.torsion += p,
            ElementClass::Infinite { power: 1, reversible: true, .. } => m.c2c2 += p,
            ElementClass::Infinite { power: 1, .. } => m.generic += p,
            ElementClass::Infinite { power, .. } => {
                if power as usize > d.p * max_len {
                    return Err(Error::Numeric(format!(
                        "proper power with exponent {power} at step {} exceeds p·|x| = {}",
                        d.p,
                        d.p * max_len
                    )));
                }
                *m.pow.entry(power).or_insert_with(BigRational::zero) += p;
            }
        }
    }
    Ok(m)
}

/// The `n^{-μ/μ}` coefficient of the expected normalized trace of `x^p`,
/// split as in the temperedness argument.
#[derive(Clone, Debug, Serialize)]
pub struct UMuChannels {
    pub p: usize,
    /// `Σ_{γ infinite} (h(γ) - 1) P_p(γ)`, exact.
    #[serde(serialize_with = "ser_ratio")]
    pub infinite: BigRational,
    /// `u_μ(1) · P_p(1) = -P_p(1)`.
    #[serde(serialize_with = "ser_ratio")]
    pub torsion_identity: BigRational,
    /// Mass on nontrivial torsion elements, whose `u_μ` values are known
    /// only through fits.
    #[serde(serialize_with = "ser_ratio")]
    pub torsion_other_mass: BigRational,
}

pub fn u_mu_channels(gp: &FreeProduct, d: &WalkDistribution) -> UMuChannels {
    let mut out = UMuChannels {
        p: d.p,
        infinite: BigRational::zero(),
        torsion_identity: BigRational::zero(),
        torsion_other_mass: BigRational::zero(),
    };
    for (w, p) in &d.mass {
        if w.is_identity() {
            out.torsion_identity -= p;
            continue;
        }
        match gp.classify(w) {
            ElementClass::Torsion { .. } => out.torsion_other_mass += p,
            ElementClass::Infinite { h_count, .. } => out.infinite += p * BigRational::from_integer((h_count - 1).into()),
        }
    }
    out
}

/// [`u_mu_channels`] of `x^p`.
pub fn u_mu_power(gp: &FreeProduct, x: &WalkGenerator, p: usize, budget: u128) -> Result<UMuChannels> {
    Ok(u_mu_channels(gp, &convolve_power(gp, x, p, budget)?))
}

/// Models with a closed-form `‖λ(Σ_{s∈S} s)‖` for the unweighted sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormModel {
    /// Free group on `d` generators with `S = {a_i^{±1}}`: `2√(2d-1)`.
    Free(u32),
    /// `C2^{*d}` with its `d` involutions: `2√(d-1)`.
    C2Star(u32),
    /// `C2*C3` with `S = {x, y, y²}`: `(1 + √(13+8√2))/2`.
    C2C3,
}

impl NormModel {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        if t == "c2c3" {
            return Ok(NormModel::C2C3);
        }
        let arg = |prefix: &str| -> Option<u32> { t.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok() };
        if let Some(d) = arg("free(") {
            return Ok(NormModel::Free(d));
        }
        if let Some(d) = arg("c2star(") {
            return Ok(NormModel::C2Star(d));
        }
        Err(Error::Input(format!("unknown norm model `{text}` (free(d), c2star(d), c2c3)")))
    }
}

/// Closed-form constant plus, for `C2*C3`, the spectral-measure data.
#[derive(Clone, Debug, Serialize)]
pub struct LimitNorm {
    pub value: f64,
    /// Support endpoints `(1 ± √(13 ± 8√2))/2`, ascending.
    pub support_endpoints: Option<[f64; 4]>,
    /// Atoms `(λ, mass)`.
    pub atoms: Vec<(f64, f64)>,
}

pub fn limit_norm_constants(model: NormModel) -> Result<LimitNorm> {
    match model {
        NormModel::Free(d) if d >= 1 => Ok(LimitNorm {
            value: 2.0 * (2.0 * d as f64 - 1.0).sqrt(),
            support_endpoints: None,
            atoms: vec![],
        }),
        NormModel::C2Star(d) if d >= 2 => Ok(LimitNorm {
            value: 2.0 * (d as f64 - 1.0).sqrt(),
            support_endpoints: None,
            atoms: vec![],
        }),
        NormModel::C2C3 => {
            let s2 = 2f64.sqrt();
            let big = (13.0 + 8.0 * s2).sqrt();
            let small = (13.0 - 8.0 * s2).sqrt();
            Ok(LimitNorm {
                value: (1.0 + big) / 2.0,
                support_endpoints: Some([(1.0 - big) / 2.0, (1.0 - small) / 2.0, (1.0 + small) / 2.0, (1.0 + big) / 2.0]),
                atoms: vec![(-2.0, 1.0 / 6.0), (0.0, 1.0 / 6.0)],
            })
        }
        other => Err(Error::Domain(format!("no closed form for {other:?}"))),
    }
}

/// Moment sequence `m_p = τ(x^{2p})^{1/(2p)}` and its extrapolated limit.
#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub m: Vec<f64>,
    /// `τ(x^{2p})` as exact decimal strings.
    pub tau: Vec<String>,
    pub limit: f64,
    pub monotone: bool,
    /// The budget stopped the sequence before `pmax`.
    pub truncated: bool,
}

/// Fits `ln m_p = ln ρ - c (ln p)/p - c'/p` by least squares on the last
/// (up to) six points and returns `ρ`.
pub fn extrapolate_moments(m: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = m.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v.ln())).collect();
    let tail = &pts[pts.len().saturating_sub(6)..];
    if tail.len() < 3 {
        return m.last().copied().unwrap_or(f64::NAN);
    }
    let rows: Vec<[f64; 3]> = tail.iter().map(|(p, _)| [1.0, -p.ln() / p, -1.0 / p]).collect();
    let y: Vec<f64> = tail.iter().map(|(_, v)| *v).collect();
    let a = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_vec(y);
    match a.svd(true, true).solve(&b, 1e-14) {
        Ok(sol) => sol[0].exp(),
        Err(_) => m.last().copied().unwrap_or(f64::NAN),
    }
}

pub fn norm_estimate(gp: &FreeProduct, x: &WalkGenerator, pmax: usize, budget: u128) -> Result<NormEstimate> {
    let prec = Precision::from_digits(30);
    let mut d = WalkDistribution::delta();
    let mut m = Vec::new();
    let mut tau = Vec::new();
    let mut truncated = false;
    for p in 1..=pmax {
        d = match convolve_step(gp, &d, x, budget) {
            Ok(next) => next,
            Err(Error::Budget { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let t = d.self_inner();
        let v = precision::from_ratio(&t, prec).ln() / precision::from_u64(2 * p as u64, prec);
        m.push(precision::to_f64(&v.exp()));
        tau.push(t.to_string());
    }
    let monotone = m.windows(2).all(|w| w[1] >= w[0] - 1e-15);
    if m.iter().any(|&v| v > 1.0 + 1e-12) {
        return Err(Error::Numeric("moment exceeds 1 for a probability generator".into()));
    }
    Ok(NormEstimate { limit: extrapolate_moments(&m), m, tau, monotone, truncated })
}

/// One row of the hitting-bound table.
#[derive(Clone, Debug, Serialize)]
pub struct HittingRow {
    pub p: usize,
    pub torsion_ratio: f64,
    pub torsion_bound: f64,
    pub c2c2_ratio: f64,
    pub c2c2_bound: f64,
    /// `(d, mass/‖λ(x)‖^p)`.
    pub pow_ratios: Vec<(u64, f64)>,
    pub pow_bound: f64,
    pub pow_support_ok: bool,
    pub all_below: bool,
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Channel masses divided by `‖λ(x)‖^p` against the polynomials
/// `(p+1)² M`, `(p+1)⁵ M²` and `(p+1)⁴`, for `1 ≤ p ≤ pmax`.
pub fn hitting_bound_report(
    gp: &FreeProduct,
    x: &WalkGenerator,
    norm: f64,
    pmax: usize,
    budget: u128,
) -> Result<Vec<HittingRow>> {
    let big_m = gp.big_m() as f64;
    let max_len = x.max_len();
    let mut d = WalkDistribution::delta();
    let mut rows = Vec::new();
    for p in 1..=pmax {
        d = convolve_step(gp, &d, x, budget)?;
        let ch = classify_mass(gp, &d, max_len)?;
        let scale = norm.powi(p as i32);
        let q = (p + 1) as f64;
        let torsion_ratio = ratio_f64(&ch.torsion) / scale;
        let c2c2_ratio = ratio_f64(&ch.c2c2) / scale;
        let pow_ratios: Vec<(u64, f64)> = ch.pow.iter().map(|(k, v)| (*k, ratio_f64(v) / scale)).collect();
        let pow_support_ok = ch.pow.keys().all(|&k| k as usize <= p * max_len);
        let (tb, cb, pb) = (q.powi(2) * big_m, q.powi(5) * big_m * big_m, q.powi(4));
        let all_below = torsion_ratio <= tb && c2c2_ratio <= cb && pow_ratios.iter().all(|(_, r)| *r <= pb) && pow_support_ok;
        rows.push(HittingRow {
            p,
            torsion_ratio,
            torsion_bound: tb,
            c2c2_ratio,
            c2c2_bound: cb,
            pow_ratios,
            pow_bound: pb,
            pow_support_ok,
            all_below,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn c2c3() -> (FreeProduct, WalkGenerator) {
        let gp = FreeProduct::parse("C2*C3").unwrap();
        let x = WalkGenerator::parse(&gp, "x:1/3,y:1/3,y2:1/3").unwrap();
        (gp, x)
    }

    #[test]
    fn generator_validation() {
        let gp = FreeProduct::parse("C2*C3").unwrap();
        assert!(WalkGenerator::parse(&gp, "x:1/2,y:1/2").is_err());
        assert!(WalkGenerator::parse(&gp, "x:1/2,y:1/4,y2:1/8").is_err());
        assert!(WalkGenerator::parse(&gp, "x,y:1/2").is_err());
        let u = WalkGenerator::parse(&gp, "x, y, y2").unwrap();
        assert_eq!(u.support().len(), 3);
    }

    #[test]
    fn two_steps_c2c3() {
        let (gp, x) = c2c3();
        assert_eq!(convolve_power(&gp, &x, 1, WALK_BUDGET).unwrap().mass.len(), 3);
        let d = convolve_power(&gp, &x, 2, WALK_BUDGET).unwrap();
        assert_eq!(d.prob(&NormalForm::identity()), q(1, 3));
        assert_eq!(d.total(), q(1, 1));
        let ch = classify_mass(&gp, &d, x.max_len()).unwrap();
        assert_eq!(ch.torsion, q(5, 9));
        assert_eq!(ch.generic, q(4, 9));
        assert!(ch.c2c2.is_zero() && ch.pow.is_empty());
        let u = u_mu_channels(&gp, &d);
        assert!(u.infinite.is_zero());
        assert_eq!(u.torsion_identity, q(-1, 3));
    }

    #[test]
    fn c2cube_two_steps() {
        let gp = FreeProduct::parse("C2*C2*C2").unwrap();
        let x = WalkGenerator::parse(&gp, "a,b,c").unwrap();
        let d = convolve_power(&gp, &x, 2, WALK_BUDGET).unwrap();
        let ch = classify_mass(&gp, &d, 1).unwrap();
        assert_eq!(ch.c2c2, q(6, 9));
        assert_eq!(ch.total(), q(1, 1));
    }

    #[test]
    fn four_steps_have_reversible_mass() {
        let (gp, x) = c2c3();
        let u = u_mu_power(&gp, &x, 4, WALK_BUDGET).unwrap();
        assert!(u.infinite > BigRational::zero());
        let d = convolve_power(&gp, &x, 6, WALK_BUDGET).unwrap();
        for (w, p) in &d.mass {
            assert_eq!(*p, d.prob(&gp.inv(w)));
        }
    }

    #[test]
    fn delta_walk() {
        let gp = FreeProduct::parse("C2*C3").unwrap();
        let x = WalkGenerator::new(&gp, vec![(NormalForm::identity(), q(1, 1))]).unwrap();
        let est = norm_estimate(&gp, &x, 5, WALK_BUDGET).unwrap();
        assert!(est.m.iter().all(|&m| (m - 1.0).abs() < 1e-12));
        let d = WalkDistribution::delta();
        assert_eq!(classify_mass(&gp, &d, 0).unwrap().torsion, q(1, 1));
        assert_eq!(u_mu_channels(&gp, &d).torsion_identity, q(-1, 1));
    }

    #[test]
    fn constants() {
        assert!((limit_norm_constants(NormModel::C2Star(3)).unwrap().value - 2.828427).abs() < 1e-6);
        assert!((limit_norm_constants(NormModel::C2C3).unwrap().value - 2.9654).abs() < 1e-4);
        assert!((limit_norm_constants(NormModel::Free(2)).unwrap().value - 3.4641).abs() < 1e-4);
        assert_eq!(NormModel::parse("c2star(4)").unwrap(), NormModel::C2Star(4));
        assert!(NormModel::parse("sl2").is_err());
    }

    #[test]
    fn hitting_rows_small_p() {
        let (gp, x) = c2c3();
        let rows = hitting_bound_report(&gp, &x, 2.9654 / 3.0, 6, WALK_BUDGET).unwrap();
        let r2 = &rows[1];
        assert!((r2.torsion_ratio - (5.0 / 9.0) / (2.9654f64 / 3.0).powi(2)).abs() < 1e-12);
        assert_eq!(r2.torsion_bound, 45.0);
        assert!(rows.iter().all(|r| r.all_below));
    }

    #[test]
    fn budget_refusal() {
        let (gp, x) = c2c3();
        assert!(matches!(convolve_power(&gp, &x, 5, 10), Err(Error::Budget { .. })));
    }
}
