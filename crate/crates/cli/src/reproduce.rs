//! The acceptance suite: fourteen numbered criteria, each split into
//! clauses with measured values and targets.
//!
//! Statistical criteria use fixed seeds, so every run is deterministic.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use freeprod::fe::{self, FracSeries, PolyDescriptor};
use freeprod::homcount::{enumerate_homs, ratio_parts_eq, CountTable, ProductTables, BRUTE_BUDGET};
use freeprod::precision::{self, Precision, Real};
use freeprod::sampler::{FactorSampler, ProductSampler};
use freeprod::spectra::{self, IterativeOptions, Mode};
use freeprod::trace::{self, Verdict};
use freeprod::walks::{self, NormModel, WalkGenerator, WALK_BUDGET};
use freeprod::{rng, FiniteGroup, FreeProduct, NormalForm};

use crate::error::{CliError, CliResult};

pub const CRITERIA: usize = 14;

/// Clauses that cannot be met at desk scale, with the reason. They are
/// still run and reported as failures.
pub const UNATTAINABLE: &[(usize, &str, &str)] = &[
    (
        9,
        "ratio-1 slope",
        "the error of the leading saddle-point term is O(1/n), so |α_n/M(r_n) - 1| decays with slope -1, not -1/q",
    ),
    (
        14,
        "C2*C2*C2 u_mu infinite channel",
        "the polynomial prefactors keep |u_mu|^(1/p) above 1 for p <= 14; the sequence decreases toward the norm only at larger p",
    ),
];

#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub target: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub clauses: Vec<Clause>,
    pub measured: String,
    pub target: String,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub details: Value,
}

impl CriterionOutcome {
    /// One summary line.
    pub fn line(&self) -> String {
        let over = if self.seconds > self.budget_seconds { " (over runtime budget)" } else { "" };
        format!(
            "[{}] criterion {:>2}: {} | measured {} | target {} | {:.1}s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.target,
            self.seconds,
            over
        )
    }

    /// Failed clauses not listed in [`UNATTAINABLE`].
    pub fn unexpected_failures(&self) -> Vec<&Clause> {
        self.clauses
            .iter()
            .filter(|c| !c.passed && !UNATTAINABLE.iter().any(|(id, name, _)| *id == self.id && *name == c.name))
            .collect()
    }
}

struct Builder {
    clauses: Vec<Clause>,
    details: Value,
}

impl Builder {
    fn new() -> Self {
        Builder { clauses: Vec::new(), details: json!({}) }
    }

    fn clause(&mut self, name: &str, passed: bool, measured: impl Into<String>, target: impl Into<String>) {
        self.clauses.push(Clause { name: name.into(), passed, measured: measured.into(), target: target.into() });
    }

    fn detail(&mut self, key: &str, v: Value) {
        self.details[key] = v;
    }
}

/// Runs criterion `id` (1-based).
pub fn run(id: usize) -> CliResult<CriterionOutcome> {
    let (title, budget): (&str, f64) = match id {
        1 => ("involution trace law (exact)", 1.0),
        2 => ("sqrt(N) growth of r_N", 1.0),
        3 => ("expected-trace expansion structure", 300.0),
        4 => ("marked-orbit formula = enumeration", 60.0),
        5 => ("non-Ramanujan C2*C3 Schreier graphs", 120.0),
        6 => ("almost-Ramanujan C2*C2*C2 Schreier graphs", 120.0),
        7 => ("spectral atoms of C2*C3 at 0 and -2", 180.0),
        8 => ("saddle-point approximation rate", 60.0),
        9 => ("leading-order saddle-point check", 60.0),
        10 => ("fractional-expansion closure laws", 60.0),
        11 => ("sampler uniformity and relations", 120.0),
        12 => ("walk classification exactness", 1.0),
        13 => ("moment-method norms", 300.0),
        14 => ("temperedness diagnostic", 300.0),
        _ => return Err(CliError::Usage(format!("no criterion {id}; valid ids are 1..={CRITERIA}"))),
    };
    let t0 = Instant::now();
    let mut b = Builder::new();
    match id {
        1 => c1(&mut b)?,
        2 => c2(&mut b)?,
        3 => c3(&mut b)?,
        4 => c4(&mut b)?,
        5 => c5(&mut b)?,
        6 => c6(&mut b)?,
        7 => c7(&mut b)?,
        8 => c8(&mut b)?,
        9 => c9(&mut b)?,
        10 => c10(&mut b)?,
        11 => c11(&mut b)?,
        12 => c12(&mut b)?,
        13 => c13(&mut b)?,
        _ => c14(&mut b)?,
    }
    let seconds = t0.elapsed().as_secs_f64();
    let passed = b.clauses.iter().all(|c| c.passed);
    let measured = b.clauses.iter().map(|c| format!("{}={}", c.name, c.measured)).collect::<Vec<_>>().join("; ");
    let target = b.clauses.iter().map(|c| c.target.clone()).collect::<Vec<_>>().join("; ");
    Ok(CriterionOutcome {
        id,
        title: title.into(),
        passed,
        clauses: b.clauses,
        measured,
        target,
        seconds,
        budget_seconds: budget,
        details: b.details,
    })
}

/// Runs every criterion.
pub fn run_all() -> CliResult<Vec<CriterionOutcome>> {
    (1..=CRITERIA).map(run).collect()
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn involution_numbers(nmax: usize) -> Vec<BigUint> {
    let mut a = vec![BigUint::one(), BigUint::one()];
    for n in 2..=nmax {
        let next = &a[n - 1] + BigUint::from(n - 1) * &a[n - 2];
        a.push(next);
    }
    a
}

fn c1(b: &mut Builder) -> CliResult<()> {
    let nmax = 10_000;
    let gp = FreeProduct::parse("C2")?;
    let x = gp.normalize("x")?;
    let tables = ProductTables::new(&gp, nmax);
    let a = involution_numbers(nmax);
    let mut bad = Vec::new();
    for n in 2..=nmax {
        let (num, den) = tables.expected_fix_torsion_parts(&gp, &x, n)?;
        // E[tr π_N] + 1 = E[fix] on both sides
        let rhs = BigUint::from(n) * &a[n - 1];
        // den = |C2| a_N in practice; equal denominators reduce the exact
        // comparison to the numerators, otherwise cross-multiply
        let two = BigUint::from(2u8);
        let equal = if den == &two * &a[n] { num == &two * &rhs } else { ratio_parts_eq((&num, &den), (&rhs, &a[n])) };
        if !equal {
            bad.push(n);
        }
    }
    b.clause("mismatches", bad.is_empty(), format!("{} of {}", bad.len(), nmax - 1), "0 for 2 <= N <= 10^4");
    b.detail("mismatched_n", json!(bad.iter().take(20).collect::<Vec<_>>()));
    Ok(())
}

fn c2(b: &mut Builder) -> CliResult<()> {
    let a = involution_numbers(10_000);
    let prec = Precision::from_digits(30);
    let mut worst = 0f64;
    let mut worst_n = 0;
    for n in 100..=10_000usize {
        let r = precision::to_f64(&precision::quotient(&a[n], &a[n - 1], prec));
        let dev = (r - (n as f64).sqrt() - 0.5).abs() * (n as f64).sqrt();
        if dev > worst {
            worst = dev;
            worst_n = n;
        }
    }
    b.clause("max sqrt(N)|r_N - sqrt(N) - 1/2|", worst <= 2.0, format!("{worst:.4} at N={worst_n}"), "<= 2");
    Ok(())
}

fn c3(b: &mut Builder) -> CliResult<()> {
    let grid: Vec<usize> = fe::geometric_grid(5000, 20_000, 30).into_iter().map(|n| n as usize).collect();
    let seeds: Vec<u64> = (0..200).collect();
    let cases: [(&str, &[&str]); 2] = [("C2*C3", &["1", "x", "y", "x y"]), ("C2*C2*C2", &["a", "a b", "a b a b"])];
    let mut reports = Vec::new();
    for (g, words) in cases {
        let gp = FreeProduct::parse(g)?;
        for w in words {
            let gamma = gp.normalize(w)?;
            let nlist = if gp.classify(&gamma).is_torsion() { grid.clone() } else { vec![1000, 10_000] };
            let ts = trace::collect_traces(&gp, &gamma, &nlist, &seeds, BRUTE_BUDGET)?;
            let rep = trace::verify_requirement1(&gp, &ts, 12)?;
            let key = format!("{g} {}", if gamma.is_identity() { "1".to_string() } else { gp.format(&gamma) });
            let summary = rep
                .checks
                .iter()
                .map(|c| format!("{} {:.6}", c.name, c.observed))
                .collect::<Vec<_>>()
                .join(", ");
            b.clause(&key, rep.verdict == Verdict::Pass, format!("{:?} ({summary})", rep.verdict), "pass");
            reports.push(json!({ "element": key, "report": rep }));
        }
    }
    b.detail("reports", json!(reports));
    Ok(())
}

fn c4(b: &mut Builder) -> CliResult<()> {
    for g in ["C2*C3", "C2*C2*C2", "S3*C2"] {
        let gp = FreeProduct::parse(g)?;
        let rep = trace::torsion_oracle_check(&gp, 3, 6, BRUTE_BUDGET)?;
        b.clause(
            g,
            rep.passed(),
            format!("{} mismatches over {} comparisons ({} elements)", rep.mismatches.len(), rep.comparisons, rep.elements),
            "0 mismatches, N <= 6",
        );
    }
    Ok(())
}

fn top_norms(group: &str, gens: &str, n: usize, seeds: &[u64], mode: Mode) -> CliResult<Vec<spectra::SpectralReport>> {
    let gp = FreeProduct::parse(group)?;
    let gens: Vec<NormalForm> = gens.split(',').map(|w| gp.normalize(w)).collect::<freeprod::Result<_>>()?;
    let tables = ProductTables::new(&gp, n);
    let sampler = ProductSampler::new(&tables);
    seeds
        .iter()
        .map(|&seed| {
            let phi = sampler.sample(n, seed, 0)?;
            let g = spectra::build_schreier(&gp, &phi, &gens)?;
            Ok(spectra::spectral_gap(&g, mode, &IterativeOptions { seed, ..Default::default() })?)
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn c5(b: &mut Builder) -> CliResult<()> {
    let reps = top_norms("C2*C3", "x,y,y2", 3000, &[1, 2, 3, 4, 5], Mode::Iterative)?;
    let tops: Vec<f64> = reps.iter().map(|r| r.top_norm).collect();
    let med = median(&tops);
    let target = walks::limit_norm_constants(NormModel::C2C3)?.value;
    let bound = 2.0 * 2f64.sqrt();
    let above = tops.iter().filter(|&&t| t > bound).count();
    b.clause("median topNorm", (med - target).abs() <= 0.15, format!("{med:.4}"), format!("{target:.4} +- 0.15"));
    b.clause("seeds above 2sqrt2", above >= 4, format!("{above}/5"), ">= 4/5");
    b.clause("converged", reps.iter().all(|r| r.converged), format!("{}", reps.iter().all(|r| r.converged)), "true");
    b.detail("top_norms", json!(tops));
    Ok(())
}

fn c6(b: &mut Builder) -> CliResult<()> {
    let reps = top_norms("C2*C2*C2", "a,b,c", 3000, &[1, 2, 3, 4, 5], Mode::Iterative)?;
    let tops: Vec<f64> = reps.iter().map(|r| r.top_norm).collect();
    let med = median(&tops);
    let r = 2.0 * 2f64.sqrt();
    b.clause(
        "median topNorm",
        med >= r - 0.05 && med <= r + 0.20,
        format!("{med:.4}"),
        format!("[{:.4}, {:.4}]", r - 0.05, r + 0.2),
    );
    b.clause("converged", reps.iter().all(|r| r.converged), format!("{}", reps.iter().all(|r| r.converged)), "true");
    b.detail("top_norms", json!(tops));
    Ok(())
}

fn c7(b: &mut Builder) -> CliResult<()> {
    let reps = top_norms("C2*C3", "x,y,y2", 1200, &[1], Mode::Dense)?;
    let rep = &reps[0];
    let eps = 1e-6;
    for (name, at) in [("mass at 0", 0.0), ("mass at -2", -2.0)] {
        let m = spectra::atom_mass(rep, at, eps)?;
        b.clause(name, (m - 1.0 / 6.0).abs() <= 0.03, format!("{m:.4}"), "1/6 +- 0.03");
    }
    Ok(())
}

fn c8(b: &mut Builder) -> CliResult<()> {
    let prec = Precision::from_digits(60);
    let ns: Vec<u64> = (0..=8).map(|i| 10f64.powf(3.0 + 0.5 * i as f64).round() as u64).collect();
    let mut rows = Vec::new();
    for m in [2usize, 3] {
        let p = PolyDescriptor::cyclic(m)?;
        let q = p.q() as f64;
        for s in 1..=3usize {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &n in &ns {
                let r = fe::rn_solve(&p, n, prec)?;
                let rho = fe::lagrange_rho(&p, n, s, prec)?.rho;
                let d = precision::to_f64(&(r - rho)).abs();
                xs.push((n as f64).ln());
                ys.push(d.ln());
            }
            let slope = ols_slope(&xs, &ys);
            let target = -(q + s as f64 - 1.0) / q;
            let ok = ((slope - target) / target).abs() <= 0.05;
            b.clause(&format!("C{m} s={s}"), ok, format!("{slope:.4}"), format!("{target:.4} +- 5%"));
            rows.push(json!({ "group": format!("C{m}"), "s": s, "slope": slope, "log_diff": ys }));
        }
    }
    b.detail("rows", json!(rows));
    Ok(())
}

fn c9(b: &mut Builder) -> CliResult<()> {
    let prec = Precision::from_digits(40);
    // below n = 1000 the C3 ratio still oscillates (complex saddle points)
    let ns = [1000usize, 2000, 4000, 8000];
    for m in [2usize, 3] {
        let p = PolyDescriptor::cyclic(m)?;
        let table = CountTable::new(&FiniteGroup::cyclic(m)?, 8000);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut at2000 = f64::NAN;
        for &n in &ns {
            let ratio = precision::to_f64(&fe::muller_leading_check(&p, &table, n, prec)?);
            if n == 2000 {
                at2000 = ratio;
            }
            xs.push((n as f64).ln());
            ys.push((ratio - 1.0).abs().ln());
        }
        b.clause(&format!("C{m} ratio at n=2000"), (0.99..=1.01).contains(&at2000), format!("{at2000:.6}"), "[0.99, 1.01]");
        let slope = ols_slope(&xs, &ys);
        let target = -1.0 / m as f64;
        b.clause(
            "ratio-1 slope",
            ((slope - target) / target).abs() <= 0.10,
            format!("C{m}: {slope:.4}"),
            format!("{target:.4} +- 10%"),
        );
        // the proven error of the leading term is O(1/n)
        b.clause(
            "ratio-1 slope against 1/n",
            (slope + 1.0).abs() <= 0.10,
            format!("C{m}: {slope:.4}"),
            "-1 +- 10%",
        );
    }
    Ok(())
}

fn random_series(r: &mut impl Rng, q: usize, s: usize) -> FracSeries<BigRational> {
    let mut coeffs = vec![BigRational::one()];
    for _ in 1..s {
        let num: i64 = loop {
            let v = r.gen_range(-5i64..=5);
            if v != 0 {
                break v;
            }
        };
        coeffs.push(BigRational::new(num.into(), r.gen_range(1i64..=4).into()));
    }
    FracSeries::new(q, coeffs).expect("valid series")
}

fn ev(f: &FracSeries<BigRational>, n: u64, prec: Precision) -> Real {
    f.eval(n, prec)
}

/// Slope of `ln|err(n)|` against `ln n` on a grid where the leading error
/// term dominates.
fn error_slope(q: usize, err: impl Fn(u64) -> Real) -> f64 {
    let lo = 4.0 * q as f64;
    let ns: Vec<u64> = (0..5).map(|i| 10f64.powf(lo + i as f64).round() as u64).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let e = err(n);
            let v: Real = dashu_abs(e);
            precision::to_f64(&v.ln())
        })
        .collect();
    ols_slope(&xs, &ys)
}

fn dashu_abs(x: Real) -> Real {
    if x < Real::ZERO {
        -x
    } else {
        x
    }
}

/// `f` with zero coefficients appended up to length `len`: the same
/// function of `n`, so operations on it give the untruncated expansion.
fn pad(f: &FracSeries<BigRational>, len: usize) -> FracSeries<BigRational> {
    let mut c = f.coeffs().to_vec();
    c.resize(len.max(c.len()), BigRational::zero());
    FracSeries::new(f.q(), c).expect("valid series")
}

/// Index of the leading term of the truncation error: the first nonzero
/// coefficient at index >= `s` of the untruncated result, if any.
fn leading_error_index(full: &FracSeries<BigRational>, s: usize) -> Option<usize> {
    (s..full.s()).find(|&k| !full.coeffs()[k].is_zero())
}

fn c10(b: &mut Builder) -> CliResult<()> {
    let prec = Precision::from_digits(250);
    let trials = 200u64;
    let one = precision::from_i64(1, prec);
    let mut summary = serde_json::Map::new();
    for (law_idx, law) in ["product", "reciprocal", "shift", "sum"].iter().enumerate() {
        let mut exact_fail = 0;
        let mut slope_fail = 0;
        let mut higher_order = 0;
        let mut vanishing = 0;
        let mut worst: f64 = 0.0;
        for t in 0..trials {
            let mut r = rng::stream(10, t, law_idx as u64);
            let q = r.gen_range(1..=3usize);
            let s = r.gen_range(q + 1..=q + 3);
            let f = random_series(&mut r, q, s);
            let g = random_series(&mut r, q, s);
            let long = s + 3 * q + 3;
            let (fp, gp) = (pad(&f, long), pad(&g, long));
            let (exact_ok, full, err): (bool, FracSeries<BigRational>, Box<dyn Fn(u64) -> Real>) = match *law {
                "product" => {
                    let unit = FracSeries::unit(q, s, &BigRational::zero());
                    let fg = fe::fe_product(&f, &g)?;
                    let ok = fe::fe_product(&f, &unit)? == f && fe::fe_product(&g, &f)? == fg;
                    let (f, g) = (f.clone(), g.clone());
                    (ok, fe::fe_product(&fp, &gp)?, Box::new(move |n| ev(&fg, n, prec) - ev(&f, n, prec) * ev(&g, n, prec)))
                }
                "reciprocal" => {
                    let inv = fe::fe_reciprocal(&f)?;
                    let unit = FracSeries::unit(q, s, &BigRational::zero());
                    let ok = fe::fe_reciprocal(&inv)? == f && fe::fe_product(&f, &inv)? == unit;
                    let (f, one) = (f.clone(), one.clone());
                    (ok, fe::fe_reciprocal(&fp)?, Box::new(move |n| ev(&inv, n, prec) * ev(&f, n, prec) - one.clone()))
                }
                "shift" => {
                    let ell = r.gen_range(1i64..=5);
                    let sh = fe::fe_shift(&f, ell);
                    let ok = fe::fe_shift(&sh, -ell) == f && fe::fe_shift(&f, 0) == f;
                    let f = f.clone();
                    (ok, fe::fe_shift(&fp, ell), Box::new(move |n| ev(&sh, n, prec) - ev(&f, n + ell as u64, prec)))
                }
                _ => {
                    let (ef, eg) = (r.gen_range(0i64..=2), r.gen_range(0i64..=2));
                    let (sum, tcount) = fe::fe_sum(&[(f.clone(), ef), (g.clone(), eg)])?;
                    let (single, t1) = fe::fe_sum(&[(f.clone(), ef)])?;
                    let (twice, t2) = fe::fe_sum(&[(f.clone(), ef), (f.clone(), ef)])?;
                    let ok = single == f && t1 == 1 && twice == f && t2 == 2;
                    let e = ef.max(eg);
                    let (full, _) = fe::fe_sum(&[(fp.clone(), ef), (gp.clone(), eg)])?;
                    let (f, g) = (f.clone(), g.clone());
                    let err = move |n: u64| {
                        let nr = precision::from_u64(n, prec);
                        let pw = |k: i64| precision::pow_ratio(&nr, k, q as i64, prec);
                        let direct = (pw(ef) * ev(&f, n, prec) + pw(eg) * ev(&g, n, prec)) * pw(-e)
                            / precision::from_u64(tcount as u64, prec);
                        ev(&sum, n, prec) - direct
                    };
                    (ok, full, Box::new(err))
                }
            };
            if !exact_ok {
                exact_fail += 1;
            }
            let Some(k0) = leading_error_index(&full, s) else {
                // no truncated terms: the error must vanish identically
                vanishing += 1;
                let e = precision::to_f64(&dashu_abs(err(1000)));
                if e > 1e-200 {
                    slope_fail += 1;
                }
                continue;
            };
            if k0 > s {
                higher_order += 1;
            }
            let slope = error_slope(q, &*err);
            let target = -(k0 as f64) / q as f64;
            let rel = ((slope - target) / target).abs();
            worst = worst.max(rel);
            if rel > 0.05 {
                slope_fail += 1;
            }
        }
        b.clause(
            &format!("{law} exact"),
            exact_fail == 0,
            format!("{exact_fail}/{trials} failures"),
            "0 failures",
        );
        b.clause(
            &format!("{law} rate"),
            slope_fail == 0,
            format!(
                "{slope_fail}/{trials} off, worst {:.2}% ({higher_order} with a vanishing n^(-s/q) term, {vanishing} exact)",
                100.0 * worst
            ),
            "slope -k0/q +- 5%, k0 = first nonzero error order (s unless that term vanishes)",
        );
        summary.insert(
            law.to_string(),
            json!({
                "exact_failures": exact_fail,
                "slope_failures": slope_fail,
                "higher_order_cases": higher_order,
                "vanishing_error_cases": vanishing,
                "worst_rel": worst,
            }),
        );
    }
    b.detail("laws", Value::Object(summary));
    Ok(())
}

fn c11(b: &mut Builder) -> CliResult<()> {
    let cases: [(FiniteGroup, usize); 4] = [
        (FiniteGroup::cyclic(2)?, 3),
        (FiniteGroup::cyclic(2)?, 4),
        (FiniteGroup::cyclic(3)?, 4),
        (FiniteGroup::symmetric3(), 3),
    ];
    for (ci, (g, n)) in cases.iter().enumerate() {
        let table = CountTable::new(g, *n);
        let chi = table.chi(*n)?.to_usize().expect("small count");
        let homs = enumerate_homs(g, *n);
        let index: HashMap<Vec<Vec<u8>>, usize> = homs.into_iter().enumerate().map(|(i, h)| (h, i)).collect();
        let draws = 100 * chi;
        let sampler = FactorSampler::new(&table);
        let mut counts = vec![0usize; chi];
        let mut r = rng::stream(11, ci as u64, 0);
        let mut unknown = 0;
        for _ in 0..draws {
            let h = sampler.sample(*n, &mut r)?;
            let key: Vec<Vec<u8>> = h.images().iter().map(|p| p.iter().map(|&v| v as u8).collect()).collect();
            match index.get(&key) {
                Some(&i) => counts[i] += 1,
                None => unknown += 1,
            }
        }
        let expected = draws as f64 / chi as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let dist = ChiSquared::new((chi - 1) as f64).map_err(|e| CliError::Usage(e.to_string()))?;
        let pval = 1.0 - dist.cdf(stat);
        b.clause(
            &format!("{} N={n}", g.name()),
            pval > 1e-3 && unknown == 0,
            format!("p={pval:.4}, {draws} draws, {unknown} non-homs"),
            "p > 1e-3",
        );
    }
    // relations on 10^5 samples at N = 10^3
    let gp = FreeProduct::parse("C2*C3")?;
    let n = 1000;
    let tables = ProductTables::new(&gp, n);
    let sampler = ProductSampler::new(&tables);
    let samples = 100_000u64;
    let violations: usize = (0..samples)
        .into_par_iter()
        .map(|t| -> freeprod::Result<usize> {
            let phi = sampler.sample(n, 11, t)?;
            let mut bad = 0;
            for (i, g) in gp.factors().iter().enumerate() {
                let f = phi.factor(i);
                for a in 0..g.order() {
                    for c in 0..g.order() {
                        let (pa, pc, pac) = (f.image(a), f.image(c), f.image(g.mul(a, c)));
                        if (0..n).any(|p| pa[pc[p] as usize] != pac[p]) {
                            bad += 1;
                        }
                    }
                }
            }
            Ok(bad)
        })
        .collect::<freeprod::Result<Vec<_>>>()?
        .into_iter()
        .sum();
    b.clause("relations C2*C3 N=1000", violations == 0, format!("{violations} violations in {samples} samples"), "0");
    Ok(())
}

fn c12(b: &mut Builder) -> CliResult<()> {
    let q = |a: i64, d: i64| BigRational::new(a.into(), d.into());
    let gp = FreeProduct::parse("C2*C3")?;
    let x = WalkGenerator::parse(&gp, "x,y,y2")?;
    let d = walks::convolve_power(&gp, &x, 2, WALK_BUDGET)?;
    let m = walks::classify_mass(&gp, &d, x.max_len())?;
    let pow_total: BigRational = m.pow.values().sum();
    let ok = m.torsion == q(5, 9) && m.generic == q(4, 9) && m.c2c2.is_zero() && pow_total.is_zero();
    b.clause("C2*C3 p=2", ok, format!("torsion {}, generic {}, c2c2 {}", m.torsion, m.generic, m.c2c2), "5/9, 4/9, 0");
    let gp = FreeProduct::parse("C2*C2*C2")?;
    let x = WalkGenerator::parse(&gp, "a,b,c")?;
    let d = walks::convolve_power(&gp, &x, 2, WALK_BUDGET)?;
    let m = walks::classify_mass(&gp, &d, x.max_len())?;
    b.clause("C2*C2*C2 p=2", m.c2c2 == q(6, 9), format!("c2c2 {}", m.c2c2), "6/9");
    Ok(())
}

fn models() -> CliResult<[(&'static str, &'static str, f64); 2]> {
    Ok([
        ("C2*C2*C2", "a,b,c", walks::limit_norm_constants(NormModel::C2Star(3))?.value / 3.0),
        ("C2*C3", "x,y,y2", walks::limit_norm_constants(NormModel::C2C3)?.value / 3.0),
    ])
}

fn c13(b: &mut Builder) -> CliResult<()> {
    for (g, gens, target) in models()? {
        let gp = FreeProduct::parse(g)?;
        let x = WalkGenerator::parse(&gp, gens)?;
        let est = walks::norm_estimate(&gp, &x, 14, WALK_BUDGET)?;
        let rel = (est.limit - target).abs() / target;
        b.clause(
            &format!("{g} norm"),
            rel <= 0.05 && !est.truncated,
            format!("{:.5} ({:.2}% off)", est.limit, 100.0 * rel),
            format!("{target:.5} +- 5%"),
        );
        b.clause(&format!("{g} monotone"), est.monotone, est.monotone.to_string(), "true");
        b.detail(g, json!(est.m));
    }
    Ok(())
}

fn c14(b: &mut Builder) -> CliResult<()> {
    for (g, gens, norm) in models()? {
        let gp = FreeProduct::parse(g)?;
        let x = WalkGenerator::parse(&gp, gens)?;
        let mut d = walks::WalkDistribution::delta();
        let mut roots = Vec::new();
        for p in 1..=14 {
            d = walks::convolve_step(&gp, &d, &x, WALK_BUDGET)?;
            if p >= 10 {
                let u = walks::u_mu_channels(&gp, &d);
                let v = u.infinite.to_f64().unwrap_or(f64::NAN).abs().powf(1.0 / p as f64);
                roots.push((p, v));
            }
        }
        let worst = roots.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        b.clause(
            &format!("{g} u_mu infinite channel"),
            worst <= norm + 0.05,
            roots.iter().map(|(p, v)| format!("p{p}:{v:.4}")).collect::<Vec<_>>().join(" "),
            format!("<= {:.4}", norm + 0.05),
        );
        let rows = walks::hitting_bound_report(&gp, &x, norm, 14, WALK_BUDGET)?;
        let below = rows.iter().all(|r| r.all_below);
        b.clause(&format!("{g} hitting bounds"), below, below.to_string(), "all below");
        b.detail(g, json!({ "roots": roots, "hitting": rows }));
    }
    Ok(())
}
