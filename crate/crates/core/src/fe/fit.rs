use crate::error::{Error, Result};
use crate::precision::{self, Precision, Real};

use super::series::{FracSeries, Scalar};

/// Least-squares expansion fit with its diagnostics.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub series: FracSeries<Real>,
    /// Euclidean norm of the residual vector on all points.
    pub residual: f64,
    /// Largest coefficient drift between the two windows, relative to
    /// `max(1, |b_k|)`.
    pub stability: f64,
    /// Ratio of extreme diagonal entries of `R` after column scaling.
    pub condition: f64,
    /// Per-coefficient drift between the two windows, same scaling as
    /// `stability`.
    pub drift: Vec<f64>,
}

impl FitReport {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.series.coeffs().iter().map(precision::to_f64).collect()
    }

    /// Inter-window drift below `10⁻³`.
    pub fn is_stable(&self) -> bool {
        self.stability < 1e-3
    }
}

/// `count` integers spaced geometrically from `lo` to `hi` inclusive,
/// deduplicated.
pub fn geometric_grid(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if count <= 1 || hi <= lo {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<u64> = (0..count).map(|i| (lo as f64 * ratio.powi(i as i32)).round() as u64).collect();
    *out.last_mut().expect("nonempty") = hi;
    out.dedup();
    out
}

/// Householder least squares; returns coefficients, residual norm and the
/// condition estimate of the column-scaled design.
fn least_squares(points: &[(u64, Real)], q: usize, s: usize, prec: Precision) -> Result<(Vec<Real>, f64, f64)> {
    let m = points.len();
    let zero = precision::from_i64(0, prec);
    let mut a: Vec<Vec<Real>> = Vec::with_capacity(m);
    let mut b: Vec<Real> = Vec::with_capacity(m);
    for (n, v) in points {
        let u = precision::pow_ratio(&precision::from_u64(*n, prec), -1, q as i64, prec);
        let mut row = Vec::with_capacity(s);
        let mut p = precision::from_i64(1, prec);
        for _ in 0..s {
            row.push(p.clone());
            p = &p * &u;
        }
        a.push(row);
        b.push(v.to_real(prec));
    }
    // unit column norms
    let mut scale = Vec::with_capacity(s);
    for j in 0..s {
        let norm = a.iter().fold(zero.clone(), |acc, r| acc + &r[j] * &r[j]).sqrt();
        for r in a.iter_mut() {
            r[j] = &r[j] / &norm;
        }
        scale.push(norm);
    }
    let a0 = a.clone();
    for k in 0..s {
        let norm = (k..m).fold(zero.clone(), |acc, i| acc + &a[i][k] * &a[i][k]).sqrt();
        if norm == zero {
            return Err(Error::Numeric(format!("rank-deficient design at column {k}")));
        }
        let alpha = if a[k][k] > zero { -norm } else { norm };
        let mut v: Vec<Real> = (k..m).map(|i| a[i][k].clone()).collect();
        v[0] = &v[0] - &alpha;
        let vv = v.iter().fold(zero.clone(), |acc, x| acc + x * x);
        if vv == zero {
            continue;
        }
        for j in k..s {
            let dot = v.iter().enumerate().fold(zero.clone(), |acc, (t, x)| acc + x * &a[k + t][j]);
            let f = (&dot + &dot) / &vv;
            for (t, x) in v.iter().enumerate() {
                a[k + t][j] = &a[k + t][j] - &f * x;
            }
        }
        let dot = v.iter().enumerate().fold(zero.clone(), |acc, (t, x)| acc + x * &b[k + t]);
        let f = (&dot + &dot) / &vv;
        for (t, x) in v.iter().enumerate() {
            b[k + t] = &b[k + t] - &f * x;
        }
    }
    let diag: Vec<f64> = (0..s).map(|k| precision::to_f64(&a[k][k]).abs()).collect();
    let cond = diag.iter().cloned().fold(0.0, f64::max) / diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let limit = 2f64.powi(prec.0 as i32) * 1e-20;
    if !cond.is_finite() || cond > limit {
        return Err(Error::Numeric(format!(
            "least-squares design too ill-conditioned: condition estimate {cond:.3e} exceeds {limit:.3e} at {} bits",
            prec.0
        )));
    }
    let mut x = vec![zero.clone(); s];
    for k in (0..s).rev() {
        let mut acc = b[k].clone();
        for j in k + 1..s {
            acc = acc - &a[k][j] * &x[j];
        }
        x[k] = acc / &a[k][k];
    }
    let mut resid = zero.clone();
    for (i, (_, v)) in points.iter().enumerate() {
        let fitted = (0..s).fold(zero.clone(), |acc, j| acc + &a0[i][j] * &x[j]);
        let d = v.to_real(prec) - fitted;
        resid += &d * &d;
    }
    let coeffs = x.iter().zip(&scale).map(|(c, sc)| c / sc).collect();
    Ok((coeffs, precision::to_f64(&resid.sqrt()), cond))
}

/// Fits `v_n ≈ Σ_{k<s} b_k n^{-k/q}` by unweighted least squares in
/// extended precision. The stability score compares fits on the first and
/// last two thirds of the points.
pub fn fe_fit(values: &[(u64, Real)], q: usize, s: usize, prec: Precision) -> Result<FitReport> {
    if q == 0 || s == 0 {
        return Err(Error::Domain("fe_fit needs q ≥ 1 and s ≥ 1".into()));
    }
    if values.len() < s + 2 {
        return Err(Error::Domain(format!("fe_fit needs at least {} points, got {}", s + 2, values.len())));
    }
    let mut pts = values.to_vec();
    pts.sort_by_key(|(n, _)| *n);
    let (coeffs, residual, condition) = least_squares(&pts, q, s, prec)?;
    let w = ((2 * pts.len()).div_ceil(3)).max(s + 1).min(pts.len());
    let (lo, _, _) = least_squares(&pts[..w], q, s, prec)?;
    let (hi, _, _) = least_squares(&pts[pts.len() - w..], q, s, prec)?;
    let drift: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .zip(&coeffs)
        .map(|((a, b), c)| precision::to_f64(&(a - b)).abs() / precision::to_f64(c).abs().max(1.0))
        .collect();
    let stability = drift.iter().copied().fold(0.0, f64::max);
    Ok(FitReport { series: FracSeries::new(q, coeffs)?, residual, stability, condition, drift })
}

/// Whether every `|b_k| ≤ 2C (2Dk)^{2Ek}` (with `0^0 = 1`).
pub fn coeff_growth_check<T: Scalar>(f: &FracSeries<T>, c: f64, d: f64, e: f64) -> bool {
    f.coeffs().iter().enumerate().all(|(k, b)| {
        let v = precision::to_f64(&b.to_real(Precision(128))).abs();
        if v == 0.0 {
            return true;
        }
        let log_bound = (2.0 * c).ln() + if k == 0 { 0.0 } else { 2.0 * e * k as f64 * (2.0 * d * k as f64).ln() };
        v.ln() <= log_bound
    })
}
