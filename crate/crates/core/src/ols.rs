//! Least squares with an intercept, solved by a column-pivoted Householder
//! QR of the centered design. Rank-deficient designs get the minimum-norm
//! coefficient vector through a complete orthogonal decomposition.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative size below which a pivot counts as zero.
const RANK_TOLERANCE: f64 = 1e-10;
const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Root mean squared residual over the training rows (denominator `n`).
    pub rmse: f64,
    pub n_rows: usize,
    pub n_features: usize,
    pub rank: usize,
    pub warnings: Vec<String>,
}

impl RegressionFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// Fits `targets ~ intercept + features`, one feature row per target.
pub fn ols_fit(features: &[Vec<f64>], targets: &[f64]) -> Result<RegressionFit> {
    let p = features.first().map_or(0, Vec::len);
    if features.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("feature rows have different lengths"));
    }
    let rows: Vec<&[f64]> = features.iter().map(Vec::as_slice).collect();
    ols_fit_rows(&rows, targets)
}

/// [`ols_fit`] over borrowed rows, for fitting resampled subsets without copying.
pub fn ols_fit_rows(rows: &[&[f64]], targets: &[f64]) -> Result<RegressionFit> {
    let n = rows.len();
    if n != targets.len() {
        return Err(Error::invalid(format!(
            "{n} feature rows for {} targets",
            targets.len()
        )));
    }
    let p = rows.first().map_or(0, |r| r.len());
    if p == 0 {
        return Err(Error::invalid("regression needs at least one feature"));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("feature rows have different lengths"));
    }
    if n <= p {
        return Err(Error::invalid(format!(
            "{n} rows cannot determine {p} features and an intercept"
        )));
    }
    if rows
        .iter()
        .flat_map(|r| r.iter())
        .chain(targets)
        .any(|x| !x.is_finite())
    {
        return Err(Error::invalid("regression inputs must be finite"));
    }

    let mut warnings = Vec::new();
    let x_mean: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let y_mean = targets.iter().sum::<f64>() / n as f64;

    // column-major centered design
    let mut a = vec![0.0; n * p];
    for j in 0..p {
        for (i, r) in rows.iter().enumerate() {
            a[j * n + i] = r[j] - x_mean[j];
        }
    }
    let mut y: Vec<f64> = targets.iter().map(|t| t - y_mean).collect();
    if y.iter().all(|&v| v == 0.0) {
        warnings.push("target is constant; slope is zero".to_string());
    }

    let (perm, diag) = pivoted_qr(&mut a, &mut y, n, p);
    let lead = diag.first().map_or(0.0, |d| d.abs());
    let rank = if lead == 0.0 {
        0
    } else {
        diag.iter().take_while(|d| d.abs() > RANK_TOLERANCE * lead).count()
    };
    if rank < p {
        warnings.push(format!(
            "design is rank deficient (rank {rank} of {p}); returning the minimum-norm solution"
        ));
    } else if lead / diag[p - 1].abs() > CONDITION_WARNING {
        warnings.push(format!(
            "design is ill-conditioned (pivot ratio {:.3e})",
            lead / diag[p - 1].abs()
        ));
    }

    let w = solve_min_norm(&a, &y, n, p, rank);
    let mut coefficients = vec![0.0; p];
    for (j, &pj) in perm.iter().enumerate() {
        coefficients[pj] = w[j];
    }
    let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();

    let sse: f64 = rows
        .iter()
        .zip(targets)
        .map(|(r, t)| {
            let fit = intercept + r.iter().zip(&coefficients).map(|(x, b)| x * b).sum::<f64>();
            (t - fit).powi(2)
        })
        .sum();

    Ok(RegressionFit {
        coefficients,
        intercept,
        rmse: (sse / n as f64).sqrt(),
        n_rows: n,
        n_features: p,
        rank,
        warnings,
    })
}

/// Householder reflector for `x`: returns `(v, beta, alpha)` with
/// `(I - beta v vᵀ) x = alpha e₁`.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|t| t * t).sum();
    let beta = if vv == 0.0 { 0.0 } else { 2.0 / vv };
    (v, beta, alpha)
}

fn reflect(v: &[f64], beta: f64, target: &mut [f64]) {
    let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let s = beta * dot;
    for (t, vi) in target.iter_mut().zip(v) {
        *t -= s * vi;
    }
}

/// Overwrites `a` (column-major n×p) with R in its upper triangle and `y`
/// with Qᵀy. Returns the column permutation and the diagonal of R.
fn pivoted_qr(a: &mut [f64], y: &mut [f64], n: usize, p: usize) -> (Vec<usize>, Vec<f64>) {
    let mut perm: Vec<usize> = (0..p).collect();
    let mut diag = Vec::with_capacity(p);
    for k in 0..p {
        let tail_norm = |j: usize, a: &[f64]| a[j * n + k..(j + 1) * n].iter().map(|v| v * v).sum::<f64>();
        let pivot = (k..p)
            .max_by(|&i, &j| tail_norm(i, a).total_cmp(&tail_norm(j, a)).then(j.cmp(&i)))
            .unwrap_or(k);
        if pivot != k {
            for i in 0..n {
                a.swap(k * n + i, pivot * n + i);
            }
            perm.swap(k, pivot);
        }
        let (v, beta, alpha) = householder(&a[k * n + k..(k + 1) * n]);
        for j in k + 1..p {
            reflect(&v, beta, &mut a[j * n + k..(j + 1) * n]);
        }
        reflect(&v, beta, &mut y[k..]);
        a[k * n + k] = alpha;
        for i in k + 1..n {
            a[k * n + i] = 0.0;
        }
        diag.push(alpha);
    }
    (perm, diag)
}

/// Minimum-norm solution of `R[..rank, ..] w = (Qᵀy)[..rank]`.
fn solve_min_norm(r: &[f64], qty: &[f64], n: usize, p: usize, rank: usize) -> Vec<f64> {
    let at = |i: usize, j: usize| r[j * n + i];
    if rank == 0 {
        return vec![0.0; p];
    }
    if rank == p {
        let mut w = vec![0.0; p];
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|j| at(i, j) * w[j]).sum();
            w[i] = (qty[i] - s) / at(i, i);
        }
        return w;
    }

    // QR of the transposed trapezoid: Tᵀ (p×rank) = Z [L; 0]
    let mut t = vec![0.0; p * rank];
    for i in 0..rank {
        for j in i..p {
            t[i * p + j] = at(i, j);
        }
    }
    let mut reflectors = Vec::with_capacity(rank);
    for k in 0..rank {
        let (v, beta, alpha) = householder(&t[k * p + k..(k + 1) * p]);
        for j in k + 1..rank {
            reflect(&v, beta, &mut t[j * p + k..(j + 1) * p]);
        }
        t[k * p + k] = alpha;
        reflectors.push((v, beta));
    }
    // Lᵀ u = c with Lᵀ lower triangular; L[i][j] = t[j * p + i] for i <= j
    let mut u = vec![0.0; p];
    for i in 0..rank {
        let s: f64 = (0..i).map(|j| t[i * p + j] * u[j]).sum();
        u[i] = (qty[i] - s) / t[i * p + i];
    }
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        reflect(v, *beta, &mut u[k..]);
    }
    u
}
