//! Estimating how noisy a real survey is.
//!
//! On synthetic data the residual RMSE of regressing noisy scores on true
//! scores grows with the noise half-width `v`, giving an [`RmseCurve`].
//! A real survey's own regression RMSE (scores on respondent features, on
//! category-balanced resamples) is located on that curve to read off an
//! estimated `v̂`, and `v̂` in turn fixes the accuracy ceiling any
//! classifier can reach on the binned labels.

use serde::Serialize;

use crate::bounds::{bound_curve, Method};
use crate::dataset::{Dataset, SurveyRecord};
use crate::error::{Error, Result};
use crate::noise::{apply_noise, generate_synth, NoiseModel, RngSpec};
use crate::ols::{ols_fit, ols_fit_rows};
use crate::resample::{balanced_ensemble, group_by, EnsembleEstimate, ResamplePlan};
use crate::scale::{BinningScheme, Score};

/// Smallest synthetic sample accepted for a curve.
pub const MIN_CURVE_N: usize = 1000;
/// Round-off allowance for the zero-noise point.
const ZERO_NOISE_SLACK: f64 = 1e-9;

/// Regression RMSE at `v = 0..=v_max`; starts at zero and strictly increases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseCurve {
    rmse: Vec<f64>,
    n: usize,
}

/// Standard deviation of unclipped uniform noise on `-v..=v`. Clipping can
/// only shrink deviations, so this bounds the curve from above.
pub fn unclipped_noise_sd(v: usize) -> f64 {
    ((v * (v + 1)) as f64 / 3.0).sqrt()
}

impl RmseCurve {
    pub fn new(mut rmse: Vec<f64>, n: usize) -> Result<Self> {
        if rmse.len() < 2 {
            return Err(Error::invalid("an RMSE curve needs at least v = 0 and v = 1"));
        }
        if rmse.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("RMSE values must be finite and non-negative"));
        }
        if rmse[0] > ZERO_NOISE_SLACK {
            return Err(Error::invalid(format!("RMSE at v = 0 is {} rather than 0", rmse[0])));
        }
        rmse[0] = 0.0;
        if let Some(v) = (1..rmse.len()).find(|&v| rmse[v] <= rmse[v - 1]) {
            return Err(Error::NonMonotoneCurve { v });
        }
        if let Some(v) = (0..rmse.len()).find(|&v| rmse[v] > unclipped_noise_sd(v)) {
            return Err(Error::invalid(format!(
                "RMSE {} at v = {v} exceeds the unclipped noise sd {}",
                rmse[v],
                unclipped_noise_sd(v)
            )));
        }
        Ok(RmseCurve { rmse, n })
    }

    pub fn v_max(&self) -> usize {
        self.rmse.len() - 1
    }

    pub fn rmse(&self, v: usize) -> f64 {
        self.rmse[v]
    }

    pub fn values(&self) -> &[f64] {
        &self.rmse
    }

    /// Synthetic sample size behind each point.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// For each `v`, fresh SYNTH(n) data, noise, and the RMSE of regressing the
/// noisy score on the true score.
pub fn synth_rmse_curve(v_max: u8, n: usize, rng: &RngSpec) -> Result<RmseCurve> {
    if n < MIN_CURVE_N {
        return Err(Error::invalid(format!("RMSE curve needs n >= {MIN_CURVE_N}, got {n}")));
    }
    if v_max == 0 || v_max > NoiseModel::MAX_HALF_WIDTH {
        return Err(Error::invalid(format!(
            "v_max must be in 1..={}",
            NoiseModel::MAX_HALF_WIDTH
        )));
    }
    use rayon::prelude::*;
    let rmse = (0..=v_max)
        .into_par_iter()
        .map(|v| {
            let stream = rng.child(v as u64);
            let clean = generate_synth(n, &stream.child(0))?;
            let noisy = apply_noise(&clean, NoiseModel::new(v)?, &stream.child(1))?;
            let x: Vec<Vec<f64>> = noisy
                .records()
                .iter()
                .map(|r| vec![r.unbiased_score.map_or(0.0, |s| s.get() as f64)])
                .collect();
            let y: Vec<f64> = noisy.records().iter().map(|r| r.biased_score.get() as f64).collect();
            Ok(ols_fit(&x, &y)?.rmse)
        })
        .collect::<Result<Vec<_>>>()?;
    RmseCurve::new(rmse, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariabilityEstimate {
    pub v_hat: f64,
    pub warnings: Vec<String>,
}

/// Reads `v̂` off the curve by piecewise-linear inversion.
pub fn estimate_variability(real_rmse: f64, curve: &RmseCurve) -> VariabilityEstimate {
    let mut warnings = Vec::new();
    let r = curve.values();
    let top = curve.v_max();
    if !real_rmse.is_finite() || real_rmse < 0.0 {
        warnings.push(format!("RMSE {real_rmse} is not a non-negative number; using 0"));
        return VariabilityEstimate { v_hat: 0.0, warnings };
    }
    if real_rmse <= r[0] {
        return VariabilityEstimate { v_hat: 0.0, warnings };
    }
    if real_rmse >= r[top] {
        if real_rmse > r[top] {
            warnings.push(format!(
                "RMSE {real_rmse:.4} is beyond the curve's maximum {:.4}; clamped to v = {top}",
                r[top]
            ));
        }
        return VariabilityEstimate {
            v_hat: top as f64,
            warnings,
        };
    }
    let i = r.partition_point(|&x| x <= real_rmse) - 1;
    let v_hat = i as f64 + (real_rmse - r[i]) / (r[i + 1] - r[i]);
    VariabilityEstimate { v_hat, warnings }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ceiling {
    pub v_hat: f64,
    pub accuracy_ceiling: f64,
    pub relative_score: Option<f64>,
    pub warnings: Vec<String>,
}

/// `actual / ceiling`, warning when the model beats the ceiling.
pub fn relative_score(actual: f64, ceiling: f64) -> (f64, Option<String>) {
    let rel = actual / ceiling;
    let warning = (rel > 1.0).then(|| {
        format!("score {actual} exceeds the estimated ceiling {ceiling:.4}; the noise assumptions do not hold for this data")
    });
    (rel, warning)
}

/// Accuracy ceiling at `v̂` from the exact bound curve, and optionally the
/// ceiling-relative version of an observed accuracy.
pub fn ceiling_and_relative(v_hat: f64, scheme: &BinningScheme, actual: Option<f64>) -> Result<Ceiling> {
    let max = NoiseModel::MAX_HALF_WIDTH as f64;
    if !(0.0..=max).contains(&v_hat) {
        return Err(Error::invalid(format!("v̂ = {v_hat} is outside 0..={max}")));
    }
    let curve = bound_curve(scheme, NoiseModel::MAX_HALF_WIDTH, &Method::Exact)?;
    let accuracy_ceiling = curve.accuracy_at(v_hat)?;
    let mut warnings = Vec::new();
    let relative = actual.map(|a| {
        let (rel, warn) = relative_score(a, accuracy_ceiling);
        warnings.extend(warn);
        rel
    });
    Ok(Ceiling {
        v_hat,
        accuracy_ceiling,
        relative_score: relative,
        warnings,
    })
}

/// Ensemble-mean RMSE of regressing the survey score on the features, over
/// resamples balanced on the score's category.
pub fn balanced_rmse(dataset: &Dataset, scheme: &BinningScheme, plan: &ResamplePlan) -> Result<EnsembleEstimate> {
    if !dataset.has_features() {
        return Err(Error::invalid("the survey has no feature columns to regress on"));
    }
    let groups = group_by(dataset.records().iter(), scheme.labels(), |r| {
        scheme.bin_of(r.biased_score)
    });
    balanced_ensemble(
        &groups,
        |sample| {
            let rows: Vec<&SurveyRecord> = sample.iter().flatten().map(|r| **r).collect();
            let x: Vec<&[f64]> = rows.iter().map(|r| r.features.as_deref().unwrap_or(&[])).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.biased_score.get() as f64).collect();
            Ok(ols_fit_rows(&x, &y)?.rmse)
        },
        plan,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariabilityReport {
    /// Balanced-ensemble RMSE of the survey's own regression.
    pub real_rmse: EnsembleEstimate,
    /// RMSE of one fit over all rows, unbalanced (for reference).
    pub full_fit_rmse: f64,
    pub v_hat: f64,
    /// `v̂` read off the curve from `full_fit_rmse`.
    pub full_fit_v_hat: f64,
    pub accuracy_ceiling: f64,
    pub relative_score: Option<f64>,
    pub warnings: Vec<String>,
}

/// The whole pipeline for one survey: balanced RMSE, inversion, ceiling.
pub fn estimate_from_dataset(
    dataset: &Dataset,
    scheme: &BinningScheme,
    plan: &ResamplePlan,
    curve: &RmseCurve,
    actual: Option<f64>,
) -> Result<VariabilityReport> {
    let real = balanced_rmse(dataset, scheme, plan)?;
    let x: Vec<&[f64]> = dataset
        .records()
        .iter()
        .map(|r| r.features.as_deref().unwrap_or(&[]))
        .collect();
    let y: Vec<f64> = dataset.records().iter().map(|r| r.biased_score.get() as f64).collect();
    let full = ols_fit_rows(&x, &y)?;

    let est = estimate_variability(real.mean, curve);
    let ceiling = ceiling_and_relative(est.v_hat, scheme, actual)?;
    let mut warnings = full.warnings;
    warnings.dedup();
    warnings.extend(est.warnings);
    warnings.extend(ceiling.warnings);
    Ok(VariabilityReport {
        real_rmse: real,
        full_fit_rmse: full.rmse,
        v_hat: est.v_hat,
        full_fit_v_hat: estimate_variability(full.rmse, curve).v_hat,
        accuracy_ceiling: ceiling.accuracy_ceiling,
        relative_score: ceiling.relative_score,
        warnings,
    })
}

pub fn one_hot_names() -> Vec<String> {
    Score::all().map(|s| format!("is_{s}")).collect()
}

/// Indicator features of the true score.
pub fn one_hot(score: Score) -> Vec<f64> {
    Score::all().map(|s| f64::from(u8::from(s == score))).collect()
}

/// SYNTH(n) with noise `v`, carrying one-hot indicators of the true score as
/// features. The best possible regression on these features leaves exactly
/// the noise as residual.
pub fn one_hot_surrogate(n: usize, v: u8, rng: &RngSpec) -> Result<Dataset> {
    let clean = generate_synth(n, &rng.child(0))?;
    let noisy = apply_noise(&clean, NoiseModel::new(v)?, &rng.child(1))?;
    let records = noisy
        .into_records()
        .into_iter()
        .map(|r| SurveyRecord {
            features: r.unbiased_score.map(one_hot),
            ..r
        })
        .collect();
    Dataset::new(records, Some(one_hot_names()))
}
