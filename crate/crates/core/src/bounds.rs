//! What respondent noise does to binned labels, as a function of the noise
//! half-width `v`.
//!
//! For each `v` the record holds the accuracy and precision of the oracle
//! classifier that predicts the true category (the ceiling any real model
//! can reach against noisy labels), two feature-blind baselines, the
//! category shares of the noisy labels, and the NPS of true versus noisy
//! answers.
//!
//! Classifier metrics and the `nps_unbiased`/`nps_biased` pair are taken on
//! class-balanced samples (each true category undersampled to the smallest
//! one). The `nps_population_*` pair is taken on the whole uniform
//! population without balancing.
//!
//! Two routes compute the same record: [`exact_bounds`] enumerates every
//! (true score, noisy answer) pair with its exact probability, and
//! [`mc_bounds`] simulates a survey and runs the balanced resampling
//! ensemble over it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{baseline_accuracy, Baseline, ConfusionMatrix};
use crate::noise::{apply_noise, generate_synth, perturb_pmf, NoiseModel, RngSpec};
use crate::resample::{balanced_ensemble_multi, group_by, ResamplePlan};
use crate::scale::{BinningScheme, Score};
use crate::shares::nps;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRecord {
    pub v: u8,
    pub accuracy_upper: f64,
    pub precision_upper: f64,
    pub lower_majority: f64,
    pub lower_prior_matched: f64,
    /// Noisy-label shares on the balanced set.
    pub class_shares: Vec<f64>,
    /// The same counts as fractions of the original population, i.e. the
    /// balanced shares scaled by `k * minority / n`.
    pub undersampled_shares: Vec<f64>,
    pub nps_unbiased: f64,
    pub nps_biased: f64,
    pub nps_population_unbiased: f64,
    pub nps_population_biased: f64,
    /// Oracle accuracy on the unbalanced population.
    pub population_accuracy: f64,
    /// Exact `accuracy_upper` as a reduced fraction (exact method only).
    pub accuracy_ratio: Option<(u64, u64)>,
    pub population_accuracy_ratio: Option<(u64, u64)>,
    /// Per-quantity standard deviation, aligned with [`quantities`](Self::quantities)
    /// (Monte Carlo only).
    pub std: Option<Vec<f64>>,
}

impl BoundRecord {
    /// NPS change caused by the noise on the balanced set.
    pub fn nps_drift(&self) -> f64 {
        self.nps_biased - self.nps_unbiased
    }

    pub fn population_nps_drift(&self) -> f64 {
        self.nps_population_biased - self.nps_population_unbiased
    }

    /// Every reported quantity, flattened with a stable name.
    pub fn quantities(&self) -> Vec<(String, f64)> {
        let mut q = vec![
            ("accuracy_upper".to_string(), self.accuracy_upper),
            ("precision_upper".to_string(), self.precision_upper),
            ("lower_majority".to_string(), self.lower_majority),
            ("lower_prior_matched".to_string(), self.lower_prior_matched),
        ];
        for (i, s) in self.class_shares.iter().enumerate() {
            q.push((format!("share_bin{i}"), *s));
        }
        for (i, s) in self.undersampled_shares.iter().enumerate() {
            q.push((format!("undersampled_share_bin{i}"), *s));
        }
        q.push(("nps_unbiased".into(), self.nps_unbiased));
        q.push(("nps_biased".into(), self.nps_biased));
        q.push(("nps_population_unbiased".into(), self.nps_population_unbiased));
        q.push(("nps_population_biased".into(), self.nps_population_biased));
        q.push(("population_accuracy".into(), self.population_accuracy));
        q
    }

    fn validate(&self) -> Result<()> {
        let probs = [
            self.accuracy_upper,
            self.precision_upper,
            self.lower_majority,
            self.lower_prior_matched,
            self.population_accuracy,
        ];
        let in_unit = |x: &f64| (-1e-12..=1.0 + 1e-12).contains(x);
        if !probs
            .iter()
            .chain(&self.class_shares)
            .chain(&self.undersampled_shares)
            .all(in_unit)
        {
            return Err(Error::invalid(format!("probability outside [0, 1] at v={}", self.v)));
        }
        let npss = [
            self.nps_unbiased,
            self.nps_biased,
            self.nps_population_unbiased,
            self.nps_population_biased,
        ];
        if !npss.iter().all(|x| (-100.0 - 1e-9..=100.0 + 1e-9).contains(x)) {
            return Err(Error::invalid(format!("NPS outside [-100, 100] at v={}", self.v)));
        }
        Ok(())
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn model(v: u8) -> Result<NoiseModel> {
    NoiseModel::new(v)
}

/// Exact confusion matrix of true vs. noisy category.
///
/// With `balanced`, each true category carries equal total weight and the
/// scores inside it are equally likely; otherwise every score 1..=10 is
/// equally likely. Entries are integers over a common denominator.
pub fn exact_confusion(scheme: &BinningScheme, v: u8, balanced: bool) -> Result<ConfusionMatrix> {
    let noise = model(v)?;
    let k = scheme.k();
    let common = (0..k).fold(1u64, |acc, i| lcm(acc, scheme.bin_len(i) as u64));
    let mut rows = vec![vec![0u64; k]; k];
    for s in Score::all() {
        let i = scheme.bin_of(s);
        let weight = if balanced { common / scheme.bin_len(i) as u64 } else { 1 };
        for (t, w) in perturb_pmf(s, noise).support() {
            rows[i][scheme.bin_of(t)] += w as u64 * weight;
        }
    }
    ConfusionMatrix::from_rows(rows)
}

fn undersample_factor(scheme: &BinningScheme) -> f64 {
    let minority = (0..scheme.k()).map(|i| scheme.bin_len(i)).min().unwrap_or(0);
    (scheme.k() * minority) as f64 / Score::LEVELS as f64
}

/// Exact record for one `v` by enumeration.
pub fn exact_bounds(scheme: &BinningScheme, v: u8) -> Result<BoundRecord> {
    let balanced = exact_confusion(scheme, v, true)?;
    let population = exact_confusion(scheme, v, false)?;

    let shares = balanced.observed_shares();
    let factor = undersample_factor(scheme);
    let record = BoundRecord {
        v,
        accuracy_upper: balanced.accuracy(),
        precision_upper: balanced.macro_precision()?.value,
        lower_majority: baseline_accuracy(&shares, Baseline::Majority),
        lower_prior_matched: baseline_accuracy(&shares, Baseline::PriorMatched),
        undersampled_shares: shares.iter().map(|s| s * factor).collect(),
        nps_unbiased: nps(&balanced.predicted_shares())?,
        nps_biased: nps(&shares)?,
        nps_population_unbiased: nps(&population.predicted_shares())?,
        nps_population_biased: nps(&population.observed_shares())?,
        class_shares: shares,
        population_accuracy: population.accuracy(),
        accuracy_ratio: Some(balanced.accuracy_ratio()),
        population_accuracy_ratio: Some(population.accuracy_ratio()),
        std: None,
    };
    record.validate()?;
    Ok(record)
}

/// Simulated record for one `v`: SYNTH(n), noise, then the balanced
/// resampling ensemble keyed on the true category.
///
/// `rng` drives data generation and noise; `plan.rng` drives resampling.
pub fn mc_bounds(scheme: &BinningScheme, v: u8, n: usize, plan: &ResamplePlan, rng: &RngSpec) -> Result<BoundRecord> {
    let k = scheme.k();
    if n < 10 * k {
        return Err(Error::invalid(format!(
            "Monte Carlo needs n >= {} for {k} bins",
            10 * k
        )));
    }
    let noise = model(v)?;
    let clean = generate_synth(n, &rng.child(0))?;
    let noisy = apply_noise(&clean, noise, &rng.child(1))?;

    let pairs: Vec<(usize, usize)> = noisy
        .records()
        .iter()
        .map(|r| {
            let truth = r.unbiased_score.expect("synthetic records carry the truth");
            (scheme.bin_of(truth), scheme.bin_of(r.biased_score))
        })
        .collect();

    let population = ConfusionMatrix::from_pairs(pairs.iter().copied(), k)?;
    let groups = group_by(pairs, scheme.labels(), |p| p.0);
    if let Some(g) = groups.iter().find(|g| g.members.is_empty()) {
        return Err(Error::EmptyCategory(g.label.clone()));
    }
    let minority = groups.iter().map(|g| g.members.len()).min().unwrap_or(0);
    let per_class = match plan.per_class_size {
        crate::resample::ClassSize::Minority => minority,
        crate::resample::ClassSize::Fixed(m) => m,
    };
    let factor = (k * per_class) as f64 / n as f64;

    let estimates = balanced_ensemble_multi(
        &groups,
        |sample| {
            let m = ConfusionMatrix::from_pairs(sample.iter().flatten().map(|p| **p), k)?;
            let shares = m.observed_shares();
            let mut out = vec![
                m.accuracy(),
                m.macro_precision()?.value,
                baseline_accuracy(&shares, Baseline::Majority),
                baseline_accuracy(&shares, Baseline::PriorMatched),
            ];
            out.extend(&shares);
            out.extend(shares.iter().map(|s| s * factor));
            out.push(nps(&m.predicted_shares())?);
            out.push(nps(&shares)?);
            Ok(out)
        },
        plan,
    )?;
    let mean = |i: usize| estimates[i].mean;
    let pop_true = population.predicted_shares();
    let pop_noisy = population.observed_shares();
    let pop_acc = population.accuracy();

    let mut std: Vec<f64> = estimates.iter().map(|e| e.std).collect();
    // undersampled shares also move with the realised minority size
    if plan.per_class_size == crate::resample::ClassSize::Minority {
        let p = minority as f64 / n as f64;
        let factor_se = k as f64 * (p * (1.0 - p) / n as f64).sqrt();
        for j in 0..k {
            let i = 4 + k + j;
            std[i] = (std[i].powi(2) + (mean(4 + j) * factor_se).powi(2)).sqrt();
        }
    }
    // population quantities come from one sample of size n: use their plug-in
    // standard errors
    std.push(nps_standard_error(&pop_true, n));
    std.push(nps_standard_error(&pop_noisy, n));
    std.push((pop_acc * (1.0 - pop_acc) / n as f64).sqrt());

    let record = BoundRecord {
        v,
        accuracy_upper: mean(0),
        precision_upper: mean(1),
        lower_majority: mean(2),
        lower_prior_matched: mean(3),
        class_shares: (0..k).map(|j| mean(4 + j)).collect(),
        undersampled_shares: (0..k).map(|j| mean(4 + k + j)).collect(),
        nps_unbiased: mean(4 + 2 * k),
        nps_biased: mean(5 + 2 * k),
        nps_population_unbiased: nps(&pop_true)?,
        nps_population_biased: nps(&pop_noisy)?,
        population_accuracy: pop_acc,
        accuracy_ratio: None,
        population_accuracy_ratio: None,
        std: Some(std),
    };
    record.validate()?;
    Ok(record)
}

fn nps_standard_error(shares: &[f64], n: usize) -> f64 {
    let top = shares[shares.len() - 1];
    let bottom = shares[0];
    let var = top + bottom - (top - bottom).powi(2);
    100.0 * (var.max(0.0) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo { n: usize, plan: ResamplePlan },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub scheme: BinningScheme,
    pub method: Method,
    pub records: Vec<BoundRecord>,
}

impl BoundCurve {
    pub fn accuracy_upper(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.accuracy_upper).collect()
    }

    /// Piecewise-linear interpolation of `accuracy_upper` at fractional `v`.
    pub fn accuracy_at(&self, v: f64) -> Result<f64> {
        let last = self.records.len() - 1;
        if !(0.0..=last as f64).contains(&v) {
            return Err(Error::invalid(format!("v = {v} is outside the curve's 0..={last}")));
        }
        let lo = (v.floor() as usize).min(last);
        if lo == last {
            return Ok(self.records[last].accuracy_upper);
        }
        let t = v - lo as f64;
        let (a, b) = (self.records[lo].accuracy_upper, self.records[lo + 1].accuracy_upper);
        Ok(a + t * (b - a))
    }
}

/// Records for `v = 0..=v_max`, in order.
///
/// For Monte Carlo, `plan.rng` is the master stream; each `v` gets its own
/// derived streams for data, noise, and resampling.
pub fn bound_curve(scheme: &BinningScheme, v_max: u8, method: &Method) -> Result<BoundCurve> {
    if v_max > NoiseModel::MAX_HALF_WIDTH {
        return Err(Error::invalid(format!(
            "v_max {v_max} exceeds {}",
            NoiseModel::MAX_HALF_WIDTH
        )));
    }
    let records = (0..=v_max)
        .into_par_iter()
        .map(|v| match method {
            Method::Exact => exact_bounds(scheme, v),
            Method::MonteCarlo { n, plan } => {
                let per_v = plan.rng.child(v as u64);
                let resample = ResamplePlan {
                    rng: per_v.child(2),
                    ..*plan
                };
                mc_bounds(scheme, v, *n, &resample, &per_v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        scheme: scheme.clone(),
        method: method.clone(),
        records,
    })
}
