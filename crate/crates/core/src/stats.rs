//! Descriptive spread, score-by-category tables, and chi-square uniformity
//! tests for small respondent panels.

use std::collections::BTreeSet;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::RngSpec;
use crate::scale::Score;

pub use crate::special::chi2_sf;

/// Mean and twice the sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub two_sigma: f64,
}

impl fmt::Display for Spread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1} ± {:.1}", self.mean, self.two_sigma)
    }
}

pub fn describe_spread(values: &[f64]) -> Result<Spread> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("spread needs at least two values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("spread inputs must be finite"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Spread {
        mean,
        two_sigma: 2.0 * var.sqrt(),
    })
}

/// Contingency table of score against self-assigned category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crosstab {
    /// Distinct labels in sorted order (the table's columns).
    pub labels: Vec<String>,
    /// `counts[score - 1][label]`.
    pub counts: Vec<Vec<u64>>,
    /// Most frequent label per score; `None` where nobody gave that score.
    /// Ties go to the label that sorts first.
    pub modal: Vec<Option<String>>,
}

impl Crosstab {
    /// Adjacent observed scores `(lower, upper)` whose modal labels differ.
    pub fn modal_boundaries(&self) -> Vec<(u8, u8)> {
        let present: Vec<(u8, &String)> = self
            .modal
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|l| (i as u8 + 1, l)))
            .collect();
        present
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }
}

pub fn crosstab(scores: &[Score], self_categories: &[String]) -> Result<Crosstab> {
    if scores.len() != self_categories.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} category answers",
            scores.len(),
            self_categories.len()
        )));
    }
    let labels: Vec<String> = self_categories
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0u64; labels.len()]; Score::LEVELS];
    for (s, c) in scores.iter().zip(self_categories) {
        let j = labels.binary_search(c).expect("label collected above");
        counts[s.index()][j] += 1;
    }
    let modal = counts
        .iter()
        .map(|row| {
            let best = row.iter().copied().max().unwrap_or(0);
            if best == 0 {
                None
            } else {
                row.iter().position(|&c| c == best).map(|j| labels[j].clone())
            }
        })
        .collect();
    Ok(Crosstab { labels, counts, modal })
}

/// Response counts for scores 1..=10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountVector {
    counts: [u64; Score::LEVELS],
}

impl CountVector {
    pub fn new(counts: [u64; Score::LEVELS]) -> Result<Self> {
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::invalid("count vector is empty"));
        }
        Ok(CountVector { counts })
    }

    pub fn from_scores(scores: &[Score]) -> Result<Self> {
        let mut counts = [0u64; Score::LEVELS];
        for s in scores {
            counts[s.index()] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64; Score::LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chi2Variant {
    /// All ten cells.
    Full,
    /// Scores 1 and 2 dropped; the rest tested against their own uniform.
    OmitBelow3,
    /// `ln(1 + count)` per cell, rescaled to the original total. This is one
    /// reading of a "log transformation" of the counts, not a standard test.
    LogCounts,
}

impl Chi2Variant {
    pub const ALL: [Chi2Variant; 3] = [Chi2Variant::Full, Chi2Variant::OmitBelow3, Chi2Variant::LogCounts];

    pub fn name(self) -> &'static str {
        match self {
            Chi2Variant::Full => "full",
            Chi2Variant::OmitBelow3 => "omit-below-3",
            Chi2Variant::LogCounts => "log-counts",
        }
    }
}

impl fmt::Display for Chi2Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub variant: Chi2Variant,
    /// Expected count per retained cell.
    pub expected: f64,
    pub warnings: Vec<String>,
}

/// Pearson chi-square test of the counts against a uniform distribution.
pub fn chi2_uniformity(counts: &CountVector, variant: Chi2Variant) -> Result<Chi2Result> {
    let mut warnings = Vec::new();
    let observed: Vec<f64> = match variant {
        Chi2Variant::Full => counts.counts.iter().map(|&c| c as f64).collect(),
        Chi2Variant::OmitBelow3 => counts.counts[2..].iter().map(|&c| c as f64).collect(),
        Chi2Variant::LogCounts => {
            let logs: Vec<f64> = counts.counts.iter().map(|&c| (c as f64).ln_1p()).collect();
            let scale = counts.total() as f64 / logs.iter().sum::<f64>();
            logs.into_iter().map(|l| l * scale).collect()
        }
    };
    let total: f64 = observed.iter().sum();
    let cells = observed.len();
    let expected = total / cells as f64;
    if expected < 1.0 {
        return Err(Error::invalid(format!(
            "expected count per cell is {expected:.3} (< 1) for the {variant} variant"
        )));
    }
    if expected < 5.0 {
        warnings.push(format!(
            "expected count per cell is {expected:.3} (< 5); the chi-square approximation is rough"
        ));
    }
    if observed.iter().filter(|&&o| o > 0.0).count() == 1 {
        warnings.push("all responses fall on a single score".to_string());
    }
    let statistic: f64 = observed.iter().map(|o| (o - expected).powi(2) / expected).sum();
    let dof = cells - 1;
    Ok(Chi2Result {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof),
        variant,
        expected,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CalibratedMoreUniform,
    UncalibratedMoreUniform,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantComparison {
    pub variant: Chi2Variant,
    pub uncalibrated: Chi2Result,
    pub calibrated: Chi2Result,
    /// Calibrated p-value over uncalibrated p-value.
    pub p_ratio: f64,
    pub verdict: Verdict,
}

/// Runs every [`Chi2Variant`] on both count vectors.
pub fn compare_uniformity(uncalibrated: &CountVector, calibrated: &CountVector) -> Result<Vec<VariantComparison>> {
    Chi2Variant::ALL
        .iter()
        .map(|&variant| {
            let u = chi2_uniformity(uncalibrated, variant)?;
            let c = chi2_uniformity(calibrated, variant)?;
            let p_ratio = if u.p_value == c.p_value {
                1.0
            } else {
                c.p_value / u.p_value
            };
            let verdict = if c.p_value > u.p_value {
                Verdict::CalibratedMoreUniform
            } else if c.p_value < u.p_value {
                Verdict::UncalibratedMoreUniform
            } else {
                Verdict::Tie
            };
            Ok(VariantComparison {
                variant,
                uncalibrated: u,
                calibrated: c,
                p_ratio,
                verdict,
            })
        })
        .collect()
}

/// Synthetic panels shaped like a small city-satisfaction survey: plain
/// numeric answers bunch at the top with nothing below 3, while answers
/// given against short text anchors spread over the whole scale.
pub mod fixtures {
    use super::*;

    pub const UNCALIBRATED: [u64; 10] = [0, 0, 3, 6, 10, 17, 28, 45, 52, 39];
    pub const CALIBRATED: [u64; 10] = [4, 6, 10, 14, 17, 22, 30, 40, 38, 19];

    pub fn uncalibrated_counts() -> CountVector {
        CountVector::new(UNCALIBRATED).expect("non-empty fixture")
    }

    pub fn calibrated_counts() -> CountVector {
        CountVector::new(CALIBRATED).expect("non-empty fixture")
    }

    /// Self-assigned category for `score`: "bad" up to 3, "okay" through 7,
    /// "great" from 8, with some respondents straddling at 4, 7 and 8.
    fn self_category<R: Rng>(score: u8, rng: &mut R) -> &'static str {
        let roll: f64 = rng.gen();
        match score {
            1..=3 => "bad",
            4 if roll < 0.35 => "bad",
            4..=6 => "okay",
            7 if roll < 0.3 => "great",
            7 => "okay",
            8 if roll < 0.3 => "okay",
            _ => "great",
        }
    }

    /// `n` (score, self-category) responses drawn from [`UNCALIBRATED`].
    pub fn city_responses(n: usize, rng: &RngSpec) -> Vec<(Score, String)> {
        let mut gen = rng.rng();
        let dist = WeightedIndex::new(UNCALIBRATED).expect("positive weights");
        (0..n)
            .map(|_| {
                let score = dist.sample(&mut gen) as u8 + 1;
                let s = Score::clamped(score as i64);
                (s, self_category(score, &mut gen).to_string())
            })
            .collect()
    }
}
