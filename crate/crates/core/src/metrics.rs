//! Confusion-matrix metrics.
//!
//! Rows are the predicted category and columns the observed label. In the
//! bound computations the prediction is the respondent's true category and
//! the label is the category of the noisy answer, so these metrics measure
//! the best score any classifier could post against noisy labels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scale::Category;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("confusion matrix must be square and non-empty"));
        }
        let counts: Vec<u64> = rows.into_iter().flatten().collect();
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::invalid("confusion matrix has no observations"));
        }
        Ok(ConfusionMatrix { k, counts })
    }

    /// Tallies (predicted, observed) index pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>, k: usize) -> Result<Self> {
        let mut counts = vec![0u64; k * k];
        for (p, o) in pairs {
            if p >= k || o >= k {
                return Err(Error::invalid(format!("category index out of range for k={k}")));
            }
            counts[p * k + o] += 1;
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::invalid("confusion matrix has no observations"));
        }
        Ok(ConfusionMatrix { k, counts })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, predicted: usize, observed: usize) -> u64 {
        self.counts[predicted * self.k + observed]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i * self.k..(i + 1) * self.k].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.k).map(|i| self.get(i, j)).sum()
    }

    /// Share of observations carrying each observed label.
    pub fn observed_shares(&self) -> Vec<f64> {
        let total = self.total() as f64;
        (0..self.k).map(|j| self.col_sum(j) as f64 / total).collect()
    }

    pub fn predicted_shares(&self) -> Vec<f64> {
        let total = self.total() as f64;
        (0..self.k).map(|i| self.row_sum(i) as f64 / total).collect()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Accuracy as a reduced fraction `(numerator, denominator)`.
    pub fn accuracy_ratio(&self) -> (u64, u64) {
        let (n, d) = (self.trace(), self.total());
        let g = gcd(n, d);
        (n / g, d / g)
    }

    pub fn macro_precision(&self) -> Result<MacroPrecision> {
        let mut sum = 0.0;
        let mut used = 0usize;
        let mut skipped = Vec::new();
        for i in 0..self.k {
            let row = self.row_sum(i);
            if row == 0 {
                skipped.push(i);
                continue;
            }
            sum += self.get(i, i) as f64 / row as f64;
            used += 1;
        }
        if used == 0 {
            return Err(Error::invalid("every predicted class is empty"));
        }
        Ok(MacroPrecision {
            value: sum / used as f64,
            skipped,
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Unweighted mean of per-class precision. Classes that were never
/// predicted are left out and listed in `skipped`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroPrecision {
    pub value: f64,
    pub skipped: Vec<usize>,
}

pub fn confusion(predicted: &[Category], observed: &[Category], k: usize) -> Result<ConfusionMatrix> {
    if predicted.len() != observed.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} observations",
            predicted.len(),
            observed.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    ConfusionMatrix::from_pairs(predicted.iter().zip(observed).map(|(p, o)| (p.index, o.index)), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Always guess the most common label.
    Majority,
    /// Guess at random with the label frequencies.
    PriorMatched,
}

/// Accuracy of a feature-blind guesser given the label shares.
pub fn baseline_accuracy(shares: &[f64], kind: Baseline) -> f64 {
    match kind {
        Baseline::Majority => shares.iter().copied().fold(0.0, f64::max),
        Baseline::PriorMatched => shares.iter().map(|s| s * s).sum(),
    }
}
