//! Ordinal scores on the 1–10 scale and contiguous category bins over it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single rating on the 1..=10 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Score(u8);

impl Score {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 10;
    /// Number of points on the scale.
    pub const LEVELS: usize = 10;

    pub fn new(value: i64) -> Result<Self> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&value) {
            Ok(Score(value as u8))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    /// Clamps an arbitrary integer onto the scale.
    pub fn clamped(value: i64) -> Self {
        Score(value.clamp(Self::MIN as i64, Self::MAX as i64) as u8)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position on the scale (score 1 is 0).
    pub fn index(self) -> usize {
        (self.0 - Self::MIN) as usize
    }

    pub fn all() -> impl DoubleEndedIterator<Item = Score> + ExactSizeIterator {
        (Self::MIN..=Self::MAX).map(Score)
    }
}

impl TryFrom<i64> for Score {
    type Error = Error;
    fn try_from(value: i64) -> Result<Self> {
        Score::new(value)
    }
}

impl From<Score> for u8 {
    fn from(s: Score) -> u8 {
        s.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A category bin of a particular scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Category {
    pub index: usize,
    pub label: String,
}

/// A partition of 1..=10 into `k >= 2` contiguous, non-empty, labeled bins.
///
/// Bins are stored by their upper bounds; the last upper bound is always 10.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinningScheme {
    uppers: Vec<u8>,
    labels: Vec<String>,
}

impl BinningScheme {
    /// Builds a scheme from the last score of every bin but the top one.
    ///
    /// `cuts = [6, 8]` gives `1-6, 7-8, 9-10`.
    pub fn from_cuts(cuts: &[u8], labels: Vec<String>) -> Result<Self> {
        let render = || cuts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        if cuts.is_empty() {
            return Err(Error::Scheme {
                text: render(),
                reason: "at least two bins are required".into(),
            });
        }
        let mut prev = 0u8;
        for &c in cuts {
            if c <= prev || c >= Score::MAX {
                return Err(Error::Scheme {
                    text: render(),
                    reason: format!("cut {c} must be increasing and within 1..=9"),
                });
            }
            prev = c;
        }
        let mut uppers = cuts.to_vec();
        uppers.push(Score::MAX);
        if labels.len() != uppers.len() {
            return Err(Error::Scheme {
                text: render(),
                reason: format!("{} labels for {} bins", labels.len(), uppers.len()),
            });
        }
        Ok(BinningScheme { uppers, labels })
    }

    /// Same as [`from_cuts`](Self::from_cuts) with [`default_labels`].
    pub fn with_default_labels(cuts: &[u8]) -> Result<Self> {
        Self::from_cuts(cuts, default_labels(cuts.len() + 1))
    }

    /// Detractor 1-6, Passive 7-8, Promoter 9-10.
    pub fn brand() -> Self {
        Self::with_default_labels(&[6, 8]).expect("valid built-in scheme")
    }

    pub fn k(&self) -> usize {
        self.uppers.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Inclusive `(low, high)` score range of bin `i`.
    pub fn bin_range(&self, i: usize) -> (u8, u8) {
        let low = if i == 0 { Score::MIN } else { self.uppers[i - 1] + 1 };
        (low, self.uppers[i])
    }

    pub fn bin_len(&self, i: usize) -> usize {
        let (lo, hi) = self.bin_range(i);
        (hi - lo + 1) as usize
    }

    /// Interior cut points (last score of each non-top bin).
    pub fn cuts(&self) -> &[u8] {
        &self.uppers[..self.uppers.len() - 1]
    }

    /// Index of the bin holding `score`.
    pub fn bin_of(&self, score: Score) -> usize {
        self.uppers.partition_point(|&u| u < score.get())
    }

    pub fn category(&self, index: usize) -> Category {
        Category {
            index,
            label: self.labels[index].clone(),
        }
    }

    pub fn categorize(&self, score: Score) -> Category {
        self.category(self.bin_of(score))
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Parses comma-separated inclusive ranges such as `1-6,7-8,9-10`.
    ///
    /// A single number is a one-score bin. Labels follow [`default_labels`].
    pub fn parse(text: &str) -> Result<Self> {
        let err = |reason: String| Error::Scheme {
            text: text.to_string(),
            reason,
        };
        let mut expected = Score::MIN;
        let mut uppers = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let (lo, hi) = match part.split_once('-') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (part, part),
            };
            let lo: u8 = lo.parse().map_err(|_| err(format!("range `{part}` is not numeric")))?;
            let hi: u8 = hi.parse().map_err(|_| err(format!("range `{part}` is not numeric")))?;
            if lo > hi {
                return Err(err(format!("range `{part}` is reversed")));
            }
            if expected > Score::MAX {
                return Err(err(format!("range `{part}` lies beyond 10")));
            }
            if lo > expected {
                let gap = if lo - 1 == expected {
                    format!("{expected}")
                } else {
                    format!("{expected}-{}", lo - 1)
                };
                return Err(err(format!("gap at {gap} before range `{part}`")));
            }
            if lo < expected {
                return Err(err(format!("range `{part}` overlaps the previous bin")));
            }
            if hi > Score::MAX {
                return Err(err(format!("range `{part}` exceeds 10")));
            }
            uppers.push(hi);
            expected = hi + 1;
        }
        if expected <= Score::MAX {
            return Err(err(format!("scores {expected}-10 are not covered")));
        }
        if uppers.len() < 2 {
            return Err(err("at least two bins are required".into()));
        }
        uppers.pop();
        Self::with_default_labels(&uppers)
    }
}

impl fmt::Display for BinningScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.k() {
            if i > 0 {
                f.write_str(",")?;
            }
            let (lo, hi) = self.bin_range(i);
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}-{hi}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for BinningScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for BinningScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Detractor/Passive/Promoter for three bins, Low/High for two, `Bin-i` otherwise.
pub fn default_labels(k: usize) -> Vec<String> {
    match k {
        2 => vec!["Low".into(), "High".into()],
        3 => vec!["Detractor".into(), "Passive".into(), "Promoter".into()],
        _ => (1..=k).map(|i| format!("Bin-{i}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Score {
        Score::new(v).unwrap()
    }

    #[test]
    fn score_range() {
        assert!(Score::new(0).is_err());
        assert!(Score::new(11).is_err());
        assert_eq!(s(1).index(), 0);
        assert_eq!(Score::all().count(), 10);
        assert_eq!(Score::clamped(-3), s(1));
        assert_eq!(Score::clamped(14), s(10));
    }

    #[test]
    fn brand_categories() {
        let b = BinningScheme::brand();
        assert_eq!(b.categorize(s(10)).label, "Promoter");
        assert_eq!(b.categorize(s(9)).label, "Promoter");
        assert_eq!(b.categorize(s(7)).label, "Passive");
        assert_eq!(b.categorize(s(8)).label, "Passive");
        assert_eq!(b.categorize(s(6)).label, "Detractor");
        assert_eq!(b.categorize(s(1)).label, "Detractor");
        assert_eq!(b.bin_range(1), (7, 8));
        assert_eq!(b.bin_len(0), 6);
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(BinningScheme::parse("1-6,7-8,9-10").unwrap(), BinningScheme::brand());
        let two = BinningScheme::parse("1-5,6-10").unwrap();
        assert_eq!(two.k(), 2);
        assert_eq!(two.labels(), ["Low", "High"]);
        let wide = BinningScheme::parse("1,2-9,10").unwrap();
        assert_eq!(wide.bin_len(1), 8);
        assert_eq!(wide.to_string(), "1,2-9,10");
        let four = BinningScheme::parse("1-2,3-5,6-8,9-10").unwrap();
        assert_eq!(four.labels()[3], "Bin-4");
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let e = BinningScheme::parse("1-6,8-10").unwrap_err().to_string();
        assert!(e.contains("gap at 7"), "{e}");
        let e = BinningScheme::parse("1-6,6-10").unwrap_err().to_string();
        assert!(e.contains("overlaps"), "{e}");
        let e = BinningScheme::parse("1-6,7-9").unwrap_err().to_string();
        assert!(e.contains("10"), "{e}");
        assert!(BinningScheme::parse("1-10").is_err());
        assert!(BinningScheme::parse("2-6,7-10").is_err());
        assert!(BinningScheme::parse("1-a,7-10").is_err());
        assert!(BinningScheme::parse("1-6,7-11").is_err());
    }

    #[test]
    fn from_cuts_validation() {
        assert!(BinningScheme::with_default_labels(&[]).is_err());
        assert!(BinningScheme::with_default_labels(&[5, 5]).is_err());
        assert!(BinningScheme::with_default_labels(&[10]).is_err());
        assert!(BinningScheme::from_cuts(&[5], vec!["a".into()]).is_err());
    }
}
