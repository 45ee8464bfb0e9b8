use serde::Serialize;

use crate::error::{Error, Result};
use crate::scale::Score;

/// One respondent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRecord {
    pub id: String,
    /// True (averaged) opinion, when known.
    pub unbiased_score: Option<Score>,
    /// The score actually marked on the survey.
    pub biased_score: Score,
    pub features: Option<Vec<f64>>,
    pub self_category: Option<String>,
}

impl SurveyRecord {
    pub fn new(id: impl Into<String>, biased_score: Score) -> Self {
        SurveyRecord {
            id: id.into(),
            unbiased_score: None,
            biased_score,
            features: None,
            self_category: None,
        }
    }
}

/// A non-empty collection of records with a consistent feature layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    records: Vec<SurveyRecord>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(records: Vec<SurveyRecord>, feature_names: Option<Vec<String>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("dataset has no records"));
        }
        let width = records[0].features.as_ref().map(Vec::len);
        for (i, r) in records.iter().enumerate() {
            if r.features.as_ref().map(Vec::len) != width {
                return Err(Error::invalid(format!(
                    "record {i} ({}) has a different feature layout from record 0",
                    r.id
                )));
            }
        }
        if let (Some(names), Some(w)) = (&feature_names, width) {
            if names.len() != w {
                return Err(Error::invalid(format!(
                    "{} feature names for {w} feature columns",
                    names.len()
                )));
            }
        }
        Ok(Dataset { records, feature_names })
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SurveyRecord> {
        self.records
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of feature columns (0 when records carry none).
    pub fn feature_count(&self) -> usize {
        self.records[0].features.as_ref().map_or(0, Vec::len)
    }

    pub fn has_features(&self) -> bool {
        self.records[0].features.is_some()
    }

    /// Unbiased scores of every record, or an error naming the first gap.
    pub fn unbiased_scores(&self) -> Result<Vec<Score>> {
        self.records
            .iter()
            .map(|r| {
                r.unbiased_score
                    .ok_or_else(|| Error::invalid(format!("record {} has no unbiased score", r.id)))
            })
            .collect()
    }

    pub fn biased_scores(&self) -> Vec<Score> {
        self.records.iter().map(|r| r.biased_score).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, f: Option<Vec<f64>>) -> SurveyRecord {
        SurveyRecord {
            features: f,
            ..SurveyRecord::new(id, Score::new(5).unwrap())
        }
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(Dataset::new(vec![], None).is_err());
        let ragged = vec![rec("a", Some(vec![1.0])), rec("b", Some(vec![1.0, 2.0]))];
        assert!(Dataset::new(ragged, None).is_err());
        let mixed = vec![rec("a", Some(vec![1.0])), rec("b", None)];
        assert!(Dataset::new(mixed, None).is_err());
    }

    #[test]
    fn names_must_match_width() {
        let rows = vec![rec("a", Some(vec![1.0, 2.0]))];
        assert!(Dataset::new(rows.clone(), Some(vec!["x".into()])).is_err());
        let d = Dataset::new(rows, Some(vec!["x".into(), "y".into()])).unwrap();
        assert_eq!(d.feature_count(), 2);
    }

    #[test]
    fn missing_unbiased_is_reported() {
        let d = Dataset::new(vec![rec("r7", None)], None).unwrap();
        let e = d.unbiased_scores().unwrap_err().to_string();
        assert!(e.contains("r7"));
    }
}
