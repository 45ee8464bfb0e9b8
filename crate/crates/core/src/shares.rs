//! Category proportions and the Net Promoter Score.

use crate::error::{Error, Result};
use crate::scale::Category;

const SUM_TOLERANCE: f64 = 1e-9;

/// Fraction of the sample in each category, indexed by bin.
pub fn class_shares(categories: &[Category], k: usize) -> Result<Vec<f64>> {
    let indices: Vec<usize> = categories.iter().map(|c| c.index).collect();
    shares_from_indices(&indices, k)
}

pub fn shares_from_indices(indices: &[usize], k: usize) -> Result<Vec<f64>> {
    if indices.is_empty() {
        return Err(Error::invalid("cannot compute shares of an empty sample"));
    }
    let mut counts = vec![0u64; k];
    for &i in indices {
        if i >= k {
            return Err(Error::invalid(format!("category index {i} out of range for k={k}")));
        }
        counts[i] += 1;
    }
    Ok(shares_from_counts(&counts))
}

pub fn shares_from_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// `100 * (top share - bottom share)`.
///
/// The top bin counts as promoters and the bottom bin as detractors, so a
/// two-bin scheme still yields a number even though the usual definition
/// only covers three bins.
pub fn nps(shares: &[f64]) -> Result<f64> {
    if shares.len() < 2 {
        return Err(Error::invalid("NPS needs at least two categories"));
    }
    if shares.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::invalid("shares must lie in [0, 1]"));
    }
    let total: f64 = shares.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::invalid(format!("shares sum to {total}, not 1")));
    }
    Ok(100.0 * (shares[shares.len() - 1] - shares[0]))
}

/// NPS straight from per-category counts.
pub fn nps_from_counts(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 || counts.len() < 2 {
        return Err(Error::invalid(
            "NPS needs a non-empty sample over at least two categories",
        ));
    }
    let diff = counts[counts.len() - 1] as f64 - counts[0] as f64;
    Ok(100.0 * diff / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{BinningScheme, Score};
    use proptest::prelude::*;

    fn cat(i: usize) -> Category {
        BinningScheme::brand().category(i)
    }

    #[test]
    fn nps_examples() {
        assert_eq!(nps(&[0.0, 0.0, 1.0]).unwrap(), 100.0);
        assert!((nps(&[0.2, 0.3, 0.5]).unwrap() - 30.0).abs() < 1e-12);
        // uniform scores: 6 of 10 detract, 2 of 10 promote
        let uniform: Vec<Category> = Score::all().map(|s| BinningScheme::brand().categorize(s)).collect();
        let shares = class_shares(&uniform, 3).unwrap();
        assert!((nps(&shares).unwrap() + 40.0).abs() < 1e-12);
    }

    #[test]
    fn nps_rejects_bad_shares() {
        assert!(nps(&[0.2, 0.3, 0.4]).is_err());
        assert!(nps(&[1.0]).is_err());
        assert!(nps(&[1.2, -0.2]).is_err());
    }

    #[test]
    fn class_share_examples() {
        let s = class_shares(&[cat(0), cat(0), cat(1)], 3).unwrap();
        assert_eq!(s, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        let s = class_shares(&[cat(2), cat(2)], 3).unwrap();
        assert_eq!(s, vec![0.0, 0.0, 1.0]);
        assert!(class_shares(&[], 3).is_err());
        assert!(shares_from_indices(&[3], 3).is_err());
    }

    proptest! {
        #[test]
        fn nps_ignores_middle_share(top in 0.0f64..0.5, bottom in 0.0f64..0.5, split in 0.0f64..1.0) {
            let rest = 1.0 - top - bottom;
            let a = nps(&[bottom, rest, top]).unwrap();
            let b = nps(&[bottom, rest * split, rest * (1.0 - split), top]).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn nps_from_shares_matches_counts(idx in proptest::collection::vec(0usize..3, 1..200)) {
            let mut counts = [0u64; 3];
            for &i in &idx { counts[i] += 1; }
            let a = nps(&shares_from_indices(&idx, 3).unwrap()).unwrap();
            let b = nps_from_counts(&counts).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
