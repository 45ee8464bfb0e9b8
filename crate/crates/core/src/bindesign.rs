//! Sweeps over every contiguous two- or three-bin layout of the scale.
//!
//! Three-bin layouts are grouped by the width of the middle bin (narrow
//! below 3, medium 3 to 5, wide 6 and up); two-bin layouts by the length of
//! the top bin. Only layouts with non-empty bins are enumerated, which gives
//! `C(9, k - 1)` layouts: 36 for three bins and 9 for two.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_curve, BoundCurve, Method};
use crate::error::{Error, Result};
use crate::scale::BinningScheme;

const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthClass {
    Narrow,
    Medium,
    Wide,
    /// Two-bin layouts, keyed by the length of the top bin.
    TopLength(u8),
}

impl fmt::Display for WidthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WidthClass::Narrow => f.write_str("narrow"),
            WidthClass::Medium => f.write_str("medium"),
            WidthClass::Wide => f.write_str("wide"),
            WidthClass::TopLength(n) => write!(f, "{n}"),
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 2 || k == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("bin design sweeps support k = 2 or 3, got {k}")))
    }
}

/// All layouts with `k` non-empty contiguous bins, in lexicographic cut order.
pub fn enumerate_schemes(k: usize) -> Result<Vec<BinningScheme>> {
    check_k(k)?;
    let mut out = Vec::new();
    let mut cuts = Vec::with_capacity(k - 1);
    push_cuts(&mut cuts, 1, k - 1, &mut out)?;
    Ok(out)
}

fn push_cuts(cuts: &mut Vec<u8>, from: u8, remaining: usize, out: &mut Vec<BinningScheme>) -> Result<()> {
    if remaining == 0 {
        out.push(BinningScheme::with_default_labels(cuts)?);
        return Ok(());
    }
    for c in from..=9 {
        cuts.push(c);
        push_cuts(cuts, c + 1, remaining - 1, out)?;
        cuts.pop();
    }
    Ok(())
}

pub fn width_class(scheme: &BinningScheme) -> Result<WidthClass> {
    match scheme.k() {
        3 => Ok(match scheme.bin_len(1) {
            0..=2 => WidthClass::Narrow,
            3..=5 => WidthClass::Medium,
            _ => WidthClass::Wide,
        }),
        2 => Ok(WidthClass::TopLength(scheme.bin_len(1) as u8)),
        k => Err(Error::invalid(format!(
            "width classes are defined for k = 2 or 3, got {k}"
        ))),
    }
}

/// Aggregate of one width class across `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub class: WidthClass,
    /// Indices into [`DesignSweep::schemes`].
    pub members: Vec<usize>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSweep {
    pub k: usize,
    pub schemes: Vec<BinningScheme>,
    pub curves: Vec<BoundCurve>,
    /// Width class of each scheme, aligned with `schemes`.
    pub groups: Vec<WidthClass>,
    /// One summary per class, ordered by class.
    pub summaries: Vec<GroupSummary>,
}

impl DesignSweep {
    pub fn v_max(&self) -> usize {
        self.curves[0].records.len() - 1
    }

    pub fn accuracy(&self, scheme: usize, v: usize) -> f64 {
        self.curves[scheme].records[v].accuracy_upper
    }

    /// Classes whose best member reaches the highest accuracy at `v`
    /// (several when tied).
    pub fn best_groups(&self, v: usize) -> Vec<WidthClass> {
        arg_extreme(&self.summaries, |g| g.max[v], true)
    }

    /// Classes with the highest mean accuracy at `v`.
    pub fn best_groups_by_mean(&self, v: usize) -> Vec<WidthClass> {
        arg_extreme(&self.summaries, |g| g.mean[v], true)
    }

    pub fn worst_groups_by_mean(&self, v: usize) -> Vec<WidthClass> {
        arg_extreme(&self.summaries, |g| g.mean[v], false)
    }

    /// Largest minus smallest group-mean accuracy at `v`.
    pub fn mean_spread(&self, v: usize) -> f64 {
        let means = self.summaries.iter().map(|g| g.mean[v]);
        means.clone().fold(f64::MIN, f64::max) - means.fold(f64::MAX, f64::min)
    }

    /// Largest minus smallest accuracy over all schemes at `v`.
    pub fn envelope_span(&self, v: usize) -> f64 {
        let acc = (0..self.schemes.len()).map(|s| self.accuracy(s, v));
        acc.clone().fold(f64::MIN, f64::max) - acc.fold(f64::MAX, f64::min)
    }

    /// Schemes with the lowest accuracy at `v`.
    pub fn worst_schemes(&self, v: usize) -> Vec<usize> {
        extreme_indices((0..self.schemes.len()).map(|s| self.accuracy(s, v)), false)
    }

    pub fn best_schemes(&self, v: usize) -> Vec<usize> {
        extreme_indices((0..self.schemes.len()).map(|s| self.accuracy(s, v)), true)
    }
}

fn extreme_indices(values: impl Iterator<Item = f64> + Clone, highest: bool) -> Vec<usize> {
    let target = if highest {
        values.clone().fold(f64::MIN, f64::max)
    } else {
        values.clone().fold(f64::MAX, f64::min)
    };
    values
        .enumerate()
        .filter(|(_, x)| (x - target).abs() <= TIE)
        .map(|(i, _)| i)
        .collect()
}

fn arg_extreme(groups: &[GroupSummary], f: impl Fn(&GroupSummary) -> f64, highest: bool) -> Vec<WidthClass> {
    extreme_indices(groups.iter().map(&f), highest)
        .into_iter()
        .map(|i| groups[i].class)
        .collect()
}

/// Exact accuracy-ceiling curves for every `k`-bin layout, grouped by width class.
pub fn sweep(k: usize, v_max: u8) -> Result<DesignSweep> {
    let schemes = enumerate_schemes(k)?;
    let curves = schemes
        .par_iter()
        .map(|s| bound_curve(s, v_max, &Method::Exact))
        .collect::<Result<Vec<_>>>()?;
    let groups = schemes.iter().map(width_class).collect::<Result<Vec<_>>>()?;

    let mut classes = groups.clone();
    classes.sort();
    classes.dedup();
    let summaries = classes
        .into_iter()
        .map(|class| {
            let members: Vec<usize> = (0..schemes.len()).filter(|&i| groups[i] == class).collect();
            let curves = &curves;
            let column = |v: usize| members.iter().map(move |&i| curves[i].records[v].accuracy_upper);
            let n_v = v_max as usize + 1;
            GroupSummary {
                class,
                mean: (0..n_v)
                    .map(|v| column(v).sum::<f64>() / members.len() as f64)
                    .collect(),
                min: (0..n_v).map(|v| column(v).fold(f64::MAX, f64::min)).collect(),
                max: (0..n_v).map(|v| column(v).fold(f64::MIN, f64::max)).collect(),
                members,
            }
        })
        .collect();

    Ok(DesignSweep {
        k,
        schemes,
        curves,
        groups,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_schemes(2).unwrap().len(), 9);
        assert_eq!(enumerate_schemes(3).unwrap().len(), 36);
        assert!(enumerate_schemes(4).is_err());
        assert!(enumerate_schemes(1).is_err());
    }

    #[test]
    fn known_layouts_are_enumerated_once() {
        let all: Vec<String> = enumerate_schemes(3).unwrap().iter().map(|s| s.to_string()).collect();
        for s in ["1-3,4-6,7-10", "1-3,4-7,8-10", "1-6,7-8,9-10"] {
            assert_eq!(all.iter().filter(|x| *x == s).count(), 1, "{s}");
        }
        let unique: HashSet<&String> = all.iter().collect();
        assert_eq!(unique.len(), 36);
        assert_eq!(all[0], "1,2,3-10");
        assert_eq!(all[35], "1-8,9,10");
    }

    #[test]
    fn enumerated_layouts_are_valid() {
        for k in [2, 3] {
            for s in enumerate_schemes(k).unwrap() {
                assert_eq!(s.k(), k);
                assert!((0..k).all(|i| s.bin_len(i) >= 1));
                assert_eq!((0..k).map(|i| s.bin_len(i)).sum::<usize>(), 10);
                assert_eq!(BinningScheme::parse(&s.to_string()).unwrap(), s);
            }
        }
    }

    #[test]
    fn width_examples() {
        let w = |t: &str| width_class(&BinningScheme::parse(t).unwrap()).unwrap();
        assert_eq!(w("1-6,7-8,9-10"), WidthClass::Narrow);
        assert_eq!(w("1-3,4-6,7-10"), WidthClass::Medium);
        assert_eq!(w("1-3,4-7,8-10"), WidthClass::Medium);
        assert_eq!(w("1,2-9,10"), WidthClass::Wide);
        assert_eq!(w("1-7,8-10"), WidthClass::TopLength(3));
        assert_eq!(w("1-5,6-10"), WidthClass::TopLength(5));
        assert!(width_class(&BinningScheme::parse("1-2,3-4,5-6,7-10").unwrap()).is_err());
    }

    #[test]
    fn sweep_structure() {
        let s = sweep(3, 9).unwrap();
        assert_eq!(s.schemes.len(), 36);
        assert_eq!(s.summaries.iter().map(|g| g.members.len()).sum::<usize>(), 36);
        for i in 0..36 {
            assert_eq!(s.accuracy(i, 0), 1.0);
        }
        assert_eq!(s, sweep(3, 9).unwrap());
        let two = sweep(2, 9).unwrap();
        assert_eq!(two.summaries.len(), 9);
    }

    #[test]
    fn narrow_is_worst_on_average() {
        let s = sweep(3, 9).unwrap();
        for v in 1..=9 {
            assert_eq!(s.worst_groups_by_mean(v), vec![WidthClass::Narrow], "v={v}");
        }
    }
}
