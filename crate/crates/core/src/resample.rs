//! Balanced undersampling ensembles.
//!
//! Each iteration draws the same number of members from every class (with
//! replacement by default), evaluates a metric on that balanced sample, and
//! the ensemble reports the mean and spread of the metric across iterations.
//! Every class is cut down to the size of the smallest one, however many
//! classes there are.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassSize {
    /// Size of the smallest class.
    Minority,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResamplePlan {
    pub iterations: usize,
    pub per_class_size: ClassSize,
    pub with_replacement: bool,
    pub rng: RngSpec,
}

impl ResamplePlan {
    pub const DEFAULT_ITERATIONS: usize = 1000;

    pub fn new(rng: RngSpec) -> Self {
        ResamplePlan {
            iterations: Self::DEFAULT_ITERATIONS,
            per_class_size: ClassSize::Minority,
            with_replacement: true,
            rng,
        }
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn per_class(mut self, size: ClassSize) -> Self {
        self.per_class_size = size;
        self
    }

    pub fn without_replacement(mut self) -> Self {
        self.with_replacement = false;
        self
    }

    fn resolve_size<T>(&self, groups: &[Group<T>]) -> Result<usize> {
        let smallest = groups.iter().map(|g| g.members.len()).min().unwrap_or(0);
        let size = match self.per_class_size {
            ClassSize::Minority => smallest,
            ClassSize::Fixed(n) => n,
        };
        if size == 0 {
            return Err(Error::invalid("per-class sample size resolved to 0"));
        }
        if !self.with_replacement && size > smallest {
            return Err(Error::invalid(format!(
                "cannot draw {size} per class without replacement from a class of {smallest}"
            )));
        }
        Ok(size)
    }
}

/// Members of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Group<T> {
    pub label: String,
    pub members: Vec<T>,
}

/// Splits `items` into one group per label using `key` as the label index.
pub fn group_by<T, F>(items: impl IntoIterator<Item = T>, labels: &[String], key: F) -> Vec<Group<T>>
where
    F: Fn(&T) -> usize,
{
    let mut groups: Vec<Group<T>> = labels
        .iter()
        .map(|l| Group {
            label: l.clone(),
            members: Vec::new(),
        })
        .collect();
    for item in items {
        let i = key(&item);
        groups[i].members.push(item);
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Sample standard deviation across iterations (0 for one iteration).
    pub std: f64,
    pub iterations: usize,
}

impl EnsembleEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        EnsembleEstimate {
            mean,
            std,
            iterations: n,
        }
    }
}

/// Ensemble of a scalar metric over balanced samples.
///
/// The metric receives one vector of sampled members per class, in group order.
pub fn balanced_ensemble<T, F>(groups: &[Group<T>], metric: F, plan: &ResamplePlan) -> Result<EnsembleEstimate>
where
    T: Sync,
    F: Fn(&[Vec<&T>]) -> Result<f64> + Sync,
{
    let out = balanced_ensemble_multi(groups, |sample| metric(sample).map(|x| vec![x]), plan)?;
    Ok(out[0])
}

/// Like [`balanced_ensemble`] for a metric returning several quantities at once.
pub fn balanced_ensemble_multi<T, F>(
    groups: &[Group<T>],
    metric: F,
    plan: &ResamplePlan,
) -> Result<Vec<EnsembleEstimate>>
where
    T: Sync,
    F: Fn(&[Vec<&T>]) -> Result<Vec<f64>> + Sync,
{
    if plan.iterations == 0 {
        return Err(Error::invalid("resample plan needs at least one iteration"));
    }
    if groups.is_empty() {
        return Err(Error::invalid("no classes to balance"));
    }
    if let Some(g) = groups.iter().find(|g| g.members.is_empty()) {
        return Err(Error::EmptyCategory(g.label.clone()));
    }
    let size = plan.resolve_size(groups)?;

    // one stream per iteration keeps results independent of scheduling
    let runs: Vec<Vec<f64>> = (0..plan.iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = plan.rng.child(it as u64).rng();
            let sample: Vec<Vec<&T>> = groups
                .iter()
                .map(|g| draw(&g.members, size, plan.with_replacement, &mut rng))
                .collect();
            let values = metric(&sample)?;
            if values.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("metric returned a non-finite value"));
            }
            Ok(values)
        })
        .collect::<Result<_>>()?;

    let width = runs[0].len();
    if runs.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("metric returned a varying number of values"));
    }
    Ok((0..width)
        .map(|q| {
            let column: Vec<f64> = runs.iter().map(|r| r[q]).collect();
            EnsembleEstimate::from_values(&column)
        })
        .collect())
}

fn draw<'a, T, R: Rng>(members: &'a [T], size: usize, replace: bool, rng: &mut R) -> Vec<&'a T> {
    if replace {
        (0..size).map(|_| &members[rng.gen_range(0..members.len())]).collect()
    } else {
        index::sample(rng, members.len(), size)
            .into_iter()
            .map(|i| &members[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (true class, observed class) pairs
    fn fixture(sizes: &[(usize, usize)], k: usize) -> Vec<Group<(usize, usize)>> {
        // sizes[i] = (members of class i, of which correctly observed)
        let labels: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let mut items = Vec::new();
        for (i, &(n, hit)) in sizes.iter().enumerate() {
            for j in 0..n {
                let obs = if j < hit { i } else { (i + 1) % k };
                items.push((i, obs));
            }
        }
        group_by(items, &labels, |p| p.0)
    }

    fn accuracy(sample: &[Vec<&(usize, usize)>]) -> Result<f64> {
        let (mut hit, mut n) = (0usize, 0usize);
        for g in sample {
            for p in g {
                hit += usize::from(p.0 == p.1);
                n += 1;
            }
        }
        Ok(hit as f64 / n as f64)
    }

    #[test]
    fn constant_metric() {
        let g = fixture(&[(5, 5), (3, 3)], 2);
        let e = balanced_ensemble(&g, |_| Ok(0.5), &ResamplePlan::new(RngSpec::new(1)).iterations(50)).unwrap();
        assert_eq!(e.mean, 0.5);
        assert_eq!(e.std, 0.0);
        assert_eq!(e.iterations, 50);
    }

    #[test]
    fn empty_class_is_named() {
        let g = fixture(&[(5, 5), (0, 0), (2, 1)], 3);
        let err = balanced_ensemble(&g, |_| Ok(1.0), &ResamplePlan::new(RngSpec::new(1))).unwrap_err();
        assert!(matches!(err, Error::EmptyCategory(ref l) if l == "c1"));
    }

    #[test]
    fn metric_errors_propagate() {
        let g = fixture(&[(5, 5), (3, 3)], 2);
        let plan = ResamplePlan::new(RngSpec::new(1)).iterations(5);
        assert!(balanced_ensemble(&g, |_| Err(Error::invalid("boom")), &plan).is_err());
        assert!(balanced_ensemble(&g, |_| Ok(f64::NAN), &plan).is_err());
    }

    #[test]
    fn minority_size_and_no_replacement() {
        let g = fixture(&[(9, 9), (4, 4)], 2);
        let plan = ResamplePlan::new(RngSpec::new(1)).iterations(3);
        let sizes = balanced_ensemble_multi(&g, |s| Ok(s.iter().map(|c| c.len() as f64).collect()), &plan).unwrap();
        assert_eq!((sizes[0].mean, sizes[1].mean), (4.0, 4.0));

        let exact = plan.without_replacement();
        let distinct = balanced_ensemble(
            &g,
            |s| {
                let mut ptrs: Vec<*const (usize, usize)> = s[1].iter().map(|p| *p as *const _).collect();
                ptrs.sort();
                ptrs.dedup();
                Ok(ptrs.len() as f64)
            },
            &exact,
        )
        .unwrap();
        assert_eq!(distinct.mean, 4.0);
        assert!(balanced_ensemble(&g, |_| Ok(0.0), &exact.per_class(ClassSize::Fixed(5))).is_err());
    }

    #[test]
    fn converges_to_macro_average() {
        // per-class hit rates 0.9, 0.5, 0.2 with very different class sizes
        let g = fixture(&[(900, 810), (200, 100), (50, 10)], 3);
        let macro_avg = (0.9 + 0.5 + 0.2) / 3.0;
        let e = balanced_ensemble(&g, accuracy, &ResamplePlan::new(RngSpec::new(77))).unwrap();
        let tol = 3.0 * e.std / (e.iterations as f64).sqrt() + 0.005;
        assert!((e.mean - macro_avg).abs() <= tol, "{} vs {macro_avg}", e.mean);
    }

    #[test]
    fn spread_shrinks_with_sample_size() {
        let g = fixture(&[(3000, 2100), (3000, 1500)], 2);
        let stds: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| {
                let plan = ResamplePlan::new(RngSpec::new(5))
                    .iterations(400)
                    .per_class(ClassSize::Fixed(n));
                balanced_ensemble(&g, accuracy, &plan).unwrap().std
            })
            .collect();
        assert!(stds[0] > stds[1] && stds[1] > stds[2], "{stds:?}");
    }

    #[test]
    fn deterministic() {
        let g = fixture(&[(40, 30), (15, 5), (25, 20)], 3);
        let plan = ResamplePlan::new(RngSpec::new(123)).iterations(200);
        let a = balanced_ensemble(&g, accuracy, &plan).unwrap();
        let b = balanced_ensemble(&g, accuracy, &plan).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| balanced_ensemble(&g, accuracy, &plan).unwrap());
        assert_eq!(a, c);
    }
}
