//! Intrinsic respondent variability: a discrete-uniform offset in `-v..=v`
//! added to the true score and clamped back onto 1..=10.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{Dataset, SurveyRecord};
use crate::error::{Error, Result};
use crate::scale::Score;

/// Half-width `v` of the noise, in score units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NoiseModel {
    half_width: u8,
}

impl NoiseModel {
    pub const MAX_HALF_WIDTH: u8 = 9;

    pub fn new(half_width: u8) -> Result<Self> {
        if half_width > Self::MAX_HALF_WIDTH {
            return Err(Error::invalid(format!(
                "noise half-width {half_width} exceeds {}",
                Self::MAX_HALF_WIDTH
            )));
        }
        Ok(NoiseModel { half_width })
    }

    pub fn half_width(self) -> u8 {
        self.half_width
    }

    /// Number of equally likely offsets, `2v + 1`.
    pub fn outcomes(self) -> u32 {
        2 * self.half_width as u32 + 1
    }
}

/// Seed plus stream index. Equal specs give equal draw sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        RngSpec { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent sub-stream `index` of this spec. Children of different
    /// parents do not collide in practice because the parent is hashed into
    /// the child seed.
    pub fn child(&self, index: u64) -> RngSpec {
        RngSpec {
            seed: splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: index,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One noisy answer around `score`.
pub fn perturb<R: Rng + ?Sized>(score: Score, model: NoiseModel, rng: &mut R) -> Score {
    let v = model.half_width as i64;
    if v == 0 {
        return score;
    }
    // gen_range rejects out-of-zone draws instead of reducing modulo the span
    let offset = rng.gen_range(-v..=v);
    Score::clamped(score.get() as i64 + offset)
}

/// Exact distribution of [`perturb`]: integer weights over a common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScorePmf {
    numerators: [u32; Score::LEVELS],
    denominator: u32,
}

impl ScorePmf {
    /// Weight of `score`; probability is this over [`denominator`](Self::denominator).
    pub fn numerator(&self, score: Score) -> u32 {
        self.numerators[score.index()]
    }

    pub fn numerators(&self) -> &[u32; Score::LEVELS] {
        &self.numerators
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    pub fn prob(&self, score: Score) -> f64 {
        self.numerator(score) as f64 / self.denominator as f64
    }

    pub fn support(&self) -> impl Iterator<Item = (Score, u32)> + '_ {
        Score::all().map(|s| (s, self.numerator(s))).filter(|&(_, w)| w > 0)
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(s, w)| s.get() as f64 * w as f64).sum::<f64>() / self.denominator as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support()
            .map(|(s, w)| (s.get() as f64 - m).powi(2) * w as f64)
            .sum::<f64>()
            / self.denominator as f64
    }
}

pub fn perturb_pmf(score: Score, model: NoiseModel) -> ScorePmf {
    let v = model.half_width as i64;
    let mut numerators = [0u32; Score::LEVELS];
    for offset in -v..=v {
        numerators[Score::clamped(score.get() as i64 + offset).index()] += 1;
    }
    ScorePmf {
        numerators,
        denominator: model.outcomes(),
    }
}

/// `n` respondents with true scores uniform over 1..=10 and no noise yet.
pub fn generate_synth(n: usize, rng: &RngSpec) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("synthetic dataset size must be at least 1"));
    }
    let mut gen = rng.rng();
    let records = (0..n)
        .map(|i| {
            let s = Score::clamped(gen.gen_range(1..=10));
            SurveyRecord {
                unbiased_score: Some(s),
                ..SurveyRecord::new(i.to_string(), s)
            }
        })
        .collect();
    Dataset::new(records, None)
}

/// Replaces every biased score with a fresh noisy draw of the unbiased one.
pub fn apply_noise(dataset: &Dataset, model: NoiseModel, rng: &RngSpec) -> Result<Dataset> {
    let truth = dataset.unbiased_scores()?;
    let mut gen = rng.rng();
    let records = dataset
        .records()
        .iter()
        .zip(truth)
        .map(|(r, s)| SurveyRecord {
            biased_score: perturb(s, model, &mut gen),
            ..r.clone()
        })
        .collect();
    Dataset::new(records, dataset.feature_names().map(<[String]>::to_vec))
}
