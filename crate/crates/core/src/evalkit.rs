//! Evaluation protocol: Dice and classification metrics, seeded few-shot
//! sampling, specimen-level nested cross-validation and run aggregation.

use crate::error::{Error, Result};

/// Label value excluded from every overlap metric.
pub const IGNORE_LABEL: u8 = 255;

/// `2|A∩B| / (|A|+|B|)` for one class. Pixels where either map holds
/// [`IGNORE_LABEL`] are skipped. Two empty sets score 1.0.
pub fn dice(pred: &[u8], gt: &[u8], class_id: u8) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} pixels, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    let (mut a, mut b, mut both) = (0u64, 0u64, 0u64);
    for (&p, &g) in pred.iter().zip(gt) {
        if p == IGNORE_LABEL || g == IGNORE_LABEL {
            continue;
        }
        let (in_a, in_b) = (p == class_id, g == class_id);
        a += u64::from(in_a);
        b += u64::from(in_b);
        both += u64::from(in_a && in_b);
    }
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (a + b) as f64)
}

/// Unweighted mean of per-class [`dice`].
pub fn macro_dice(pred: &[u8], gt: &[u8], class_ids: &[u8]) -> Result<f64> {
    if class_ids.is_empty() {
        return Err(Error::EmptyInput("class list"));
    }
    let mut sum = 0.0;
    for &c in class_ids {
        sum += dice(pred, gt, c)?;
    }
    Ok(sum / class_ids.len() as f64)
}

/// Confusion counts with the positive class (cancer) as "positive".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl BinaryConfusion {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        BinaryConfusion { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(pred: &[bool], truth: &[bool]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions for {} labels",
                pred.len(),
                truth.len()
            )));
        }
        let mut c = BinaryConfusion::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// `None` marks a metric whose denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationMetrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classify_metrics(conf: &BinaryConfusion) -> ClassificationMetrics {
    ClassificationMetrics {
        accuracy: ratio(conf.tp + conf.tn, conf.total()),
        sensitivity: ratio(conf.tp, conf.positives()),
        specificity: ratio(conf.tn, conf.negatives()),
    }
}

/// Seeded generator for every shuffle in this module: xoshiro256** with
/// its state filled by four successive SplitMix64 outputs of the seed.
///
/// Bounded draws use the multiply-shift method with rejection, so
/// `below(n)` is exactly uniform. A shuffle of `v` is Fisher–Yates from
/// the back: for `i = len−1 … 1`, swap `v[i]` with `v[below(i+1)]`.
#[derive(Clone, Debug)]
pub struct ShuffleRng {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl ShuffleRng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        ShuffleRng {
            s: std::array::from_fn(|_| splitmix64(&mut sm)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform `f64` in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform `f64` in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let mut m = self.next_u64() as u128 * n as u128;
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * n as u128;
            }
        }
        (m >> 64) as u64
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            v.swap(i, j);
        }
    }
}

/// `n_items` shuffled with `seed`, then the first `max(1, round(fraction·n))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub n_items: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(n_items: usize, fraction: f64, seed: u64) -> Self {
        SplitSpec { n_items, fraction, seed }
    }

    pub fn subset_size(&self) -> Result<usize> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidFraction(self.fraction));
        }
        if self.n_items == 0 {
            return Err(Error::EmptyInput("no items to sample"));
        }
        Ok(((self.fraction * self.n_items as f64).round() as usize).clamp(1, self.n_items))
    }
}

/// Deterministic seeded permutation of `0..n`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    ShuffleRng::new(seed).shuffle(&mut v);
    v
}

pub fn fewshot_indices(spec: &SplitSpec) -> Result<Vec<usize>> {
    let k = spec.subset_size()?;
    let mut v = shuffled_indices(spec.n_items, spec.seed);
    v.truncate(k);
    Ok(v)
}

/// One nested cross-validation fold over specimen ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvSplit {
    pub test: usize,
    pub val: usize,
    pub train: Vec<usize>,
}

/// Every ordered `(test, val)` pair with `test ≠ val`, training on the
/// remaining specimens; `n·(n−1)` splits ordered by test then val.
pub fn nested_cv_splits(n_specimens: usize) -> Result<Vec<CvSplit>> {
    if n_specimens < 3 {
        return Err(Error::TooFewSpecimens(n_specimens));
    }
    let mut out = Vec::with_capacity(n_specimens * (n_specimens - 1));
    for test in 0..n_specimens {
        for val in (0..n_specimens).filter(|&v| v != test) {
            let train = (0..n_specimens).filter(|&s| s != test && s != val).collect();
            out.push(CvSplit { test, val, train });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Holdout {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Disjoint train/val/test partition of `0..n`: one seeded shuffle, cut
/// at `round(train_frac·n)` and `round((train_frac+val_frac)·n)`.
pub fn holdout_split(n: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<Holdout> {
    if n == 0 {
        return Err(Error::EmptyInput("no items to split"));
    }
    for f in [train_frac, val_frac] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidFraction(f));
        }
    }
    if train_frac + val_frac > 1.0 + 1e-12 {
        return Err(Error::InvalidFraction(train_frac + val_frac));
    }
    let v = shuffled_indices(n, seed);
    let a = ((train_frac * n as f64).round() as usize).min(n);
    let b = (((train_frac + val_frac) * n as f64).round() as usize).clamp(a, n);
    Ok(Holdout {
        train: v[..a].to_vec(),
        val: v[a..b].to_vec(),
        test: v[b..].to_vec(),
    })
}

/// The 60/20/20 holdout.
pub fn holdout_60_20_20(n: usize, seed: u64) -> Result<Holdout> {
    holdout_split(n, 0.6, 0.2, seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` for a single run.
    pub std: Option<f64>,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no runs to aggregate"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(Aggregate { n, mean, std })
}
