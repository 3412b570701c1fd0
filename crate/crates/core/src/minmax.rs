//! Estimation of `ymin` / `ymax` for a coalition of features.
//!
//! The perturbation sample set is built in a fixed order: every categorical
//! combination crossed with every numeric min/max corner, then uniform random
//! fill up to the requested sample count, then the explained instance itself.
//! Because the instance is always evaluated, every estimate brackets the
//! instance's own prediction.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_space::{validate_instance, FeatureKind, FeatureSpace, Instance};
use crate::predictor::PredictorHandle;

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_DETERMINISTIC: usize = 64;
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

const EVAL_CHUNK: usize = 1 << 16;

/// Sorted, duplicate-free set of feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(indices: impl IntoIterator<Item = usize>, space: &FeatureSpace) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidCoalition("coalition is empty".into()));
        }
        let n = v.len();
        v.sort_unstable();
        v.dedup();
        if v.len() != n {
            return Err(Error::InvalidCoalition("duplicate feature index".into()));
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= space.len()) {
            return Err(Error::InvalidCoalition(format!(
                "feature index {bad} out of range for {} features",
                space.len()
            )));
        }
        Ok(Coalition(v))
    }

    pub fn single(index: usize, space: &FeatureSpace) -> Result<Self> {
        Coalition::new([index], space)
    }

    pub fn all(space: &FeatureSpace) -> Result<Self> {
        Coalition::new(0..space.len(), space)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// Re-check against a feature space (after deserialization, say).
    pub fn validate(&self, space: &FeatureSpace) -> Result<()> {
        Coalition::new(self.0.iter().copied(), space).map(|_| ())
    }

    /// Stable key for deriving this coalition's random stream.
    pub fn stream_key(&self) -> u64 {
        self.0
            .iter()
            .fold(0x636f_616c_6974_696f, |acc, &i| splitmix64(acc ^ (i as u64 + 1)))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of an independent stream derived from a master seed and a path of
/// stream keys (instance id, coalition key, ...).
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream_rng(master: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, keys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleOrigin {
    Corner,
    CategoricalEnumeration,
    RandomFill,
    CurrentInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub rows: Vec<Vec<f64>>,
    pub origins: Vec<SampleOrigin>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, origin: SampleOrigin) -> usize {
        self.origins.iter().filter(|&&o| o == origin).count()
    }
}

/// Bounds on the deterministic part of the sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerLimits {
    /// Above this many categorical × corner rows, numeric corners are drawn
    /// at random instead of enumerated.
    pub max_deterministic: usize,
    /// Above this many categorical combinations, those are drawn at random too.
    pub max_enumeration: usize,
}

impl Default for SamplerLimits {
    fn default() -> Self {
        SamplerLimits {
            max_deterministic: DEFAULT_MAX_DETERMINISTIC,
            max_enumeration: 100_000,
        }
    }
}

enum Member {
    Categorical { index: usize, count: usize },
    Numeric { index: usize, min: f64, max: f64 },
}

fn members(space: &FeatureSpace, coalition: &Coalition) -> Vec<Member> {
    coalition
        .indices()
        .iter()
        .map(|&index| match &space.feature(index).kind {
            FeatureKind::Categorical { categories } => Member::Categorical {
                index,
                count: categories.len(),
            },
            FeatureKind::Numeric { min, max } => Member::Numeric {
                index,
                min: *min,
                max: *max,
            },
        })
        .collect()
}

/// Visit every combination of a mixed-radix counter, first digit slowest.
fn for_each_combination(radices: &[usize], mut visit: impl FnMut(&[usize])) {
    if radices.contains(&0) {
        return;
    }
    let mut digits = vec![0usize; radices.len()];
    loop {
        visit(&digits);
        let mut pos = radices.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn checked_product(values: impl IntoIterator<Item = u128>) -> u128 {
    values
        .into_iter()
        .fold(1u128, |acc, v| acc.saturating_mul(v))
}

/// Build the perturbation sample set for `coalition` around `inst`.
///
/// Total row count is `max(n, deterministic) + 1`; the final row is the instance.
pub fn generate_samples<R: Rng + ?Sized>(
    space: &FeatureSpace,
    inst: &Instance,
    coalition: &Coalition,
    n: usize,
    rng: &mut R,
    limits: SamplerLimits,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    coalition.validate(space)?;
    validate_instance(space, inst)?;

    let members = members(space, coalition);
    let cats: Vec<(usize, usize)> = members
        .iter()
        .filter_map(|m| match *m {
            Member::Categorical { index, count } => Some((index, count)),
            Member::Numeric { .. } => None,
        })
        .collect();
    let nums: Vec<(usize, f64, f64)> = members
        .iter()
        .filter_map(|m| match *m {
            Member::Numeric { index, min, max } => Some((index, min, max)),
            Member::Categorical { .. } => None,
        })
        .collect();
    let deterministic_origin = if nums.is_empty() {
        SampleOrigin::CategoricalEnumeration
    } else {
        SampleOrigin::Corner
    };

    let cat_combos = checked_product(cats.iter().map(|&(_, k)| k as u128));
    let corners = if nums.len() >= 127 {
        u128::MAX
    } else {
        1u128 << nums.len()
    };
    let full = cat_combos.saturating_mul(corners);

    let base = inst.values();
    let mut rows: Vec<Vec<f64>> = Vec::new();

    if full <= limits.max_deterministic as u128 {
        let radices: Vec<usize> = members
            .iter()
            .map(|m| match m {
                Member::Categorical { count, .. } => *count,
                Member::Numeric { .. } => 2,
            })
            .collect();
        for_each_combination(&radices, |digits| {
            let mut row = base.to_vec();
            for (m, &d) in members.iter().zip(digits) {
                match *m {
                    Member::Categorical { index, .. } => row[index] = d as f64,
                    Member::Numeric { index, min, max } => {
                        row[index] = if d == 0 { min } else { max }
                    }
                }
            }
            rows.push(row);
        });
    } else if cat_combos <= limits.max_enumeration as u128 {
        let per_combo = (limits.max_deterministic as u128 / cat_combos).max(1) as usize;
        let radices: Vec<usize> = cats.iter().map(|&(_, k)| k).collect();
        let mut combos = Vec::new();
        for_each_combination(&radices, |digits| combos.push(digits.to_vec()));
        for digits in combos {
            for _ in 0..per_combo {
                let mut row = base.to_vec();
                for (&(index, _), &d) in cats.iter().zip(&digits) {
                    row[index] = d as f64;
                }
                for &(index, min, max) in &nums {
                    row[index] = if rng.gen_bool(0.5) { max } else { min };
                }
                rows.push(row);
            }
        }
    } else {
        for _ in 0..limits.max_deterministic {
            let mut row = base.to_vec();
            for &(index, k) in &cats {
                row[index] = rng.gen_range(0..k) as f64;
            }
            for &(index, min, max) in &nums {
                row[index] = if rng.gen_bool(0.5) { max } else { min };
            }
            rows.push(row);
        }
    }
    let mut origins = vec![deterministic_origin; rows.len()];

    while rows.len() < n {
        let mut row = base.to_vec();
        for m in &members {
            match *m {
                Member::Categorical { index, count } => row[index] = rng.gen_range(0..count) as f64,
                Member::Numeric { index, min, max } => {
                    row[index] = min + (max - min) * rng.gen::<f64>()
                }
            }
        }
        rows.push(row);
        origins.push(SampleOrigin::RandomFill);
    }

    rows.push(base.to_vec());
    origins.push(SampleOrigin::CurrentInstance);
    Ok(SampleSet { rows, origins })
}

/// Per-output extremes over a sample set, together with the instance's own outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxEstimate {
    pub ymin: Vec<f64>,
    pub ymax: Vec<f64>,
    /// Prediction for the explained instance.
    pub y: Vec<f64>,
    pub n_samples_used: usize,
    pub includes_instance: bool,
}

#[derive(Default)]
struct Extremes {
    ymin: Vec<f64>,
    ymax: Vec<f64>,
}

impl Extremes {
    fn absorb(&mut self, outputs: &[Vec<f64>]) {
        for row in outputs {
            if self.ymin.is_empty() {
                self.ymin = row.clone();
                self.ymax = row.clone();
                continue;
            }
            for (j, &v) in row.iter().enumerate() {
                self.ymin[j] = self.ymin[j].min(v);
                self.ymax[j] = self.ymax[j].max(v);
            }
        }
    }
}

fn check_handle(handle: &PredictorHandle, space: &FeatureSpace) -> Result<()> {
    if handle.arity() != space.len() {
        return Err(Error::ArityMismatch {
            expected: space.len(),
            actual: handle.arity(),
        });
    }
    Ok(())
}

/// Evaluate the perturbation sample set in one batch and take element-wise extremes.
pub fn estimate_minmax<R: Rng + ?Sized>(
    handle: &PredictorHandle,
    space: &FeatureSpace,
    inst: &Instance,
    coalition: &Coalition,
    n: usize,
    rng: &mut R,
    limits: SamplerLimits,
) -> Result<MinMaxEstimate> {
    check_handle(handle, space)?;
    let samples = generate_samples(space, inst, coalition, n, rng, limits)?;
    let outputs = handle.predict(&samples.rows)?;
    let mut ext = Extremes::default();
    ext.absorb(&outputs);
    Ok(MinMaxEstimate {
        ymin: ext.ymin,
        ymax: ext.ymax,
        y: outputs.last().cloned().unwrap_or_default(),
        n_samples_used: samples.len(),
        includes_instance: true,
    })
}

/// `n` equally spaced points on `[min, max]`, endpoints exact.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    max
                } else {
                    min + (max - min) * (i as f64) / ((n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Dense-grid min/max: every category crossed with `grid_points` equally
/// spaced values per numeric member, plus the instance.
pub fn exhaustive_minmax(
    handle: &PredictorHandle,
    space: &FeatureSpace,
    inst: &Instance,
    coalition: &Coalition,
    grid_points: usize,
    cap: usize,
) -> Result<MinMaxEstimate> {
    check_handle(handle, space)?;
    coalition.validate(space)?;
    validate_instance(space, inst)?;
    let members = members(space, coalition);
    if grid_points < 2 && members.iter().any(|m| matches!(m, Member::Numeric { .. })) {
        return Err(Error::InvalidConfig(
            "numeric grids need at least 2 points".into(),
        ));
    }
    let axes: Vec<(usize, Vec<f64>)> = members
        .iter()
        .map(|m| match *m {
            Member::Categorical { index, count } => (index, (0..count).map(|c| c as f64).collect()),
            Member::Numeric { index, min, max } => (index, linspace(min, max, grid_points)),
        })
        .collect();
    let size = checked_product(axes.iter().map(|(_, a)| a.len() as u128));
    if size > cap as u128 {
        return Err(Error::GridTooLarge { size, cap });
    }

    let y = handle.predict_one(inst.values())?;
    let mut ext = Extremes::default();
    ext.absorb(std::slice::from_ref(&y));

    let radices: Vec<usize> = axes.iter().map(|(_, a)| a.len()).collect();
    let mut chunk: Vec<Vec<f64>> = Vec::with_capacity(EVAL_CHUNK.min(size as usize));
    let mut failure = None;
    for_each_combination(&radices, |digits| {
        if failure.is_some() {
            return;
        }
        let mut row = inst.values().to_vec();
        for ((index, axis), &d) in axes.iter().zip(digits) {
            row[*index] = axis[d];
        }
        chunk.push(row);
        if chunk.len() == EVAL_CHUNK {
            match handle.predict(&chunk) {
                Ok(out) => ext.absorb(&out),
                Err(e) => failure = Some(e),
            }
            chunk.clear();
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if !chunk.is_empty() {
        ext.absorb(&handle.predict(&chunk)?);
    }
    Ok(MinMaxEstimate {
        ymin: ext.ymin,
        ymax: ext.ymax,
        y,
        n_samples_used: size as usize + 1,
        includes_instance: true,
    })
}
