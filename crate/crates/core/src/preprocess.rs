//! Pooled z-score normalization and ReliefF feature relevance.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub feature_names: Vec<String>,
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl NormalizationStats {
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(z, (m, s))| z * s + m)
            .collect()
    }

    pub(crate) fn select(&self, idx: &[usize]) -> Self {
        Self {
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            mean: idx.iter().map(|&j| self.mean[j]).collect(),
            stddev: idx.iter().map(|&j| self.stddev[j]).collect(),
        }
    }
}

/// Mean and standard deviation (divide by N) of every feature, pooled over all rows.
pub fn fit_normalization(dataset: &LabeledDataset) -> Result<NormalizationStats> {
    if dataset.is_normalized() {
        return Err(Error::InvalidInput("dataset is already normalized".into()));
    }
    let n = dataset.len() as f64;
    let mut mean = Vec::with_capacity(dataset.n_features());
    let mut stddev = Vec::with_capacity(dataset.n_features());
    for (j, name) in dataset.feature_names().iter().enumerate() {
        let m = dataset.column(j).sum::<f64>() / n;
        let var = dataset.column(j).map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        let s = var.sqrt();
        if !(s > 0.0) || s <= f64::EPSILON * m.abs() {
            return Err(Error::ZeroVariance(name.clone()));
        }
        mean.push(m);
        stddev.push(s);
    }
    Ok(NormalizationStats {
        feature_names: dataset.feature_names().to_vec(),
        mean,
        stddev,
    })
}

/// Z-scores every cell with previously fitted statistics.
pub fn apply_normalization(
    dataset: &LabeledDataset,
    stats: &NormalizationStats,
) -> Result<LabeledDataset> {
    if dataset.feature_names() != stats.feature_names.as_slice() {
        return Err(Error::FeatureMismatch {
            expected: stats.feature_names.clone(),
            found: dataset.feature_names().to_vec(),
        });
    }
    if dataset.is_normalized() {
        return Err(Error::InvalidInput("dataset is already normalized".into()));
    }
    let features = dataset
        .features()
        .iter()
        .map(|row| stats.transform_row(row))
        .collect::<Result<Vec<_>>>()?;
    Ok(dataset.with_normalized_features(features, stats.clone()))
}

/// Number of ReliefF reference instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Iterations {
    AllSamples,
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliefFConfig {
    pub k_neighbors: usize,
    pub iterations: Iterations,
    pub seed: u64,
}

impl Default for ReliefFConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            iterations: Iterations::AllSamples,
            seed: 42,
        }
    }
}

/// Relevance weight per feature, aligned with `feature_names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
}

impl FeatureWeights {
    /// `(name, weight)` pairs sorted by descending weight; ties keep column order.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut pairs: Vec<(&str, f64)> = self
            .feature_names
            .iter()
            .map(String::as_str)
            .zip(self.weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
        pairs
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,weight\n");
        for (name, w) in self.ranked() {
            out.push_str(&format!("{name},{w}\n"));
        }
        out
    }
}

/// Multiclass ReliefF with `k` nearest hits and `k` nearest misses per other
/// class, Manhattan distance for the neighbour search, and range-scaled
/// absolute differences for the weight updates. Distance ties go to the lower
/// row index.
///
/// The neighbour search is scale dependent, so callers should pass z-scored
/// data. Unnormalized input is accepted to allow constant columns, which
/// cannot be z-scored and always receive weight 0.
pub fn relieff_weights(dataset: &LabeledDataset, config: &ReliefFConfig) -> Result<FeatureWeights> {
    let k = config.k_neighbors;
    if k == 0 {
        return Err(Error::InvalidConfig(
            "k_neighbors must be at least 1".into(),
        ));
    }
    let counts = dataset.class_counts();
    let present: Vec<usize> = (0..4).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::InvalidInput(
            "ReliefF needs at least two classes".into(),
        ));
    }
    if let Some(&c) = present.iter().find(|&&c| counts[c] <= k) {
        return Err(Error::InvalidConfig(format!(
            "k_neighbors = {k} must be below every class count (class {c} has {})",
            counts[c]
        )));
    }

    let x = dataset.features();
    let labels: Vec<usize> = dataset.labels().iter().map(|l| l.code()).collect();
    let n = x.len();
    let f = dataset.n_features();

    let ranges: Vec<f64> = (0..f)
        .map(|j| {
            let (lo, hi) = dataset
                .column(j)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .collect();
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let m = match config.iterations {
        Iterations::AllSamples => n,
        Iterations::Count(0) => {
            return Err(Error::InvalidConfig(
                "ReliefF iterations must be positive".into(),
            ))
        }
        Iterations::Count(c) => c.min(n),
    };

    let mut weights = vec![0.0; f];
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &r in &order[..m] {
        dist.clear();
        dist.extend((0..n).filter(|&i| i != r).map(|i| {
            let d: f64 = x[r].iter().zip(&x[i]).map(|(a, b)| (a - b).abs()).sum();
            (d, i)
        }));
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let own = labels[r];
        let mut taken = [0usize; 4];
        let mut class_sums = vec![vec![0.0; f]; 4];
        for &(_, i) in &dist {
            let c = labels[i];
            if taken[c] == k {
                continue;
            }
            taken[c] += 1;
            for j in 0..f {
                if ranges[j] > 0.0 {
                    class_sums[c][j] += (x[r][j] - x[i][j]).abs() / ranges[j];
                }
            }
            if present.iter().all(|&c| taken[c] == k) {
                break;
            }
        }
        let miss_norm = 1.0 - priors[own];
        for j in 0..f {
            let mut delta = -class_sums[own][j] / k as f64;
            for &c in present.iter().filter(|&&c| c != own) {
                delta += priors[c] / miss_norm * class_sums[c][j] / k as f64;
            }
            weights[j] += delta;
        }
    }
    for w in &mut weights {
        *w /= m as f64;
    }
    Ok(FeatureWeights {
        feature_names: dataset.feature_names().to_vec(),
        weights,
    })
}
