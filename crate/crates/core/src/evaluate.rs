//! Confusion matrices, accuracy, and the sigma / feature-subset sweeps.

use std::fmt::Write as _;

use serde::Serialize;

use crate::data::{LabeledDataset, LithologyClass};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, RBF_CONVENTION};
use crate::multiclass::train_one_vs_all;
use crate::preprocess::{apply_normalization, fit_normalization};
use crate::svm::SolverConfig;

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

pub fn build_confusion(truth: &[usize], predicted: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= k || p >= k {
            return Err(Error::InvalidInput(format!(
                "label pair ({t}, {p}) outside 0..{k}"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

impl ConfusionMatrix {
    /// Four-class lithology matrix in ordinal order.
    pub fn from_classes(truth: &[LithologyClass], predicted: &[LithologyClass]) -> Result<Self> {
        let t: Vec<usize> = truth.iter().map(|c| c.code()).collect();
        let p: Vec<usize> = predicted.iter().map(|c| c.code()).collect();
        build_confusion(&t, &p, LithologyClass::ALL.len())
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(
                "confusion matrix must be square".into(),
            ));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.counts[i][i]).sum()
    }

    fn class_name(&self, i: usize) -> String {
        match LithologyClass::from_code(i) {
            Some(c) if self.k() == LithologyClass::ALL.len() => c.name().to_string(),
            _ => i.to_string(),
        }
    }

    /// Class-name header row and column; raw counts, or row fractions with
    /// two decimals when `normalized`.
    pub fn to_csv(&self, normalized: bool) -> String {
        let mut out = String::from("true\\predicted");
        for j in 0..self.k() {
            let _ = write!(out, ",{}", self.class_name(j));
        }
        out.push('\n');
        let fractions = row_normalize(self);
        for (i, (counts, shares)) in self.counts.iter().zip(&fractions).enumerate() {
            out.push_str(&self.class_name(i));
            for (c, share) in counts.iter().zip(shares) {
                if normalized {
                    let _ = write!(out, ",{share:.2}");
                } else {
                    let _ = write!(out, ",{c}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Trace over total: the fraction of correctly classified samples.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidInput(
            "accuracy of an empty confusion matrix".into(),
        ));
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// Each row divided by its sum; all-zero rows stay zero.
pub fn row_normalize(cm: &ConfusionMatrix) -> Vec<Vec<f64>> {
    cm.counts
        .iter()
        .map(|row| {
            let sum: u64 = row.iter().sum();
            row.iter()
                .map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 })
                .collect()
        })
        .collect()
}

/// Share of misclassifications landing two or more classes away from the truth.
pub fn adjacency_violation_rate(cm: &ConfusionMatrix) -> f64 {
    let (mut errors, mut far) = (0u64, 0u64);
    for (i, row) in cm.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if i != j {
                errors += c;
                if i.abs_diff(j) >= 2 {
                    far += c;
                }
            }
        }
    }
    if errors == 0 {
        0.0
    } else {
        far as f64 / errors as f64
    }
}

/// Default sigma grid: 0.1, 0.2, ..., 2.0.
pub fn default_sigma_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidConfig(format!("bad grid value `{s}` in `{text}`")))
    };
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(Error::InvalidConfig(format!("invalid grid `{text}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            // Rounded to 12 decimals so 0.1 * 3 prints as 0.3.
            Ok((0..=count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => text.split(',').map(parse).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Sigma,
    Features,
}

/// One accuracy per swept parameter value, plus the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub parameters: Vec<String>,
    pub accuracies: Vec<f64>,
    pub kernel: Option<KernelSpec>,
    pub solver: SolverConfig,
    pub seed: Option<u64>,
}

impl SweepResult {
    /// Index of the best accuracy (first on ties).
    pub fn best(&self) -> usize {
        crate::multiclass::argmax_first(&self.accuracies)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# sweep={}",
            match self.kind {
                SweepKind::Sigma => "sigma",
                SweepKind::Features => "features",
            }
        );
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        match self.kernel {
            Some(k) => {
                let _ = writeln!(out, "# kernel={k}");
            }
            None => {
                let _ = writeln!(out, "# kernel=rbf");
            }
        }
        let _ = writeln!(out, "# kernel_convention={RBF_CONVENTION}");
        let _ = writeln!(
            out,
            "# solver C={} kkt_tol={} max_passes={} eps={}",
            self.solver.c, self.solver.kkt_tol, self.solver.max_passes, self.solver.eps
        );
        out.push_str("parameter,accuracy\n");
        for (p, a) in self.parameters.iter().zip(&self.accuracies) {
            let _ = writeln!(out, "{p},{a}");
        }
        out
    }
}

/// Normalizes both splits with statistics fitted on the training split,
/// unless the training split already carries them.
fn normalized_pair(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset)> {
    match (train.normalization(), test.normalization()) {
        (None, None) => {
            let stats = fit_normalization(train)?;
            Ok((
                apply_normalization(train, &stats)?,
                apply_normalization(test, &stats)?,
            ))
        }
        (Some(a), Some(b)) if a == b => Ok((train.clone(), test.clone())),
        (Some(stats), None) => Ok((train.clone(), apply_normalization(test, stats)?)),
        _ => Err(Error::InvalidInput(
            "train and test splits carry different normalization".into(),
        )),
    }
}

/// Fits a one-against-all model on `train` and scores it on `test`.
pub fn holdout_accuracy(
    train: &LabeledDataset,
    test: &LabeledDataset,
    kernel: KernelSpec,
    config: &SolverConfig,
) -> Result<(f64, ConfusionMatrix)> {
    let (train, test) = normalized_pair(train, test)?;
    let model = train_one_vs_all(&train, kernel, config)?;
    let predicted = model.predict_dataset(&test)?;
    let cm = ConfusionMatrix::from_classes(test.labels(), &predicted)?;
    Ok((accuracy(&cm)?, cm))
}

/// Test accuracy of an RBF one-against-all model for each sigma.
pub fn sweep_sigma(
    train: &LabeledDataset,
    test: &LabeledDataset,
    sigmas: &[f64],
    config: &SolverConfig,
) -> Result<SweepResult> {
    let kernels = sigmas
        .iter()
        .map(|&s| KernelSpec::rbf(s))
        .collect::<Result<Vec<_>>>()?;
    let (train, test) = normalized_pair(train, test)?;
    let mut accuracies = Vec::with_capacity(sigmas.len());
    for (kernel, &sigma) in kernels.into_iter().zip(sigmas) {
        let (acc, _) =
            holdout_accuracy(&train, &test, kernel, config).map_err(|e| Error::SweepPoint {
                sigma,
                source: Box::new(e),
            })?;
        accuracies.push(acc);
    }
    Ok(SweepResult {
        kind: SweepKind::Sigma,
        parameters: sigmas.iter().map(|s| s.to_string()).collect(),
        accuracies,
        kernel: None,
        solver: *config,
        seed: None,
    })
}

/// Test accuracy per feature subset. Each subset is projected from the raw
/// splits and re-normalized with statistics of its own training columns.
pub fn sweep_features(
    train: &LabeledDataset,
    test: &LabeledDataset,
    subsets: &[Vec<String>],
    kernel: KernelSpec,
    config: &SolverConfig,
) -> Result<SweepResult> {
    if train.is_normalized() || test.is_normalized() {
        return Err(Error::InvalidInput(
            "feature sweep expects raw splits; it normalizes each subset itself".into(),
        ));
    }
    for name in subsets.iter().flatten() {
        if !train.feature_names().contains(name) || !test.feature_names().contains(name) {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let mut accuracies = Vec::with_capacity(subsets.len());
    for subset in subsets {
        let (acc, _) = holdout_accuracy(
            &train.project(subset)?,
            &test.project(subset)?,
            kernel,
            config,
        )?;
        accuracies.push(acc);
    }
    Ok(SweepResult {
        kind: SweepKind::Features,
        parameters: subsets.iter().map(|s| s.join("+")).collect(),
        accuracies,
        kernel: Some(kernel),
        solver: *config,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_matrix() {
        let cm = build_confusion(&[0, 0, 1], &[0, 1, 1], 2).unwrap();
        assert_eq!(cm.counts(), &[vec![1, 1], vec![0, 1]]);
        assert_eq!(cm.total(), 3);
    }

    #[test]
    fn perfect_predictions_are_diagonal() {
        let truth = [0, 1, 1, 2, 3, 3, 3];
        let cm = build_confusion(&truth, &truth, 4).unwrap();
        for (i, row) in cm.counts().iter().enumerate() {
            let expected = truth.iter().filter(|&&t| t == i).count() as u64;
            assert_eq!(row[i], expected);
            assert_eq!(row.iter().sum::<u64>(), expected);
        }
        assert_eq!(accuracy(&cm).unwrap(), 1.0);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let cm = build_confusion(&[], &[], 3).unwrap();
        assert_eq!(cm.counts(), &[vec![0; 3], vec![0; 3], vec![0; 3]]);
        assert!(accuracy(&cm).is_err());
        assert!(build_confusion(&[0], &[], 2).is_err());
        assert!(build_confusion(&[0], &[2], 2).is_err());
    }

    #[test]
    fn accuracy_is_trace_over_total() {
        let cm = ConfusionMatrix::from_counts(vec![vec![9, 1], vec![2, 8]]).unwrap();
        assert_eq!(accuracy(&cm).unwrap(), 0.85);
    }

    #[test]
    fn row_fractions() {
        let cm = ConfusionMatrix::from_counts(vec![
            vec![98, 2, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 5, 0],
            vec![0, 0, 0, 1],
        ])
        .unwrap();
        let r = row_normalize(&cm);
        assert_eq!(r[0], vec![0.98, 0.02, 0.0, 0.0]);
        assert_eq!(r[1], vec![0.0; 4]);
        assert_eq!(r[2], vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn adjacency_rates() {
        // One of 74 errors lands two classes away.
        let mostly_adjacent = ConfusionMatrix::from_counts(vec![
            vec![98, 2, 0, 0],
            vec![22, 75, 2, 1],
            vec![0, 8, 87, 5],
            vec![0, 0, 34, 65],
        ])
        .unwrap();
        let rate = adjacency_violation_rate(&mostly_adjacent);
        assert!((rate - 1.0 / 74.0).abs() < 1e-12);

        let adjacent_only = ConfusionMatrix::from_counts(vec![
            vec![98, 2, 0, 0],
            vec![22, 75, 3, 0],
            vec![0, 8, 87, 5],
            vec![0, 0, 34, 65],
        ])
        .unwrap();
        assert_eq!(adjacency_violation_rate(&adjacent_only), 0.0);

        let one_far = ConfusionMatrix::from_counts(vec![
            vec![10, 9, 0, 1],
            vec![0, 10, 0, 0],
            vec![0, 0, 10, 0],
            vec![0, 0, 0, 10],
        ])
        .unwrap();
        assert!((adjacency_violation_rate(&one_far) - 0.1).abs() < 1e-15);

        let perfect = ConfusionMatrix::from_counts(vec![vec![5, 0], vec![0, 5]]).unwrap();
        assert_eq!(adjacency_violation_rate(&perfect), 0.0);
    }

    #[test]
    fn csv_views() {
        let cm = ConfusionMatrix::from_counts(vec![
            vec![98, 2, 0, 0],
            vec![1, 3, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 0],
        ])
        .unwrap();
        let raw = cm.to_csv(false);
        assert!(raw.starts_with("true\\predicted,Sand,ShalySand,SandyShale,Shale\n"));
        assert!(raw.contains("\nSand,98,2,0,0\n"));
        let norm = cm.to_csv(true);
        assert!(norm.contains("\nSand,0.98,0.02,0.00,0.00\n"));
        assert!(norm.contains("\nShalySand,0.25,0.75,0.00,0.00\n"));
        assert!(norm.contains("\nShale,0.00,0.00,0.00,0.00\n"));
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.1:2.0:0.1").unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g, default_sigma_grid());
        assert_eq!(parse_grid("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
