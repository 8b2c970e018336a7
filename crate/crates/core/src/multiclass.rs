//! One-against-all combination of binary SVMs.

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, LithologyClass};
use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, KernelSpec};
use crate::preprocess::NormalizationStats;
use crate::svm::{
    decision_unchecked, kkt_violation, solve_dual, BinarySvmModel, SolverConfig, FORMAT_VERSION,
};

/// One binary model per class, class `k` trained as `+1` against the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MulticlassDocument", try_from = "MulticlassDocument")]
pub struct MulticlassSvmModel {
    classes: Vec<LithologyClass>,
    binary_models: Vec<BinarySvmModel>,
    kernel: KernelSpec,
    normalization: NormalizationStats,
}

#[derive(Serialize, Deserialize)]
struct MulticlassDocument {
    format_version: u32,
    kernel: KernelSpec,
    classes: Vec<LithologyClass>,
    normalization: NormalizationStats,
    binary_models: Vec<BinarySvmModel>,
}

impl From<MulticlassSvmModel> for MulticlassDocument {
    fn from(m: MulticlassSvmModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kernel: m.kernel,
            classes: m.classes,
            normalization: m.normalization,
            binary_models: m.binary_models,
        }
    }
}

impl TryFrom<MulticlassDocument> for MulticlassSvmModel {
    type Error = String;

    fn try_from(doc: MulticlassDocument) -> std::result::Result<Self, String> {
        if doc.format_version != FORMAT_VERSION {
            return Err(format!("unsupported format_version {}", doc.format_version));
        }
        if doc.classes.len() < 2 || doc.classes.len() != doc.binary_models.len() {
            return Err("need at least two classes with one binary model each".into());
        }
        if doc.classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err("classes must be distinct and in ordinal order".into());
        }
        for m in &doc.binary_models {
            if m.kernel != doc.kernel || m.feature_names != doc.normalization.feature_names {
                return Err("binary models disagree on kernel or features".into());
            }
        }
        Ok(Self {
            classes: doc.classes,
            binary_models: doc.binary_models,
            kernel: doc.kernel,
            normalization: doc.normalization,
        })
    }
}

/// Per-class training diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryTrainingReport {
    pub class: LithologyClass,
    pub positives: usize,
    pub support_vectors: usize,
    pub iterations: usize,
    pub dual_objective: f64,
    pub kkt_residual: f64,
}

/// Trains the one-against-all model. The Gram matrix is shared by all
/// binary problems since only the labels differ between them.
pub fn train_one_vs_all(
    train: &LabeledDataset,
    kernel: KernelSpec,
    config: &SolverConfig,
) -> Result<MulticlassSvmModel> {
    train_one_vs_all_with_report(train, kernel, config).map(|(m, _)| m)
}

pub fn train_one_vs_all_with_report(
    train: &LabeledDataset,
    kernel: KernelSpec,
    config: &SolverConfig,
) -> Result<(MulticlassSvmModel, Vec<BinaryTrainingReport>)> {
    kernel.validate()?;
    config.validate()?;
    let normalization = train
        .normalization()
        .cloned()
        .ok_or_else(|| Error::InvalidInput("training data must be normalized".into()))?;
    let counts = train.class_counts();
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "one-against-all needs at least two classes, found {}",
            classes.len()
        )));
    }
    if let Some(c) = classes.iter().find(|c| counts[c.code()] < 2) {
        return Err(Error::InvalidInput(format!(
            "class {c} has fewer than 2 samples"
        )));
    }

    let x = train.features();
    let gram = gram_matrix(&kernel, x)?;
    let mut models = Vec::with_capacity(classes.len());
    let mut reports = Vec::with_capacity(classes.len());
    for &class in &classes {
        let d: Vec<f64> = train
            .labels()
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let tag = |e: Error| Error::ClassTraining {
            class: class.to_string(),
            source: Box::new(e),
        };
        let solution = solve_dual(&gram, &d, config).map_err(tag)?;
        let model = BinarySvmModel::from_solution(
            x,
            &d,
            &solution,
            kernel,
            config,
            train.feature_names().to_vec(),
        );
        let kkt_residual = kkt_violation(&model, x, &d).map_err(tag)?;
        reports.push(BinaryTrainingReport {
            class,
            positives: counts[class.code()],
            support_vectors: model.n_support(),
            iterations: solution.iterations,
            dual_objective: solution.objective,
            kkt_residual,
        });
        models.push(model);
    }
    let model = MulticlassSvmModel {
        classes,
        binary_models: models,
        kernel,
        normalization,
    };
    Ok((model, reports))
}

/// Index of the largest value; exact ties go to the earliest entry.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl MulticlassSvmModel {
    pub fn classes(&self) -> &[LithologyClass] {
        &self.classes
    }

    pub fn binary_models(&self) -> &[BinarySvmModel] {
        &self.binary_models
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn normalization(&self) -> &NormalizationStats {
        &self.normalization
    }

    pub fn feature_names(&self) -> &[String] {
        &self.normalization.feature_names
    }

    /// Class order of the decision profile, with each binary model.
    pub fn iter(&self) -> impl Iterator<Item = (LithologyClass, &BinarySvmModel)> {
        self.classes.iter().copied().zip(&self.binary_models)
    }

    /// Predicts every row of an already normalized dataset.
    pub fn predict_dataset(&self, data: &LabeledDataset) -> Result<Vec<LithologyClass>> {
        if data.feature_names() != self.feature_names() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names().to_vec(),
                found: data.feature_names().to_vec(),
            });
        }
        if !data.is_normalized() {
            return Err(Error::InvalidInput(
                "data must be normalized before prediction".into(),
            ));
        }
        data.features()
            .iter()
            .map(|row| predict_multiclass(self, row))
            .collect()
    }
}

/// Decision value of every binary model, in class order.
pub fn decision_profile(model: &MulticlassSvmModel, x: &[f64]) -> Result<Vec<f64>> {
    let f = model.feature_names().len();
    if x.len() != f {
        return Err(Error::DimensionMismatch {
            expected: f,
            found: x.len(),
        });
    }
    Ok(model
        .binary_models
        .iter()
        .map(|m| decision_unchecked(m, x))
        .collect())
}

/// Class with the largest decision value; ties resolve to the lower ordinal.
pub fn predict_multiclass(model: &MulticlassSvmModel, x: &[f64]) -> Result<LithologyClass> {
    let profile = decision_profile(model, x)?;
    Ok(model.classes[argmax_first(&profile)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_first(&[2.0, -1.0, -1.5, -3.0]), 0);
        assert_eq!(argmax_first(&[-0.2, -0.2, -0.9, -1.0]), 0);
        assert_eq!(argmax_first(&[-1.0, -2.0, -3.0, -4.0]), 0);
        assert_eq!(argmax_first(&[-3.0, -2.0, 0.5, 0.5]), 2);
    }

    #[test]
    fn rejects_unnormalized_and_single_class() {
        let ds = LabeledDataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec!["GR".into()],
            vec![LithologyClass::Sand; 3],
            vec!["A".into(); 3],
            vec![0.0, 1.0, 2.0],
        )
        .unwrap();
        assert!(train_one_vs_all(&ds, KernelSpec::Linear, &SolverConfig::default()).is_err());
    }
}
