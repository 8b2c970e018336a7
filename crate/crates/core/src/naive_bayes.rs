//! Gaussian naive Bayes baseline.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, LithologyClass};
use crate::error::{Error, Result};
use crate::multiclass::argmax_first;
use crate::preprocess::NormalizationStats;
use crate::svm::FORMAT_VERSION;

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NbDocument", try_from = "NbDocument")]
pub struct GaussianNbModel {
    pub classes: Vec<LithologyClass>,
    pub priors: Vec<f64>,
    /// `means[k][j]`: mean of feature `j` within class `k`.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub variance_floor: f64,
    pub feature_names: Vec<String>,
    /// Statistics the training data was normalized with, if any.
    pub normalization: Option<NormalizationStats>,
}

#[derive(Serialize, Deserialize)]
struct NbDocument {
    format_version: u32,
    classes: Vec<LithologyClass>,
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    variance_floor: f64,
    feature_names: Vec<String>,
    normalization: Option<NormalizationStats>,
}

impl From<GaussianNbModel> for NbDocument {
    fn from(m: GaussianNbModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            classes: m.classes,
            priors: m.priors,
            means: m.means,
            variances: m.variances,
            variance_floor: m.variance_floor,
            feature_names: m.feature_names,
            normalization: m.normalization,
        }
    }
}

impl TryFrom<NbDocument> for GaussianNbModel {
    type Error = String;

    fn try_from(d: NbDocument) -> std::result::Result<Self, String> {
        if d.format_version != FORMAT_VERSION {
            return Err(format!("unsupported format_version {}", d.format_version));
        }
        let k = d.classes.len();
        let f = d.feature_names.len();
        let shaped = |t: &Vec<Vec<f64>>| t.len() == k && t.iter().all(|r| r.len() == f);
        if d.priors.len() != k || !shaped(&d.means) || !shaped(&d.variances) {
            return Err("naive Bayes tables have inconsistent shapes".into());
        }
        if d.variances.iter().flatten().any(|v| !(*v > 0.0)) {
            return Err("naive Bayes variances must be positive".into());
        }
        Ok(Self {
            classes: d.classes,
            priors: d.priors,
            means: d.means,
            variances: d.variances,
            variance_floor: d.variance_floor,
            feature_names: d.feature_names,
            normalization: d.normalization,
        })
    }
}

/// Maximum-likelihood class priors, means and (floored) variances.
pub fn train_nb(train: &LabeledDataset) -> Result<GaussianNbModel> {
    train_nb_with_floor(train, DEFAULT_VARIANCE_FLOOR)
}

pub fn train_nb_with_floor(train: &LabeledDataset, variance_floor: f64) -> Result<GaussianNbModel> {
    if !(variance_floor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "variance floor must be positive, got {variance_floor}"
        )));
    }
    let counts = train.class_counts();
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(
            "naive Bayes needs at least two classes".into(),
        ));
    }
    if let Some(c) = classes.iter().find(|c| counts[c.code()] < 2) {
        return Err(Error::InvalidInput(format!(
            "class {c} has fewer than 2 samples"
        )));
    }

    let f = train.n_features();
    let n = train.len() as f64;
    let mut means = vec![vec![0.0; f]; classes.len()];
    let mut variances = vec![vec![0.0; f]; classes.len()];
    let slot = |l: LithologyClass| classes.iter().position(|&c| c == l).unwrap_or(0);
    for (row, &l) in train.features().iter().zip(train.labels()) {
        for (m, x) in means[slot(l)].iter_mut().zip(row) {
            *m += x;
        }
    }
    for (k, c) in classes.iter().enumerate() {
        let nk = counts[c.code()] as f64;
        means[k].iter_mut().for_each(|m| *m /= nk);
    }
    for (row, &l) in train.features().iter().zip(train.labels()) {
        let k = slot(l);
        for j in 0..f {
            let diff = row[j] - means[k][j];
            variances[k][j] += diff * diff;
        }
    }
    for (k, c) in classes.iter().enumerate() {
        let nk = counts[c.code()] as f64;
        variances[k]
            .iter_mut()
            .for_each(|v| *v = (*v / nk).max(variance_floor));
    }
    let priors = classes
        .iter()
        .map(|c| counts[c.code()] as f64 / n)
        .collect();

    Ok(GaussianNbModel {
        classes,
        priors,
        means,
        variances,
        variance_floor,
        feature_names: train.feature_names().to_vec(),
        normalization: train.normalization().cloned(),
    })
}

impl GaussianNbModel {
    /// Log prior plus summed Gaussian log-densities, per class.
    pub fn log_posteriors(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.feature_names.len();
        if x.len() != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                found: x.len(),
            });
        }
        Ok((0..self.classes.len())
            .map(|k| {
                let ll: f64 = x
                    .iter()
                    .zip(self.means[k].iter().zip(&self.variances[k]))
                    .map(|(xj, (m, v))| -0.5 * ((2.0 * PI * v).ln() + (xj - m) * (xj - m) / v))
                    .sum();
                self.priors[k].ln() + ll
            })
            .collect())
    }

    pub fn predict_dataset(&self, data: &LabeledDataset) -> Result<Vec<LithologyClass>> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.clone(),
                found: data.feature_names().to_vec(),
            });
        }
        data.features()
            .iter()
            .map(|row| predict_nb(self, row))
            .collect()
    }
}

/// Maximum a posteriori class; ties resolve to the lower ordinal.
pub fn predict_nb(model: &GaussianNbModel, x: &[f64]) -> Result<LithologyClass> {
    let scores = model.log_posteriors(x)?;
    Ok(model.classes[argmax_first(&scores)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_feature(values: &[f64], labels: &[usize]) -> LabeledDataset {
        let n = values.len();
        LabeledDataset::new(
            values.iter().map(|v| vec![*v]).collect(),
            vec!["GR".into()],
            labels
                .iter()
                .map(|&c| LithologyClass::from_code(c).unwrap())
                .collect(),
            vec!["A".into(); n],
            (0..n).map(|i| i as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ml_estimates_with_floor() {
        let m = train_nb(&one_feature(&[0.0, 0.0, 2.0, 2.0], &[0, 0, 1, 1])).unwrap();
        assert_eq!(m.means, vec![vec![0.0], vec![2.0]]);
        assert_eq!(m.variances, vec![vec![1e-9], vec![1e-9]]);
    }

    #[test]
    fn priors_from_counts() {
        let mut values = vec![0.0; 40];
        let mut labels = vec![0; 30];
        labels.extend(vec![1; 10]);
        values
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = i as f64);
        let m = train_nb(&one_feature(&values, &labels)).unwrap();
        assert_eq!(m.priors, vec![0.75, 0.25]);
        assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        assert!(train_nb(&one_feature(&[0.0, 1.0, 2.0], &[3, 3, 3])).is_err());
    }

    #[test]
    fn symmetric_classes_tie_to_lower_ordinal() {
        // N(-1, 1) and N(+1, 1) with equal priors.
        let m = train_nb(&one_feature(&[-2.0, 0.0, 0.0, 2.0], &[1, 1, 2, 2])).unwrap();
        assert_eq!(m.means, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(m.variances, vec![vec![1.0], vec![1.0]]);
        assert_eq!(predict_nb(&m, &[0.0]).unwrap(), LithologyClass::ShalySand);
        assert_eq!(predict_nb(&m, &[0.1]).unwrap(), LithologyClass::SandyShale);
    }

    #[test]
    fn prior_breaks_density_tie() {
        // Same class-conditional density at x = 0, priors 0.9 / 0.1.
        let mut values = vec![];
        let mut labels = vec![];
        for _ in 0..9 {
            values.extend([-1.0, 1.0]);
            labels.extend([0, 0]);
        }
        values.extend([-1.0, 1.0]);
        labels.extend([1, 1]);
        let m = train_nb(&one_feature(&values, &labels)).unwrap();
        assert!((m.priors[0] - 0.9).abs() < 1e-12);
        assert_eq!(predict_nb(&m, &[0.0]).unwrap(), LithologyClass::Sand);
    }

    #[test]
    fn far_queries_stay_finite() {
        let m = train_nb(&one_feature(&[-1.0, 1.0, 3.0, 5.0], &[0, 0, 1, 1])).unwrap();
        for k in 0..2 {
            let x = m.means[k][0] + 40.0 * m.variances[k][0].sqrt();
            assert!(m
                .log_posteriors(&[x])
                .unwrap()
                .iter()
                .all(|v| v.is_finite()));
        }
        assert!(predict_nb(&m, &[0.0, 1.0]).is_err());
    }
}
