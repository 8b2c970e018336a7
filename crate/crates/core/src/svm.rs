//! Binary soft-margin SVM trained on the dual problem by sequential minimal
//! optimization.
//!
//! The dual is
//!
//! ```text
//! maximize   W(a) = sum_i a_i - 1/2 sum_ij a_i a_j d_i d_j K(x_i, x_j)
//! subject to 0 <= a_i <= C,  sum_i a_i d_i = 0
//! ```
//!
//! and the trained discriminant is `g(x) = sum_i a_i d_i K(x_i, x) + b`.
//!
//! Each SMO step picks the pair with the largest KKT violation: the first
//! index maximizes `-d_t G_t` over the indices allowed to move up, the second
//! minimizes it over those allowed to move down (equivalently, maximizes the
//! error gap `|E_i - E_j|`). Ties resolve to the lowest index, so training is
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, GramMatrix, KernelSpec};

const TAU: f64 = 1e-12;
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Box constraint on the dual coefficients.
    #[serde(rename = "C")]
    pub c: f64,
    /// Stop once the maximal KKT violation falls below this value.
    pub kkt_tol: f64,
    /// Iteration budget, in units of the training-set size.
    pub max_passes: usize,
    /// Coefficients at or below this value are not kept as support vectors.
    pub eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            kkt_tol: 1e-3,
            max_passes: 200,
            eps: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("C", self.c)?;
        positive("kkt_tol", self.kkt_tol)?;
        positive("eps", self.eps)?;
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Full dual solution over the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective `W(alpha)`.
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal violating-pair gap.
    pub gap: f64,
}

/// Trained two-class SVM: support vectors with `alpha_i * d_i` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "BinarySvmDocument", try_from = "BinarySvmDocument")]
pub struct BinarySvmModel {
    pub kernel: KernelSpec,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct BinarySvmDocument {
    format_version: u32,
    kernel: KernelSpec,
    #[serde(rename = "C")]
    c: f64,
    bias: f64,
    feature_names: Vec<String>,
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl From<BinarySvmModel> for BinarySvmDocument {
    fn from(m: BinarySvmModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kernel: m.kernel,
            c: m.c,
            bias: m.bias,
            feature_names: m.feature_names,
            support_vectors: m.support_vectors,
            coefficients: m.coefficients,
        }
    }
}

impl TryFrom<BinarySvmDocument> for BinarySvmModel {
    type Error = String;

    fn try_from(doc: BinarySvmDocument) -> std::result::Result<Self, String> {
        if doc.format_version != FORMAT_VERSION {
            return Err(format!("unsupported format_version {}", doc.format_version));
        }
        doc.kernel.validate().map_err(|e| e.to_string())?;
        if doc.support_vectors.len() != doc.coefficients.len() {
            return Err("support_vectors and coefficients differ in length".into());
        }
        let f = doc.feature_names.len();
        if doc.support_vectors.iter().any(|sv| sv.len() != f) {
            return Err("support vector width differs from feature_names".into());
        }
        Ok(Self {
            kernel: doc.kernel,
            support_vectors: doc.support_vectors,
            coefficients: doc.coefficients,
            bias: doc.bias,
            c: doc.c,
            feature_names: doc.feature_names,
        })
    }
}

fn check_labels(d: &[f64]) -> Result<()> {
    if let Some(bad) = d.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidInput(format!(
            "labels must be +1 or -1, got {bad}"
        )));
    }
    let pos = d.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 {
        return Err(Error::SingleClass(-1));
    }
    if pos == d.len() {
        return Err(Error::SingleClass(1));
    }
    Ok(())
}

fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let f = x.first().map_or(0, Vec::len);
    if f == 0 {
        return Err(Error::InvalidInput("feature matrix has no columns".into()));
    }
    for row in x {
        if row.len() != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "feature matrix contains non-finite values".into(),
            ));
        }
    }
    Ok(f)
}

/// Trains a binary SVM. Labels must be `+1.0` / `-1.0` with both present.
pub fn train_binary_svm(
    x: &[Vec<f64>],
    d: &[f64],
    kernel: KernelSpec,
    config: &SolverConfig,
) -> Result<BinarySvmModel> {
    kernel.validate()?;
    config.validate()?;
    if x.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: d.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples, got {}",
            x.len()
        )));
    }
    let f = check_matrix(x)?;
    check_labels(d)?;
    let gram = gram_matrix(&kernel, x)?;
    let solution = solve_dual(&gram, d, config)?;
    let names = (0..f).map(|j| format!("x{j}")).collect();
    Ok(BinarySvmModel::from_solution(
        x, d, &solution, kernel, config, names,
    ))
}

/// Runs SMO on a precomputed Gram matrix.
///
/// The dual only depends on `d` through `d_i d_j`, so the problem is solved
/// with labels oriented to make `d[0] = +1`; flipping every label therefore
/// yields the same coefficients bit for bit and a negated bias.
pub fn solve_dual(gram: &GramMatrix, d: &[f64], config: &SolverConfig) -> Result<DualSolution> {
    config.validate()?;
    let n = gram.size();
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d.len(),
        });
    }
    check_labels(d)?;
    let flip = d[0] < 0.0;
    let y: Vec<f64> = if flip {
        d.iter().map(|v| -v).collect()
    } else {
        d.to_vec()
    };

    let (alpha, iterations, gap) = smo(gram, &y, config)?;

    // Fresh gradient for the bias and objective.
    let grad = gradient(gram, &y, &alpha);
    let bias = bias_from_gradient(&alpha, &grad, &y, config.c);
    let objective = 0.5
        * alpha
            .iter()
            .zip(&grad)
            .map(|(a, g)| a * (1.0 - g))
            .sum::<f64>();
    Ok(DualSolution {
        alpha,
        bias: if flip { -bias } else { bias },
        objective,
        iterations,
        gap,
    })
}

fn smo(gram: &GramMatrix, y: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, usize, f64)> {
    let n = y.len();
    let c = config.c;
    let max_iter = config.max_passes.saturating_mul(n);
    let mut alpha = vec![0.0; n];
    // Gradient of 1/2 a'Qa - sum(a), Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let mut best_gap = f64::INFINITY;

    for iter in 0.. {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let (up, low) = if y[t] > 0.0 {
                (alpha[t] < c, alpha[t] > 0.0)
            } else {
                (alpha[t] > 0.0, alpha[t] < c)
            };
            if up && v > g_max {
                g_max = v;
                i = t;
            }
            if low && v < g_min {
                g_min = v;
                j = t;
            }
        }
        let gap = g_max - g_min;
        best_gap = best_gap.min(gap);
        if i == usize::MAX || j == usize::MAX || gap < config.kkt_tol {
            return Ok((alpha, iter, gap.max(0.0)));
        }
        if iter >= max_iter {
            return Err(Error::NotConverged {
                iterations: iter,
                best_gap,
                tolerance: config.kkt_tol,
            });
        }

        let (ki, kj) = (gram.row(i), gram.row(j));
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = positive_or_tau(ki[i] + kj[j] - 2.0 * ki[j]);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = positive_or_tau(ki[i] + kj[j] - 2.0 * ki[j]);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }
    unreachable!()
}

fn positive_or_tau(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        TAU
    }
}

fn gradient(gram: &GramMatrix, y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut grad = vec![-1.0; n];
    for (s, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = gram.row(s);
        let w = a * y[s];
        for t in 0..n {
            grad[t] += y[t] * w * row[t];
        }
    }
    grad
}

/// Mean of `d_i - sum_j a_j d_j K_ji` over unbounded support vectors, or the
/// midpoint of the feasible interval when every coefficient sits at a bound.
fn bias_from_gradient(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for t in 0..alpha.len() {
        // -y_t G_t = d_t - sum_s a_s d_s K_st
        let candidate = -y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += candidate;
            free += 1;
        } else if (alpha[t] == 0.0) == (y[t] > 0.0) {
            lower = lower.max(candidate);
        } else {
            upper = upper.min(candidate);
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if lower.is_finite() && upper.is_finite() {
        0.5 * (lower + upper)
    } else if lower.is_finite() {
        lower
    } else {
        upper
    }
}

impl BinarySvmModel {
    /// Keeps the training points with `alpha > eps` as support vectors.
    pub fn from_solution(
        x: &[Vec<f64>],
        d: &[f64],
        solution: &DualSolution,
        kernel: KernelSpec,
        config: &SolverConfig,
        feature_names: Vec<String>,
    ) -> Self {
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (i, &a) in solution.alpha.iter().enumerate() {
            if a > config.eps {
                support_vectors.push(x[i].clone());
                coefficients.push(a * d[i]);
            }
        }
        Self {
            kernel,
            support_vectors,
            coefficients,
            bias: solution.bias,
            c: config.c,
            feature_names,
        }
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        let f = self.n_features();
        if names.len() != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    /// Dual coefficients `alpha_i`, recovered as `|alpha_i d_i|`.
    pub fn alphas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.abs()).collect()
    }
}

/// `g(x) = sum_i alpha_i d_i K(x_i, x) + b`.
pub fn decision_value(model: &BinarySvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            found: x.len(),
        });
    }
    Ok(decision_unchecked(model, x))
}

#[inline]
pub(crate) fn decision_unchecked(model: &BinarySvmModel, x: &[f64]) -> f64 {
    let sum: f64 = model
        .support_vectors
        .iter()
        .zip(&model.coefficients)
        .map(|(sv, c)| c * model.kernel.apply(sv, x))
        .sum();
    sum + model.bias
}

/// Squared norm of the weight vector in feature space.
fn weight_norm_sq(model: &BinarySvmModel) -> f64 {
    let sv = &model.support_vectors;
    let c = &model.coefficients;
    let mut total = 0.0;
    for i in 0..sv.len() {
        for j in 0..sv.len() {
            total += c[i] * c[j] * model.kernel.apply(&sv[i], &sv[j]);
        }
    }
    total
}

/// Margin of separation `rho = 2 / ||w||`.
pub fn geometric_margin(model: &BinarySvmModel) -> Result<f64> {
    if model.support_vectors.is_empty() {
        return Err(Error::Degenerate("model has no support vectors".into()));
    }
    let norm = weight_norm_sq(model).max(0.0).sqrt();
    if norm <= 1e-9 {
        return Err(Error::Degenerate(format!(
            "weight norm {norm:e} too small for a margin"
        )));
    }
    Ok(2.0 / norm)
}

/// Largest KKT residual over the training set: `max(0, 1 - d g)` for
/// `alpha = 0`, `|d g - 1|` for free coefficients and `max(0, d g - 1)` at `C`.
///
/// Support vectors are matched back to training rows in order (the model keeps
/// them in training order), so `x` must be the set the model was fit on.
pub fn kkt_violation(model: &BinarySvmModel, x: &[Vec<f64>], d: &[f64]) -> Result<f64> {
    if x.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: d.len(),
        });
    }
    let at_bound = model.c - 1e-9 * model.c.max(1.0);
    let mut next_sv = 0;
    let mut worst: f64 = 0.0;
    for (row, &label) in x.iter().zip(d) {
        let alpha = match (
            model.support_vectors.get(next_sv),
            model.coefficients.get(next_sv),
        ) {
            (Some(sv), Some(&coef)) if sv == row && coef.signum() == label.signum() => {
                next_sv += 1;
                coef.abs()
            }
            _ => 0.0,
        };
        let margin = label * decision_value(model, row)?;
        let residual = if alpha == 0.0 {
            (1.0 - margin).max(0.0)
        } else if alpha >= at_bound {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(residual);
    }
    if next_sv != model.support_vectors.len() {
        return Err(Error::InvalidInput(format!(
            "only {next_sv} of {} support vectors found in the given training set",
            model.support_vectors.len()
        )));
    }
    Ok(worst)
}

/// Explicit primal weights `w = sum_i alpha_i d_i x_i`; linear kernel only.
pub fn materialize_weights(model: &BinarySvmModel) -> Result<Vec<f64>> {
    if model.kernel != KernelSpec::Linear {
        return Err(Error::InvalidInput(format!(
            "primal weights only exist for the linear kernel, model uses {}",
            model.kernel
        )));
    }
    let mut w = vec![0.0; model.n_features()];
    for (sv, c) in model.support_vectors.iter().zip(&model.coefficients) {
        for (wj, xj) in w.iter_mut().zip(sv) {
            *wj += c * xj;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_model(scale: f64) -> BinarySvmModel {
        train_binary_svm(
            &[vec![-scale], vec![scale]],
            &[-1.0, 1.0],
            KernelSpec::Linear,
            &SolverConfig::with_c(10.0),
        )
        .unwrap()
    }

    #[test]
    fn two_point_analytic_solution() {
        let m = line_model(1.0);
        assert_eq!(m.n_support(), 2);
        for a in m.alphas() {
            assert!((a - 0.5).abs() < 1e-9);
        }
        assert!(m.bias.abs() < 1e-12);
        assert!((materialize_weights(&m).unwrap()[0] - 1.0).abs() < 1e-12);
        assert!(decision_value(&m, &[0.0]).unwrap().abs() < 1e-12);
        assert!((decision_value(&m, &[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((geometric_margin(&m).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn margin_scales_with_data() {
        assert!((geometric_margin(&line_model(2.0)).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn kkt_on_exact_and_perturbed_models() {
        let x = vec![vec![-1.0], vec![1.0]];
        let d = [-1.0, 1.0];
        let m = line_model(1.0);
        assert!(kkt_violation(&m, &x, &d).unwrap() < 1e-9);
        let shifted = BinarySvmModel {
            bias: m.bias + 1.0,
            ..m
        };
        assert!(kkt_violation(&shifted, &x, &d).unwrap() >= 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let err = train_binary_svm(&x, &[1.0; 3], KernelSpec::Linear, &SolverConfig::default());
        assert!(matches!(err, Err(Error::SingleClass(1))));
    }

    #[test]
    fn bad_inputs_rejected() {
        let cfg = SolverConfig::default();
        let x = vec![vec![0.0], vec![f64::NAN]];
        assert!(train_binary_svm(&x, &[1.0, -1.0], KernelSpec::Linear, &cfg).is_err());
        let x = vec![vec![0.0], vec![1.0]];
        assert!(train_binary_svm(&x, &[1.0, 0.0], KernelSpec::Linear, &cfg).is_err());
        assert!(train_binary_svm(&x[..1], &[1.0], KernelSpec::Linear, &cfg).is_err());
        let bad = SolverConfig { c: -1.0, ..cfg };
        assert!(train_binary_svm(&x, &[1.0, -1.0], KernelSpec::Linear, &bad).is_err());
    }

    #[test]
    fn xor_with_rbf() {
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let d = [-1.0, -1.0, 1.0, 1.0];
        let m = train_binary_svm(
            &x,
            &d,
            KernelSpec::rbf(0.5).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(m.n_support(), 4);
        for (row, label) in x.iter().zip(d) {
            assert!(label * decision_value(&m, row).unwrap() > 0.0);
        }
    }

    #[test]
    fn weights_require_linear_kernel() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let m = train_binary_svm(
            &x,
            &[-1.0, 1.0],
            KernelSpec::rbf(1.0).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(materialize_weights(&m).is_err());
        assert!(m.coefficients.iter().any(|c| *c != 0.0));
    }

    #[test]
    fn empty_support_has_no_margin() {
        let m = BinarySvmModel {
            kernel: KernelSpec::Linear,
            support_vectors: vec![],
            coefficients: vec![],
            bias: 0.0,
            c: 1.0,
            feature_names: vec!["x0".into()],
        };
        assert!(geometric_margin(&m).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let m = line_model(1.0);
        assert!(matches!(
            decision_value(&m, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn iteration_budget_enforced() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64).cos()])
            .collect();
        let d: Vec<f64> = (0..40)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let cfg = SolverConfig {
            max_passes: 1,
            kkt_tol: 1e-12,
            c: 1e6,
            ..Default::default()
        };
        let res = train_binary_svm(&x, &d, KernelSpec::Linear, &cfg);
        assert!(matches!(res, Err(Error::NotConverged { .. })), "{res:?}");
    }

    #[test]
    fn json_layout() {
        let m = line_model(1.0);
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        for key in [
            "kernel",
            "C",
            "bias",
            "feature_names",
            "support_vectors",
            "coefficients",
            "format_version",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: BinarySvmModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
