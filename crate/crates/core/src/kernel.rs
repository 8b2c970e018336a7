//! Kernel functions and Gram matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel choice. RBF uses `exp(-||x - y||^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { sigma: f64 },
}

/// Human-readable form of the RBF bandwidth convention, echoed in sweep output.
pub const RBF_CONVENTION: &str = "rbf(x,y) = exp(-||x-y||^2 / (2*sigma^2))";

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { sigma } if sigma.is_finite() && sigma > 0.0 => Ok(()),
            KernelSpec::Rbf { sigma } => Err(Error::InvalidConfig(format!(
                "rbf sigma must be positive, got {sigma}"
            ))),
        }
    }

    /// Kernel value without length checks.
    #[inline]
    pub(crate) fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            KernelSpec::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Rbf { sigma } => write!(f, "rbf(sigma={sigma})"),
        }
    }
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(spec.apply(x, y))
}

/// Dense symmetric kernel matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Evaluates every pair once and mirrors it, so the result is exactly symmetric.
pub fn gram_matrix(spec: &KernelSpec, x: &[Vec<f64>]) -> Result<GramMatrix> {
    let n = x.len();
    if let Some(first) = x.first() {
        if let Some(bad) = x.iter().find(|r| r.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = spec.apply(&x[i], &x[j]);
            values[i * n + j] = k;
            values[j * n + i] = k;
        }
    }
    Ok(GramMatrix { n, values })
}
