//! Helpers shared by the integration tests.
#![allow(dead_code)]

use lithosvm::{KernelSpec, LabeledDataset, LithologyClass};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A small binary SVM problem.
pub struct Problem {
    pub x: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub kernel: KernelSpec,
    pub c: f64,
}

/// Random problem number `index`: sizes 2..=12, both kernels, C cycling
/// through 1, 10 and 1e6. The C = 1e6 problems are linearly separable with
/// a margin so their dual optimum stays bounded.
pub fn random_problem(rng: &mut ChaCha8Rng, index: usize) -> Problem {
    let c = [1.0, 10.0, 1e6][index % 3];
    let kernel = if index.is_multiple_of(2) {
        KernelSpec::Linear
    } else {
        KernelSpec::Rbf {
            sigma: [0.5, 1.0, 2.0][(index / 2) % 3],
        }
    };
    let n = rng.random_range(2..=12);
    loop {
        let w: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let b: f64 = rng.random_range(-0.5..0.5);
        let mut x = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        while x.len() < n {
            let p: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let s = w[0] * p[0] + w[1] * p[1] + b;
            let label = if c >= 1e6 {
                if s.abs() < 0.3 * (w[0].hypot(w[1])) {
                    continue;
                }
                s.signum()
            } else if rng.random_bool(0.8) {
                s.signum()
            } else {
                -s.signum()
            };
            x.push(p);
            d.push(label);
        }
        if d.iter().any(|&v| v > 0.0) && d.iter().any(|&v| v < 0.0) {
            return Problem { x, d, kernel, c };
        }
    }
}

/// `Q_ij = d_i d_j K(x_i, x_j)`, evaluated directly from the kernel formula.
pub fn q_matrix(p: &Problem) -> Vec<Vec<f64>> {
    let k = |a: &[f64], b: &[f64]| match p.kernel {
        KernelSpec::Linear => a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>(),
        KernelSpec::Rbf { sigma } => {
            let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum();
            (-d2 / (2.0 * sigma * sigma)).exp()
        }
    };
    let n = p.x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| p.d[i] * p.d[j] * k(&p.x[i], &p.x[j]))
                .collect()
        })
        .collect()
}

pub fn dual_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let quad: f64 = (0..alpha.len())
        .map(|i| alpha[i] * (0..alpha.len()).map(|j| q[i][j] * alpha[j]).sum::<f64>())
        .sum();
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, sum a_i d_i = 0}` by bisection on
/// the multiplier of the equality constraint.
fn project(v: &[f64], d: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter()
            .zip(d)
            .map(|(vi, di)| (vi - lambda * di).clamp(0.0, c))
            .collect()
    };
    let h = |lambda: f64| at(lambda).iter().zip(d).map(|(a, di)| a * di).sum::<f64>();
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximizes the dual by accelerated projected gradient with adaptive restart.
/// Returns the best feasible point found and its objective.
pub fn projected_gradient_dual(q: &[Vec<f64>], d: &[f64], c: f64) -> (Vec<f64>, f64) {
    let n = d.len();
    // Gershgorin bound on the largest eigenvalue of Q.
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(1e-12, f64::max);
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0)
            .collect()
    };
    let mut alpha = vec![0.0; n];
    let mut y = alpha.clone();
    let mut t = 1.0f64;
    let mut best = (alpha.clone(), dual_objective(q, &alpha));
    for _ in 0..400_000 {
        let g = grad(&y);
        let step: Vec<f64> = y
            .iter()
            .zip(&g)
            .map(|(yi, gi)| yi - gi / lipschitz)
            .collect();
        let next = project(&step, d, c);
        let obj = dual_objective(q, &next);
        if obj > best.1 {
            best = (next.clone(), obj);
        }
        let moved: f64 = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let restart = y
            .iter()
            .zip(&next)
            .zip(&alpha)
            .map(|((yi, ni), ai)| (yi - ni) * (ni - ai))
            .sum::<f64>()
            > 0.0;
        if restart {
            t = 1.0;
            y = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = next
                .iter()
                .zip(&alpha)
                .map(|(ni, ai)| ni + (t - 1.0) / t_next * (ni - ai))
                .collect();
            t = t_next;
        }
        alpha = next;
        if moved <= 1e-15 * (1.0 + c.min(1e3)) && !restart {
            break;
        }
    }
    best
}

/// Four classes around well-separated centres on one axis.
pub fn separated_clusters(per_class: usize, gap: f64, rng: &mut ChaCha8Rng) -> LabeledDataset {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for class in LithologyClass::ALL {
        for _ in 0..per_class {
            let centre = class.code() as f64 * gap;
            let noise: f64 = rng.sample(StandardNormal);
            let other: f64 = rng.sample(StandardNormal);
            features.push(vec![centre + noise, other]);
            labels.push(class);
        }
    }
    let n = features.len();
    LabeledDataset::new(
        features,
        vec!["GR".into(), "NPHI".into()],
        labels,
        vec!["W1".into(); n],
        (0..n).map(|i| i as f64 * 0.15).collect(),
    )
    .unwrap()
}
