use lithosvm::svm::{decision_value, geometric_margin, kkt_violation, materialize_weights};
use lithosvm::{train_binary_svm, KernelSpec, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hard(c: f64) -> SolverConfig {
    SolverConfig {
        c,
        kkt_tol: 1e-9,
        max_passes: 10_000,
        eps: 1e-12,
    }
}

#[test]
fn two_point_problem() {
    let x = vec![vec![-1.0], vec![1.0]];
    let d = vec![-1.0, 1.0];
    let m = train_binary_svm(&x, &d, KernelSpec::Linear, &hard(1e6)).unwrap();
    let alphas = m.alphas();
    assert_eq!(alphas.len(), 2);
    for a in alphas {
        assert!((a - 0.5).abs() < 1e-6);
    }
    let w = materialize_weights(&m).unwrap();
    assert!((w[0] - 1.0).abs() < 1e-6);
    assert!(m.bias.abs() < 1e-6);
    assert!((geometric_margin(&m).unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn separable_sets_put_support_vectors_on_the_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (nx, ny) = (angle.cos(), angle.sin());
        let offset: f64 = rng.random_range(-0.5..0.5);
        let mut x = Vec::new();
        let mut d = Vec::new();
        while x.len() < 30 {
            let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let s = nx * p[0] + ny * p[1] + offset;
            if s.abs() > 0.25 {
                x.push(p.to_vec());
                d.push(s.signum());
            }
        }
        if !d.iter().any(|&v| v > 0.0) || !d.iter().any(|&v| v < 0.0) {
            continue;
        }
        let m = train_binary_svm(&x, &d, KernelSpec::Linear, &hard(1e6)).unwrap();
        let min_abs = x
            .iter()
            .map(|p| decision_value(&m, p).unwrap().abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            (min_abs - 1.0).abs() < 1e-4,
            "case {case}: min |g| = {min_abs}"
        );
        for (p, &label) in x.iter().zip(&d) {
            assert!(label * decision_value(&m, p).unwrap() >= 1.0 - 1e-4);
        }
        assert!(kkt_violation(&m, &x, &d).unwrap() <= 1e-6);
    }
}
