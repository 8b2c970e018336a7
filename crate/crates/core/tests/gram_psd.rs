use lithosvm::{gram_matrix, KernelSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rbf_gram_matrices_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(1..=30);
        let f = rng.random_range(1..=5);
        let sigma = rng.random_range(0.05..3.0);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..f).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let g = gram_matrix(&KernelSpec::Rbf { sigma }, &x).unwrap();
        let m = DMatrix::from_fn(n, n, |i, j| g.get(i, j));
        assert_eq!(m, m.transpose());
        let min = m.symmetric_eigen().eigenvalues.min();
        worst = worst.min(min);
        assert!(
            min >= -1e-8,
            "n={n} sigma={sigma}: smallest eigenvalue {min}"
        );
    }
    assert!(worst.is_finite());
}

#[test]
fn rbf_gram_diagonal_is_one_and_entries_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<Vec<f64>> = (0..20)
        .map(|_| vec![rng.random_range(-1.0..1.0); 3])
        .collect();
    let g = gram_matrix(&KernelSpec::Rbf { sigma: 0.7 }, &x).unwrap();
    for i in 0..20 {
        assert_eq!(g.get(i, i), 1.0);
        for j in 0..20 {
            assert!(g.get(i, j) > 0.0 && g.get(i, j) <= 1.0);
            assert_eq!(g.get(i, j), g.get(j, i));
        }
    }
}
