mod common;

use lithosvm::data::{read_csv, write_csv, PREDICTORS};
use lithosvm::evaluate::{default_sigma_grid, holdout_accuracy, sweep_features, sweep_sigma};
use lithosvm::multiclass::train_one_vs_all_with_report;
use lithosvm::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn predictors() -> Vec<String> {
    PREDICTORS.iter().map(|s| s.to_string()).collect()
}

fn benchmark(samples_per_class: usize) -> (LabeledDataset, LabeledDataset) {
    let config = SyntheticConfig {
        samples_per_class,
        ..Default::default()
    };
    let records = generate_synthetic(&config).unwrap();
    let (ds, report) = prepare_dataset(records, Some(0.15), &predictors()).unwrap();
    assert_eq!(report.dropped_missing, 0);
    assert_eq!(report.labeling.unclassified, 0);
    split_train_test(&ds, &SplitConfig::default()).unwrap()
}

#[test]
fn well_separated_clusters_are_classified_perfectly() {
    let config = SyntheticConfig {
        samples_per_class: 50,
        class_means: [
            [20.0, 0.15, 2.0, 70.0],
            [40.0, 0.25, 2.2, 90.0],
            [60.0, 0.35, 2.4, 110.0],
            [80.0, 0.45, 2.6, 130.0],
        ],
        class_stddevs: [[20.0 / 6.0, 0.1 / 6.0, 0.2 / 6.0, 20.0 / 6.0]; 4],
        ..SyntheticConfig::independent()
    };
    let (ds, _) =
        prepare_dataset(generate_synthetic(&config).unwrap(), None, &predictors()).unwrap();
    let (train, test) = split_train_test(&ds, &SplitConfig::default()).unwrap();
    let (acc, cm) = holdout_accuracy(
        &train,
        &test,
        KernelSpec::Rbf { sigma: 0.5 },
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(acc, 1.0, "{cm:?}");
}

#[test]
fn csv_round_trip_is_exact() {
    let config = SyntheticConfig {
        samples_per_class: 20,
        noise_feature: true,
        ..Default::default()
    };
    let records = generate_synthetic(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, records);
}

#[test]
fn default_benchmark_gr_statistics_near_field_values() {
    let records = generate_synthetic(&SyntheticConfig::default()).unwrap();
    let gr: Vec<f64> = records.iter().map(|r| r.gr.unwrap()).collect();
    let n = gr.len() as f64;
    let mean = gr.iter().sum::<f64>() / n;
    let sd = (gr.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((mean - 57.93).abs() < 1.0, "GR mean {mean}");
    assert!((sd - 18.07).abs() < 2.0, "GR stddev {sd}");
    assert!(gr.iter().all(|v| (13.45..=104.82).contains(v)));
}

#[test]
fn trained_models_satisfy_kkt_and_generalize_downward() {
    let (train_raw, test_raw) = benchmark(100);
    let stats = fit_normalization(&train_raw).unwrap();
    let train = apply_normalization(&train_raw, &stats).unwrap();
    let test = apply_normalization(&test_raw, &stats).unwrap();
    for kernel in [KernelSpec::Linear, KernelSpec::Rbf { sigma: 0.5 }] {
        let (model, reports) =
            train_one_vs_all_with_report(&train, kernel, &SolverConfig::default()).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(
                r.kkt_residual <= 1e-3,
                "{kernel} {}: {}",
                r.class,
                r.kkt_residual
            );
        }
        let acc = |ds: &LabeledDataset| {
            let p = model.predict_dataset(ds).unwrap();
            accuracy(&ConfusionMatrix::from_classes(ds.labels(), &p).unwrap()).unwrap()
        };
        if kernel != KernelSpec::Linear {
            assert!(acc(&train) >= acc(&test));
        }
    }
}

#[test]
fn sigma_sweep_shape_and_determinism() {
    let (train, test) = benchmark(25);
    let grid = default_sigma_grid();
    let a = sweep_sigma(&train, &test, &grid, &SolverConfig::default()).unwrap();
    assert_eq!(a.accuracies.len(), 20);
    assert!(a.accuracies.iter().all(|v| (0.0..=1.0).contains(v)));
    let b = sweep_sigma(&train, &test, &grid, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a
        .to_csv()
        .contains("# kernel_convention=rbf(x,y) = exp(-||x-y||^2 / (2*sigma^2))"));
    assert!(sweep_sigma(&train, &test, &[0.5, 0.0], &SolverConfig::default()).is_err());
}

#[test]
fn feature_sweep_subsets() {
    let (train, test) = benchmark(25);
    let kernel = KernelSpec::Rbf { sigma: 0.5 };
    let subsets = vec![
        vec!["GR".to_string()],
        vec!["GR".to_string(), "NPHI".to_string()],
    ];
    let r = sweep_features(&train, &test, &subsets, kernel, &SolverConfig::default()).unwrap();
    assert_eq!(r.parameters, vec!["GR", "GR+NPHI"]);
    let bad = vec![vec!["GR".to_string(), "PEF".to_string()]];
    match sweep_features(&train, &test, &bad, kernel, &SolverConfig::default()) {
        Err(Error::UnknownFeature(name)) => assert_eq!(name, "PEF"),
        other => panic!("expected unknown feature error, got {other:?}"),
    }
}

#[test]
fn naive_bayes_on_separated_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = common::separated_clusters(40, 8.0, &mut rng);
    let m = train_nb(&ds).unwrap();
    let p = m.predict_dataset(&ds).unwrap();
    assert_eq!(
        accuracy(&ConfusionMatrix::from_classes(ds.labels(), &p).unwrap()).unwrap(),
        1.0
    );
}
