//! Lithology classification from well logs with a one-against-all SVM.
//!
//! The pipeline reads well-log CSVs, labels samples from their sand and shale
//! volume fractions, normalizes the predictors, and trains one binary SVM per
//! lithology class with sequential minimal optimization. Gaussian naive Bayes
//! serves as a baseline, and ReliefF ranks predictor relevance.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod kernel;
pub mod model_io;
pub mod multiclass;
pub mod naive_bayes;
pub mod preprocess;
pub mod svm;
pub mod synthetic;

pub use data::{
    label_lithology, load_csv, prepare_dataset, split_train_test, Label, LabeledDataset,
    LithologyClass, SplitConfig, WellLogRecord,
};
pub use error::{Error, Result};
pub use evaluate::{accuracy, adjacency_violation_rate, build_confusion, ConfusionMatrix};
pub use kernel::{eval_kernel, gram_matrix, KernelSpec};
pub use multiclass::{predict_multiclass, train_one_vs_all, MulticlassSvmModel};
pub use naive_bayes::{predict_nb, train_nb, GaussianNbModel};
pub use preprocess::{apply_normalization, fit_normalization, relieff_weights, ReliefFConfig};
pub use svm::{train_binary_svm, BinarySvmModel, SolverConfig};
pub use synthetic::{generate_synthetic, SyntheticConfig};
