//! Command-line driver.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{
    drop_missing, group_by_well, load_csv, prepare_dataset, resample_uniform, split_train_test,
    write_csv, LabeledDataset, LithologyClass, PreparationReport, SplitConfig, WellLogRecord,
    NOISE_FEATURE, PREDICTORS,
};
use crate::error::Error;
use crate::evaluate::{
    accuracy, adjacency_violation_rate, parse_grid, sweep_features, sweep_sigma, ConfusionMatrix,
};
use crate::kernel::KernelSpec;
use crate::model_io::ModelFile;
use crate::multiclass::{decision_profile, train_one_vs_all_with_report, BinaryTrainingReport};
use crate::naive_bayes::{predict_nb, train_nb};
use crate::preprocess::{
    apply_normalization, fit_normalization, relieff_weights, Iterations, ReliefFConfig,
};
use crate::svm::SolverConfig;
use crate::synthetic::{generate_synthetic, SyntheticConfig};

#[derive(Debug, Parser)]
#[command(
    name = "lithosvm",
    version,
    about = "Well-log lithology classification with SVMs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic well-log CSV.
    Gen(GenArgs),
    /// Prepare, split, normalize and fit a model.
    Train(TrainArgs),
    /// Predict classes for every row of a CSV.
    Predict(PredictArgs),
    /// Confusion matrix and accuracy of a model on a labeled CSV.
    Eval(EvalArgs),
    /// Accuracy over a sigma grid or over feature subsets.
    Sweep(SweepArgs),
    /// ReliefF feature weights.
    Relieff(ReliefArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Nb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Sigma,
    Features,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub samples_per_class: usize,
    #[arg(long, default_value_t = 4)]
    pub wells: usize,
    #[arg(long, default_value_t = 0.15)]
    pub depth_step: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub depth_start: f64,
    /// Append a pure-noise NOISE predictor.
    #[arg(long)]
    pub noise_feature: bool,
    /// Independent per-class Gaussians: no shared factor, no well offsets.
    #[arg(long)]
    pub independent: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.70)]
    pub train_fraction: f64,
    /// Resample every well to this depth step before labeling.
    #[arg(long)]
    pub resample_step: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Rbf)]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long = "C", default_value_t = 10.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub kkt_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_passes: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Svm)]
    pub model: ModelKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Comma-separated predictors to train on.
    #[arg(long, default_value = "GR,NPHI,RHOB,DT")]
    pub features: String,
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Also write the training report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub resample_step: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Confusion matrix CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Row-normalized view with two decimals.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub resample_step: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SweepMode::Sigma)]
    pub mode: SweepMode,
    /// `start:stop:step` or a comma-separated list of sigmas.
    #[arg(long, default_value = "0.1:2.0:0.1")]
    pub grid: String,
    /// Comma-separated subsets, features joined by `+`.
    #[arg(long, default_value = "GR+NPHI,GR+NPHI+RHOB,GR+NPHI+RHOB+DT")]
    pub subsets: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReliefArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Reference instances; all samples when omitted.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Comma-separated predictors; every predictor in the file when omitted.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub resample_step: Option<f64>,
}

/// Failure of a command: usage problems are found before any work starts.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Stage { stage: &'static str, source: Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Stage { stage, source } => write!(f, "{stage} failed: {source}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Stage { .. } => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn at<T>(stage: &'static str, r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Stage { stage, source })
}

fn usage<T>(r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Relieff(a) => cmd_relieff(&a),
    }
}

fn echo_config<T: Serialize>(command: &str, args: &T) {
    let json = serde_json::to_string(args).unwrap_or_default();
    println!("config[{command}]={json}");
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    at(
        "write",
        fs::write(path, contents).map_err(|source| Error::Io {
            path: path.into(),
            source,
        }),
    )
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    at(
        "write",
        File::create(path)
            .map(BufWriter::new)
            .map_err(|source| Error::Io {
                path: path.into(),
                source,
            }),
    )
}

fn parse_features(list: &str) -> CliResult<Vec<String>> {
    let names: Vec<String> = list
        .split([',', '+'])
        .map(|s| s.trim().to_string())
        .collect();
    if names.iter().any(String::is_empty) {
        return Err(CliError::Usage(format!("empty feature name in `{list}`")));
    }
    for n in &names {
        if !PREDICTORS.contains(&n.as_str()) && n != NOISE_FEATURE {
            return Err(CliError::Usage(format!("unknown feature `{n}`")));
        }
    }
    Ok(names)
}

fn validate_step(step: Option<f64>) -> CliResult<()> {
    match step {
        Some(s) if !(s.is_finite() && s > 0.0) => Err(CliError::Usage(format!(
            "--resample-step must be positive, got {s}"
        ))),
        _ => Ok(()),
    }
}

impl SolverArgs {
    fn kernel_spec(&self) -> crate::error::Result<KernelSpec> {
        match self.kernel {
            KernelKind::Linear => Ok(KernelSpec::Linear),
            KernelKind::Rbf => KernelSpec::rbf(self.sigma),
        }
    }

    fn config(&self) -> SolverConfig {
        SolverConfig {
            c: self.c,
            kkt_tol: self.kkt_tol,
            max_passes: self.max_passes,
            ..Default::default()
        }
    }

    fn validate(&self) -> CliResult<(KernelSpec, SolverConfig)> {
        // Sigma is checked even for the linear kernel so a bad flag never goes unnoticed.
        usage(KernelSpec::rbf(self.sigma))?;
        let config = self.config();
        usage(config.validate())?;
        Ok((usage(self.kernel_spec())?, config))
    }
}

impl SplitArgs {
    fn validate(&self) -> CliResult<SplitConfig> {
        validate_step(self.resample_step)?;
        let config = SplitConfig {
            train_fraction: self.train_fraction,
            seed: self.seed,
        };
        usage(config.validate())?;
        Ok(config)
    }
}

/// Predictors present in every record, in canonical order.
fn available_predictors(records: &[WellLogRecord]) -> Vec<String> {
    let mut names: Vec<String> = PREDICTORS.iter().map(|s| s.to_string()).collect();
    if !records.is_empty() && records.iter().all(|r| r.noise.is_some()) {
        names.push(NOISE_FEATURE.to_string());
    }
    names
}

fn load_prepared(
    input: &Path,
    step: Option<f64>,
) -> CliResult<(LabeledDataset, PreparationReport)> {
    let records = at("load", load_csv(input))?;
    let names = available_predictors(&records);
    let (dataset, report) = at("prepare", prepare_dataset(records, step, &names))?;
    if report.dropped_missing > 0 {
        eprintln!(
            "note: dropped {} records with missing predictors",
            report.dropped_missing
        );
    }
    if report.labeling.unclassified > 0 {
        eprintln!(
            "note: skipped {} unclassified records",
            report.labeling.unclassified
        );
    }
    if report.labeling.disagreements > 0 {
        eprintln!(
            "warning: class column disagrees with v_sand/v_shale on {} records; using fractions",
            report.labeling.disagreements
        );
    }
    Ok((dataset, report))
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let base = if args.independent {
        SyntheticConfig::independent()
    } else {
        SyntheticConfig::default()
    };
    let config = SyntheticConfig {
        seed: args.seed,
        samples_per_class: args.samples_per_class,
        wells: args.wells,
        depth_step: args.depth_step,
        depth_start: args.depth_start,
        noise_feature: args.noise_feature,
        ..base
    };
    usage(config.validate())?;
    echo_config("gen", &config);
    let records = at("generate", generate_synthetic(&config))?;
    let mut out = create(&args.out)?;
    at("write", write_csv(&records, &mut out))?;
    at(
        "write",
        out.flush().map_err(|source| Error::Io {
            path: args.out.clone(),
            source,
        }),
    )?;
    println!("records={}", records.len());
    Ok(())
}

#[derive(Serialize)]
struct TrainReport<'a> {
    config: &'a TrainArgs,
    input_records: usize,
    dropped_missing: usize,
    unclassified: usize,
    label_disagreements: usize,
    train_counts: Vec<(LithologyClass, usize)>,
    test_counts: Vec<(LithologyClass, usize)>,
    binary_models: Vec<BinaryTrainingReport>,
}

fn counts(ds: &LabeledDataset) -> Vec<(LithologyClass, usize)> {
    let c = ds.class_counts();
    LithologyClass::ALL
        .iter()
        .map(|&l| (l, c[l.code()]))
        .collect()
}

fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let (kernel, solver) = args.solver.validate()?;
    let split = args.split.validate()?;
    let features = parse_features(&args.features)?;
    echo_config("train", args);

    let (dataset, prep) = load_prepared(&args.input, args.split.resample_step)?;
    let (train_raw, test_raw) = at("split", split_train_test(&dataset, &split))?;
    for (path, ds) in [(&args.train_out, &train_raw), (&args.test_out, &test_raw)] {
        if let Some(path) = path {
            let mut w = create(path)?;
            at("write", ds.write_csv(&mut w))?;
        }
    }
    let train_raw = at("prepare", train_raw.project(&features))?;
    let stats = at("normalize", fit_normalization(&train_raw))?;
    let train = at("normalize", apply_normalization(&train_raw, &stats))?;

    let (model, binary_models) = match args.model {
        ModelKind::Svm => {
            let (m, reports) = at(
                "train",
                train_one_vs_all_with_report(&train, kernel, &solver),
            )?;
            (ModelFile::SvmOneVsAll(m), reports)
        }
        ModelKind::Nb => (
            ModelFile::GaussianNb(at("train", train_nb(&train))?),
            Vec::new(),
        ),
    };
    at("write", model.save(&args.out))?;

    let report = TrainReport {
        config: args,
        input_records: prep.input_records,
        dropped_missing: prep.dropped_missing,
        unclassified: prep.labeling.unclassified,
        label_disagreements: prep.labeling.disagreements,
        train_counts: counts(&train),
        test_counts: counts(&test_raw),
        binary_models,
    };
    println!("input_records={}", report.input_records);
    println!("dropped_missing={}", report.dropped_missing);
    println!("unclassified={}", report.unclassified);
    for ((class, n_train), (_, n_test)) in report.train_counts.iter().zip(&report.test_counts) {
        println!("count[{class}]=train:{n_train},test:{n_test}");
    }
    for b in &report.binary_models {
        println!(
            "binary[{}] support_vectors={} iterations={} kkt_residual={:e}",
            b.class, b.support_vectors, b.iterations, b.kkt_residual
        );
    }
    if let Some(path) = &args.report {
        let json = at(
            "write",
            serde_json::to_string_pretty(&report).map_err(Error::from),
        )?;
        write_file(path, &(json + "\n"))?;
    }
    Ok(())
}

/// Model features plus the stored normalization, when the model has one.
fn model_inputs(
    model: &ModelFile,
) -> CliResult<(Vec<String>, Option<crate::preprocess::NormalizationStats>)> {
    match model {
        ModelFile::SvmOneVsAll(m) => {
            Ok((m.feature_names().to_vec(), Some(m.normalization().clone())))
        }
        ModelFile::GaussianNb(m) => Ok((m.feature_names.clone(), m.normalization.clone())),
        ModelFile::SvmBinary(_) => Err(CliError::Usage(
            "binary SVM files hold no class mapping; use a one-against-all model".into(),
        )),
    }
}

fn predict_rows(
    model: &ModelFile,
    rows: &[Vec<f64>],
) -> crate::error::Result<Vec<(LithologyClass, Vec<f64>)>> {
    rows.iter()
        .map(|x| match model {
            ModelFile::SvmOneVsAll(m) => {
                let scores = decision_profile(m, x)?;
                let best = crate::multiclass::argmax_first(&scores);
                Ok((m.classes()[best], scores))
            }
            ModelFile::GaussianNb(m) => Ok((predict_nb(m, x)?, m.log_posteriors(x)?)),
            ModelFile::SvmBinary(_) => Err(Error::InvalidInput("binary model".into())),
        })
        .collect()
}

fn score_classes(model: &ModelFile) -> Vec<LithologyClass> {
    match model {
        ModelFile::SvmOneVsAll(m) => m.classes().to_vec(),
        ModelFile::GaussianNb(m) => m.classes.clone(),
        ModelFile::SvmBinary(_) => Vec::new(),
    }
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    validate_step(args.resample_step)?;
    echo_config("predict", args);
    let model = at("load model", ModelFile::load(&args.model_file))?;
    let (names, stats) = model_inputs(&model)?;

    let records = at("load", load_csv(&args.input))?;
    let (mut records, dropped) = drop_missing(records);
    if dropped > 0 {
        eprintln!("note: dropped {dropped} records with missing predictors");
    }
    if let Some(step) = args.resample_step {
        let mut out = Vec::new();
        for well in group_by_well(records) {
            out.extend(at("prepare", resample_uniform(&well, step))?);
        }
        records = out;
    }
    let rows = records
        .iter()
        .map(|r| {
            let raw = names
                .iter()
                .map(|n| {
                    r.predictor(n)
                        .ok_or_else(|| Error::UnknownFeature(n.clone()))
                })
                .collect::<crate::error::Result<Vec<_>>>()?;
            match &stats {
                Some(s) => s.transform_row(&raw),
                None => Ok(raw),
            }
        })
        .collect::<crate::error::Result<Vec<_>>>();
    let rows = at("prepare", rows)?;
    let predictions = at("predict", predict_rows(&model, &rows))?;

    let mut w = create(&args.out)?;
    let mut header = String::from("well_id,depth,predicted,true");
    for c in score_classes(&model) {
        header.push_str(&format!(",score_{c}"));
    }
    let mut text = header + "\n";
    for (r, (class, scores)) in records.iter().zip(&predictions) {
        let truth = match r.effective_label() {
            Ok(Some(l)) => l.to_string(),
            _ => String::new(),
        };
        text.push_str(&format!("{},{},{class},{truth}", r.well_id, r.depth));
        for s in scores {
            text.push_str(&format!(",{s}"));
        }
        text.push('\n');
    }
    at(
        "write",
        w.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: args.out.clone(),
            source,
        }),
    )?;
    println!("predictions={}", predictions.len());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    validate_step(args.resample_step)?;
    echo_config("eval", args);
    let model = at("load model", ModelFile::load(&args.model_file))?;
    let (names, stats) = model_inputs(&model)?;
    let (dataset, _) = load_prepared(&args.input, args.resample_step)?;
    let data = at("prepare", dataset.project(&names))?;
    let data = match &stats {
        Some(s) => at("normalize", apply_normalization(&data, s))?,
        None => data,
    };
    let predicted = at("predict", predict_rows(&model, data.features()))?;
    let predicted: Vec<LithologyClass> = predicted.into_iter().map(|(c, _)| c).collect();
    let cm = at(
        "evaluate",
        ConfusionMatrix::from_classes(data.labels(), &predicted),
    )?;
    let csv = cm.to_csv(args.normalized);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    println!("accuracy={}", at("evaluate", accuracy(&cm))?);
    println!("adjacency_violation_rate={}", adjacency_violation_rate(&cm));
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let (kernel, solver) = args.solver.validate()?;
    let split = args.split.validate()?;
    let grid = usage(parse_grid(&args.grid))?;
    let subsets: Vec<Vec<String>> = args
        .subsets
        .split(',')
        .map(|s| {
            let names: Vec<String> = s.split('+').map(|n| n.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(CliError::Usage(format!(
                    "empty feature name in subset `{s}`"
                )));
            }
            Ok(names)
        })
        .collect::<CliResult<_>>()?;
    if args.mode == SweepMode::Sigma {
        for &s in &grid {
            usage(KernelSpec::rbf(s))?;
        }
    }
    echo_config("sweep", args);

    let (dataset, _) = load_prepared(&args.input, args.split.resample_step)?;
    for name in subsets.iter().flatten() {
        if !dataset.feature_names().contains(name) {
            return Err(CliError::Stage {
                stage: "sweep",
                source: Error::UnknownFeature(name.clone()),
            });
        }
    }
    let (train, test) = at("split", split_train_test(&dataset, &split))?;
    let mut result = match args.mode {
        SweepMode::Sigma => {
            let features: Vec<String> = PREDICTORS.iter().map(|s| s.to_string()).collect();
            let train = at("prepare", train.project(&features))?;
            let test = at("prepare", test.project(&features))?;
            at("sweep", sweep_sigma(&train, &test, &grid, &solver))?
        }
        SweepMode::Features => at(
            "sweep",
            sweep_features(&train, &test, &subsets, kernel, &solver),
        )?,
    };
    result.seed = Some(args.split.seed);
    write_file(&args.out, &result.to_csv())?;
    let best = result.best();
    println!("best_parameter={}", result.parameters[best]);
    println!("best_accuracy={}", result.accuracies[best]);
    Ok(())
}

fn cmd_relieff(args: &ReliefArgs) -> CliResult<()> {
    validate_step(args.resample_step)?;
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if args.iterations == Some(0) {
        return Err(CliError::Usage("--iterations must be at least 1".into()));
    }
    let features = args.features.as_deref().map(parse_features).transpose()?;
    echo_config("relieff", args);

    let (dataset, _) = load_prepared(&args.input, args.resample_step)?;
    let dataset = match &features {
        Some(f) => at("prepare", dataset.project(f))?,
        None => dataset,
    };
    let stats = at("normalize", fit_normalization(&dataset))?;
    let dataset = at("normalize", apply_normalization(&dataset, &stats))?;
    let config = ReliefFConfig {
        k_neighbors: args.k,
        iterations: args
            .iterations
            .map_or(Iterations::AllSamples, Iterations::Count),
        seed: args.seed,
    };
    let weights = at("relieff", relieff_weights(&dataset, &config))?;
    write_file(&args.out, &weights.to_csv())?;
    for (name, w) in weights.ranked() {
        println!("weight[{name}]={w}");
    }
    Ok(())
}
