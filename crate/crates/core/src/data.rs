//! Well-log ingestion, cleaning, resampling, lithology labeling and the
//! per-well train/test split.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::NormalizationStats;

/// Conventional null value used by well-log exports.
pub const MISSING_SENTINEL: f64 = -999.25;

/// The four log predictors, in canonical column order.
pub const PREDICTORS: [&str; 4] = ["GR", "NPHI", "RHOB", "DT"];

/// Name of the optional pure-noise predictor emitted by the synthetic generator.
pub const NOISE_FEATURE: &str = "NOISE";

/// Lithology classes ordered by shaliness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LithologyClass {
    Sand = 0,
    ShalySand = 1,
    SandyShale = 2,
    Shale = 3,
}

impl LithologyClass {
    pub const ALL: [LithologyClass; 4] = [
        LithologyClass::Sand,
        LithologyClass::ShalySand,
        LithologyClass::SandyShale,
        LithologyClass::Shale,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LithologyClass::Sand => "Sand",
            LithologyClass::ShalySand => "ShalySand",
            LithologyClass::SandyShale => "SandyShale",
            LithologyClass::Shale => "Shale",
        }
    }

    /// Ordinal distance; adjacent classes are at distance 1.
    pub fn distance(self, other: Self) -> usize {
        self.code().abs_diff(other.code())
    }
}

impl fmt::Display for LithologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LithologyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "sand" | "0" => Ok(LithologyClass::Sand),
            "shalysand" | "1" => Ok(LithologyClass::ShalySand),
            "sandyshale" | "2" => Ok(LithologyClass::SandyShale),
            "shale" | "3" => Ok(LithologyClass::Shale),
            _ => Err(Error::InvalidInput(format!(
                "unknown lithology class `{s}`"
            ))),
        }
    }
}

/// Outcome of the lithology rule table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Class(LithologyClass),
    Unclassified,
}

impl Label {
    pub fn class(self) -> Option<LithologyClass> {
        match self {
            Label::Class(c) => Some(c),
            Label::Unclassified => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Class(c) => c.fmt(f),
            Label::Unclassified => f.write_str("UNCLASSIFIED"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("unclassified") {
            Ok(Label::Unclassified)
        } else {
            s.parse().map(Label::Class)
        }
    }
}

/// One depth sample of a well.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WellLogRecord {
    pub well_id: String,
    pub depth: f64,
    pub gr: Option<f64>,
    pub nphi: Option<f64>,
    pub rhob: Option<f64>,
    pub dt: Option<f64>,
    pub v_sand: Option<f64>,
    pub v_shale: Option<f64>,
    /// Extra uninformative predictor, only written by the synthetic generator.
    pub noise: Option<f64>,
    /// Label read from an explicit `class` column.
    pub label: Option<Label>,
}

impl WellLogRecord {
    pub fn predictor(&self, name: &str) -> Option<f64> {
        match name {
            "GR" => self.gr,
            "NPHI" => self.nphi,
            "RHOB" => self.rhob,
            "DT" => self.dt,
            NOISE_FEATURE => self.noise,
            _ => None,
        }
    }

    fn fractions(&self) -> Option<(f64, f64)> {
        match (present(self.v_sand), present(self.v_shale)) {
            (Some(s), Some(h)) => Some((s, h)),
            _ => None,
        }
    }

    /// Label from the fractions when available, otherwise the class column.
    pub fn effective_label(&self) -> Result<Option<Label>> {
        match self.fractions() {
            Some((sand, shale)) => label_lithology(sand, shale).map(Some),
            None => Ok(self.label),
        }
    }
}

fn present(value: Option<f64>) -> Option<f64> {
    value.filter(|v| v.is_finite() && *v != MISSING_SENTINEL)
}

/// Applies the lithology rule table to a pair of volume fractions.
///
/// Pairs matching none of the four rows (for example `v_sand == v_shale`)
/// come back as [`Label::Unclassified`].
pub fn label_lithology(v_sand: f64, v_shale: f64) -> Result<Label> {
    for (name, v) in [("v_sand", v_sand), ("v_shale", v_shale)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let class = if v_shale <= 0.15 {
        Some(LithologyClass::Sand)
    } else if v_shale <= 0.5 && v_sand > v_shale {
        Some(LithologyClass::ShalySand)
    } else if v_shale > 0.5 && v_shale <= 0.65 && v_sand < v_shale {
        Some(LithologyClass::SandyShale)
    } else if v_shale > 0.65 && v_sand < v_shale {
        Some(LithologyClass::Shale)
    } else {
        None
    };
    Ok(class.map_or(Label::Unclassified, Label::Class))
}

const REQUIRED_COLUMNS: [&str; 6] = ["well_id", "depth", "GR", "NPHI", "RHOB", "DT"];
const OPTIONAL_COLUMNS: [&str; 4] = ["v_sand", "v_shale", NOISE_FEATURE, "class"];

/// Reads a well-log CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<WellLogRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file)
}

/// Reads well-log records from any CSV source. Header names are matched
/// case-insensitively; line numbers in errors count the header as line 1.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<WellLogRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();

    let header = match rows.next() {
        Some(row) => row.map_err(|e| csv_error(&e, 1))?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    let mut columns: HashMap<String, usize> = HashMap::new();
    for (idx, name) in header.iter().enumerate() {
        let canonical = REQUIRED_COLUMNS
            .iter()
            .chain(OPTIONAL_COLUMNS.iter())
            .find(|c| c.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("unknown column `{name}`"),
            })?;
        if columns.insert(canonical.to_string(), idx).is_some() {
            return Err(Error::Parse {
                line: 1,
                message: format!("duplicate column `{name}`"),
            });
        }
    }
    for required in REQUIRED_COLUMNS {
        if !columns.contains_key(required) {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing required column `{required}`"),
            });
        }
    }
    if columns.contains_key("v_sand") != columns.contains_key("v_shale") {
        return Err(Error::Parse {
            line: 1,
            message: "v_sand and v_shale must appear together".into(),
        });
    }

    let width = header.len();
    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(&e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
        let cell = |name: &str| columns.get(name).map(|&i| &row[i]);
        let number = |name: &str| -> Result<Option<f64>> {
            match cell(name) {
                None => Ok(None),
                Some(text) => parse_number(text).map_err(|message| Error::Parse {
                    line,
                    message: format!("column {name}: {message}"),
                }),
            }
        };

        let well_id = cell("well_id").unwrap_or_default().to_string();
        if well_id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty well_id".into(),
            });
        }
        let depth = number("depth")?.ok_or_else(|| Error::Parse {
            line,
            message: "depth is missing".into(),
        })?;
        let record = WellLogRecord {
            well_id,
            depth,
            gr: number("GR")?,
            nphi: number("NPHI")?,
            rhob: number("RHOB")?,
            dt: number("DT")?,
            v_sand: number("v_sand")?,
            v_shale: number("v_shale")?,
            noise: number(NOISE_FEATURE)?,
            label: match cell("class") {
                Some(text) if !text.is_empty() => {
                    Some(text.parse().map_err(|e: Error| Error::Parse {
                        line,
                        message: e.to_string(),
                    })?)
                }
                _ => None,
            },
        };
        for (name, v) in [("v_sand", record.v_sand), ("v_shale", record.v_shale)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parse {
                        line,
                        message: format!("{name} = {v} outside [0, 1]"),
                    });
                }
            }
        }
        records.push(record);
    }
    Ok(records)
}

fn csv_error(err: &csv::Error, fallback_line: u64) -> Error {
    let line = err.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: err.to_string(),
    }
}

/// Empty cells, the null sentinel and non-finite values all read as missing.
fn parse_number(text: &str) -> std::result::Result<Option<f64>, String> {
    if text.is_empty() {
        return Ok(None);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| format!("cannot parse `{text}` as a number"))?;
    Ok(present(Some(value)))
}

/// Writes records in the CSV layout accepted by [`read_csv`], with a trailing
/// `class` column derived from the fractions (or the carried label).
pub fn write_csv<W: Write>(records: &[WellLogRecord], writer: W) -> Result<()> {
    let with_fractions = records
        .iter()
        .any(|r| r.v_sand.is_some() || r.v_shale.is_some());
    let with_noise = records.iter().any(|r| r.noise.is_some());
    let mut wtr = csv::Writer::from_writer(writer);

    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    if with_fractions {
        header.extend(["v_sand", "v_shale"]);
    }
    if with_noise {
        header.push(NOISE_FEATURE);
    }
    header.push("class");
    wtr.write_record(&header).map_err(io_error)?;

    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        let mut row = vec![
            r.well_id.clone(),
            r.depth.to_string(),
            fmt(r.gr),
            fmt(r.nphi),
            fmt(r.rhob),
            fmt(r.dt),
        ];
        if with_fractions {
            row.push(fmt(r.v_sand));
            row.push(fmt(r.v_shale));
        }
        if with_noise {
            row.push(fmt(r.noise));
        }
        row.push(
            r.effective_label()?
                .map(|l| l.to_string())
                .unwrap_or_default(),
        );
        wtr.write_record(&row).map_err(io_error)?;
    }
    wtr.flush()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(())
}

fn io_error(err: csv::Error) -> Error {
    Error::InvalidInput(format!("csv write failed: {err}"))
}

/// Keeps only records whose four predictors are present and finite.
/// Returns the survivors in their original order and the number removed.
pub fn drop_missing(records: Vec<WellLogRecord>) -> (Vec<WellLogRecord>, usize) {
    let before = records.len();
    let kept: Vec<_> = records
        .into_iter()
        .filter(|r| {
            r.depth.is_finite() && PREDICTORS.iter().all(|p| present(r.predictor(p)).is_some())
        })
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}

/// Linearly interpolates one well onto a uniform depth grid starting at its
/// shallowest sample. Class labels carried from a `class` column take the
/// value of the nearest input sample.
pub fn resample_uniform(records: &[WellLogRecord], step: f64) -> Result<Vec<WellLogRecord>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "resample step must be positive, got {step}"
        )));
    }
    if records.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "resampling needs at least 2 samples, got {}",
            records.len()
        )));
    }
    let well = &records[0].well_id;
    for pair in records.windows(2) {
        if pair[1].well_id != *well {
            return Err(Error::InvalidInput(format!(
                "resampling mixes wells `{well}` and `{}`",
                pair[1].well_id
            )));
        }
        if !(pair[1].depth > pair[0].depth) {
            return Err(Error::InvalidInput(format!(
                "well `{well}`: depth not strictly increasing at {} -> {}",
                pair[0].depth, pair[1].depth
            )));
        }
    }

    let start = records[0].depth;
    let end = records[records.len() - 1].depth;
    let snap = 1e-9 * step;
    let mut out = Vec::new();
    let mut upper = 1;
    for k in 0usize.. {
        let depth = start + k as f64 * step;
        if depth > end + snap {
            break;
        }
        while upper < records.len() - 1 && records[upper].depth < depth - snap {
            upper += 1;
        }
        let lo = &records[upper - 1];
        let hi = &records[upper];
        let sample = if (depth - lo.depth).abs() <= snap {
            WellLogRecord {
                depth,
                ..lo.clone()
            }
        } else if (depth - hi.depth).abs() <= snap {
            WellLogRecord {
                depth,
                ..hi.clone()
            }
        } else {
            let t = (depth - lo.depth) / (hi.depth - lo.depth);
            let lerp = |a: Option<f64>, b: Option<f64>| match (a, b) {
                (Some(a), Some(b)) => Some(a + (b - a) * t),
                _ => None,
            };
            WellLogRecord {
                well_id: well.clone(),
                depth,
                gr: lerp(lo.gr, hi.gr),
                nphi: lerp(lo.nphi, hi.nphi),
                rhob: lerp(lo.rhob, hi.rhob),
                dt: lerp(lo.dt, hi.dt),
                v_sand: lerp(lo.v_sand, hi.v_sand),
                v_shale: lerp(lo.v_shale, hi.v_shale),
                noise: lerp(lo.noise, hi.noise),
                label: if t <= 0.5 { lo.label } else { hi.label },
            }
        };
        out.push(sample);
    }
    Ok(out)
}

/// Feature matrix with ordinal labels and per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    feature_names: Vec<String>,
    labels: Vec<LithologyClass>,
    well_ids: Vec<String>,
    depths: Vec<f64>,
    normalization: Option<NormalizationStats>,
}

impl LabeledDataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        labels: Vec<LithologyClass>,
        well_ids: Vec<String>,
        depths: Vec<f64>,
    ) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no rows".into()));
        }
        if feature_names.is_empty() {
            return Err(Error::InvalidInput("dataset has no features".into()));
        }
        if labels.len() != n || well_ids.len() != n || depths.len() != n {
            return Err(Error::InvalidInput(format!(
                "column lengths disagree: {n} rows, {} labels, {} well ids, {} depths",
                labels.len(),
                well_ids.len(),
                depths.len()
            )));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_names.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "row {i} has a non-finite value"
                )));
            }
        }
        Ok(Self {
            features,
            feature_names,
            labels,
            well_ids,
            depths,
            normalization: None,
        })
    }

    /// Builds a dataset from cleaned records. Records whose label comes out
    /// unclassified are skipped and counted.
    pub fn from_records(
        records: &[WellLogRecord],
        feature_names: &[String],
    ) -> Result<(Self, LabelingReport)> {
        let mut report = LabelingReport::default();
        let (mut features, mut labels, mut wells, mut depths) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for r in records {
            let label = r.effective_label()?.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "well `{}` depth {}: no v_sand/v_shale and missing class column",
                    r.well_id, r.depth
                ))
            })?;
            if let (Some(_), Some(explicit)) = (r.fractions(), r.label) {
                if explicit != label {
                    report.disagreements += 1;
                }
            }
            let class = match label {
                Label::Class(c) => c,
                Label::Unclassified => {
                    report.unclassified += 1;
                    continue;
                }
            };
            let row = feature_names
                .iter()
                .map(|name| {
                    present(r.predictor(name)).ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "well `{}` depth {}: feature {name} missing",
                            r.well_id, r.depth
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            features.push(row);
            labels.push(class);
            wells.push(r.well_id.clone());
            depths.push(r.depth);
        }
        let dataset = Self::new(features, feature_names.to_vec(), labels, wells, depths)?;
        Ok((dataset, report))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[LithologyClass] {
        &self.labels
    }

    pub fn well_ids(&self) -> &[String] {
        &self.well_ids
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn normalization(&self) -> Option<&NormalizationStats> {
        self.normalization.as_ref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization.is_some()
    }

    pub(crate) fn with_normalized_features(
        &self,
        features: Vec<Vec<f64>>,
        stats: NormalizationStats,
    ) -> Self {
        Self {
            features,
            normalization: Some(stats),
            ..self.clone()
        }
    }

    /// Per-class sample counts indexed by ordinal code.
    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for l in &self.labels {
            counts[l.code()] += 1;
        }
        counts
    }

    /// Classes present, in ordinal order.
    pub fn classes(&self) -> Vec<LithologyClass> {
        let counts = self.class_counts();
        LithologyClass::ALL
            .into_iter()
            .filter(|c| counts[c.code()] > 0)
            .collect()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.features.iter().map(move |row| row[j])
    }

    /// Rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            well_ids: indices.iter().map(|&i| self.well_ids[i].clone()).collect(),
            depths: indices.iter().map(|&i| self.depths[i]).collect(),
            normalization: self.normalization.clone(),
        }
    }

    /// Keeps only the named feature columns, in the order given. Normalization
    /// statistics, if any, are narrowed to the same columns.
    pub fn project(&self, names: &[String]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidInput("empty feature subset".into()));
        }
        let idx = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::UnknownFeature(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let normalization = self.normalization.as_ref().map(|stats| stats.select(&idx));
        Ok(Self {
            features: self
                .features
                .iter()
                .map(|row| idx.iter().map(|&j| row[j]).collect())
                .collect(),
            feature_names: names.to_vec(),
            normalization,
            ..self.clone()
        })
    }

    /// Writes the dataset as CSV (`well_id,depth,<features>,class`).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["well_id".to_string(), "depth".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("class".into());
        wtr.write_record(&header).map_err(io_error)?;
        for i in 0..self.len() {
            let mut row = vec![self.well_ids[i].clone(), self.depths[i].to_string()];
            row.extend(self.features[i].iter().map(f64::to_string));
            row.push(self.labels[i].to_string());
            wtr.write_record(&row).map_err(io_error)?;
        }
        wtr.flush()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }
}

/// Bookkeeping from turning records into labeled rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelingReport {
    pub unclassified: usize,
    /// Rows whose explicit class column disagreed with the fraction-derived label.
    pub disagreements: usize,
}

/// Counts from [`prepare_dataset`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PreparationReport {
    pub input_records: usize,
    pub dropped_missing: usize,
    pub resampled_records: usize,
    pub labeling: LabelingReport,
}

/// Runs cleaning, per-well resampling (when `step` is given) and labeling.
/// Wells keep their order of first appearance in `records`.
pub fn prepare_dataset(
    records: Vec<WellLogRecord>,
    step: Option<f64>,
    feature_names: &[String],
) -> Result<(LabeledDataset, PreparationReport)> {
    let mut report = PreparationReport {
        input_records: records.len(),
        ..Default::default()
    };
    let (clean, removed) = drop_missing(records);
    report.dropped_missing = removed;

    let resampled = match step {
        Some(step) => {
            let mut out = Vec::with_capacity(clean.len());
            for well in group_by_well(clean) {
                out.extend(resample_uniform(&well, step)?);
            }
            out
        }
        None => clean,
    };
    report.resampled_records = resampled.len();
    let (dataset, labeling) = LabeledDataset::from_records(&resampled, feature_names)?;
    report.labeling = labeling;
    Ok((dataset, report))
}

/// Splits records into wells, in order of first appearance.
pub fn group_by_well(records: Vec<WellLogRecord>) -> Vec<Vec<WellLogRecord>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<WellLogRecord>> = HashMap::new();
    for r in records {
        if !groups.contains_key(&r.well_id) {
            order.push(r.well_id.clone());
        }
        groups.entry(r.well_id.clone()).or_default().push(r);
    }
    order
        .into_iter()
        .map(|w| groups.remove(&w).unwrap_or_default())
        .collect()
}

/// Per-well train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.70,
            seed: 42,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Sends `floor(train_fraction * n_well)` randomly chosen rows of every well
/// to the training set and the rest to the test set, then scrambles both.
pub fn split_train_test(
    dataset: &LabeledDataset,
    config: &SplitConfig,
) -> Result<(LabeledDataset, LabeledDataset)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut wells: Vec<&str> = Vec::new();
    let mut rows: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, w) in dataset.well_ids.iter().enumerate() {
        if !rows.contains_key(w.as_str()) {
            wells.push(w);
        }
        rows.entry(w).or_default().push(i);
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for w in wells {
        let mut idx = rows.remove(w).unwrap_or_default();
        idx.shuffle(&mut rng);
        let n_train = (config.train_fraction * idx.len() as f64).floor() as usize;
        test.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train.extend(idx);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((dataset.select_rows(&train), dataset.select_rows(&test)))
}
