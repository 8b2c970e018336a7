//! Seeded synthetic well logs with class-conditional predictor distributions.
//!
//! Each record draws its four predictors as
//! `mean + sd * (l_p * z + sqrt(1 - l_p^2) * e_p + offset[well][p])`
//! where `z` is a per-record shaliness factor shared by all predictors and
//! `e_p` is independent noise, so every marginal stays Gaussian with the
//! configured mean and standard deviation. `z` also places `v_shale` inside
//! the class's interval of the rule table. With all loadings `l_p = 0` and all
//! offsets zero the predictors are independent per-class Gaussians.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{Label, LithologyClass, WellLogRecord};
use crate::error::{Error, Result};

/// Clipping envelope per predictor, in GR, NPHI, RHOB, DT order.
pub const ENVELOPE: [(f64, f64); 4] =
    [(13.45, 104.82), (0.09, 0.61), (1.69, 2.86), (60.68, 138.24)];

/// `v_shale` range drawn for each class, strictly inside its rule-table row.
const SHALE_RANGE: [(f64, f64); 4] = [(0.0, 0.13), (0.17, 0.40), (0.52, 0.63), (0.67, 1.0)];

/// Consecutive samples of one class form a bed of this many samples.
const BED_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Records per class in every well.
    pub samples_per_class: usize,
    /// `class_means[class][predictor]`, predictors in GR, NPHI, RHOB, DT order.
    pub class_means: [[f64; 4]; 4],
    pub class_stddevs: [[f64; 4]; 4],
    pub depth_start: f64,
    pub depth_step: f64,
    pub wells: usize,
    /// Appends a standard-normal `NOISE` predictor unrelated to the class.
    pub noise_feature: bool,
    /// Loading of each predictor on the shared shaliness factor, in (-1, 1).
    pub factor_loadings: [f64; 4],
    /// Per-well shift in class-stddev units; well `w` uses entry `w % len`.
    pub well_offsets: Vec<[f64; 4]>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        // Pooled means reproduce GR 57.93, NPHI 0.35, RHOB 2.45, DT 96.73.
        Self {
            seed: 42,
            samples_per_class: 500,
            class_means: [
                [35.0, 0.25, 2.305, 87.73],
                [50.0, 0.32, 2.405, 93.73],
                [65.0, 0.38, 2.505, 99.73],
                [81.72, 0.45, 2.585, 105.73],
            ],
            class_stddevs: [[6.0, 0.035, 0.055, 6.0]; 4],
            depth_start: 1000.0,
            depth_step: 0.15,
            wells: 4,
            noise_feature: false,
            factor_loadings: [0.8, 0.8, 0.8, -0.4],
            well_offsets: vec![
                [-1.5, 1.5, 0.0, 0.0],
                [-0.5, -1.5, 0.0, 0.0],
                [0.5, 1.5, 0.0, 0.0],
                [1.5, -1.5, 0.0, 0.0],
            ],
        }
    }
}

impl SyntheticConfig {
    /// Independent per-class Gaussians without well effects.
    pub fn independent() -> Self {
        Self {
            factor_loadings: [0.0; 4],
            well_offsets: Vec::new(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.samples_per_class == 0 {
            return bad("samples_per_class must be at least 1".into());
        }
        if self.wells == 0 {
            return bad("wells must be at least 1".into());
        }
        if !(self.depth_step > 0.0 && self.depth_step.is_finite()) {
            return bad(format!(
                "depth_step must be positive, got {}",
                self.depth_step
            ));
        }
        if !self.depth_start.is_finite() {
            return bad("depth_start must be finite".into());
        }
        if self
            .class_stddevs
            .iter()
            .flatten()
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return bad("every class stddev must be positive".into());
        }
        if self.class_means.iter().flatten().any(|m| !m.is_finite()) {
            return bad("class means must be finite".into());
        }
        if self.factor_loadings.iter().any(|l| !(l.abs() < 1.0)) {
            return bad(format!(
                "factor loadings must lie in (-1, 1), got {:?}",
                self.factor_loadings
            ));
        }
        if self.well_offsets.iter().flatten().any(|o| !o.is_finite()) {
            return bad("well offsets must be finite".into());
        }
        Ok(())
    }
}

/// Generates `wells * 4 * samples_per_class` records. Within a well, beds
/// of one class follow each other in shuffled order at uniform depth spacing.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Vec<WellLogRecord>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    let mut records = Vec::with_capacity(config.wells * 4 * config.samples_per_class);

    for well in 0..config.wells {
        let well_id = format!("W{}", well + 1);
        let offset = if config.well_offsets.is_empty() {
            [0.0; 4]
        } else {
            config.well_offsets[well % config.well_offsets.len()]
        };

        let mut beds = Vec::new();
        for class in LithologyClass::ALL {
            let mut left = config.samples_per_class;
            while left > 0 {
                let size = left.min(BED_SAMPLES);
                beds.push((class, size));
                left -= size;
            }
        }
        beds.shuffle(&mut rng);

        let mut index = 0usize;
        for (class, size) in beds {
            let c = class.code();
            for _ in 0..size {
                let z: f64 = rng.sample(StandardNormal);
                let mut values = [0.0; 4];
                for p in 0..4 {
                    let e: f64 = rng.sample(StandardNormal);
                    let sd = config.class_stddevs[c][p];
                    let l = config.factor_loadings[p];
                    let x = config.class_means[c][p]
                        + sd * (l * z + (1.0 - l * l).sqrt() * e + offset[p]);
                    values[p] = x.clamp(ENVELOPE[p].0, ENVELOPE[p].1);
                }

                let (lo, hi) = SHALE_RANGE[c];
                let v_shale = lo + (hi - lo) * unit.cdf(z);
                let v_sand = (1.0 - v_shale) * rng.random_range(0.75..0.95);
                let noise = if config.noise_feature {
                    Some(rng.sample(StandardNormal))
                } else {
                    None
                };

                records.push(WellLogRecord {
                    well_id: well_id.clone(),
                    depth: config.depth_start + index as f64 * config.depth_step,
                    gr: Some(values[0]),
                    nphi: Some(values[1]),
                    rhob: Some(values[2]),
                    dt: Some(values[3]),
                    v_sand: Some(v_sand),
                    v_shale: Some(v_shale),
                    noise,
                    label: Some(Label::Class(class)),
                });
                index += 1;
            }
        }
    }
    Ok(records)
}
