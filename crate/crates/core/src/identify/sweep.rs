//! Parameter-sweep harness: retrain and re-evaluate across a value grid.
//!
//! One sweep varies a single training parameter over a list of values, with
//! several independently seeded trials per value, and records the resulting
//! identification rate and final training RMS for each run. Because the
//! swept parameters only affect training — never the front end — the
//! training dataset and the test-corpus feature vectors are prepared once
//! and shared across all runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::read_wav;
use crate::features::FeatureConfig;
use crate::identify::{
    argmax_lowest, build_dataset, load_corpus_paths, pooled_vector, IdentifyError,
};
use crate::neurogenetic::{train_hybrid, GaConfig, MlpConfig};
use crate::preprocess::{PreprocessConfig, PreprocessError};

/// Training parameter a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Backpropagation learning gains η₁ = η₂.
    Gain,
    /// Sigmoid slopes k₁ = k₂.
    Speed,
    /// Hidden-layer width.
    HiddenNodes,
    /// Crossover points per genetic recombination.
    CrossoverPoints,
    /// Genetic-search generation budget.
    Generations,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 5] = [
        SweepParameter::Gain,
        SweepParameter::Speed,
        SweepParameter::HiddenNodes,
        SweepParameter::CrossoverPoints,
        SweepParameter::Generations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Gain => "gain",
            SweepParameter::Speed => "speed",
            SweepParameter::HiddenNodes => "hidden_nodes",
            SweepParameter::CrossoverPoints => "crossover_points",
            SweepParameter::Generations => "generations",
        }
    }

    /// Whether the parameter is a count rather than a real value.
    fn is_count(self) -> bool {
        matches!(
            self,
            SweepParameter::HiddenNodes
                | SweepParameter::CrossoverPoints
                | SweepParameter::Generations
        )
    }

    /// Checks one sweep value for this parameter.
    fn check_value(self, value: f64) -> Result<(), IdentifyError> {
        let bad = |msg: String| Err(IdentifyError::ConfigError(msg));
        if !value.is_finite() {
            return bad(format!("{self} value {value} must be finite"));
        }
        if self.is_count() {
            let min = if self == SweepParameter::Generations {
                0.0
            } else {
                1.0
            };
            if value.fract() != 0.0 || value < min {
                return bad(format!("{self} value {value} must be an integer ≥ {min}"));
            }
        } else if value <= 0.0 {
            return bad(format!("{self} value {value} must be positive"));
        }
        Ok(())
    }

    /// Writes the value into the training configuration it controls.
    fn apply(self, value: f64, mlp: &mut MlpConfig, ga: &mut GaConfig) {
        match self {
            SweepParameter::Gain => {
                mlp.gain_hidden = value;
                mlp.gain_output = value;
            }
            SweepParameter::Speed => {
                mlp.speed_hidden = value;
                mlp.speed_output = value;
            }
            SweepParameter::HiddenNodes => mlp.hidden_dim = value as usize,
            SweepParameter::CrossoverPoints => ga.crossover_points = value as usize,
            SweepParameter::Generations => ga.generations = value as usize,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sweep parameter {s:?}; expected one of gain, speed, hidden_nodes, crossover_points, generations"))
    }
}

/// One (value, trial) data point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub trial: usize,
    pub identification_rate: f64,
    pub final_rms: f64,
}

/// All sweep rows plus the winning value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Rows in (value, trial) order.
    pub rows: Vec<SweepRow>,
    /// The value with the highest mean identification rate over its trials;
    /// ties go to the earliest value in the list.
    pub best_value: f64,
}

impl SweepResult {
    /// Serializes the sweep table as CSV.
    pub fn write_csv<W: std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        writeln!(
            writer,
            "parameter,value,trial,identification_rate,final_rms"
        )?;
        for row in &self.rows {
            writeln!(
                writer,
                "{},{},{},{},{}",
                row.parameter, row.value, row.trial, row.identification_rate, row.final_rms
            )?;
        }
        Ok(())
    }
}

/// Sweeps one training parameter over `values`, running `trials` trainings
/// per value with trial seeds `ga.rng_seed + trial`. Each run enrolls on
/// `train_root` and measures the identification rate on `test_root`; the
/// table is written as CSV to `out` and returned together with the
/// best-performing value.
///
/// Runs execute in parallel but the table, the CSV bytes and every trained
/// network are a pure function of the inputs.
#[allow(clippy::too_many_arguments)]
pub fn parameter_sweep(
    train_root: &Path,
    test_root: &Path,
    preprocess: &PreprocessConfig,
    feature: &FeatureConfig,
    mlp: &MlpConfig,
    ga: &GaConfig,
    parameter: SweepParameter,
    values: &[f64],
    trials: usize,
    out: &Path,
) -> Result<SweepResult, IdentifyError> {
    if values.is_empty() {
        return Err(IdentifyError::ConfigError(
            "sweep needs at least one value".into(),
        ));
    }
    if trials == 0 {
        return Err(IdentifyError::ConfigError(
            "sweep needs at least one trial".into(),
        ));
    }
    for &v in values {
        parameter.check_value(v)?;
    }

    // The swept parameters never touch the front end, so the training
    // dataset and raw test vectors are computed once and shared.
    let built = build_dataset(train_root, preprocess, feature)?;
    let (input_dim, output_dim) = built.dataset.dims();
    let test = prepare_test_vectors(test_root, &built.labels, preprocess, feature)?;

    let combos: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|vi| (0..trials).map(move |t| (vi, t)))
        .collect();
    let rows: Vec<SweepRow> = combos
        .into_par_iter()
        .map(|(vi, trial)| -> Result<SweepRow, IdentifyError> {
            let value = values[vi];
            let mut mlp_config = MlpConfig {
                input_dim,
                output_dim,
                ..mlp.clone()
            };
            let mut ga_config = ga.clone();
            parameter.apply(value, &mut mlp_config, &mut ga_config);
            ga_config.rng_seed = ga.rng_seed.wrapping_add(trial as u64);

            let (network, report) = train_hybrid(&built.dataset, &mlp_config, &ga_config)?;
            let mut correct = 0usize;
            for (true_idx, vector) in &test {
                if let Some(raw) = vector {
                    let z = built.normalization.apply(raw)?;
                    let scores = network.forward(&z)?;
                    if argmax_lowest(&scores) == *true_idx {
                        correct += 1;
                    }
                }
            }
            let identification_rate = 100.0 * correct as f64 / test.len() as f64;
            Ok(SweepRow {
                parameter,
                value,
                trial,
                identification_rate,
                final_rms: report.final_rms,
            })
        })
        .collect::<Result<_, _>>()?;

    let best_value = best_by_mean_rate(values, trials, &rows);
    let result = SweepResult { rows, best_value };
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    std::fs::write(out, csv)?;
    Ok(result)
}

/// Raw pooled feature vectors of a test corpus, paired with true label
/// indices. `None` marks an utterance endpoint detection rejected.
type TestVectors = Vec<(usize, Option<Vec<f64>>)>;

fn prepare_test_vectors(
    test_root: &Path,
    labels: &[String],
    preprocess: &PreprocessConfig,
    feature: &FeatureConfig,
) -> Result<TestVectors, IdentifyError> {
    let speakers = load_corpus_paths(test_root)?;
    let mut items = Vec::new();
    for (speaker_id, paths) in &speakers {
        let idx = labels
            .iter()
            .position(|l| l == speaker_id)
            .ok_or_else(|| IdentifyError::UnknownSpeakerLabel(speaker_id.clone()))?;
        items.extend(paths.iter().map(|p| (idx, p.clone())));
    }
    items
        .into_par_iter()
        .map(|(idx, path)| -> Result<_, IdentifyError> {
            let utterance = read_wav(&path)?;
            match pooled_vector(&utterance, preprocess, feature) {
                Ok(v) => Ok((idx, Some(v))),
                Err(IdentifyError::Preprocess(PreprocessError::NoSpeechDetected)) => {
                    Ok((idx, None))
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// The value whose trials average the highest identification rate.
fn best_by_mean_rate(values: &[f64], trials: usize, rows: &[SweepRow]) -> f64 {
    let mut best = values[0];
    let mut best_mean = f64::NEG_INFINITY;
    for (vi, &value) in values.iter().enumerate() {
        let slice = &rows[vi * trials..(vi + 1) * trials];
        let mean = slice.iter().map(|r| r.identification_rate).sum::<f64>() / trials as f64;
        if mean > best_mean {
            best_mean = mean;
            best = value;
        }
    }
    best
}
