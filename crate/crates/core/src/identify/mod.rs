//! Speaker enrollment, identification and evaluation.
//!
//! A [`SpeakerModel`] bundles everything inference needs: the trained
//! network, the label table mapping output nodes to speaker ids, the exact
//! preprocessing and feature settings used at enrollment, and the z-score
//! statistics of the training vectors. [`identify`] replays that front end
//! on a fresh utterance and picks the output-node argmax; [`evaluate`] runs
//! it over a whole test corpus and tallies an identification rate;
//! [`parameter_sweep`] repeats enroll/evaluate across a grid of training
//! settings.
//!
//! Identification is closed-set: the winner is always one of the enrolled
//! speakers, with no rejection threshold.

mod persist;
mod sweep;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::{read_wav, AudioError, Utterance};
use crate::features::{extract_features, pool, FeatureConfig, FeatureError};
use crate::neurogenetic::{
    train_hybrid, GaConfig, LabeledDataset, MlpConfig, MlpNetwork, NetworkError, TrainingReport,
};
use crate::preprocess::{preprocess_pipeline, PreprocessConfig, PreprocessError};

pub use persist::MODEL_FORMAT_VERSION;
pub use sweep::{parameter_sweep, SweepParameter, SweepResult, SweepRow};

/// Errors from enrollment, identification and evaluation.
#[derive(Debug, Error)]
pub enum IdentifyError {
    /// The corpus directory contains no speaker folders with WAV files.
    #[error("empty corpus: {0}")]
    CorpusEmpty(String),
    /// Closed-set identification needs at least two speakers.
    #[error("corpus has a single speaker: {0}")]
    SingleSpeaker(String),
    /// A test-corpus speaker id that was never enrolled.
    #[error("unknown speaker label: {0}")]
    UnknownSpeakerLabel(String),
    /// Model file malformed, or its format version is not supported.
    #[error("model format error: {0}")]
    ModelFormat(String),
    /// Parameter outside its documented range.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-dimension z-score statistics of the training feature vectors.
///
/// Stored in the model so inference normalizes exactly like enrollment did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Standard deviations below this are treated as constant dimensions and
/// replaced by 1 so the z-score stays finite.
const MIN_STD: f64 = 1e-12;

impl Normalization {
    /// Fits population mean and standard deviation per dimension.
    pub fn fit(vectors: &[Vec<f64>]) -> Result<Self, IdentifyError> {
        let n = vectors.len();
        if n == 0 {
            return Err(IdentifyError::ConfigError(
                "cannot fit normalization to zero vectors".into(),
            ));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(IdentifyError::ConfigError(
                "normalization input vectors have inconsistent dimensions".into(),
            ));
        }
        let mut means = vec![0.0f64; dim];
        for v in vectors {
            for (m, x) in means.iter_mut().zip(v) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut stds = vec![0.0f64; dim];
        for v in vectors {
            for ((s, m), x) in stds.iter_mut().zip(&means).zip(v) {
                *s += (x - m) * (x - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n as f64).sqrt();
            if *s < MIN_STD {
                *s = 1.0;
            }
        }
        Ok(Self { means, stds })
    }

    /// Applies the stored statistics: `z = (x − mean) / std`.
    pub fn apply(&self, vector: &[f64]) -> Result<Vec<f64>, IdentifyError> {
        if vector.len() != self.means.len() {
            return Err(IdentifyError::Network(NetworkError::DimMismatch(format!(
                "vector has {} components, normalization expects {}",
                vector.len(),
                self.means.len()
            ))));
        }
        Ok(vector
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    /// Checks that the statistics fit an `dim`-dimensional input and that
    /// every standard deviation is usable as a divisor.
    pub fn validate(&self, dim: usize) -> Result<(), IdentifyError> {
        if self.means.len() != dim || self.stds.len() != dim {
            return Err(IdentifyError::Network(NetworkError::DimMismatch(format!(
                "normalization is {}-dimensional, network input is {dim}",
                self.means.len()
            ))));
        }
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(IdentifyError::ModelFormat(
                "normalization means must be finite".into(),
            ));
        }
        if self.stds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(IdentifyError::ModelFormat(
                "normalization stds must be finite and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Everything needed to identify speakers: network, label table, front-end
/// configuration and feature normalization statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerModel {
    pub network: MlpNetwork,
    /// Output index → speaker id, in sorted speaker-id order.
    pub speaker_labels: Vec<String>,
    pub feature_config: FeatureConfig,
    pub preprocess_config: PreprocessConfig,
    pub normalization: Normalization,
    pub format_version: u32,
}

impl SpeakerModel {
    /// Structural consistency checks run before inference and persistence.
    pub fn validate(&self) -> Result<(), IdentifyError> {
        if self.speaker_labels.len() != self.network.config.output_dim {
            return Err(IdentifyError::Network(NetworkError::DimMismatch(format!(
                "{} labels for {} output nodes",
                self.speaker_labels.len(),
                self.network.config.output_dim
            ))));
        }
        self.normalization.validate(self.network.config.input_dim)?;
        Ok(())
    }
}

/// The result of [`build_dataset`]: training instances plus the artifacts
/// needed to interpret and reproduce them.
#[derive(Debug, Clone)]
pub struct BuiltDataset {
    /// Z-scored feature vectors with one-hot speaker targets.
    pub dataset: LabeledDataset,
    /// Output index → speaker id, sorted.
    pub labels: Vec<String>,
    /// The statistics the inputs were z-scored with.
    pub normalization: Normalization,
    /// Utterances dropped because endpoint detection found no speech.
    pub skipped: Vec<PathBuf>,
}

/// Per-speaker tally inside an [`EvaluationReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakerTally {
    pub label: String,
    pub total: usize,
    pub correct: usize,
}

/// Identification-rate summary over a test corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub total: usize,
    pub correct: usize,
    /// `100 · correct / total`.
    pub identification_rate: f64,
    /// One tally per enrolled label, in label order.
    pub per_speaker: Vec<SpeakerTally>,
    /// `confusion[true][predicted]`; row sums equal per-speaker totals and
    /// the trace equals the correct count.
    pub confusion: Vec<Vec<usize>>,
}

impl EvaluationReport {
    /// Builds a report from `(true index, predicted index)` pairs.
    ///
    /// A `None` prediction records an utterance whose preprocessing found no
    /// speech. It still has to occupy a cell of its confusion row (row sums
    /// must match per-speaker totals), so it is charged to the next label
    /// cyclically — a deliberately wrong column for any corpus with at
    /// least two speakers.
    pub fn from_results(labels: &[String], results: &[(usize, Option<usize>)]) -> Self {
        let n = labels.len();
        let mut confusion = vec![vec![0usize; n]; n];
        for &(true_idx, predicted) in results {
            let col = match predicted {
                Some(p) => p,
                None => (true_idx + 1) % n,
            };
            confusion[true_idx][col] += 1;
        }
        let per_speaker: Vec<SpeakerTally> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| SpeakerTally {
                label: label.clone(),
                total: confusion[i].iter().sum(),
                correct: confusion[i][i],
            })
            .collect();
        let total: usize = per_speaker.iter().map(|t| t.total).sum();
        let correct: usize = per_speaker.iter().map(|t| t.correct).sum();
        let identification_rate = if total == 0 {
            0.0
        } else {
            100.0 * correct as f64 / total as f64
        };
        Self {
            total,
            correct,
            identification_rate,
            per_speaker,
            confusion,
        }
    }

    /// Writes the per-speaker tallies as CSV rows `speaker,total,correct`.
    pub fn write_csv<W: std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        writeln!(writer, "speaker,total,correct")?;
        for tally in &self.per_speaker {
            writeln!(writer, "{},{},{}", tally.label, tally.total, tally.correct)?;
        }
        Ok(())
    }

    /// Writes the confusion matrix as CSV: one row per true speaker, one
    /// column per predicted speaker.
    pub fn write_confusion_csv<W: std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        write!(writer, "speaker")?;
        for tally in &self.per_speaker {
            write!(writer, ",{}", tally.label)?;
        }
        writeln!(writer)?;
        for (tally, row) in self.per_speaker.iter().zip(&self.confusion) {
            write!(writer, "{}", tally.label)?;
            for count in row {
                write!(writer, ",{count}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

/// Lists a corpus as `(speaker id, sorted wav paths)` pairs, sorted by
/// speaker id. Layout: `<root>/<speaker_id>/*.wav`; non-directories under
/// the root and non-WAV files inside speaker folders are ignored.
fn load_corpus_paths(root: &Path) -> Result<Vec<(String, Vec<PathBuf>)>, IdentifyError> {
    let mut speakers = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let speaker_id = entry.file_name().to_string_lossy().into_owned();
        let mut wavs = Vec::new();
        for file in std::fs::read_dir(entry.path())? {
            let path = file?.path();
            let is_wav = path
                .extension()
                .is_some_and(|ext| ext.to_string_lossy().eq_ignore_ascii_case("wav"));
            if path.is_file() && is_wav {
                wavs.push(path);
            }
        }
        if wavs.is_empty() {
            continue;
        }
        wavs.sort();
        speakers.push((speaker_id, wavs));
    }
    if speakers.is_empty() {
        return Err(IdentifyError::CorpusEmpty(format!(
            "no speaker directories with WAV files under {}",
            root.display()
        )));
    }
    speakers.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(speakers)
}

/// Runs one utterance through the stored front end: preprocess, extract,
/// pool. Returns the raw (un-normalized) pooled feature vector.
fn pooled_vector(
    utterance: &Utterance,
    preprocess: &PreprocessConfig,
    feature: &FeatureConfig,
) -> Result<Vec<f64>, IdentifyError> {
    let frames = preprocess_pipeline(utterance, preprocess)?;
    let matrix = extract_features(&frames, feature)?;
    let pooled = pool(&matrix, feature.pooling)?;
    Ok(pooled.values)
}

/// Index of the largest score; exact ties go to the lowest output index.
fn argmax_lowest(scores: &[f64]) -> usize {
    let mut winner = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[winner] {
            winner = i;
        }
    }
    winner
}

/// Loads a training corpus and turns it into a classification dataset.
///
/// Every utterance is preprocessed, parameterized and pooled, then the whole
/// collection is z-scored with statistics computed here (and returned for
/// the model to store). Targets are one-hot by sorted speaker-id order; the
/// dataset rows keep (speaker id, filename) sort order. Utterances whose
/// endpoint detection finds no speech are skipped and listed in
/// [`BuiltDataset::skipped`]; any other per-utterance failure aborts.
pub fn build_dataset(
    corpus_root: &Path,
    preprocess: &PreprocessConfig,
    feature: &FeatureConfig,
) -> Result<BuiltDataset, IdentifyError> {
    preprocess.validate()?;
    feature.validate()?;
    let speakers = load_corpus_paths(corpus_root)?;
    if speakers.len() == 1 {
        return Err(IdentifyError::SingleSpeaker(format!(
            "only {:?} under {}; closed-set identification needs at least two speakers",
            speakers[0].0,
            corpus_root.display()
        )));
    }
    let labels: Vec<String> = speakers.iter().map(|(id, _)| id.clone()).collect();

    let items: Vec<(usize, PathBuf)> = speakers
        .iter()
        .enumerate()
        .flat_map(|(idx, (_, paths))| paths.iter().map(move |p| (idx, p.clone())))
        .collect();
    let vectors: Vec<(usize, PathBuf, Option<Vec<f64>>)> = items
        .into_par_iter()
        .map(|(idx, path)| -> Result<_, IdentifyError> {
            let utterance = read_wav(&path)?;
            match pooled_vector(&utterance, preprocess, feature) {
                Ok(v) => Ok((idx, path, Some(v))),
                Err(IdentifyError::Preprocess(PreprocessError::NoSpeechDetected)) => {
                    Ok((idx, path, None))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;

    let skipped: Vec<PathBuf> = vectors
        .iter()
        .filter(|(_, _, v)| v.is_none())
        .map(|(_, p, _)| p.clone())
        .collect();
    let pairs: Vec<(Vec<f64>, usize)> = vectors
        .into_iter()
        .filter_map(|(idx, _, v)| v.map(|vector| (vector, idx)))
        .collect();
    if pairs.is_empty() {
        return Err(IdentifyError::CorpusEmpty(format!(
            "every utterance under {} was skipped by endpoint detection",
            corpus_root.display()
        )));
    }

    let inputs: Vec<Vec<f64>> = pairs.iter().map(|(v, _)| v.clone()).collect();
    let normalization = Normalization::fit(&inputs)?;
    let z_scored: Vec<(Vec<f64>, usize)> = pairs
        .into_iter()
        .map(|(v, idx)| Ok((normalization.apply(&v)?, idx)))
        .collect::<Result<_, IdentifyError>>()?;
    let dataset = LabeledDataset::one_hot(z_scored, labels.len())?;
    Ok(BuiltDataset {
        dataset,
        labels,
        normalization,
        skipped,
    })
}

/// Enrolls a corpus: builds the dataset, trains the hybrid network and
/// packages the result as a [`SpeakerModel`].
///
/// The network's input and output dimensions are taken from the data (pooled
/// feature width and speaker count); the remaining `mlp` fields and the GA
/// settings are used as given. Deterministic for a fixed corpus, configs and
/// `ga.rng_seed`.
pub fn enroll(
    corpus_root: &Path,
    preprocess: &PreprocessConfig,
    feature: &FeatureConfig,
    mlp: &MlpConfig,
    ga: &GaConfig,
) -> Result<(SpeakerModel, TrainingReport), IdentifyError> {
    let built = build_dataset(corpus_root, preprocess, feature)?;
    let (input_dim, output_dim) = built.dataset.dims();
    let mlp_config = MlpConfig {
        input_dim,
        output_dim,
        ..mlp.clone()
    };
    let (network, report) = train_hybrid(&built.dataset, &mlp_config, ga)?;
    let model = SpeakerModel {
        network,
        speaker_labels: built.labels,
        feature_config: feature.clone(),
        preprocess_config: preprocess.clone(),
        normalization: built.normalization,
        format_version: MODEL_FORMAT_VERSION,
    };
    model.validate()?;
    Ok((model, report))
}

/// Output scores for one utterance under a model's stored front end.
fn raw_scores(model: &SpeakerModel, utterance: &Utterance) -> Result<Vec<f64>, IdentifyError> {
    let raw = pooled_vector(utterance, &model.preprocess_config, &model.feature_config)?;
    let normalized = model.normalization.apply(&raw)?;
    Ok(model.network.forward(&normalized)?)
}

/// Identifies the speaker of an utterance.
///
/// Returns the winning label (argmax over output nodes, exact ties broken
/// by lowest index) and the full score vector in label order.
pub fn identify(
    model: &SpeakerModel,
    utterance: &Utterance,
) -> Result<(String, Vec<f64>), IdentifyError> {
    model.validate()?;
    let scores = raw_scores(model, utterance)?;
    let winner = argmax_lowest(&scores);
    Ok((model.speaker_labels[winner].clone(), scores))
}

/// Evaluates a model over a test corpus in the standard layout.
///
/// Every test speaker id must be enrolled. Utterances whose preprocessing
/// finds no speech count as misidentifications rather than being excluded,
/// so the denominator matches the corpus size. Utterances are scored in
/// parallel and reduced in (speaker id, filename) order.
pub fn evaluate(model: &SpeakerModel, test_root: &Path) -> Result<EvaluationReport, IdentifyError> {
    model.validate()?;
    let speakers = load_corpus_paths(test_root)?;
    let mut items: Vec<(usize, PathBuf)> = Vec::new();
    for (speaker_id, paths) in &speakers {
        let idx = model
            .speaker_labels
            .iter()
            .position(|l| l == speaker_id)
            .ok_or_else(|| IdentifyError::UnknownSpeakerLabel(speaker_id.clone()))?;
        items.extend(paths.iter().map(|p| (idx, p.clone())));
    }

    let results: Vec<(usize, Option<usize>)> = items
        .into_par_iter()
        .map(|(true_idx, path)| -> Result<_, IdentifyError> {
            let utterance = read_wav(&path)?;
            match raw_scores(model, &utterance) {
                Ok(scores) => Ok((true_idx, Some(argmax_lowest(&scores)))),
                Err(IdentifyError::Preprocess(PreprocessError::NoSpeechDetected)) => {
                    Ok((true_idx, None))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;

    Ok(EvaluationReport::from_results(
        &model.speaker_labels,
        &results,
    ))
}
