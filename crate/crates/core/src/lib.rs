//! Text-dependent, closed-set speaker identification.
//!
//! The crate covers the full chain from raw audio to a trained classifier:
//!
//! 1. [`audio_io`] — WAV read/write plus a deterministic formant-synthesis
//!    corpus generator used for desk-scale experiments.
//! 2. [`preprocess`] — Wiener denoising, short-term log-energy endpoint
//!    detection, pre-emphasis, frame blocking and Hamming windowing.
//! 3. [`features`] — per-frame cepstral parameterizations (RCC, MFCC and its
//!    delta/delta-delta dynamics, LPC, LPCC) and pooling to a fixed-length
//!    vector.
//! 4. [`neurogenetic`] — a single-hidden-layer sigmoid MLP whose weights are
//!    first searched by a real-coded genetic algorithm (RMS-error fitness)
//!    and then refined by per-instance backpropagation.
//! 5. [`identify`] — enrollment, model persistence, argmax identification,
//!    evaluation reports and parameter sweeps.
//!
//! Everything is deterministic given the seeds carried in the configs: the
//! same corpus and settings always produce bit-identical models.

pub mod audio_io;
pub mod features;
pub mod identify;
pub mod neurogenetic;
pub mod preprocess;
pub mod spectrum;

pub use audio_io::{AudioError, SyntheticSpeakerProfile, Utterance};
pub use features::{FeatureConfig, FeatureError, FeatureMatrix, FeatureMethod, FeatureVector};
pub use identify::{EvaluationReport, IdentifyError, SpeakerModel, SweepParameter};
pub use neurogenetic::{
    Chromosome, GaConfig, LabeledDataset, MlpConfig, MlpNetwork, NetworkError, TrainingReport,
};
pub use preprocess::{FrameMatrix, PreprocessConfig, PreprocessError};
