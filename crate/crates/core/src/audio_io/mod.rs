//! Audio ingestion: WAV files and a deterministic synthetic speech corpus.
//!
//! Only 16-bit signed PCM, mono, is accepted; there is no resampling. The
//! synthesizer stands in for a recorded corpus during desk-scale runs: a
//! glottal pulse train shaped by per-speaker formant resonators, reproducible
//! bit-for-bit from its seeds.

mod synth;
mod wav;

pub use synth::{corpus_speaker_profiles, synthesize_corpus, synthesize_utterance, write_corpus};
pub use wav::{read_wav, write_wav};

use thiserror::Error;

/// Errors raised by audio reading, writing and synthesis.
#[derive(Debug, Error)]
pub enum AudioError {
    /// WAV container exists but declares an encoding this crate does not read.
    #[error("unsupported format: {0}")]
    FormatUnsupported(String),
    /// WAV container is structurally broken (truncated or invalid chunks).
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    /// Parameter outside its documented range.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A mono PCM signal normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Utterance {
    /// Builds an utterance, validating the amplitude range, a positive rate
    /// and a non-empty sample buffer.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::ConfigError(
                "sample rate must be positive".into(),
            ));
        }
        if samples.is_empty() {
            return Err(AudioError::ConfigError(
                "utterance must contain samples".into(),
            ));
        }
        if samples.iter().any(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(AudioError::ConfigError(
                "samples must be finite and within [-1, 1]".into(),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Parameters describing one synthetic speaker's voice.
///
/// Formant frequencies must be strictly increasing and below the Nyquist
/// frequency of the rate the speaker is rendered at; pitch is confined to a
/// plausible speaking range.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpeakerProfile {
    pub speaker_id: String,
    /// Resonator center frequencies in Hz, lowest first.
    pub formant_frequencies: [f64; 3],
    /// Resonator bandwidths in Hz, matched to the frequencies above.
    pub formant_bandwidths: [f64; 3],
    /// Fundamental frequency in Hz, within [60, 400].
    pub pitch: f64,
    /// Per-speaker randomness stream for jitter and take variation.
    pub jitter_seed: u64,
}

impl SyntheticSpeakerProfile {
    /// Validates the profile against a target sample rate.
    pub fn validate(&self, sample_rate: u32) -> Result<(), AudioError> {
        let nyquist = sample_rate as f64 / 2.0;
        let f = &self.formant_frequencies;
        if !(f[0] < f[1] && f[1] < f[2]) {
            return Err(AudioError::ConfigError(
                "formant frequencies must be strictly increasing".into(),
            ));
        }
        if f[2] >= nyquist {
            return Err(AudioError::ConfigError(format!(
                "formant {} Hz is above the Nyquist frequency {} Hz",
                f[2], nyquist
            )));
        }
        if self.pitch < 60.0 || self.pitch > 400.0 {
            return Err(AudioError::ConfigError(format!(
                "pitch {} Hz outside [60, 400]",
                self.pitch
            )));
        }
        if self.formant_bandwidths.iter().any(|&b| b <= 0.0) {
            return Err(AudioError::ConfigError(
                "bandwidths must be positive".into(),
            ));
        }
        Ok(())
    }
}
