//! Shared fixtures for the pipeline benchmarks.

use voxid_core::audio_io::{synthesize_utterance, SyntheticSpeakerProfile, Utterance};

/// A deterministic one-second test utterance.
pub fn bench_utterance() -> Utterance {
    let profile = SyntheticSpeakerProfile {
        speaker_id: "bench".into(),
        formant_frequencies: [400.0, 1400.0, 2600.0],
        formant_bandwidths: [60.0, 90.0, 130.0],
        pitch: 120.0,
        jitter_seed: 7,
    };
    synthesize_utterance(&profile, 42, 1.0, None).expect("profile is valid")
}
