//! Deterministic formant synthesizer for the toy speech corpus.
//!
//! The generator stands in for a recorded text-dependent corpus. Each
//! utterance is a Rosenberg-style glottal pulse train pushed through three
//! cascaded second-order resonators placed at the speaker's formant
//! frequencies. The "phrase" — a shared seeded pattern of segment durations,
//! per-segment formant inflections and voicing levels — plays the role of the
//! spoken text: rendering the same phrase seed through different speaker
//! profiles yields the same gesture spoken by different vocal tracts.
//!
//! The exact recipe below is an internal contract. Callers may rely only on
//! determinism (same arguments → bit-identical samples) and on distinct
//! profiles being spectrally separable; everything else is free to change.
//!
//! Randomness is split into three independent ChaCha8 streams so that the
//! clean speech component is unaffected by whether noise is requested:
//!
//! 1. phrase stream, seeded by `phrase_seed` alone — shared across speakers;
//! 2. voice stream, seeded from (`jitter_seed`, `phrase_seed`) — per-pulse
//!    pitch jitter and amplitude wobble, unique per speaker and take;
//! 3. noise stream, seeded from the voice seed and a tag — drawn only when
//!    `noise_snr_db` is given.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use super::{AudioError, SyntheticSpeakerProfile, Utterance};

/// All synthetic audio is rendered at this rate (Hz), matching the
/// acquisition convention of the rest of the toolkit.
pub const SYNTH_SAMPLE_RATE: u32 = 11025;

/// Leading and trailing silence around the speech region, seconds each.
const PAD_S: f64 = 0.15;
/// Peak amplitude the speech region is normalized to before noise is added;
/// leaves headroom so moderate noise does not saturate the PCM range.
const SPEECH_PEAK: f64 = 0.35;

/// Domain-separation tags for deriving the per-stream seeds.
const TAG_VOICE: u64 = 0x564f_4943_4531_3031; // "VOICE101"
const TAG_NOISE: u64 = 0x4e4f_4953_4530_3939; // "NOISE099"
const TAG_PHRASE: u64 = 0x5048_5241_5345_3737; // "PHRASE77"
const TAG_DURATION: u64 = 0x4455_5241_5449_4f4e; // "DURATION"

/// SplitMix64 finalizer; used to decorrelate seeds derived from one another.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One vowel-like stretch of the phrase: a duration weight, multiplicative
/// inflections on the speaker's three formants, and a voicing level.
struct PhraseSegment {
    weight: f64,
    formant_mult: [f64; 3],
    amplitude: f64,
}

/// Draws the shared phrase pattern. Every draw happens in a fixed order so
/// the pattern is a pure function of the seed.
fn draw_phrase(phrase_seed: u64) -> Vec<PhraseSegment> {
    let mut rng = ChaCha8Rng::seed_from_u64(phrase_seed);
    let n_segments = rng.random_range(3..=6usize);
    (0..n_segments)
        .map(|_| PhraseSegment {
            weight: rng.random_range(0.6..1.4),
            formant_mult: [
                rng.random_range(0.85..1.20),
                rng.random_range(0.90..1.15),
                rng.random_range(0.95..1.10),
            ],
            amplitude: rng.random_range(0.7..1.0),
        })
        .collect()
}

/// Second-order resonator coefficients for center frequency `f` and
/// bandwidth `b` at rate `fs`: y[n] = x[n] + a1·y[n−1] + a2·y[n−2].
/// Pole radius below one for any positive bandwidth, so the cascade is
/// stable; overall gain is irrelevant because the result is peak-normalized.
fn resonator_coefficients(f: f64, b: f64, fs: f64) -> (f64, f64) {
    let r = (-PI * b / fs).exp();
    let theta = 2.0 * PI * (f.min(0.49 * fs)) / fs;
    (2.0 * r * theta.cos(), -r * r)
}

/// Synthesizes one utterance: `duration_s` seconds of voiced speech framed
/// by 0.15 s of silence on each side, rendered at 11025 Hz.
///
/// Deterministic in all arguments. When `noise_snr_db` is given, white
/// Gaussian noise spans the whole utterance (silence included), scaled so
/// the signal-to-noise ratio measured over the speech region is exactly the
/// requested value; the underlying clean component is identical to the
/// `None` rendering. Samples are clamped to [−1, 1] at the very end, which
/// only engages at extreme negative SNRs.
pub fn synthesize_utterance(
    profile: &SyntheticSpeakerProfile,
    phrase_seed: u64,
    duration_s: f64,
    noise_snr_db: Option<f64>,
) -> Result<Utterance, AudioError> {
    if !(0.3..=5.0).contains(&duration_s) {
        return Err(AudioError::ConfigError(format!(
            "duration {duration_s} s outside [0.3, 5.0]"
        )));
    }
    profile.validate(SYNTH_SAMPLE_RATE)?;

    let fs = SYNTH_SAMPLE_RATE as f64;
    let speech_len = (duration_s * fs).round() as usize;
    let pad_len = (PAD_S * fs).round() as usize;

    // --- phrase layout ---------------------------------------------------
    let segments = draw_phrase(phrase_seed);
    let total_weight: f64 = segments.iter().map(|s| s.weight).sum();
    // Segment boundaries in samples, proportional to the duration weights.
    let mut boundaries = Vec::with_capacity(segments.len() + 1);
    boundaries.push(0usize);
    let mut acc = 0.0;
    for seg in &segments {
        acc += seg.weight;
        boundaries.push(((acc / total_weight) * speech_len as f64).round() as usize);
    }
    *boundaries.last_mut().unwrap() = speech_len;

    // --- excitation: jittered Rosenberg pulse train ----------------------
    let voice_seed = mix(profile.jitter_seed ^ mix(phrase_seed ^ TAG_VOICE));
    let mut voice_rng = ChaCha8Rng::seed_from_u64(voice_seed);
    let mut excitation = vec![0.0f64; speech_len];
    let segment_of = |pos: usize| -> usize {
        // boundaries is sorted; the last segment absorbs the tail.
        boundaries
            .windows(2)
            .position(|w| pos < w[1])
            .unwrap_or(segments.len() - 1)
    };
    let mut pulse_start = 0usize;
    while pulse_start < speech_len {
        // Two draws per pulse, in this order: period jitter, amplitude wobble.
        let jitter = 1.0 + 0.03 * (2.0 * voice_rng.random::<f64>() - 1.0);
        let wobble = 1.0 + 0.05 * (2.0 * voice_rng.random::<f64>() - 1.0);
        let period = fs / profile.pitch * jitter;
        let seg = &segments[segment_of(pulse_start)];
        let amp = seg.amplitude * wobble;
        // Rosenberg glottal flow: rising cosine over the opening phase,
        // quarter-cosine fall over the closing phase, closed otherwise.
        let t_open = 0.40 * period;
        let t_close = 0.16 * period;
        let pulse_len = ((t_open + t_close).ceil() as usize).min(speech_len - pulse_start);
        for t in 0..pulse_len {
            let tau = t as f64;
            let g = if tau <= t_open {
                0.5 * (1.0 - (PI * tau / t_open).cos())
            } else {
                (PI * (tau - t_open) / (2.0 * t_close)).cos()
            };
            excitation[pulse_start + t] += amp * g;
        }
        pulse_start += period.round().max(1.0) as usize;
    }

    // --- vocal tract: three cascaded resonators, coefficients per segment -
    let per_segment_coeffs: Vec<[(f64, f64); 3]> = segments
        .iter()
        .map(|seg| {
            let mut coeffs = [(0.0, 0.0); 3];
            for (j, c) in coeffs.iter_mut().enumerate() {
                *c = resonator_coefficients(
                    profile.formant_frequencies[j] * seg.formant_mult[j],
                    profile.formant_bandwidths[j],
                    fs,
                );
            }
            coeffs
        })
        .collect();
    let mut speech = excitation;
    // `stage` picks the resonator inside each segment's coefficient set while
    // `seg_idx` moves along the utterance, so an iterator over either axis
    // alone cannot replace the index.
    #[allow(clippy::needless_range_loop)]
    for stage in 0..3 {
        let (mut y1, mut y2) = (0.0f64, 0.0f64);
        let mut seg_idx = 0usize;
        for (n, sample) in speech.iter_mut().enumerate() {
            while n >= boundaries[seg_idx + 1] && seg_idx + 1 < segments.len() {
                seg_idx += 1;
            }
            let (a1, a2) = per_segment_coeffs[seg_idx][stage];
            let y = *sample + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *sample = y;
        }
    }

    // Normalize the speech region to a fixed peak so the excitation and
    // resonator gains need no calibration.
    let peak = speech
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1e-12);
    let scale = SPEECH_PEAK / peak;
    for v in &mut speech {
        *v *= scale;
    }

    // --- assembly and optional noise injection ---------------------------
    let total_len = speech_len + 2 * pad_len;
    let mut samples = vec![0.0f64; total_len];
    samples[pad_len..pad_len + speech_len].copy_from_slice(&speech);

    if let Some(snr_db) = noise_snr_db {
        let noise_rng = ChaCha8Rng::seed_from_u64(mix(voice_seed ^ TAG_NOISE));
        let normal = Normal::new(0.0, 1.0).expect("unit normal is well-formed");
        let noise: Vec<f64> = normal.sample_iter(noise_rng).take(total_len).collect();
        // Scale so the SNR measured over the speech region is exact.
        let p_speech: f64 = speech.iter().map(|v| v * v).sum::<f64>() / speech_len as f64;
        let p_noise: f64 = noise[pad_len..pad_len + speech_len]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            / speech_len as f64;
        let target_noise_power = p_speech / 10f64.powf(snr_db / 10.0);
        let noise_scale = (target_noise_power / p_noise.max(1e-30)).sqrt();
        for (s, n) in samples.iter_mut().zip(&noise) {
            *s = (*s + noise_scale * n).clamp(-1.0, 1.0);
        }
    }

    Utterance::new(samples, SYNTH_SAMPLE_RATE)
}

/// Deterministic, well-separated speaker profiles for the toy corpus.
///
/// Pitch and the three formants step through coprime cycles so any two
/// speakers below index 420 differ in at least one dimension; the seeds for
/// per-speaker jitter are derived from `base_seed`.
pub fn corpus_speaker_profiles(count: usize, base_seed: u64) -> Vec<SyntheticSpeakerProfile> {
    (0..count)
        .map(|k| SyntheticSpeakerProfile {
            speaker_id: format!("speaker_{k:02}"),
            formant_frequencies: [
                280.0 + 55.0 * (k % 7) as f64,
                950.0 + 160.0 * (k % 5) as f64,
                2300.0 + 180.0 * (k % 4) as f64,
            ],
            formant_bandwidths: [
                60.0 + 5.0 * (k % 3) as f64,
                90.0 + 7.0 * (k % 3) as f64,
                130.0 + 9.0 * (k % 3) as f64,
            ],
            pitch: 90.0 + 30.0 * (k % 6) as f64,
            jitter_seed: mix(base_seed
                ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
                ^ TAG_VOICE),
        })
        .collect()
}

/// Renders a corpus: `speaker_count` speakers each speaking the phrases with
/// global indices `start_index .. start_index + utterances_per_speaker`.
///
/// Phrase seeds depend only on `base_seed` and the global phrase index, so
/// every speaker utters the same phrase at the same index (the text-dependent
/// setting), and a disjoint index range yields held-out phrases from the same
/// phrase family. Durations vary per phrase within [1.0, 1.4] s of speech.
pub fn synthesize_corpus(
    speaker_count: usize,
    utterances_per_speaker: usize,
    start_index: usize,
    base_seed: u64,
    noise_snr_db: Option<f64>,
) -> Result<Vec<(SyntheticSpeakerProfile, Vec<Utterance>)>, AudioError> {
    if speaker_count == 0 || utterances_per_speaker == 0 {
        return Err(AudioError::ConfigError(
            "corpus needs at least one speaker and one utterance".into(),
        ));
    }
    let profiles = corpus_speaker_profiles(speaker_count, base_seed);
    profiles
        .iter()
        .map(|profile| {
            let takes = (0..utterances_per_speaker)
                .map(|i| {
                    let index = (start_index + i) as u64;
                    let phrase_seed =
                        mix(base_seed ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03) ^ TAG_PHRASE);
                    let duration_s =
                        1.0 + 0.4 * (mix(phrase_seed ^ TAG_DURATION) as f64 / u64::MAX as f64);
                    synthesize_utterance(profile, phrase_seed, duration_s, noise_snr_db)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((profile.clone(), takes))
        })
        .collect()
}

/// Writes a synthesized corpus to disk in the standard layout
/// `<root>/<speaker_id>/utt_<nn>.wav`, numbering files from `start_index`.
///
/// Returns the written paths in (speaker, utterance) order.
pub fn write_corpus(
    root: &std::path::Path,
    corpus: &[(SyntheticSpeakerProfile, Vec<Utterance>)],
    start_index: usize,
) -> Result<Vec<std::path::PathBuf>, AudioError> {
    let mut written = Vec::new();
    for (profile, takes) in corpus {
        let speaker_dir = root.join(&profile.speaker_id);
        std::fs::create_dir_all(&speaker_dir)?;
        for (i, utterance) in takes.iter().enumerate() {
            let path = speaker_dir.join(format!("utt_{:02}.wav", start_index + i));
            super::write_wav(&path, utterance)?;
            written.push(path);
        }
    }
    Ok(written)
}
