//! Minimal RIFF/WAVE codec for 16-bit signed PCM mono.
//!
//! The reader walks the chunk list rather than assuming a fixed 44-byte
//! header, so files with extra chunks (LIST, fact, ...) load fine. Both
//! directions scale by the same factor — integer `v` reads as `v / 32768`,
//! and the writer rounds `v · 32768` with the positive end clipped to
//! 32767 — so −32768 maps exactly to −1.0 and a round trip moves any
//! sample by at most one quantization step, 1/32768.

use std::fs;
use std::path::Path;

use super::{AudioError, Utterance};

const PCM_SCALE: f64 = 32768.0;

/// Reads a 16-bit signed PCM mono WAV file.
///
/// Any other encoding (compressed, multi-channel, different bit depth) is
/// rejected with [`AudioError::FormatUnsupported`]; structural damage is
/// reported as [`AudioError::CorruptHeader`].
pub fn read_wav(path: &Path) -> Result<Utterance, AudioError> {
    let bytes = fs::read(path)?;
    decode_wav(&bytes)
}

/// Writes an utterance as a 16-bit signed PCM mono WAV file.
///
/// Samples are clamped to `[-1, 1]` before quantization, so out-of-range
/// values saturate instead of wrapping.
pub fn write_wav(path: &Path, utterance: &Utterance) -> Result<(), AudioError> {
    if utterance.samples.is_empty() {
        return Err(AudioError::ConfigError(
            "refusing to write an empty utterance".into(),
        ));
    }
    if utterance.sample_rate == 0 {
        return Err(AudioError::ConfigError(
            "sample rate must be positive".into(),
        ));
    }
    fs::write(path, encode_wav(utterance))?;
    Ok(())
}

fn decode_wav(bytes: &[u8]) -> Result<Utterance, AudioError> {
    if bytes.len() < 12 {
        return Err(AudioError::CorruptHeader(
            "file shorter than a RIFF header".into(),
        ));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(AudioError::CorruptHeader("missing RIFF magic".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(AudioError::CorruptHeader("missing WAVE form type".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format tag, channels, rate, bits)
    let mut data: Option<&[u8]> = None;

    // Walk the chunk list. Chunks are word-aligned: an odd-sized chunk is
    // followed by one pad byte that is not counted in its size field.
    let mut offset = 12;
    while offset + 8 <= bytes.len() {
        let id = &bytes[offset..offset + 4];
        let size = u32::from_le_bytes(bytes[offset + 4..offset + 8].try_into().unwrap()) as usize;
        let body_start = offset + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            return Err(AudioError::CorruptHeader(format!(
                "chunk {:?} claims {} bytes past end of file",
                String::from_utf8_lossy(id),
                body_end - bytes.len()
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioError::CorruptHeader(
                        "fmt chunk shorter than 16 bytes".into(),
                    ));
                }
                let tag = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {} // skip LIST, fact, and other ancillary chunks
        }
        offset = body_end + (size & 1);
    }

    let (tag, channels, rate, bits) =
        fmt.ok_or_else(|| AudioError::CorruptHeader("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::CorruptHeader("no data chunk".into()))?;

    if tag != 1 {
        return Err(AudioError::FormatUnsupported(format!(
            "format tag {tag}; only uncompressed PCM (1) is supported"
        )));
    }
    if channels != 1 {
        return Err(AudioError::FormatUnsupported(format!(
            "{channels} channels; only mono is supported"
        )));
    }
    if bits != 16 {
        return Err(AudioError::FormatUnsupported(format!(
            "{bits}-bit samples; only 16-bit is supported"
        )));
    }
    if rate == 0 {
        return Err(AudioError::CorruptHeader("sample rate is zero".into()));
    }
    if data.len() % 2 != 0 {
        return Err(AudioError::CorruptHeader(
            "data chunk has an odd byte count".into(),
        ));
    }
    if data.is_empty() {
        return Err(AudioError::CorruptHeader("data chunk is empty".into()));
    }

    let samples = data
        .chunks_exact(2)
        .map(|pair| i16::from_le_bytes([pair[0], pair[1]]) as f64 / PCM_SCALE)
        .collect();
    Ok(Utterance {
        samples,
        sample_rate: rate,
    })
}

fn encode_wav(utterance: &Utterance) -> Vec<u8> {
    let data_len = utterance.samples.len() * 2;
    let rate = utterance.sample_rate;
    let byte_rate = rate * 2;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &utterance.samples {
        let q = (s.clamp(-1.0, 1.0) * PCM_SCALE).round().min(32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}
