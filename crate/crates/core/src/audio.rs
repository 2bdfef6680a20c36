//! Mono 16 kHz WAV reading and time-to-sample conversion.

use std::fs;
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

pub const EXPECTED_SAMPLE_RATE: u32 = 16_000;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("not a RIFF/WAVE file")]
    NotWave,
    #[error("unsupported codec: format tag {format_tag}, {bits} bits per sample")]
    UnsupportedCodec { format_tag: u16, bits: u16 },
    #[error("unsupported channel count {0} (expected mono)")]
    UnsupportedChannels(u16),
    #[error("sample rate {found} Hz does not match the expected {expected} Hz")]
    SampleRate { found: u32, expected: u32 },
    #[error("truncated {0} chunk")]
    Truncated(&'static str),
    #[error("missing {0} chunk")]
    MissingChunk(&'static str),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("invalid time span [{t0}, {t1})")]
    InvalidSpan { t0: f64, t1: f64 },
}

pub type Result<T> = std::result::Result<T, AudioError>;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavFormat {
    pub format_tag: u16,
    pub channels: u16,
    pub sample_rate: u32,
    pub block_align: u16,
    pub bits_per_sample: u16,
}

struct Chunks<'a> {
    fmt: &'a [u8],
    data: &'a [u8],
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn find_chunks(bytes: &[u8]) -> Result<Chunks<'_>> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::NotWave);
    }
    let mut fmt = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                let end = body.checked_add(size).filter(|&e| e <= bytes.len());
                fmt = Some(&bytes[body..end.ok_or(AudioError::Truncated("fmt"))?]);
            }
            b"data" => {
                let end = body.checked_add(size).filter(|&e| e <= bytes.len());
                data = Some(&bytes[body..end.ok_or(AudioError::Truncated("data"))?]);
            }
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body.saturating_add(size).saturating_add(size & 1);
    }
    Ok(Chunks {
        fmt: fmt.ok_or(AudioError::MissingChunk("fmt"))?,
        data: data.ok_or(AudioError::MissingChunk("data"))?,
    })
}

fn parse_format(fmt: &[u8]) -> Result<WavFormat> {
    if fmt.len() < 16 {
        return Err(AudioError::Truncated("fmt"));
    }
    let mut format_tag = u16_at(fmt, 0);
    if format_tag == FORMAT_EXTENSIBLE && fmt.len() >= 26 {
        // First two bytes of the sub-format GUID carry the real tag.
        format_tag = u16_at(fmt, 24);
    }
    Ok(WavFormat {
        format_tag,
        channels: u16_at(fmt, 2),
        sample_rate: u32_at(fmt, 4),
        block_align: u16_at(fmt, 12),
        bits_per_sample: u16_at(fmt, 14),
    })
}

fn validate(format: &WavFormat) -> Result<()> {
    match (format.format_tag, format.bits_per_sample) {
        (FORMAT_PCM, 16) | (FORMAT_IEEE_FLOAT, 32) => {}
        (format_tag, bits) => return Err(AudioError::UnsupportedCodec { format_tag, bits }),
    }
    if format.channels != 1 {
        return Err(AudioError::UnsupportedChannels(format.channels));
    }
    if format.sample_rate != EXPECTED_SAMPLE_RATE {
        return Err(AudioError::SampleRate {
            found: format.sample_rate,
            expected: EXPECTED_SAMPLE_RATE,
        });
    }
    if format.block_align != format.bits_per_sample / 8 {
        return Err(AudioError::UnsupportedCodec {
            format_tag: format.format_tag,
            bits: format.bits_per_sample,
        });
    }
    Ok(())
}

/// Decodes an in-memory RIFF/WAVE file. Unknown chunks are skipped.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let chunks = find_chunks(bytes)?;
    let format = parse_format(chunks.fmt)?;
    validate(&format)?;
    let align = format.block_align as usize;
    if chunks.data.len() % align != 0 {
        return Err(AudioError::Truncated("data"));
    }
    let samples: Vec<f64> = match format.format_tag {
        FORMAT_PCM => chunks
            .data
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
            .collect(),
        _ => chunks
            .data
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect(),
    };
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(AudioError::NonFinite(i));
    }
    Ok(AudioBuffer::new(samples, format.sample_rate))
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let bytes = fs::read(path).map_err(|e| AudioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    decode_wav(&bytes)
}

/// Duration in seconds from the header alone, without decoding samples.
pub fn wav_duration(path: &Path) -> Result<f64> {
    let bytes = fs::read(path).map_err(|e| AudioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let chunks = find_chunks(&bytes)?;
    let format = parse_format(chunks.fmt)?;
    validate(&format)?;
    let frames = chunks.data.len() / format.block_align as usize;
    Ok(frames as f64 / format.sample_rate as f64)
}

/// Encodes mono samples as 16-bit PCM WAV. Values are clamped to [-1, 1).
pub fn encode_wav_pcm16(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Sample index range `[i0, i1)` covering `[t0, t1)`.
///
/// Boundaries are `round(t * sr)` with halves rounded away from zero and
/// clamped to the buffer. An empty range means the span lies entirely
/// outside the audio.
pub fn slice_segment(audio: &AudioBuffer, t0: f64, t1: f64) -> Result<Range<usize>> {
    if !(t0.is_finite() && t1.is_finite()) || t0 < 0.0 || t0 >= t1 {
        return Err(AudioError::InvalidSpan { t0, t1 });
    }
    let sr = audio.sample_rate as f64;
    let len = audio.len();
    let to_index = |t: f64| ((t * sr).round() as usize).min(len);
    let i0 = to_index(t0);
    let i1 = to_index(t1).max(i0);
    Ok(i0..i1)
}
