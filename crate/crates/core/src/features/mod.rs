//! Frame-level feature extraction and per-phoneme pooling.
//!
//! Handcrafted features (log-mel spectrogram and LFCC) are computed here from
//! 16 kHz audio. Self-supervised embeddings are computed elsewhere and
//! ingested through the PFE1 container format.

mod frames;
mod pfe;
mod pool;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use frames::{frame_count, frame_signal, hann_window};
pub use pfe::{decode_pfe1, encode_pfe1, load_embeddings, write_embeddings, PFE1_HEADER_LEN, PFE1_MAGIC};
pub use pool::{frame_centers, pool_frames, pool_phoneme, PhonemeVector, VectorSource};
pub use spectral::{dct_ortho, hz_to_mel, idct_ortho, lfcc, linear_filterbank, logspec, mel_filterbank, mel_to_hz, Filterbank, SpectralExtractor, LOG_FLOOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("invalid feature configuration: {0}")]
    Config(String),
    #[error("unknown feature kind {0:?} (expected logspec, lfcc or external:<name>)")]
    UnknownKind(String),
    #[error("audio is empty")]
    EmptyAudio,
    #[error("audio sample rate {found} Hz does not match the configured {expected} Hz")]
    SampleRate { found: u32, expected: u32 },
    #[error("frame matrix is empty")]
    EmptyFrames,
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("bad PFE1 magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported PFE1 version {0}")]
    BadVersion(u32),
    #[error("PFE1 header is truncated")]
    TruncatedHeader,
    #[error("PFE1 header has invalid timing or shape: {0}")]
    BadHeader(String),
    #[error("PFE1 payload is {found} bytes, header implies {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("non-finite value at frame {frame}, dim {dim}")]
    NonFinite { frame: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, FeatureError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureKind {
    LogSpec,
    Lfcc,
    /// Precomputed frame embeddings, e.g. `external:wavlm`.
    External(String),
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::LogSpec => f.write_str("logspec"),
            FeatureKind::Lfcc => f.write_str("lfcc"),
            FeatureKind::External(name) => write!(f, "external:{name}"),
        }
    }
}

impl FromStr for FeatureKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "logspec" => Ok(FeatureKind::LogSpec),
            "lfcc" => Ok(FeatureKind::Lfcc),
            other => match other.strip_prefix("external:") {
                Some(name) if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') => {
                    Ok(FeatureKind::External(name.to_string()))
                }
                _ => Err(FeatureError::UnknownKind(s.to_string())),
            },
        }
    }
}

impl From<FeatureKind> for String {
    fn from(k: FeatureKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for FeatureKind {
    type Error = FeatureError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parameters shared by the handcrafted extractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub n_fft: usize,
    pub hop_ms: f64,
    pub win_ms: f64,
    pub n_mels: usize,
    pub n_lfcc: usize,
    pub n_linear_filters: usize,
    pub fmin: f64,
    pub fmax: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            n_fft: 512,
            hop_ms: 10.0,
            win_ms: 25.0,
            n_mels: 80,
            n_lfcc: 20,
            n_linear_filters: 40,
            fmin: 0.0,
            fmax: 8000.0,
        }
    }
}

impl FeatureConfig {
    pub fn win_samples(&self) -> usize {
        (self.win_ms * self.sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.hop_ms * self.sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FeatureError::Config(m));
        if self.sample_rate == 0 || self.hop_samples() == 0 || self.win_samples() == 0 {
            return bad("sample rate, hop and window must be positive".into());
        }
        if self.hop_ms > self.win_ms {
            return bad(format!("hop {} ms exceeds window {} ms", self.hop_ms, self.win_ms));
        }
        if self.n_fft < self.win_samples() {
            return bad(format!("n_fft {} is shorter than the window ({} samples)", self.n_fft, self.win_samples()));
        }
        if self.n_lfcc > self.n_linear_filters {
            return bad(format!("n_lfcc {} exceeds n_linear_filters {}", self.n_lfcc, self.n_linear_filters));
        }
        if self.n_mels == 0 || self.n_lfcc == 0 {
            return bad("filter and coefficient counts must be positive".into());
        }
        if !(self.fmin >= 0.0 && self.fmin < self.fmax && self.fmax <= self.sample_rate as f64 / 2.0) {
            return bad(format!("frequency range [{}, {}] is invalid", self.fmin, self.fmax));
        }
        Ok(())
    }
}

/// Time-ordered frame vectors with the timing needed to place each frame.
///
/// Frame `i` spans `[start_offset_s + i * hop_s, start_offset_s + i * hop_s + win_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    data: Vec<f64>,
    n_frames: usize,
    dim: usize,
    pub hop_s: f64,
    pub win_s: f64,
    pub start_offset_s: f64,
}

impl FrameMatrix {
    pub fn new(data: Vec<f64>, n_frames: usize, dim: usize, hop_s: f64, win_s: f64, start_offset_s: f64) -> Self {
        assert_eq!(data.len(), n_frames * dim, "frame data must be n_frames * dim");
        Self {
            data,
            n_frames,
            dim,
            hop_s,
            win_s,
            start_offset_s,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], hop_s: f64, win_s: f64, start_offset_s: f64) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(data, rows.len(), dim, hop_s, win_s, start_offset_s)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.n_frames == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.n_frames)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
