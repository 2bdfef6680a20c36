//! PFE1: the container for externally computed frame embeddings.
//!
//! Layout (little-endian): magic `PFE1`, u32 version (1), u32 dim,
//! u32 n_frames, f64 hop seconds, f64 window seconds, f64 start offset
//! seconds, then `n_frames * dim` f32 values in frame-major order.

use std::fs;
use std::path::Path;

use super::{FeatureError, FrameMatrix, Result};

pub const PFE1_MAGIC: [u8; 4] = *b"PFE1";
pub const PFE1_HEADER_LEN: usize = 40;

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn read_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode_pfe1(bytes: &[u8]) -> Result<FrameMatrix> {
    if bytes.len() < 4 {
        return Err(FeatureError::TruncatedHeader);
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != PFE1_MAGIC {
        return Err(FeatureError::BadMagic(magic));
    }
    if bytes.len() < PFE1_HEADER_LEN {
        return Err(FeatureError::TruncatedHeader);
    }
    let version = read_u32(bytes, 4);
    if version != 1 {
        return Err(FeatureError::BadVersion(version));
    }
    let dim = read_u32(bytes, 8) as usize;
    let n_frames = read_u32(bytes, 12) as usize;
    let hop_s = read_f64(bytes, 16);
    let win_s = read_f64(bytes, 24);
    let start_offset_s = read_f64(bytes, 32);
    if dim == 0 {
        return Err(FeatureError::BadHeader("dim is 0".into()));
    }
    if !(hop_s.is_finite() && hop_s > 0.0 && win_s.is_finite() && win_s > 0.0 && start_offset_s.is_finite()) {
        return Err(FeatureError::BadHeader(format!(
            "hop={hop_s}, window={win_s}, start={start_offset_s}"
        )));
    }

    let payload = &bytes[PFE1_HEADER_LEN..];
    let expected = n_frames
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| FeatureError::BadHeader("shape overflows".into()))?;
    if payload.len() != expected {
        return Err(FeatureError::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let mut data = Vec::with_capacity(n_frames * dim);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FeatureError::NonFinite {
                frame: i / dim,
                dim: i % dim,
            });
        }
        data.push(v as f64);
    }
    Ok(FrameMatrix::new(data, n_frames, dim, hop_s, win_s, start_offset_s))
}

/// Encodes a frame matrix as PFE1. Values are narrowed to f32.
pub fn encode_pfe1(fm: &FrameMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(PFE1_HEADER_LEN + fm.as_slice().len() * 4);
    out.extend_from_slice(&PFE1_MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(fm.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(fm.n_frames() as u32).to_le_bytes());
    out.extend_from_slice(&fm.hop_s.to_le_bytes());
    out.extend_from_slice(&fm.win_s.to_le_bytes());
    out.extend_from_slice(&fm.start_offset_s.to_le_bytes());
    for &v in fm.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn load_embeddings(path: &Path) -> Result<FrameMatrix> {
    let bytes = fs::read(path).map_err(|e| FeatureError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    decode_pfe1(&bytes)
}

pub fn write_embeddings(path: &Path, fm: &FrameMatrix) -> Result<()> {
    fs::write(path, encode_pfe1(fm)).map_err(|e| FeatureError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
