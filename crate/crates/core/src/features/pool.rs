use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureKind, FrameMatrix, Result};
use crate::corpus::Role;
use crate::textgrid::{Interval, Phoneme};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorSource {
    pub utt_id: String,
    pub role: Role,
    pub system: String,
    pub feature: FeatureKind,
}

/// One phoneme token reduced to a single vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeVector {
    pub phoneme: Phoneme,
    pub vector: Vec<f64>,
    pub source: VectorSource,
    pub n_frames_pooled: usize,
}

/// Center time of every frame: `start + i * hop + win / 2`.
pub fn frame_centers(fm: &FrameMatrix) -> impl Iterator<Item = f64> + '_ {
    (0..fm.n_frames()).map(move |i| fm.start_offset_s + i as f64 * fm.hop_s + fm.win_s / 2.0)
}

/// Mean of the frames whose centers fall in `[xmin, xmax)`.
///
/// When no center falls inside the interval, the single frame whose center
/// is nearest the interval midpoint is used (earliest frame on ties).
/// Returns the pooled vector and the number of frames averaged.
pub fn pool_frames(fm: &FrameMatrix, interval: &Interval) -> Result<(Vec<f64>, usize)> {
    if fm.is_empty() {
        return Err(FeatureError::EmptyFrames);
    }
    let mut selected: Vec<usize> = frame_centers(fm)
        .enumerate()
        .filter(|&(_, c)| c >= interval.xmin && c < interval.xmax)
        .map(|(i, _)| i)
        .collect();
    if selected.is_empty() {
        let mid = 0.5 * (interval.xmin + interval.xmax);
        let nearest = frame_centers(fm)
            .enumerate()
            .min_by(|a, b| (a.1 - mid).abs().total_cmp(&(b.1 - mid).abs()))
            .map(|(i, _)| i)
            .expect("non-empty frame matrix");
        selected.push(nearest);
    }
    let mut mean = vec![0.0; fm.dim()];
    for &i in &selected {
        for (m, v) in mean.iter_mut().zip(fm.row(i)) {
            *m += v;
        }
    }
    let n = selected.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok((mean, selected.len()))
}

pub fn pool_phoneme(fm: &FrameMatrix, interval: &Interval, phoneme: Phoneme, source: VectorSource) -> Result<PhonemeVector> {
    let (vector, n_frames_pooled) = pool_frames(fm, interval)?;
    Ok(PhonemeVector {
        phoneme,
        vector,
        source,
        n_frames_pooled,
    })
}
