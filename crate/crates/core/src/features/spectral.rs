use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::frames::frame_signal;
use super::{FeatureConfig, FeatureError, FeatureKind, FrameMatrix, Result};
use crate::audio::AudioBuffer;

/// Floor applied before taking the natural log of filterbank energies.
pub const LOG_FLOOR: f64 = 1e-10;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters over the one-sided power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Filterbank {
    /// `n_filters x n_bins`, row-major.
    weights: Vec<f64>,
    n_filters: usize,
    n_bins: usize,
    /// Peak frequency of each filter in Hz.
    pub centers_hz: Vec<f64>,
}

impl Filterbank {
    /// Builds filters from `n + 2` ascending edge frequencies.
    fn from_edges(edges_hz: &[f64], n_fft: usize, sample_rate: u32) -> Self {
        let n_filters = edges_hz.len() - 2;
        let n_bins = n_fft / 2 + 1;
        let bin_hz = sample_rate as f64 / n_fft as f64;
        let mut weights = vec![0.0; n_filters * n_bins];
        for m in 0..n_filters {
            let (lo, center, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let up = (f - lo) / (center - lo);
                let down = (hi - f) / (hi - center);
                weights[m * n_bins + k] = up.min(down).max(0.0);
            }
        }
        Self {
            weights,
            n_filters,
            n_bins,
            centers_hz: edges_hz[1..=n_filters].to_vec(),
        }
    }

    pub fn n_filters(&self) -> usize {
        self.n_filters
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    /// Natural log of filter energies, floored at [`LOG_FLOOR`].
    pub fn log_energies(&self, power: &[f64]) -> Vec<f64> {
        debug_assert_eq!(power.len(), self.n_bins);
        (0..self.n_filters)
            .map(|m| {
                let e: f64 = self.row(m).iter().zip(power).map(|(w, p)| w * p).sum();
                e.max(LOG_FLOOR).ln()
            })
            .collect()
    }
}

/// Mel filterbank with edges equally spaced on the HTK mel scale.
pub fn mel_filterbank(n_mels: usize, n_fft: usize, sample_rate: u32, fmin: f64, fmax: f64) -> Filterbank {
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    Filterbank::from_edges(&edges, n_fft, sample_rate)
}

/// Filterbank with edges equally spaced in Hz.
pub fn linear_filterbank(n_filters: usize, n_fft: usize, sample_rate: u32, fmin: f64, fmax: f64) -> Filterbank {
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| fmin + (fmax - fmin) * i as f64 / (n_filters + 1) as f64)
        .collect();
    Filterbank::from_edges(&edges, n_fft, sample_rate)
}

/// Orthonormal DCT-II, keeping the first `n_out` coefficients.
pub fn dct_ortho(x: &[f64], n_out: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Inverse of [`dct_ortho`] given all coefficients (orthonormal DCT-III).
pub fn idct_ortho(c: &[f64]) -> Vec<f64> {
    let n = c.len() as f64;
    (0..c.len())
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, v)| {
                    let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                    scale * v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()
                })
                .sum()
        })
        .collect()
}

/// Reusable extractor holding the FFT plan, filterbank and DCT basis.
pub struct SpectralExtractor {
    config: FeatureConfig,
    kind: FeatureKind,
    fft: Arc<dyn Fft<f64>>,
    filterbank: Filterbank,
    dct_basis: Option<Vec<Vec<f64>>>,
}

impl SpectralExtractor {
    pub fn new(config: &FeatureConfig, kind: FeatureKind) -> Result<Self> {
        config.validate()?;
        let (filterbank, dct_basis) = match kind {
            FeatureKind::LogSpec => (
                mel_filterbank(config.n_mels, config.n_fft, config.sample_rate, config.fmin, config.fmax),
                None,
            ),
            FeatureKind::Lfcc => {
                let fb = linear_filterbank(
                    config.n_linear_filters,
                    config.n_fft,
                    config.sample_rate,
                    config.fmin,
                    config.fmax,
                );
                let n = fb.n_filters();
                let basis = (0..config.n_lfcc)
                    .map(|k| {
                        let mut unit = vec![0.0; n];
                        unit[k] = 1.0;
                        idct_ortho(&unit)
                    })
                    .collect();
                (fb, Some(basis))
            }
            FeatureKind::External(_) => {
                return Err(FeatureError::Config(format!("{kind} is not a spectral feature")))
            }
        };
        let fft = FftPlanner::new().plan_fft_forward(config.n_fft);
        Ok(Self {
            config: config.clone(),
            kind,
            fft,
            filterbank,
            dct_basis,
        })
    }

    pub fn kind(&self) -> &FeatureKind {
        &self.kind
    }

    pub fn filterbank(&self) -> &Filterbank {
        &self.filterbank
    }

    pub fn dim(&self) -> usize {
        match self.dct_basis {
            Some(ref b) => b.len(),
            None => self.filterbank.n_filters(),
        }
    }

    fn power_spectrum(&self, frame: &[f64], scratch: &mut Vec<Complex<f64>>) -> Vec<f64> {
        scratch.clear();
        scratch.extend(frame.iter().map(|&v| Complex::new(v, 0.0)));
        scratch.resize(self.config.n_fft, Complex::new(0.0, 0.0));
        self.fft.process(scratch);
        scratch[..self.config.n_fft / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Log filterbank energies for one already-windowed frame.
    pub fn log_filterbank(&self, frame: &[f64]) -> Vec<f64> {
        let mut scratch = Vec::with_capacity(self.config.n_fft);
        self.filterbank.log_energies(&self.power_spectrum(frame, &mut scratch))
    }

    /// DCT of a log filterbank vector onto the retained cepstral basis.
    pub fn cepstrum(&self, log_fb: &[f64]) -> Vec<f64> {
        match self.dct_basis {
            Some(ref basis) => basis
                .iter()
                .map(|b| b.iter().zip(log_fb).map(|(w, v)| w * v).sum())
                .collect(),
            None => log_fb.to_vec(),
        }
    }

    pub fn extract(&self, audio: &AudioBuffer) -> Result<FrameMatrix> {
        if audio.is_empty() {
            return Err(FeatureError::EmptyAudio);
        }
        if audio.sample_rate != self.config.sample_rate {
            return Err(FeatureError::SampleRate {
                found: audio.sample_rate,
                expected: self.config.sample_rate,
            });
        }
        let win = self.config.win_samples();
        let hop = self.config.hop_samples();
        let mut scratch = Vec::with_capacity(self.config.n_fft);
        let frames = frame_signal(&audio.samples, win, hop);
        let dim = self.dim();
        let mut data = Vec::with_capacity(frames.len() * dim);
        for frame in &frames {
            let log_fb = self.filterbank.log_energies(&self.power_spectrum(frame, &mut scratch));
            data.extend(self.cepstrum(&log_fb));
        }
        let sr = self.config.sample_rate as f64;
        Ok(FrameMatrix::new(data, frames.len(), dim, hop as f64 / sr, win as f64 / sr, 0.0))
    }
}

/// Log-mel spectrogram (80 bins by default).
pub fn logspec(audio: &AudioBuffer, config: &FeatureConfig) -> Result<FrameMatrix> {
    SpectralExtractor::new(config, FeatureKind::LogSpec)?.extract(audio)
}

/// Linear-frequency cepstral coefficients (20 by default).
pub fn lfcc(audio: &AudioBuffer, config: &FeatureConfig) -> Result<FrameMatrix> {
    SpectralExtractor::new(config, FeatureKind::Lfcc)?.extract(audio)
}
