use std::f64::consts::PI;

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Number of frames for `n_samples`: `floor((N - win) / hop) + 1`, or 1 when
/// the signal is shorter than one window.
pub fn frame_count(n_samples: usize, win: usize, hop: usize) -> usize {
    if n_samples <= win {
        1
    } else {
        (n_samples - win) / hop + 1
    }
}

/// Splits `samples` into Hann-windowed frames of `win` samples every `hop`
/// samples. A signal shorter than one window yields a single zero-padded frame.
pub fn frame_signal(samples: &[f64], win: usize, hop: usize) -> Vec<Vec<f64>> {
    let window = hann_window(win);
    let n = frame_count(samples.len(), win, hop);
    (0..n)
        .map(|i| {
            let start = i * hop;
            let end = (start + win).min(samples.len());
            let mut frame = vec![0.0; win];
            for (dst, (s, w)) in frame.iter_mut().zip(samples[start..end].iter().zip(&window)) {
                *dst = s * w;
            }
            frame
        })
        .collect()
}
