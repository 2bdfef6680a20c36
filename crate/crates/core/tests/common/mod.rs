//! Fixture writers for integration tests. File formats are produced by hand
//! here rather than through the library so readers are checked against an
//! independent encoder.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use phonostat::textgrid::{Category, Phoneme};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const LEAD_S: f64 = 0.1;

/// (label, xmin, xmax)
pub type Phone = (String, f64, f64);

pub fn textgrid_text(xmax: f64, phones: &[Phone]) -> String {
    let mut tiles: Vec<Phone> = Vec::new();
    let mut t = 0.0;
    for (label, a, b) in phones {
        if *a > t {
            tiles.push((String::new(), t, *a));
        }
        tiles.push((label.clone(), *a, *b));
        t = *b;
    }
    if xmax > t {
        tiles.push((String::new(), t, xmax));
    }
    let mut s = String::new();
    let _ = write!(
        s,
        "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\nxmin = 0\nxmax = {xmax}\ntiers? <exists>\nsize = 2\nitem []:\n"
    );
    let _ = write!(
        s,
        "    item [1]:\n        class = \"IntervalTier\"\n        name = \"words\"\n        xmin = 0\n        xmax = {xmax}\n        intervals: size = 1\n        intervals [1]:\n            xmin = 0\n            xmax = {xmax}\n            text = \"\"\n"
    );
    let _ = write!(
        s,
        "    item [2]:\n        class = \"IntervalTier\"\n        name = \"phones\"\n        xmin = 0\n        xmax = {xmax}\n        intervals: size = {}\n",
        tiles.len()
    );
    for (i, (label, a, b)) in tiles.iter().enumerate() {
        let _ = write!(
            s,
            "        intervals [{}]:\n            xmin = {a}\n            xmax = {b}\n            text = \"{label}\"\n",
            i + 1
        );
    }
    s
}

pub fn pfe1_bytes(dim: usize, rows: &[Vec<f32>], hop: f64, win: f64, start: f64) -> Vec<u8> {
    let mut out = b"PFE1".to_vec();
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    for v in [hop, win, start] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for r in rows {
        assert_eq!(r.len(), dim);
        for v in r {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn wav_pcm16_bytes(samples: &[f64], rate: u32) -> Vec<u8> {
    let data_len = samples.len() as u32 * 2;
    let mut out = b"RIFF".to_vec();
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        let v = (s * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn label_for(p: Phoneme) -> String {
    match p.category() {
        Category::Vowel => format!("{}1", p.as_str()),
        Category::Consonant => p.as_str().to_string(),
    }
}

pub struct Row {
    pub utt_id: String,
    pub role: &'static str,
    pub system: String,
    pub wav: String,
    pub textgrid: String,
    pub embedding: String,
    pub speaker: String,
    pub duration: Option<f64>,
}

pub fn write_manifest(path: &Path, rows: &[Row]) {
    let mut s = String::from("utt_id,role,system,wav_path,textgrid_path,embedding_path,speaker_id,duration_s\n");
    for r in rows {
        let d = r.duration.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.utt_id, r.role, r.system, r.wav, r.textgrid, r.embedding, r.speaker, d
        );
    }
    fs::write(path, s).unwrap();
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Centers a sample set and maps it to unit unbiased covariance.
fn whiten(samples: &mut [Vec<f64>]) {
    let n = samples.len() as f64;
    let d = samples[0].len();
    let mut mean = vec![0.0; d];
    for s in samples.iter() {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / n;
        }
    }
    for s in samples.iter_mut() {
        for (v, m) in s.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let mut cov = vec![0.0; d * d];
    for s in samples.iter() {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += s[i] * s[j] / (n - 1.0);
            }
        }
    }
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = cov[i * d + j];
            for k in 0..j {
                acc -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = if i == j { acc.sqrt() } else { acc / l[j * d + j] };
        }
    }
    for s in samples.iter_mut() {
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut acc = s[i];
            for k in 0..i {
                acc -= l[i * d + k] * y[k];
            }
            y[i] = acc / l[i * d + i];
        }
        *s = y;
    }
}

/// Toy corpus for the end-to-end property: one synthetic system, one
/// external feature `external:toy`, and phoneme `i` (inventory order)
/// shifted by `shifts[i]` along the first embedding dimension.
///
/// Each phoneme/class population is centered and whitened before the
/// shift, so the fitted Gaussians have identity covariance and the
/// symmetric divergence of phoneme `i` is `shifts[i]^2 / 2`.
pub struct ShiftedCorpus {
    pub manifest: PathBuf,
    pub shifts: Vec<f64>,
}

pub fn shifted_corpus(dir: &Path, n_utts: usize, reps: usize, dim: usize, max_shift: f64, seed: u64) -> ShiftedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tokens = n_utts * reps;
    let shifts: Vec<f64> = (0..39).map(|i| max_shift * i as f64 / 38.0).collect();
    // vectors[role][phoneme][token]
    let mut vectors: Vec<Vec<Vec<Vec<f64>>>> = Vec::new();
    for role in 0..2 {
        let mut per_phoneme = Vec::new();
        for shift in &shifts {
            let mut set: Vec<Vec<f64>> = (0..n_tokens).map(|_| (0..dim).map(|_| normal(&mut rng)).collect()).collect();
            whiten(&mut set);
            if role == 1 {
                for v in &mut set {
                    v[0] += shift;
                }
            }
            per_phoneme.push(set);
        }
        vectors.push(per_phoneme);
    }

    let phone_s = 0.03;
    let hop = 0.01;
    let n_phones = 39 * reps;
    let xmax = 2.0 * LEAD_S + phone_s * n_phones as f64;
    let n_frames = (xmax / hop).round() as usize;
    for sub in ["real", "synth"] {
        fs::create_dir_all(dir.join(sub)).unwrap();
    }
    let mut rows = Vec::new();
    for u in 0..n_utts {
        let mut order: Vec<usize> = (0..n_phones).map(|k| k % 39).collect();
        order.shuffle(&mut rng);
        let mut seen = vec![0usize; 39];
        let mut phones = Vec::with_capacity(n_phones);
        let mut token_ids = Vec::with_capacity(n_phones);
        for (k, &p) in order.iter().enumerate() {
            let a = LEAD_S + phone_s * k as f64;
            phones.push((label_for(Phoneme::ALL[p]), round6(a), round6(a + phone_s)));
            token_ids.push((p, u * reps + seen[p]));
            seen[p] += 1;
        }
        let tg = textgrid_text(round6(xmax), &phones);
        let utt_id = format!("u{u:04}");
        for (role, sub, system) in [(0, "real", "ref"), (1, "synth", "toytts")] {
            let mut rows_f32 = vec![vec![0f32; dim]; n_frames];
            for (j, row) in rows_f32.iter_mut().enumerate() {
                let center = hop * j as f64 + hop / 2.0;
                if center < LEAD_S {
                    continue;
                }
                let k = ((center - LEAD_S) / phone_s).floor() as usize;
                if let Some(&(p, t)) = token_ids.get(k) {
                    *row = vectors[role][p][t].iter().map(|&v| v as f32).collect();
                }
            }
            let tg_rel = format!("{sub}/{utt_id}.TextGrid");
            let emb_rel = format!("{sub}/{utt_id}.{{name}}.pfe");
            fs::write(dir.join(&tg_rel), &tg).unwrap();
            fs::write(
                dir.join(emb_rel.replace("{name}", "toy")),
                pfe1_bytes(dim, &rows_f32, hop, hop, 0.0),
            )
            .unwrap();
            rows.push(Row {
                utt_id: utt_id.clone(),
                role: if role == 0 { "real" } else { "synthetic" },
                system: system.to_string(),
                wav: format!("{sub}/{utt_id}.wav"),
                textgrid: tg_rel,
                embedding: emb_rel,
                speaker: format!("spk{}", u % 5),
                duration: Some(round6(xmax)),
            });
        }
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &rows);
    ShiftedCorpus { manifest, shifts }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Small corpus with real WAV audio, TextGrids and 4-dim embeddings for
/// `systems`. Every utterance lasts 1 s with twenty 40 ms phones.
pub fn small_corpus(dir: &Path, systems: &[&str], n_utts: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = 16000u32;
    let n_samples = rate as usize;
    let phone_s = 0.04;
    let xmax = 1.0;
    let mut rows = Vec::new();
    let roles: Vec<(&str, &str, &str)> = std::iter::once(("real", "real", "ref"))
        .chain(systems.iter().map(|s| ("synthetic", *s, *s)))
        .collect();
    for (_, sub, _) in &roles {
        fs::create_dir_all(dir.join(sub)).unwrap();
    }
    for u in 0..n_utts {
        let phones: Vec<Phone> = (0..20)
            .map(|k| {
                let p = Phoneme::ALL[(u * 7 + k) % 39];
                let a = round6(LEAD_S + phone_s * k as f64);
                (label_for(p), a, round6(a + phone_s))
            })
            .collect();
        let tg = textgrid_text(xmax, &phones);
        let base: Vec<f64> = (0..n_samples)
            .map(|i| {
                let t = i as f64 / rate as f64;
                0.3 * (2.0 * std::f64::consts::PI * (200.0 + 10.0 * u as f64) * t).sin()
            })
            .collect();
        let utt_id = format!("utt{u:03}");
        for (s_idx, (role, sub, system)) in roles.iter().enumerate() {
            let gain = 1.0 - 0.1 * s_idx as f64;
            let samples: Vec<f64> = base.iter().map(|v| gain * v + 0.05 * normal(&mut rng)).collect();
            let n_frames = 49;
            let emb: Vec<Vec<f32>> = (0..n_frames)
                .map(|_| (0..4).map(|d| (normal(&mut rng) + if d == 0 { 0.5 * s_idx as f64 } else { 0.0 }) as f32).collect())
                .collect();
            let wav_rel = format!("{sub}/{utt_id}.wav");
            let tg_rel = format!("{sub}/{utt_id}.TextGrid");
            let emb_rel = format!("{sub}/{utt_id}.pfe");
            fs::write(dir.join(&wav_rel), wav_pcm16_bytes(&samples, rate)).unwrap();
            fs::write(dir.join(&tg_rel), &tg).unwrap();
            fs::write(dir.join(&emb_rel), pfe1_bytes(4, &emb, 0.02, 0.025, 0.0)).unwrap();
            rows.push(Row {
                utt_id: utt_id.clone(),
                role,
                system: system.to_string(),
                wav: wav_rel,
                textgrid: tg_rel,
                embedding: emb_rel,
                speaker: format!("spk{}", u % 4),
                duration: None,
            });
        }
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &rows);
    manifest
}

/// Every regular file under `dir` except the cache, with its bytes.
pub fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}
