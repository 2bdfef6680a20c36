//! Corpus manifest loading, real/synthetic pairing, balanced subset
//! selection and per-system corpus statistics.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio;

pub const REQUIRED_COLUMNS: [&str; 5] = ["utt_id", "role", "system", "wav_path", "textgrid_path"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("cannot read manifest {path}: {message}")]
    Io { path: String, message: String },
    #[error("manifest CSV error: {0}")]
    Csv(String),
    #[error("manifest is missing required column {0:?}")]
    MissingColumn(String),
    #[error("manifest line {line}: empty {column}")]
    EmptyField { line: u64, column: String },
    #[error("manifest line {line}: unknown role {value:?} (expected real or synthetic)")]
    UnknownRole { line: u64, value: String },
    #[error("manifest line {line}: invalid duration {value:?}")]
    BadDuration { line: u64, value: String },
    #[error("duplicate manifest entry (utt_id={utt_id}, system={system}, role={role})")]
    DuplicateKey {
        utt_id: String,
        system: String,
        role: Role,
    },
    #[error("real entries name more than one reference corpus: {0:?}")]
    MixedReference(Vec<String>),
    #[error("unknown system {system:?} (known synthetic systems: {known:?})")]
    UnknownSystem { system: String, known: Vec<String> },
    #[error("cannot represent all {speakers} speakers with {requested} utterances")]
    TooFewForSpeakers { requested: usize, speakers: usize },
    #[error("requested {requested} utterances but only {available} real utterances exist")]
    NotEnoughUtterances { requested: usize, available: usize },
    #[error("real utterance {0:?} has no speaker_id")]
    MissingSpeaker(String),
    #[error("cannot determine duration of {utt_id}: {message}")]
    Duration { utt_id: String, message: String },
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Real,
    Synthetic,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Real => "real",
            Role::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub utt_id: String,
    pub role: Role,
    pub system: String,
    pub wav_path: PathBuf,
    pub textgrid_path: PathBuf,
    pub embedding_path: Option<PathBuf>,
    pub speaker_id: Option<String>,
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtterancePair {
    pub real: ManifestEntry,
    pub synthetic: ManifestEntry,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<UtterancePair>,
    /// Real utterances with no counterpart from the system.
    pub unpaired_real: Vec<String>,
    /// Synthetic utterances with no real counterpart.
    pub unpaired_synthetic: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemStats {
    pub system: String,
    pub file_count: usize,
    /// None when the system has no files.
    pub mean_duration_s: Option<f64>,
    pub total_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusStats {
    pub systems: Vec<SystemStats>,
}

impl CorpusStats {
    /// Adds zero-count rows for systems that have no entries.
    pub fn with_systems<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        for name in names {
            let name = name.as_ref();
            if !self.systems.iter().any(|s| s.system == name) {
                self.systems.push(SystemStats {
                    system: name.to_string(),
                    file_count: 0,
                    mean_duration_s: None,
                    total_hours: 0.0,
                });
            }
        }
        self.systems.sort_by(|a, b| a.system.cmp(&b.system));
        self
    }

    pub fn get(&self, system: &str) -> Option<&SystemStats> {
        self.systems.iter().find(|s| s.system == system)
    }
}

impl SystemStats {
    /// Mean duration with two decimals, or "n/a" for an empty system.
    pub fn mean_display(&self) -> String {
        match self.mean_duration_s {
            Some(m) => format!("{m:.2}"),
            None => "n/a".to_string(),
        }
    }
}

fn resolve(base: &Path, raw: &str) -> PathBuf {
    let p = Path::new(raw);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads a manifest CSV. Relative paths resolve against the manifest's
/// directory. Empty optional cells become `None`.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)
}

/// Parses manifest CSV text; `base` anchors relative paths.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Csv(e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut required = [0usize; 5];
    for (slot, name) in required.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = column(name).ok_or_else(|| CorpusError::MissingColumn(name.to_string()))?;
    }
    let [utt_col, role_col, system_col, wav_col, tg_col] = required;
    let emb_col = column("embedding_path");
    let spk_col = column("speaker_id");
    let dur_col = column("duration_s");

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::Csv(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| record.get(i).unwrap_or("");
        let optional = |i: Option<usize>| i.map(get).filter(|v| !v.is_empty());
        let non_empty = |i: usize, name: &str| {
            let v = get(i);
            if v.is_empty() {
                Err(CorpusError::EmptyField {
                    line,
                    column: name.to_string(),
                })
            } else {
                Ok(v)
            }
        };

        let utt_id = non_empty(utt_col, "utt_id")?.to_string();
        let role = match get(role_col).to_ascii_lowercase().as_str() {
            "real" => Role::Real,
            "synthetic" => Role::Synthetic,
            other => {
                return Err(CorpusError::UnknownRole {
                    line,
                    value: other.to_string(),
                })
            }
        };
        let system = non_empty(system_col, "system")?.to_string();
        let wav_path = resolve(base, non_empty(wav_col, "wav_path")?);
        let textgrid_path = resolve(base, non_empty(tg_col, "textgrid_path")?);
        let duration_s = match optional(dur_col) {
            Some(raw) => Some(
                raw.parse::<f64>()
                    .ok()
                    .filter(|d| d.is_finite() && *d >= 0.0)
                    .ok_or_else(|| CorpusError::BadDuration {
                        line,
                        value: raw.to_string(),
                    })?,
            ),
            None => None,
        };

        if !seen.insert((utt_id.clone(), system.clone(), role)) {
            return Err(CorpusError::DuplicateKey {
                utt_id,
                system,
                role,
            });
        }
        entries.push(ManifestEntry {
            utt_id,
            role,
            system,
            wav_path,
            textgrid_path,
            embedding_path: optional(emb_col).map(|p| resolve(base, p)),
            speaker_id: optional(spk_col).map(str::to_string),
            duration_s,
        });
    }

    let references: BTreeSet<&str> = entries
        .iter()
        .filter(|e| e.role == Role::Real)
        .map(|e| e.system.as_str())
        .collect();
    if references.len() > 1 {
        return Err(CorpusError::MixedReference(
            references.into_iter().map(str::to_string).collect(),
        ));
    }
    Ok(entries)
}

/// Names of the synthetic systems present, sorted.
pub fn synthetic_systems(entries: &[ManifestEntry]) -> Vec<String> {
    let set: BTreeSet<&str> = entries
        .iter()
        .filter(|e| e.role == Role::Synthetic)
        .map(|e| e.system.as_str())
        .collect();
    set.into_iter().map(str::to_string).collect()
}

/// Pairs every real utterance with the given system's synthetic version.
/// Pairs come out sorted by utterance id.
pub fn pair_utterances(entries: &[ManifestEntry], system: &str) -> Result<Pairing> {
    let known = synthetic_systems(entries);
    if !known.iter().any(|s| s == system) {
        return Err(CorpusError::UnknownSystem {
            system: system.to_string(),
            known,
        });
    }
    let real: BTreeMap<&str, &ManifestEntry> = entries
        .iter()
        .filter(|e| e.role == Role::Real)
        .map(|e| (e.utt_id.as_str(), e))
        .collect();
    let synth: BTreeMap<&str, &ManifestEntry> = entries
        .iter()
        .filter(|e| e.role == Role::Synthetic && e.system == system)
        .map(|e| (e.utt_id.as_str(), e))
        .collect();

    let mut pairing = Pairing::default();
    for (id, r) in &real {
        match synth.get(id) {
            Some(s) => pairing.pairs.push(UtterancePair {
                real: (*r).clone(),
                synthetic: (*s).clone(),
            }),
            None => pairing.unpaired_real.push(id.to_string()),
        }
    }
    pairing.unpaired_synthetic = synth
        .keys()
        .filter(|id| !real.contains_key(*id))
        .map(|id| id.to_string())
        .collect();
    Ok(pairing)
}

/// Picks `n` real utterance ids so that every speaker is represented and
/// per-speaker counts stay within one of each other until a speaker runs out.
///
/// Speakers are shuffled with a seeded generator, each speaker's pool is
/// shuffled, and utterances are drawn round-robin.
pub fn sample_balanced_subset(entries: &[ManifestEntry], n: usize, seed: u64) -> Result<Vec<String>> {
    let mut by_speaker: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.role == Role::Real) {
        let speaker = e
            .speaker_id
            .as_deref()
            .ok_or_else(|| CorpusError::MissingSpeaker(e.utt_id.clone()))?;
        by_speaker.entry(speaker).or_default().push(e.utt_id.as_str());
    }
    let available: usize = by_speaker.values().map(Vec::len).sum();
    if n > available {
        return Err(CorpusError::NotEnoughUtterances {
            requested: n,
            available,
        });
    }
    if n < by_speaker.len() {
        return Err(CorpusError::TooFewForSpeakers {
            requested: n,
            speakers: by_speaker.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: Vec<Vec<&str>> = by_speaker
        .into_values()
        .map(|mut utts| {
            utts.sort_unstable();
            utts
        })
        .collect();
    pools.shuffle(&mut rng);
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }

    let mut chosen = Vec::with_capacity(n);
    let mut round = 0;
    while chosen.len() < n {
        for pool in &pools {
            if chosen.len() == n {
                break;
            }
            if let Some(id) = pool.get(round) {
                chosen.push(id.to_string());
            }
        }
        round += 1;
    }
    Ok(chosen)
}

/// Durations for each entry: the manifest value when present, otherwise the
/// WAV header.
pub fn resolve_durations(entries: &[ManifestEntry]) -> Result<Vec<f64>> {
    entries
        .iter()
        .map(|e| match e.duration_s {
            Some(d) => Ok(d),
            None => audio::wav_duration(&e.wav_path).map_err(|err| CorpusError::Duration {
                utt_id: e.utt_id.clone(),
                message: err.to_string(),
            }),
        })
        .collect()
}

/// Per-system file count, mean duration and total hours. `durations` is
/// parallel to `entries`. Rows are sorted by system name.
pub fn corpus_stats(entries: &[ManifestEntry], durations: &[f64]) -> CorpusStats {
    assert_eq!(entries.len(), durations.len(), "durations must parallel entries");
    let mut grouped: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (e, &d) in entries.iter().zip(durations) {
        grouped.entry(e.system.as_str()).or_default().push(d);
    }
    let systems = grouped
        .into_iter()
        .map(|(system, mut ds)| {
            // Sorted summation keeps totals independent of entry order.
            ds.sort_by(f64::total_cmp);
            let total: f64 = ds.iter().sum();
            SystemStats {
                system: system.to_string(),
                file_count: ds.len(),
                mean_duration_s: Some(total / ds.len() as f64),
                total_hours: total / 3600.0,
            }
        })
        .collect();
    CorpusStats { systems }
}
