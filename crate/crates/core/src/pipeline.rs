//! End-to-end drivers behind the `stats`, `segment`, `analyze` and `chart`
//! subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audio::{self, AudioError};
use crate::classify::{run_battery, BatteryConfig, CellData, PhonemeResult};
use crate::config::{ConfigError, RunConfig};
use crate::corpus::{self, CorpusError, CorpusStats, ManifestEntry, Role};
use crate::features::{self, FeatureError, FeatureKind, FrameMatrix, SpectralExtractor};
use crate::report::{self, CorrelationCell, ReportError, ReportSet};
use crate::textgrid::{self, Interval, Phoneme, TextGridError};

pub const TOKENS_FILE: &str = "tokens.csv";
pub const CACHE_DIR: &str = "cache";
const CACHE_MAGIC: &[u8; 4] = b"PFV1";
const CACHE_VERSION: &str = "phonostat-cache-1";
/// Placeholder in `embedding_path` replaced by the external feature name.
pub const EMBEDDING_NAME_PLACEHOLDER: &str = "{name}";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{utt_id}: {source}")]
    TextGrid { utt_id: String, source: TextGridError },
    #[error("{utt_id}: {source}")]
    Audio { utt_id: String, source: AudioError },
    #[error("{utt_id} ({feature}): {source}")]
    Feature {
        utt_id: String,
        feature: String,
        source: FeatureError,
    },
    #[error("{utt_id}: no embedding_path for feature {feature}")]
    MissingEmbedding { utt_id: String, feature: String },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl PipelineError {
    /// 2 for usage and schema problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Corpus(CorpusError::Duration { .. }) => 1,
            PipelineError::Corpus(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Corpus(_) => "corpus",
            PipelineError::TextGrid { .. } => "textgrid",
            PipelineError::Audio { .. } => "audio",
            PipelineError::Feature { .. } | PipelineError::MissingEmbedding { .. } => "features",
            PipelineError::Report(_) => "report",
            PipelineError::Io { .. } => "io",
            PipelineError::Pool(_) => "runtime",
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// One aligned phoneme occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub utt_id: String,
    pub role: Role,
    pub system: String,
    pub phoneme: Phoneme,
    pub interval: Interval,
}

/// Phoneme tokens of one utterance. Any label outside the inventory fails
/// the whole utterance with [`TextGridError::UnknownPhoneme`].
pub fn segment_utterance(entry: &ManifestEntry, tier: &str, silence: &[&str]) -> std::result::Result<Vec<Token>, TextGridError> {
    let tg = textgrid::read_textgrid(&entry.textgrid_path)?;
    tokens_from_textgrid(&tg, entry, tier, silence)
}

fn tokens_from_textgrid(
    tg: &textgrid::TextGrid,
    entry: &ManifestEntry,
    tier: &str,
    silence: &[&str],
) -> std::result::Result<Vec<Token>, TextGridError> {
    textgrid::phone_intervals(tg, tier, silence)?
        .into_iter()
        .map(|iv| {
            Ok(Token {
                utt_id: entry.utt_id.clone(),
                role: entry.role,
                system: entry.system.clone(),
                phoneme: textgrid::strip_stress(&iv.label)?,
                interval: iv,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub tokens: usize,
    pub utterances: usize,
    /// (utt_id, system, reason) of utterances that produced no rows.
    pub skipped: Vec<(String, String, String)>,
    pub path: PathBuf,
}

/// Writes `tokens.csv` for every manifest entry. Utterances whose TextGrid
/// cannot be read or contains unknown phones are logged and skipped.
pub fn cmd_segment(manifest: &Path, tier: &str, silence: &[&str], out_dir: &Path) -> Result<SegmentSummary> {
    let entries = corpus::load_manifest(manifest)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let path = out_dir.join(TOKENS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| PipelineError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let csv_err = |e: csv::Error| PipelineError::Io {
        path: path.clone(),
        message: e.to_string(),
    };
    w.write_record(["utt_id", "role", "system", "phoneme", "category", "xmin", "xmax"])
        .map_err(csv_err)?;
    let mut summary = SegmentSummary {
        tokens: 0,
        utterances: entries.len(),
        skipped: Vec::new(),
        path: path.clone(),
    };
    for entry in &entries {
        let tokens = match segment_utterance(entry, tier, silence) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {} ({}): {e}", entry.utt_id, entry.system);
                summary.skipped.push((entry.utt_id.clone(), entry.system.clone(), e.to_string()));
                continue;
            }
        };
        for t in &tokens {
            w.write_record([
                t.utt_id.as_str(),
                t.role.as_str(),
                t.system.as_str(),
                t.phoneme.as_str(),
                t.phoneme.category().as_str(),
                &t.interval.xmin.to_string(),
                &t.interval.xmax.to_string(),
            ])
            .map_err(csv_err)?;
        }
        summary.tokens += tokens.len();
    }
    w.flush().map_err(io_err(&path))?;
    Ok(summary)
}

/// Writes `corpus_stats.csv` over the whole manifest.
pub fn cmd_stats(manifest: &Path, out_dir: &Path) -> Result<CorpusStats> {
    let entries = corpus::load_manifest(manifest)?;
    let durations = corpus::resolve_durations(&entries)?;
    let stats = corpus::corpus_stats(&entries, &durations);
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    report::write_corpus_stats(&out_dir.join(report::CORPUS_STATS_FILE), &stats)?;
    Ok(stats)
}

/// Regenerates the per-feature charts from an existing `phoneme_results.csv`.
pub fn cmd_chart(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let results = report::read_phoneme_results(&out_dir.join(report::PHONEME_RESULTS_FILE))?;
    let written = report::write_charts(out_dir, &results)?;
    if written.is_empty() {
        return Err(ReportError::NoChartValues.into());
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSummary {
    pub results: Vec<PhonemeResult>,
    pub cells: Vec<CorrelationCell>,
    pub files: Vec<PathBuf>,
    pub tokens: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    tool: &'static str,
    version: &'static str,
    manifest: String,
    systems: &'a [String],
    features: Vec<String>,
    phones_tier: &'a str,
    subset_n: Option<usize>,
    seed: u64,
    feature_config: &'a features::FeatureConfig,
    battery: &'a BatteryConfig,
    silence_labels: &'a [String],
    real_utterances: usize,
    synthetic_utterances: usize,
    tokens: usize,
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of every setting that changes pooled vectors.
fn config_hash(config: &RunConfig) -> String {
    let fc = serde_json::to_string(&config.feature_config).expect("feature config serializes");
    let silence = config.silence_labels.join("\u{1f}");
    sha256_hex(&[CACHE_VERSION.as_bytes(), fc.as_bytes(), config.phones_tier.as_bytes(), silence.as_bytes()])
}

fn embedding_path(entry: &ManifestEntry, name: &str) -> Option<PathBuf> {
    let raw = entry.embedding_path.as_ref()?.to_string_lossy().into_owned();
    Some(PathBuf::from(raw.replace(EMBEDDING_NAME_PLACEHOLDER, name)))
}

fn encode_cache(vectors: &[Vec<f64>]) -> Vec<u8> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(12 + vectors.len() * dim * 8);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(vectors.len() as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for v in vectors {
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn decode_cache(bytes: &[u8], expected_tokens: usize) -> Option<Vec<Vec<f64>>> {
    if bytes.len() < 12 || &bytes[..4] != CACHE_MAGIC {
        return None;
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().ok()?) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().ok()?) as usize;
    if n != expected_tokens || bytes.len() != 12 + n * dim * 8 {
        return None;
    }
    let values: Vec<f64> = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Some(values.chunks(dim.max(1)).take(n).map(<[f64]>::to_vec).collect())
}

struct Work<'a> {
    entry: &'a ManifestEntry,
    textgrid_bytes: Vec<u8>,
    tokens: Vec<Token>,
}

struct UtteranceOutput {
    tokens: Vec<Token>,
    /// Pooled vectors per feature, parallel to `tokens`.
    vectors: Vec<Vec<Vec<f64>>>,
    hits: usize,
    misses: usize,
}

struct Extractor<'a> {
    config: &'a RunConfig,
    spectral: BTreeMap<FeatureKind, SpectralExtractor>,
    cache_dir: PathBuf,
    config_hash: String,
}

impl Extractor<'_> {
    fn frames(&self, entry: &ManifestEntry, kind: &FeatureKind, source: &[u8]) -> Result<FrameMatrix> {
        let feature_err = |source| PipelineError::Feature {
            utt_id: entry.utt_id.clone(),
            feature: kind.to_string(),
            source,
        };
        match kind {
            FeatureKind::External(_) => features::decode_pfe1(source).map_err(feature_err),
            _ => {
                let audio = audio::decode_wav(source).map_err(|e| PipelineError::Audio {
                    utt_id: entry.utt_id.clone(),
                    source: e,
                })?;
                self.spectral[kind].extract(&audio).map_err(feature_err)
            }
        }
    }

    fn source_path(&self, entry: &ManifestEntry, kind: &FeatureKind) -> Result<PathBuf> {
        match kind {
            FeatureKind::External(name) => embedding_path(entry, name).ok_or_else(|| PipelineError::MissingEmbedding {
                utt_id: entry.utt_id.clone(),
                feature: kind.to_string(),
            }),
            _ => Ok(entry.wav_path.clone()),
        }
    }

    fn run(&self, work: &Work<'_>) -> Result<UtteranceOutput> {
        let entry = work.entry;
        let mut out = UtteranceOutput {
            tokens: work.tokens.clone(),
            vectors: Vec::with_capacity(self.config.features.len()),
            hits: 0,
            misses: 0,
        };
        for kind in &self.config.features {
            let path = self.source_path(entry, kind)?;
            let source = fs::read(&path).map_err(io_err(&path))?;
            let feature = kind.to_string();
            let key = sha256_hex(&[
                entry.utt_id.as_bytes(),
                entry.role.as_str().as_bytes(),
                entry.system.as_bytes(),
                feature.as_bytes(),
                self.config_hash.as_bytes(),
                &Sha256::digest(&work.textgrid_bytes),
                &Sha256::digest(&source),
            ]);
            let cache_path = self.cache_dir.join(format!("{}.pfv", &key[..32]));
            if let Some(cached) = fs::read(&cache_path).ok().and_then(|b| decode_cache(&b, work.tokens.len())) {
                log::info!("cache hit: {} {} {}", entry.utt_id, entry.system, feature);
                out.hits += 1;
                out.vectors.push(cached);
                continue;
            }
            out.misses += 1;
            let fm = self.frames(entry, kind, &source)?;
            let pooled = work
                .tokens
                .iter()
                .map(|t| features::pool_frames(&fm, &t.interval).map(|(v, _)| v))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|source| PipelineError::Feature {
                    utt_id: entry.utt_id.clone(),
                    feature: feature.clone(),
                    source,
                })?;
            // Write to a temporary name first so a crash never leaves a
            // truncated cache entry behind.
            let tmp = cache_path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, encode_cache(&pooled)).map_err(io_err(&tmp))?;
            fs::rename(&tmp, &cache_path).map_err(io_err(&cache_path))?;
            out.vectors.push(pooled);
        }
        Ok(out)
    }
}

/// Full analysis: segmentation, feature pooling (cached), per-phoneme
/// divergence and classifiers, correlations, rankings, charts.
pub fn cmd_analyze(config: &RunConfig) -> Result<AnalysisSummary> {
    config.validate()?;
    let entries = corpus::load_manifest(&config.manifest_path)?;
    let known = corpus::synthetic_systems(&entries);
    let systems: Vec<String> = if config.systems.is_empty() {
        known.clone()
    } else {
        for s in &config.systems {
            if !known.contains(s) {
                return Err(CorpusError::UnknownSystem {
                    system: s.clone(),
                    known: known.clone(),
                }
                .into());
            }
        }
        let set: BTreeSet<String> = config.systems.iter().cloned().collect();
        set.into_iter().collect()
    };
    if systems.is_empty() {
        return Err(CorpusError::UnknownSystem {
            system: String::new(),
            known,
        }
        .into());
    }
    let subset: Option<BTreeSet<String>> = match config.subset_n {
        Some(n) => Some(corpus::sample_balanced_subset(&entries, n, config.seed)?.into_iter().collect()),
        None => None,
    };

    // Pair each system with the (optionally subsampled) real utterances.
    let mut pairings: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    let index: BTreeMap<(Role, &str, &str), usize> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.role, e.system.as_str(), e.utt_id.as_str()), i))
        .collect();
    let real_index: BTreeMap<&str, usize> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.role == Role::Real)
        .map(|(i, e)| (e.utt_id.as_str(), i))
        .collect();
    for system in &systems {
        let pairing = corpus::pair_utterances(&entries, system)?;
        if !pairing.unpaired_real.is_empty() || !pairing.unpaired_synthetic.is_empty() {
            log::warn!(
                "{system}: {} real and {} synthetic utterances have no counterpart",
                pairing.unpaired_real.len(),
                pairing.unpaired_synthetic.len()
            );
        }
        let pairs = pairing
            .pairs
            .iter()
            .filter(|p| subset.as_ref().is_none_or(|s| s.contains(&p.real.utt_id)))
            .map(|p| {
                (
                    real_index[p.real.utt_id.as_str()],
                    index[&(Role::Synthetic, p.synthetic.system.as_str(), p.synthetic.utt_id.as_str())],
                )
            })
            .collect();
        pairings.insert(system.as_str(), pairs);
    }
    let used: BTreeSet<usize> = pairings.values().flatten().flat_map(|&(r, s)| [r, s]).collect();
    let used: Vec<usize> = used.into_iter().collect();
    log::info!("analysing {} utterances across {} systems", used.len(), systems.len());

    let used_entries: Vec<ManifestEntry> = used.iter().map(|&i| entries[i].clone()).collect();
    let durations = corpus::resolve_durations(&used_entries)?;
    let stats = corpus::corpus_stats(&used_entries, &durations).with_systems(&systems);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;

    let cache_dir = config.out_dir.join(CACHE_DIR);
    fs::create_dir_all(&cache_dir).map_err(io_err(&cache_dir))?;
    let mut spectral = BTreeMap::new();
    for kind in &config.features {
        if !matches!(kind, FeatureKind::External(_)) {
            let ex = SpectralExtractor::new(&config.feature_config, kind.clone()).map_err(|source| PipelineError::Feature {
                utt_id: String::new(),
                feature: kind.to_string(),
                source,
            })?;
            spectral.insert(kind.clone(), ex);
        }
    }
    let extractor = Extractor {
        config,
        spectral,
        cache_dir,
        config_hash: config_hash(config),
    };

    let outputs: Vec<UtteranceOutput> = pool.install(|| {
        used.par_iter()
            .map(|&i| {
                let entry = &entries[i];
                let textgrid_bytes = fs::read(&entry.textgrid_path).map_err(|e| PipelineError::TextGrid {
                    utt_id: entry.utt_id.clone(),
                    source: TextGridError::Io {
                        path: entry.textgrid_path.display().to_string(),
                        message: e.to_string(),
                    },
                })?;
                let tg_err = |source| PipelineError::TextGrid {
                    utt_id: entry.utt_id.clone(),
                    source,
                };
                let text = String::from_utf8_lossy(&textgrid_bytes);
                let tg = textgrid::parse_textgrid(&text).map_err(tg_err)?;
                let silence: Vec<&str> = config.silence_labels.iter().map(String::as_str).collect();
                let tokens = match tokens_from_textgrid(&tg, entry, &config.phones_tier, &silence) {
                    Ok(t) => t,
                    Err(e @ TextGridError::UnknownPhoneme(_)) => {
                        log::warn!("skipping {} ({}): {e}", entry.utt_id, entry.system);
                        Vec::new()
                    }
                    Err(e) => return Err(tg_err(e)),
                };
                extractor.run(&Work {
                    entry,
                    textgrid_bytes,
                    tokens,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let by_entry: BTreeMap<usize, &UtteranceOutput> = used.iter().copied().zip(&outputs).collect();
    let cache_hits: usize = outputs.iter().map(|o| o.hits).sum();
    let cache_misses: usize = outputs.iter().map(|o| o.misses).sum();
    let n_tokens: usize = outputs.iter().map(|o| o.tokens.len()).sum();
    log::info!("pooled {n_tokens} tokens ({cache_hits} cache hits, {cache_misses} misses)");

    let mut cells = Vec::new();
    for (system, pairs) in &pairings {
        for (f, kind) in config.features.iter().enumerate() {
            let mut cell = CellData::new(*system, kind.to_string());
            for &(r, s) in pairs {
                for (idx, role) in [(r, Role::Real), (s, Role::Synthetic)] {
                    let out = by_entry[&idx];
                    for (t, v) in out.tokens.iter().zip(&out.vectors[f]) {
                        cell.push(role, t.phoneme, v.clone());
                    }
                }
            }
            cells.push(cell);
        }
    }

    let battery = BatteryConfig {
        seed: config.seed,
        test_fraction: config.test_fraction,
        min_tokens: config.min_tokens,
        ..Default::default()
    };
    let results = pool.install(|| run_battery(&cells, &battery));
    let table = report::correlation_table(&results);
    let rankings = report::all_rankings(&results, None);

    let real_utterances = used.iter().filter(|&&i| entries[i].role == Role::Real).count();
    let run = RunInfo {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        manifest: config.manifest_path.display().to_string(),
        systems: &systems,
        features: config.features.iter().map(ToString::to_string).collect(),
        phones_tier: &config.phones_tier,
        subset_n: config.subset_n,
        seed: config.seed,
        feature_config: &config.feature_config,
        battery: &battery,
        silence_labels: &config.silence_labels,
        real_utterances,
        synthetic_utterances: used.len() - real_utterances,
        tokens: n_tokens,
    };
    let mut files = report::write_reports(
        &config.out_dir,
        &ReportSet {
            results: &results,
            cells: &table,
            rankings: &rankings,
            stats: &stats,
            run: &run,
        },
    )?;
    files.extend(report::write_charts(&config.out_dir, &results)?);

    Ok(AnalysisSummary {
        results,
        cells: table,
        files,
        tokens: n_tokens,
        cache_hits,
        cache_misses,
    })
}
