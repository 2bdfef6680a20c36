//! Correlation tables, rankings, category summaries and report files.

mod chart;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassifierKind, PhonemeResult, ResultStatus};
use crate::corpus::CorpusStats;
use crate::stats::{category_average, format_p_value, pearson};
use crate::textgrid::{Category, Phoneme};

pub use chart::{emit_bar_chart, render_bar_chart, ChartGroup};

pub const PHONEME_RESULTS_FILE: &str = "phoneme_results.csv";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const RANKINGS_FILE: &str = "rankings.csv";
pub const CORPUS_STATS_FILE: &str = "corpus_stats.csv";
pub const CATEGORY_KLD_FILE: &str = "category_kld.csv";
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown ranking key {0:?} (expected d_sym, lr_acc or svm_acc)")]
    UnknownKey(String),
    #[error("chart has no values to plot")]
    NoChartValues,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ReportError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Pearson correlation between d_sym and one classifier's accuracy over the
/// ok phonemes of one category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCell {
    pub system: String,
    pub feature: String,
    pub category: Category,
    pub classifier: ClassifierKind,
    /// None when the correlation is undefined (n < 3 or a constant series).
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

impl CorrelationCell {
    pub fn is_defined(&self) -> bool {
        self.p.is_some()
    }
}

fn cell_keys(results: &[PhonemeResult]) -> BTreeSet<(String, String)> {
    results.iter().map(|r| (r.system.clone(), r.feature.clone())).collect()
}

/// One cell per (system, feature, category, classifier), ordered by system,
/// feature, then vowel before consonant and LR before SVM.
pub fn correlation_table(results: &[PhonemeResult]) -> Vec<CorrelationCell> {
    let mut cells = Vec::new();
    for (system, feature) in cell_keys(results) {
        for category in [Category::Vowel, Category::Consonant] {
            let mut members: Vec<&PhonemeResult> = results
                .iter()
                .filter(|r| r.system == system && r.feature == feature && r.is_ok() && r.category() == category)
                .collect();
            members.sort_by_key(|r| r.phoneme);
            for classifier in ClassifierKind::ALL {
                let (xs, ys): (Vec<f64>, Vec<f64>) = members
                    .iter()
                    .filter_map(|r| Some((r.d_sym?, r.accuracy(classifier)?)))
                    .unzip();
                let n = xs.len();
                let (r, p) = match pearson(&xs, &ys) {
                    Ok(c) => (Some(c.r), Some(c.p)),
                    Err(_) => (None, None),
                };
                cells.push(CorrelationCell {
                    system: system.clone(),
                    feature: feature.clone(),
                    category,
                    classifier,
                    r,
                    p,
                    n,
                });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    DSym,
    LrAcc,
    SvmAcc,
}

impl RankKey {
    pub const ALL: [RankKey; 3] = [RankKey::DSym, RankKey::LrAcc, RankKey::SvmAcc];

    pub fn as_str(self) -> &'static str {
        match self {
            RankKey::DSym => "d_sym",
            RankKey::LrAcc => "lr_acc",
            RankKey::SvmAcc => "svm_acc",
        }
    }

    fn value(self, r: &PhonemeResult) -> Option<f64> {
        match self {
            RankKey::DSym => r.d_sym,
            RankKey::LrAcc => r.lr_acc,
            RankKey::SvmAcc => r.svm_acc,
        }
    }
}

impl fmt::Display for RankKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankKey {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self> {
        RankKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ReportError::UnknownKey(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingEntry {
    pub system: String,
    pub feature: String,
    pub key: RankKey,
    pub rank: usize,
    pub phoneme: Phoneme,
    pub key_value: f64,
}

/// Ranks ok phonemes by `key`, largest first; equal values fall back to
/// alphabetical phoneme order. Callers pass the results of one
/// (system, feature) cell.
pub fn rank_phonemes(results: &[PhonemeResult], key: RankKey, top_k: Option<usize>) -> Vec<RankingEntry> {
    let mut picked: Vec<(&PhonemeResult, f64)> = results
        .iter()
        .filter(|r| r.is_ok())
        .filter_map(|r| key.value(r).filter(|v| v.is_finite()).map(|v| (r, v)))
        .collect();
    picked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.phoneme.cmp(&b.0.phoneme)));
    picked.truncate(top_k.unwrap_or(usize::MAX));
    picked
        .into_iter()
        .enumerate()
        .map(|(i, (r, v))| RankingEntry {
            system: r.system.clone(),
            feature: r.feature.clone(),
            key,
            rank: i + 1,
            phoneme: r.phoneme,
            key_value: v,
        })
        .collect()
}

/// Rankings for every (system, feature) cell and every key.
pub fn all_rankings(results: &[PhonemeResult], top_k: Option<usize>) -> Vec<RankingEntry> {
    let mut out = Vec::new();
    for (system, feature) in cell_keys(results) {
        let cell: Vec<PhonemeResult> = results
            .iter()
            .filter(|r| r.system == system && r.feature == feature)
            .cloned()
            .collect();
        for key in RankKey::ALL {
            out.extend(rank_phonemes(&cell, key, top_k));
        }
    }
    out
}

/// Mean d_sym per category for one (system, feature) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryAverage {
    pub system: String,
    pub feature: String,
    pub vowel: Option<f64>,
    pub consonant: Option<f64>,
}

pub fn category_averages(results: &[PhonemeResult]) -> Vec<CategoryAverage> {
    cell_keys(results)
        .into_iter()
        .map(|(system, feature)| {
            let per_phoneme: BTreeMap<Phoneme, f64> = results
                .iter()
                .filter(|r| r.system == system && r.feature == feature && r.is_ok())
                .filter_map(|r| r.d_sym.map(|d| (r.phoneme, d)))
                .collect();
            CategoryAverage {
                vowel: category_average(&per_phoneme, Category::Vowel).ok(),
                consonant: category_average(&per_phoneme, Category::Consonant).ok(),
                system,
                feature,
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

const UNDEFINED: &str = "undefined";

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub const PHONEME_RESULTS_HEADER: [&str; 10] = [
    "phoneme", "category", "system", "feature", "n_real", "n_synth", "d_sym", "lr_acc", "svm_acc", "status",
];

pub fn write_phoneme_results(path: &Path, results: &[PhonemeResult]) -> Result<()> {
    write_csv(
        path,
        &PHONEME_RESULTS_HEADER,
        results.iter().map(|r| {
            vec![
                r.phoneme.to_string(),
                r.category().to_string(),
                r.system.clone(),
                r.feature.clone(),
                r.n_real.to_string(),
                r.n_synth.to_string(),
                fmt_opt(r.d_sym),
                fmt_opt(r.lr_acc),
                fmt_opt(r.svm_acc),
                r.status.to_string(),
            ]
        }),
    )
}

/// Reads a file written by [`write_phoneme_results`].
pub fn read_phoneme_results(path: &Path) -> Result<Vec<PhonemeResult>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(PHONEME_RESULTS_HEADER) {
        return Err(ReportError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| ReportError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let num = |i: usize| -> Result<Option<f64>> {
            match &record[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(format!("bad number {s:?}"))),
            }
        };
        let count = |i: usize| -> Result<usize> { record[i].parse().map_err(|_| bad(format!("bad count {:?}", &record[i]))) };
        let status = match &record[9] {
            "ok" => ResultStatus::Ok,
            "insufficient_data" => ResultStatus::InsufficientData,
            "failed" => ResultStatus::Failed,
            s => return Err(bad(format!("bad status {s:?}"))),
        };
        out.push(PhonemeResult {
            phoneme: record[0].parse().map_err(|_| bad(format!("bad phoneme {:?}", &record[0])))?,
            system: record[2].to_string(),
            feature: record[3].to_string(),
            n_real: count(4)?,
            n_synth: count(5)?,
            d_sym: num(6)?,
            lr_acc: num(7)?,
            svm_acc: num(8)?,
            status,
        });
    }
    Ok(out)
}

pub fn write_correlations(path: &Path, cells: &[CorrelationCell]) -> Result<()> {
    write_csv(
        path,
        &["system", "feature", "category", "classifier", "r", "p", "n"],
        cells.iter().map(|c| {
            vec![
                c.system.clone(),
                c.feature.clone(),
                c.category.to_string(),
                c.classifier.as_str().to_string(),
                c.r.map_or(UNDEFINED.to_string(), |r| format!("{r:.6}")),
                c.p.map_or(UNDEFINED.to_string(), format_p_value),
                c.n.to_string(),
            ]
        }),
    )
}

pub fn write_rankings(path: &Path, rankings: &[RankingEntry]) -> Result<()> {
    write_csv(
        path,
        &["system", "feature", "key", "rank", "phoneme", "key_value"],
        rankings.iter().map(|e| {
            vec![
                e.system.clone(),
                e.feature.clone(),
                e.key.to_string(),
                e.rank.to_string(),
                e.phoneme.to_string(),
                format!("{:.6}", e.key_value),
            ]
        }),
    )
}

pub fn write_corpus_stats(path: &Path, stats: &CorpusStats) -> Result<()> {
    write_csv(
        path,
        &["system", "file_count", "mean_duration_s", "total_hours"],
        stats.systems.iter().map(|s| {
            vec![
                s.system.clone(),
                s.file_count.to_string(),
                s.mean_display(),
                format!("{:.4}", s.total_hours),
            ]
        }),
    )
}

pub fn write_category_averages(path: &Path, averages: &[CategoryAverage]) -> Result<()> {
    write_csv(
        path,
        &["system", "feature", "vowel_d_sym", "consonant_d_sym"],
        averages
            .iter()
            .map(|a| vec![a.system.clone(), a.feature.clone(), fmt_opt(a.vowel), fmt_opt(a.consonant)]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Everything a full analysis writes besides charts.
pub struct ReportSet<'a, T: Serialize> {
    pub results: &'a [PhonemeResult],
    pub cells: &'a [CorrelationCell],
    pub rankings: &'a [RankingEntry],
    pub stats: &'a CorpusStats,
    pub run: &'a T,
}

/// Writes the report files into `out_dir` (created if needed) and returns
/// their paths.
pub fn write_reports<T: Serialize>(out_dir: &Path, set: &ReportSet<'_, T>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let path = |name: &str| out_dir.join(name);
    write_phoneme_results(&path(PHONEME_RESULTS_FILE), set.results)?;
    write_correlations(&path(CORRELATIONS_FILE), set.cells)?;
    write_rankings(&path(RANKINGS_FILE), set.rankings)?;
    write_corpus_stats(&path(CORPUS_STATS_FILE), set.stats)?;
    write_category_averages(&path(CATEGORY_KLD_FILE), &category_averages(set.results))?;
    write_json(&path(RUN_FILE), set.run)?;
    Ok([
        PHONEME_RESULTS_FILE,
        CORRELATIONS_FILE,
        RANKINGS_FILE,
        CORPUS_STATS_FILE,
        CATEGORY_KLD_FILE,
        RUN_FILE,
    ]
    .iter()
    .map(|n| path(n))
    .collect())
}

/// Writes one `kld_<feature>.svg` per feature and returns the paths.
/// Values are quantized to the precision of `phoneme_results.csv` first, so
/// charts redrawn from that file match the originals byte for byte.
pub fn write_charts(out_dir: &Path, results: &[PhonemeResult]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let quantized: Vec<PhonemeResult> = results
        .iter()
        .map(|r| PhonemeResult {
            d_sym: r.d_sym.map(|v| format!("{v:.6}").parse().unwrap_or(v)),
            ..r.clone()
        })
        .collect();
    let averages = category_averages(&quantized);
    let features: BTreeSet<&str> = averages.iter().map(|a| a.feature.as_str()).collect();
    let mut written = Vec::new();
    for feature in features {
        let groups: Vec<ChartGroup> = averages
            .iter()
            .filter(|a| a.feature == feature)
            .map(|a| ChartGroup {
                label: a.system.clone(),
                vowel: a.vowel,
                consonant: a.consonant,
            })
            .collect();
        if groups.iter().all(|g| g.vowel.is_none() && g.consonant.is_none()) {
            log::warn!("no divergence values for feature {feature}; chart skipped");
            continue;
        }
        let file_stem: String = feature
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let path = out_dir.join(format!("kld_{file_stem}.svg"));
        emit_bar_chart(&groups, &format!("Symmetric KLD by category ({feature})"), &path)?;
        written.push(path);
    }
    Ok(written)
}
