use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phonostat::config::{self, ConfigError, ConfigFile, Overrides};
use phonostat::features::FeatureKind;
use phonostat::pipeline::{self, PipelineError};

/// Phoneme-level real vs synthetic speech analysis.
#[derive(Parser)]
#[command(name = "phonostat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-system file counts and durations (corpus_stats.csv).
    Stats(IoArgs),
    /// Phoneme token index from the TextGrids (tokens.csv).
    Segment {
        #[command(flatten)]
        io: IoArgs,
        /// Name of the phone tier.
        #[arg(long)]
        tier: Option<String>,
        /// Silence and filler labels to drop, comma separated.
        #[arg(long, value_delimiter = ',')]
        silence: Option<Vec<String>>,
    },
    /// Full analysis: features, divergences, classifiers, correlations.
    Analyze(AnalyzeArgs),
    /// Redraw category charts from an existing phoneme_results.csv.
    Chart {
        /// TOML config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory of a previous analyze run.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IoArgs {
    /// TOML config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Synthetic systems to analyse (default: all).
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// logspec, lfcc or external:<name>.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<FeatureKind>>,
    #[arg(long)]
    tier: Option<String>,
    /// Silence and filler labels to drop, comma separated.
    #[arg(long, value_delimiter = ',')]
    silence: Option<Vec<String>>,
    /// Balanced subset of real utterances.
    #[arg(long)]
    subset_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    min_tokens: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

fn load_file(path: &Option<PathBuf>) -> Result<Option<ConfigFile>, PipelineError> {
    Ok(match path {
        Some(p) => Some(ConfigFile::load(p)?),
        None => None,
    })
}

fn resolve(io: &IoArgs, extra: Overrides) -> Result<config::RunConfig, PipelineError> {
    let file = load_file(&io.config)?;
    let flags = Overrides {
        manifest: io.manifest.clone(),
        out: io.out.clone(),
        ..extra
    };
    Ok(config::resolve(file, flags)?)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Stats(io) => {
            let c = resolve(&io, Overrides::default())?;
            let stats = pipeline::cmd_stats(&c.manifest_path, &c.out_dir)?;
            for s in &stats.systems {
                let _ = writeln!(stdout, "{}\t{}\t{}", s.system, s.file_count, s.mean_display());
            }
        }
        Command::Segment { io, tier, silence } => {
            let c = resolve(
                &io,
                Overrides {
                    tier,
                    silence,
                    ..Default::default()
                },
            )?;
            let silence: Vec<&str> = c.silence_labels.iter().map(String::as_str).collect();
            let summary = pipeline::cmd_segment(&c.manifest_path, &c.phones_tier, &silence, &c.out_dir)?;
            let _ = writeln!(
                stdout,
                "{} tokens from {} utterances ({} skipped) -> {}",
                summary.tokens,
                summary.utterances,
                summary.skipped.len(),
                summary.path.display()
            );
        }
        Command::Analyze(a) => {
            let c = resolve(
                &a.io,
                Overrides {
                    systems: a.systems,
                    features: a.features,
                    tier: a.tier,
                    silence: a.silence,
                    subset_n: a.subset_n,
                    seed: a.seed,
                    test_fraction: a.test_fraction,
                    min_tokens: a.min_tokens,
                    workers: a.workers,
                    ..Default::default()
                },
            )?;
            let summary = pipeline::cmd_analyze(&c)?;
            for f in &summary.files {
                let _ = writeln!(stdout, "{}", f.display());
            }
        }
        Command::Chart { config, out } => {
            let out = match (out, load_file(&config)?.and_then(|f| f.out)) {
                (Some(o), _) | (None, Some(o)) => o,
                (None, None) => return Err(ConfigError::Invalid("no output directory given (--out)".into()).into()),
            };
            for f in pipeline::cmd_chart(&out)? {
                let _ = writeln!(stdout, "{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PHONOSTAT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let line = serde_json::json!({
                "level": "error",
                "kind": e.kind(),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{line}");
            ExitCode::from(code as u8)
        }
    }
}
