//! Command-line interface for the screening toolkit.
//!
//! Exit codes: 0 on success, 1 when individual items failed (a pair that
//! would not decode, a file that would not normalize), 2 on usage or
//! configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use sdscreen::measure::{sd_map, SdConfig};
use sdscreen::normalizer::{channel_stats, reinhard_transfer, ChannelStats};
use sdscreen::pipeline::{
    decode_image, discover_pairs, run_batch, save_gray16, save_rgb8, score_images,
};
use sdscreen::report::{
    default_heatmap_cap, emit_heatmap, export_scores, import_scores, rank_outliers,
    save_summary_json, summarize_distribution, ExportFormat, ScoreField,
};
use sdscreen::synthgen::{make_corpus, save_labels, LabelEntry};

#[derive(Parser)]
#[command(
    name = "sdscreen",
    version,
    about = "Screens original/normalized whole-slide tile pairs for structure hallucinations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Measure parameters shared by `score` and `batch`. Flags override the
/// optional JSON config file, which overrides built-in defaults.
#[derive(Args, Clone, Default)]
struct MeasureFlags {
    /// Soft threshold on smoothed edge magnitude for "fully textured"
    #[arg(long, value_name = "f")]
    m: Option<f64>,

    /// Soft threshold on smoothed intensity difference for "different"
    #[arg(long, value_name = "f")]
    p: Option<f64>,

    /// Smoothing kernel side length
    #[arg(long, value_name = "n")]
    kernel: Option<usize>,

    /// Saturate the textured-side ratio at 1 (bounds scores by scale*ln 2)
    #[arg(long)]
    clamp: bool,

    /// JSON config file; explicit flags win on conflict
    #[arg(long, value_name = "file")]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Score one original/processed pair and print the record as JSON
    Score {
        #[arg(long, value_name = "file")]
        original: PathBuf,
        #[arg(long, value_name = "file")]
        processed: PathBuf,
        #[command(flatten)]
        measure: MeasureFlags,
        /// Also write a heatmap overlay of the discrepancy map
        #[arg(long, value_name = "out.png")]
        heatmap: Option<PathBuf>,
    },

    /// Score every stem-matched pair between two directories
    Batch {
        #[arg(long, value_name = "dir")]
        original_dir: PathBuf,
        #[arg(long, value_name = "dir")]
        processed_dir: PathBuf,
        /// Output path; .jsonl extension switches to JSON-lines
        #[arg(long, value_name = "scores.csv")]
        out: PathBuf,
        /// Worker count (default: available cores)
        #[arg(long, value_name = "n")]
        jobs: Option<usize>,
        #[command(flatten)]
        measure: MeasureFlags,
    },

    /// Generate a labeled synthetic corpus of hallucinated and benign pairs
    Synth {
        #[arg(long, value_name = "dir")]
        out_dir: PathBuf,
        #[arg(long, value_name = "n")]
        hallucinated: usize,
        #[arg(long, value_name = "n")]
        benign: usize,
        #[arg(long, value_name = "n")]
        seed: u64,
    },

    /// Color-transfer every tile in a directory onto target statistics
    Normalize {
        #[arg(long, value_name = "dir")]
        src_dir: PathBuf,
        /// Channel statistics JSON (six numbers plus a version)
        #[arg(long, value_name = "stats.json")]
        target_stats: PathBuf,
        #[arg(long, value_name = "dir")]
        out_dir: PathBuf,
        /// Fit target statistics from this reference image and save them to
        /// --target-stats before normalizing
        #[arg(long, value_name = "image")]
        fit: Option<PathBuf>,
    },

    /// Summarize a score file and rank the worst pairs
    Report {
        #[arg(long, value_name = "scores.csv")]
        scores: PathBuf,
        #[arg(long, value_name = "field", default_value = "sd_max", value_parser = parse_field)]
        field: ScoreField,
        /// How many top-ranked pairs to print
        #[arg(long, value_name = "k")]
        top: Option<usize>,
        /// Write a distribution summary JSON here
        #[arg(long, value_name = "out.json")]
        summary: Option<PathBuf>,
    },
}

fn parse_field(s: &str) -> Result<ScoreField, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn build_config(flags: &MeasureFlags) -> anyhow::Result<SdConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            serde_json::from_str::<SdConfig>(&body)
                .with_context(|| format!("cannot parse config {}", path.display()))?
        }
        None => SdConfig::default(),
    };
    if let Some(m) = flags.m {
        cfg.m_threshold = m;
    }
    if let Some(p) = flags.p {
        cfg.p_threshold = p;
    }
    if let Some(kernel) = flags.kernel {
        cfg.kernel_size = kernel;
    }
    if flags.clamp {
        cfg.clamp_structure = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Score {
            original,
            processed,
            measure,
            heatmap,
        } => cmd_score(&original, &processed, &measure, heatmap.as_deref()),
        Command::Batch {
            original_dir,
            processed_dir,
            out,
            jobs,
            measure,
        } => cmd_batch(&original_dir, &processed_dir, &out, jobs, &measure),
        Command::Synth {
            out_dir,
            hallucinated,
            benign,
            seed,
        } => cmd_synth(&out_dir, hallucinated, benign, seed),
        Command::Normalize {
            src_dir,
            target_stats,
            out_dir,
            fit,
        } => cmd_normalize(&src_dir, &target_stats, &out_dir, fit.as_deref()),
        Command::Report {
            scores,
            field,
            top,
            summary,
        } => cmd_report(&scores, field, top, summary.as_deref()),
    }
}

fn cmd_score(
    original: &Path,
    processed: &Path,
    measure: &MeasureFlags,
    heatmap: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let cfg = build_config(measure)?;
    let pair_id = original
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("pair")
        .to_string();

    let outcome = (|| -> sdscreen::Result<ExitCode> {
        let dec_original = decode_image(original)?;
        let dec_processed = decode_image(processed)?;
        let gray_original = dec_original.to_gray();
        let gray_processed = dec_processed.to_gray();
        let score = score_images(&pair_id, &gray_original, &gray_processed, &cfg)?;

        if let Some(out) = heatmap {
            let map = sd_map(&gray_original, &gray_processed, &cfg)?;
            let cap = default_heatmap_cap(&map);
            let overlay = emit_heatmap(&map, &dec_processed.to_rgb(), cap)?;
            save_rgb8(&overlay, out)?;
        }

        let mut record = serde_json::to_value(&score).expect("score serializes");
        let obj = record.as_object_mut().expect("score is an object");
        obj.insert(
            "config".to_string(),
            serde_json::to_value(&cfg).expect("config serializes"),
        );
        println!("{record}");
        Ok(ExitCode::SUCCESS)
    })();

    match outcome {
        Ok(code) => Ok(code),
        Err(err) => {
            eprintln!("error: {err}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_batch(
    original_dir: &Path,
    processed_dir: &Path,
    out: &Path,
    jobs: Option<usize>,
    measure: &MeasureFlags,
) -> anyhow::Result<ExitCode> {
    let cfg = build_config(measure)?;
    let pairs = discover_pairs(original_dir, processed_dir)
        .map_err(|e| anyhow!("pair discovery failed: {e}"))?;
    let jobs = jobs.unwrap_or_else(default_jobs);
    let items = run_batch(&pairs, &cfg, jobs)?;

    let mut scores = Vec::with_capacity(items.len());
    let mut failures = 0usize;
    for item in &items {
        match &item.result {
            Ok(score) => scores.push(score.clone()),
            Err(err) => {
                failures += 1;
                eprintln!("{}: {err}", item.pair_id);
            }
        }
    }

    export_scores(&scores, ExportFormat::from_path(out), out)?;
    let sidecar = out.with_extension("config.json");
    let meta = serde_json::json!({
        "config": cfg,
        "config_digest": cfg.digest(),
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("cannot write {}", sidecar.display()))?;

    println!(
        "scored {}/{} pairs -> {} ({} failed)",
        scores.len(),
        items.len(),
        out.display(),
        failures
    );
    Ok(if failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_synth(
    out_dir: &Path,
    hallucinated: usize,
    benign: usize,
    seed: u64,
) -> anyhow::Result<ExitCode> {
    let original_dir = out_dir.join("original");
    let processed_dir = out_dir.join("processed");
    std::fs::create_dir_all(&original_dir)?;
    std::fs::create_dir_all(&processed_dir)?;

    let corpus = make_corpus(hallucinated, benign, seed);
    let mut labels = Vec::with_capacity(corpus.len());
    for pair in &corpus {
        let name = format!("{}.png", pair.pair_id);
        save_gray16(&pair.original, &original_dir.join(&name))?;
        save_gray16(&pair.processed, &processed_dir.join(&name))?;
        labels.push(LabelEntry {
            pair_id: pair.pair_id.clone(),
            label: pair.label,
        });
    }
    save_labels(&labels, &out_dir.join("labels.json"))?;
    println!(
        "wrote {} pairs ({} hallucinated, {} benign) under {}",
        corpus.len(),
        hallucinated,
        benign,
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_normalize(
    src_dir: &Path,
    target_stats: &Path,
    out_dir: &Path,
    fit: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let stats: ChannelStats = match fit {
        Some(reference) => {
            let decoded = decode_image(reference)
                .map_err(|e| anyhow!("cannot decode fit reference: {e}"))?;
            let stats = channel_stats(&decoded.to_rgb())?;
            stats.save_json(target_stats)?;
            stats
        }
        None => ChannelStats::load_json(target_stats)?,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(src_dir)
        .with_context(|| format!("cannot read {}", src_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .map(|e| {
                        let e = e.to_ascii_lowercase();
                        e == "png" || e == "tif" || e == "tiff"
                    })
                    .unwrap_or(false)
        })
        .collect();
    entries.sort();

    let mut failures = 0usize;
    let mut written = 0usize;
    for path in &entries {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("tile")
            .to_string();
        let result = (|| -> sdscreen::Result<()> {
            let decoded = decode_image(path)?;
            let normalized = reinhard_transfer(&decoded.to_rgb(), &stats)?;
            save_rgb8(&normalized, &out_dir.join(format!("{stem}.png")))
        })();
        match result {
            Ok(()) => written += 1,
            Err(err) => {
                failures += 1;
                eprintln!("{}: {err}", path.display());
            }
        }
    }
    println!(
        "normalized {written}/{} tiles -> {} ({failures} failed)",
        entries.len(),
        out_dir.display()
    );
    Ok(if failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_report(
    scores_path: &Path,
    field: ScoreField,
    top: Option<usize>,
    summary: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let scores = import_scores(scores_path)?;
    if let Some(out) = summary {
        let dist = summarize_distribution(&scores, field)?;
        save_summary_json(&dist, out)?;
        eprintln!("summary -> {}", out.display());
    }
    let top = top.unwrap_or(10);
    for (pair_id, value) in rank_outliers(&scores, field, top) {
        println!("{pair_id}\t{value}");
    }
    Ok(ExitCode::SUCCESS)
}
