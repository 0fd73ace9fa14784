use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use wikicat::labeler::LabelingMode;
use wikicat::pipeline::{self, PipelineConfig, PipelineError};

/// Bootstrap text classifiers from a category graph.
#[derive(Debug, Parser)]
#[command(name = "wikicat", version)]
struct Cli {
    /// Pipeline config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of processors.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the labeling mode.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<LabelingMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate the TSV graph, write a binary snapshot and stats.
    BuildGraph,
    /// Map taxonomy labels onto graph categories.
    Map,
    /// Label pages by graph traversal.
    Label,
    /// Balance the labeled pages per class.
    Sample,
    /// Train the centroid and SVM models.
    Train,
    /// Classify documents from a JSONL file of `{"text", "parent"}` lines.
    Predict {
        #[arg(long)]
        input: PathBuf,
    },
    /// Score all models on the eval dataset.
    Evaluate,
    /// Compare labeling modes end to end.
    Ablate,
}

fn parse_mode(s: &str) -> Result<LabelingMode, String> {
    s.parse()
}

fn print<T: Serialize>(value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string(value).map_err(|e| PipelineError::internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let path = cli
        .config
        .ok_or_else(|| PipelineError::input("--config <path> is required"))?;
    let mut cfg = PipelineConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.labeling.mode = mode;
    }
    let workers = match cli.workers {
        Some(0) => return Err(PipelineError::input("--workers must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::internal(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::BuildGraph => print(&pipeline::build_graph(&cfg)?),
        Command::Map => {
            let m = pipeline::map(&cfg)?;
            print(&serde_json::json!({
                "mapped": m.labels.len(),
                "unmapped": m.unmapped,
                "near_misses": m.near_misses.len(),
            }))
        }
        Command::Label => print(&pipeline::label(&cfg)?),
        Command::Sample => print(&serde_json::json!({ "instances": pipeline::sample(&cfg)? })),
        Command::Train => {
            let m = pipeline::train(&cfg)?;
            print(&serde_json::json!({
                "groups": m.svm.groups.len(),
                "vocabulary": m.svm.tfidf.vocab_size(),
            }))
        }
        Command::Predict { input } => {
            print(&serde_json::json!({ "predictions": pipeline::predict(&cfg, &input)?.len() }))
        }
        Command::Evaluate => {
            let r = pipeline::evaluate(&cfg)?;
            let scores: serde_json::Map<String, serde_json::Value> = r
                .models
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::to_value(pipeline::Scores::from(v)).unwrap_or_default()))
                .collect();
            print(&scores)
        }
        Command::Ablate => {
            for row in pipeline::ablate(&cfg)?.rows {
                print(&row)?;
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
