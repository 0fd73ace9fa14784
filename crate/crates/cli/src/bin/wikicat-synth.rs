use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wikicat::synth::{ablation_wiki, scale_graph, ScaleSpec};
use wikicat::taxonomy::{TaxonomyFile, TaxonomyLabel};

/// Generate synthetic inputs for the wikicat pipeline.
#[derive(Debug, Parser)]
#[command(name = "wikicat-synth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Three-label wiki with distractor pages, corpus, eval set and config.
    Wiki {
        dir: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
    },
    /// Large random layered graph with one taxonomy label per top category.
    Scale {
        dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        roots: usize,
        #[arg(long, default_value_t = 50_000)]
        categories: usize,
        #[arg(long, default_value_t = 100_000)]
        pages: usize,
        #[arg(long, default_value_t = 1_000_000)]
        edges: usize,
        #[arg(long, default_value_t = 7)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

fn run(cli: Cli) -> std::io::Result<()> {
    match cli.command {
        Command::Wiki { dir, seed, n_per_class } => {
            std::fs::create_dir_all(&dir)?;
            ablation_wiki(seed).write_to(&dir, n_per_class, seed)
        }
        Command::Scale {
            dir,
            roots,
            categories,
            pages,
            edges,
            levels,
            seed,
        } => {
            if roots == 0 || categories <= roots || levels < 2 {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "need roots >= 1, categories > roots and levels >= 2",
                ));
            }
            let spec = ScaleSpec {
                roots,
                categories,
                pages,
                edges,
                levels,
                seed,
            };
            let g = scale_graph(&spec);
            g.write_tsv(&dir)?;
            let taxonomy = TaxonomyFile {
                labels: g.categories[..roots]
                    .iter()
                    .map(|(id, name)| TaxonomyLabel {
                        id: format!("topic-{id}"),
                        name: name.clone(),
                        parent: None,
                    })
                    .collect(),
            };
            write_json(&dir.join("taxonomy.json"), &taxonomy)?;
            write_json(
                &dir.join("config.json"),
                &serde_json::json!({
                    "graph_dir": ".",
                    "corpus": "corpus.jsonl",
                    "taxonomy": "taxonomy.json",
                    "output_dir": "out",
                    "task": "coarse",
                    "seed": seed,
                }),
            )?;
            File::create(dir.join("corpus.jsonl")).map(drop)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.kind() == std::io::ErrorKind::InvalidInput { 2 } else { 3 })
        }
    }
}
