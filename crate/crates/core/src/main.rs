use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use kgrec::pipeline::{self, PipelineConfig};
use kgrec::Error;

/// Knowledge-graph movie recommender pipeline.
#[derive(Parser)]
#[command(name = "kgrec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArg {
    /// Pipeline config file (JSON).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Merge per-source record files into fused.json.
    Fuse(ConfigArg),
    /// Insert fused records into the (optional) seed graph, writing kg.ndjson.
    BuildKg(ConfigArg),
    /// Extract the k-hop neighbourhood of every movie into movie_kg.ndjson.
    Detach(ConfigArg),
    /// Train TransE on the movie subgraph (transe.json + transe.bin).
    TrainTranse(ConfigArg),
    /// Fit TF-IDF on titles and storylines (tfidf.json).
    FitTfidf(ConfigArg),
    /// Print top-k recommendations as JSON.
    Recommend {
        #[command(flatten)]
        config: ConfigArg,
        /// Target movie id; every movie when omitted.
        #[arg(long)]
        movie: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Tune feature weights with the genetic algorithm (ga.json).
    Optimize(ConfigArg),
    /// Score recommendations against reference or opinion data (eval.json).
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        /// Ignore optimized weights and use equal weights.
        #[arg(long)]
        uniform: bool,
    },
    /// Write the synthetic two-source fixture and a config for it.
    GenFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        movies_per_group: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load(arg: &ConfigArg) -> Result<PipelineConfig, Error> {
    let cfg = PipelineConfig::load(&arg.config)?;
    let errs = cfg.validate();
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::InvalidConfig(errs))
    }
}

fn with_elapsed(mut summary: serde_json::Value, start: Instant) -> serde_json::Value {
    if let Some(obj) = summary.as_object_mut() {
        obj.insert("elapsed_ms".into(), (start.elapsed().as_millis() as u64).into());
    }
    summary
}

fn run(cli: Cli) -> Result<String, Error> {
    let start = Instant::now();
    let summary = match cli.command {
        Command::Fuse(c) => pipeline::fuse(&load(&c)?)?,
        Command::BuildKg(c) => pipeline::build_kg(&load(&c)?)?,
        Command::Detach(c) => pipeline::detach(&load(&c)?)?,
        Command::TrainTranse(c) => pipeline::train_transe(&load(&c)?)?,
        Command::FitTfidf(c) => pipeline::fit_tfidf(&load(&c)?)?,
        Command::Recommend { config, movie, k } => {
            let lists = pipeline::recommend(&load(&config)?, movie.as_deref(), k)?;
            // a single target prints its ranked entries directly
            let json = match (movie, lists.as_slice()) {
                (Some(_), [one]) => serde_json::to_string(&one.recommendations),
                _ => serde_json::to_string(&lists),
            };
            return Ok(json.expect("lists serialize"));
        }
        Command::Optimize(c) => pipeline::optimize(&load(&c)?)?,
        Command::Evaluate { config, uniform } => pipeline::evaluate(&load(&config)?, uniform)?,
        Command::GenFixture {
            out,
            movies_per_group,
            seed,
        } => {
            let path = pipeline::write_fixture(&out, movies_per_group, seed)?;
            serde_json::json!({"stage": "gen-fixture", "config": path})
        }
    };
    Ok(with_elapsed(summary, start).to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
