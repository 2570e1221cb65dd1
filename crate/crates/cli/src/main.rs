//! `sparsekge`: train, evaluate and benchmark knowledge graph embeddings.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

#[derive(Parser)]
#[command(name = "sparsekge", version, about = "Knowledge graph embeddings trained with sparse incidence SpMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write its log, checkpoint and summary to --out.
    Train(Opts),
    /// Rank the test split with a saved checkpoint and print the metrics.
    Eval(Opts),
    /// Train the sparse and dense-baseline engines side by side.
    Bench(Opts),
    /// Write a synthetic dataset as TSV files into --out.
    Synth(Opts),
}

/// Every option may also come from `--config FILE` as `key = value`;
/// flags win over the file.
#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding train.txt, valid.txt and test.txt.
    #[arg(long)]
    dataset: Option<String>,
    /// Generate a planted dataset instead: N:R:M (entities:relations:train triples).
    #[arg(long)]
    synthetic: Option<String>,
    /// Seed for --synthetic (defaults to --seed).
    #[arg(long)]
    data_seed: Option<String>,
    /// transe, transr, transh, toruse, distmult, complex or rotate.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// TransR relation space dimension (defaults to --dim).
    #[arg(long)]
    relation_dim: Option<String>,
    /// l1 or l2.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads for the kernels.
    #[arg(long)]
    threads: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// f32 or f64.
    #[arg(long)]
    precision: Option<String>,
    /// raw or filtered.
    #[arg(long)]
    protocol: Option<String>,
    /// Checkpoint to evaluate (defaults to OUT/checkpoint.bin).
    #[arg(long)]
    checkpoint: Option<String>,
    /// Multiply the learning rate by --step-factor every this many epochs.
    #[arg(long)]
    step_every: Option<String>,
    #[arg(long)]
    step_factor: Option<String>,
    /// sparse or dense (training only).
    #[arg(long)]
    engine: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    normalize_entities: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    resample_negatives: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    shuffle: Option<String>,
    /// Reject valid/test triples naming unseen entities instead of dropping them.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    strict: Option<String>,
    /// Evaluate on the test split after training.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    eval_after: Option<String>,
}

impl Opts {
    fn settings(&self) -> Result<Settings, String> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        let flags = [
            ("dataset", &self.dataset),
            ("synthetic", &self.synthetic),
            ("data_seed", &self.data_seed),
            ("model", &self.model),
            ("dim", &self.dim),
            ("relation_dim", &self.relation_dim),
            ("norm", &self.norm),
            ("lr", &self.lr),
            ("margin", &self.margin),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("precision", &self.precision),
            ("protocol", &self.protocol),
            ("checkpoint", &self.checkpoint),
            ("step_every", &self.step_every),
            ("step_factor", &self.step_factor),
            ("engine", &self.engine),
            ("normalize_entities", &self.normalize_entities),
            ("resample_negatives", &self.resample_negatives),
            ("shuffle", &self.shuffle),
            ("strict", &self.strict),
            ("eval_after", &self.eval_after),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        Ok(s)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (opts, run): (&Opts, fn(&Settings) -> commands::Outcome) = match &cli.command {
        Command::Train(o) => (o, commands::train),
        Command::Eval(o) => (o, commands::eval),
        Command::Bench(o) => (o, commands::bench),
        Command::Synth(o) => (o, commands::synth),
    };
    let outcome = opts
        .settings()
        .map_err(commands::Failure::Usage)
        .and_then(|s| {
            commands::configure_threads(&s)?;
            run(&s)
        });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
