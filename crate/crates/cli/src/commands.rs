//! Subcommand bodies.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use sparsekge::data::{generate_synthetic, load_tsv_with, write_tsv, LoadOptions, LoadReport};
use sparsekge::eval::{evaluate, EvalReport};
use sparsekge::training::{fit, Engine, PhaseTotals, TrainingRun};
use sparsekge::{Dataset, EmbeddingStore, ModelConfig, ModelKind, Real};

use crate::settings::{Precision, Settings};

pub enum Failure {
    /// Bad flags or a missing dataset directory: exit code 2.
    Usage(String),
    /// Anything that fails after the arguments were accepted: exit code 1.
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<sparsekge::Error> for Failure {
    fn from(e: sparsekge::Error) -> Self {
        Failure::Run(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

pub fn configure_threads(s: &Settings) -> Outcome {
    if let Some(n) = s.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(anyhow!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn load_dataset(s: &Settings) -> Result<(Dataset, LoadReport), Failure> {
    match (&s.dataset, &s.synthetic) {
        (Some(_), Some(_)) => Err(Failure::Usage("give either --dataset or --synthetic, not both".into())),
        (None, None) => Err(Failure::Usage("one of --dataset or --synthetic is required".into())),
        (Some(dir), None) => {
            if !dir.is_dir() {
                return Err(Failure::Usage(format!("dataset directory {} does not exist", dir.display())));
            }
            Ok(load_tsv_with(dir, LoadOptions { strict: s.strict })?)
        }
        (None, Some(spec)) => {
            let ds = generate_synthetic(spec.entities, spec.relations, spec.triples, s.data_seed.unwrap_or(s.seed))?;
            let report = LoadReport::of(&ds);
            Ok((ds, report))
        }
    }
}

fn validated_model(s: &Settings) -> Result<ModelConfig, Failure> {
    let c = s.model_config();
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    s.train_config().validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Rough multiply-add count of one training epoch: positive and negative
/// forward passes plus backward passes at about twice the forward cost.
pub fn flop_estimate(c: &ModelConfig, triples: usize) -> f64 {
    let m = triples as f64;
    let (de, dr) = (c.entity_dim as f64, c.relation_dim as f64);
    let width = if c.kind.is_complex() { 4.0 * de } else { de };
    let forward = match c.kind {
        ModelKind::TransE | ModelKind::TorusE => 3.0 * m * de + m * de,
        ModelKind::TransR => 2.0 * m * de + m * dr * de + 2.0 * m * dr,
        ModelKind::TransH => 2.0 * m * de + 3.0 * m * de,
        ModelKind::DistMult => 3.0 * m * de,
        ModelKind::ComplEx | ModelKind::RotatE => 3.0 * m * width,
    };
    2.0 * 3.0 * forward
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: ModelKind,
    config: ModelConfig,
    lr: f64,
    margin: f64,
    batch_size: usize,
    seed: u64,
    epochs: usize,
    dataset: &'a LoadReport,
    final_loss: Option<f64>,
    total_s: f64,
    t_forward_s: f64,
    t_backward_s: f64,
    t_step_s: f64,
    flop_estimate_per_epoch: f64,
    checkpoint: PathBuf,
    eval: Option<EvalReport>,
}

pub fn train(s: &Settings) -> Outcome {
    let model = validated_model(s)?;
    let (ds, report) = load_dataset(s)?;
    match s.precision {
        Precision::F64 => train_with::<f64>(s, &model, &ds, &report),
        Precision::F32 => train_with::<f32>(s, &model, &ds, &report),
    }
}

fn train_with<T: Real>(s: &Settings, model: &ModelConfig, ds: &Dataset, report: &LoadReport) -> Outcome {
    fs::create_dir_all(&s.out).with_context(|| format!("creating {}", s.out.display()))?;
    fs::write(s.out.join("config.txt"), s.to_config_text()).context("writing config.txt")?;
    let log_path = s.out.join("train_log.jsonl");
    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .with_context(|| format!("opening {}", log_path.display()))?;

    let cfg = s.train_config();
    let mut store = EmbeddingStore::<T>::init(model, ds.num_entities(), ds.num_relations(), s.seed)?;
    let run = fit(&mut store, model, &ds.train, &cfg, s.engine, |r, _| {
        let line = serde_json::to_string(r).expect("plain record");
        writeln!(log, "{line}").and_then(|_| log.flush())?;
        log::info!("epoch {} loss {:.6}", r.epoch, r.loss);
        Ok(())
    })?;

    let ckpt = s.out.join("checkpoint.bin");
    store.save(&ckpt)?;
    let eval = if s.eval_after {
        Some(evaluate(ds, &store, model, s.protocol)?)
    } else {
        None
    };
    let summary = TrainSummary {
        model: model.kind,
        config: *model,
        lr: cfg.lr,
        margin: cfg.margin,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        epochs: cfg.epochs,
        dataset: report,
        final_loss: run.epochs.last().map(|e| e.loss),
        total_s: run.totals.wall_s,
        t_forward_s: run.totals.forward_s,
        t_backward_s: run.totals.backward_s,
        t_step_s: run.totals.step_s,
        flop_estimate_per_epoch: flop_estimate(model, ds.train.len()),
        checkpoint: ckpt,
        eval,
    };
    write_json(&s.out.join("summary.json"), &summary)?;
    println!("{}", serde_json::to_string(&summary).context("serializing summary")?);
    Ok(())
}

pub fn eval(s: &Settings) -> Outcome {
    let (ds, _) = load_dataset(s)?;
    match s.precision {
        Precision::F64 => eval_with::<f64>(s, &ds),
        Precision::F32 => eval_with::<f32>(s, &ds),
    }
}

fn eval_with<T: Real>(s: &Settings, ds: &Dataset) -> Outcome {
    let path = s.checkpoint.clone().unwrap_or_else(|| s.out.join("checkpoint.bin"));
    let store = EmbeddingStore::<T>::load(&path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    let mismatch = |what: &str, ckpt: String, asked: String| {
        Failure::Run(anyhow!("checkpoint holds {what} {ckpt} but {asked} was requested"))
    };
    if s.is_explicit("model") && s.model != store.kind() {
        return Err(mismatch("model", store.kind().to_string(), s.model.to_string()));
    }
    if s.is_explicit("dim") && s.dim != store.entity_dim() {
        return Err(mismatch("dim", store.entity_dim().to_string(), s.dim.to_string()));
    }
    if let Some(dr) = s.relation_dim.filter(|&dr| dr != store.relation_dim()) {
        return Err(mismatch("relation_dim", store.relation_dim().to_string(), dr.to_string()));
    }
    if (ds.num_entities(), ds.num_relations()) != (store.num_entities(), store.num_relations()) {
        return Err(Failure::Run(anyhow!(
            "checkpoint has {} entities / {} relations, dataset has {} / {}",
            store.num_entities(),
            store.num_relations(),
            ds.num_entities(),
            ds.num_relations()
        )));
    }
    let config = store.config(s.norm);
    let report = evaluate(ds, &store, &config, s.protocol)?;
    println!("{}", serde_json::to_string(&report).context("serializing report")?);
    Ok(())
}

#[derive(Serialize)]
struct BenchSummary {
    model: ModelKind,
    epochs: usize,
    sparse_final_loss: Option<f64>,
    dense_final_loss: Option<f64>,
    sparse: PhaseTotals,
    dense: PhaseTotals,
    speedup_fwd_bwd: f64,
    speedup_total: f64,
    flop_estimate_per_epoch: f64,
}

#[derive(Serialize)]
struct BenchRow<'a> {
    #[serde(rename = "impl")]
    engine: &'a str,
    phase: &'a str,
    seconds: f64,
    speedup: f64,
}

pub fn bench(s: &Settings) -> Outcome {
    let model = validated_model(s)?;
    let (ds, _) = load_dataset(s)?;
    match s.precision {
        Precision::F64 => bench_with::<f64>(s, &model, &ds),
        Precision::F32 => bench_with::<f32>(s, &model, &ds),
    }
}

fn phases(t: &PhaseTotals) -> [(&'static str, f64); 5] {
    [
        ("forward", t.forward_s),
        ("backward", t.backward_s),
        ("step", t.step_s),
        ("fwd_bwd", t.forward_s + t.backward_s),
        ("total", t.wall_s),
    ]
}

fn bench_with<T: Real>(s: &Settings, model: &ModelConfig, ds: &Dataset) -> Outcome {
    let cfg = s.train_config();
    let run = |engine: Engine| -> Result<TrainingRun, Failure> {
        let mut store = EmbeddingStore::<T>::init(model, ds.num_entities(), ds.num_relations(), s.seed)?;
        let r = fit(&mut store, model, &ds.train, &cfg, engine, |r, _| {
            log::info!("{engine:?} epoch {} loss {:.6}", r.epoch, r.loss);
            Ok(())
        })?;
        Ok(r)
    };
    let sparse = run(Engine::Sparse)?;
    let dense = run(Engine::Dense)?;

    fs::create_dir_all(&s.out).with_context(|| format!("creating {}", s.out.display()))?;
    let csv_path = s.out.join("bench.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    for ((phase, sp), (_, de)) in phases(&sparse.totals).into_iter().zip(phases(&dense.totals)) {
        w.serialize(BenchRow {
            engine: "sparse",
            phase,
            seconds: sp,
            speedup: de / sp,
        })
        .context("writing bench row")?;
        w.serialize(BenchRow {
            engine: "dense",
            phase,
            seconds: de,
            speedup: 1.0,
        })
        .context("writing bench row")?;
    }
    w.flush().context("flushing bench.csv")?;

    let fb = |t: &PhaseTotals| t.forward_s + t.backward_s;
    let summary = BenchSummary {
        model: model.kind,
        epochs: cfg.epochs,
        sparse_final_loss: sparse.epochs.last().map(|e| e.loss),
        dense_final_loss: dense.epochs.last().map(|e| e.loss),
        sparse: sparse.totals,
        dense: dense.totals,
        speedup_fwd_bwd: fb(&dense.totals) / fb(&sparse.totals),
        speedup_total: dense.totals.wall_s / sparse.totals.wall_s,
        flop_estimate_per_epoch: flop_estimate(model, ds.train.len()),
    };
    write_json(&s.out.join("bench.json"), &summary)?;
    println!("{}", serde_json::to_string(&summary).context("serializing bench summary")?);
    Ok(())
}

pub fn synth(s: &Settings) -> Outcome {
    if s.synthetic.is_none() {
        return Err(Failure::Usage("synth needs --synthetic N:R:M".into()));
    }
    let (ds, report) = load_dataset(s)?;
    write_tsv(&ds, &s.out).with_context(|| format!("writing dataset to {}", s.out.display()))?;
    println!("{}", serde_json::to_string(&report).context("serializing report")?);
    Ok(())
}
