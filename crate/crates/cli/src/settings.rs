//! Effective run settings: defaults, then a flat `key = value` config file,
//! then command-line flags.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sparsekge::eval::Protocol;
use sparsekge::training::{Engine, TrainConfig};
use sparsekge::{ModelConfig, ModelKind, Norm, StepDecay};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
        match nums.as_deref() {
            Ok([n, r, m]) => Ok(Self {
                entities: *n,
                relations: *r,
                triples: *m,
            }),
            _ => Err(format!("expected N:R:M, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub model: ModelKind,
    pub dim: usize,
    pub relation_dim: Option<usize>,
    pub norm: Norm,
    pub lr: f64,
    pub margin: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub precision: Precision,
    pub protocol: Protocol,
    pub step_every: usize,
    pub step_factor: f64,
    pub normalize_entities: bool,
    pub resample_negatives: bool,
    pub shuffle: bool,
    pub strict: bool,
    pub engine: Engine,
    pub eval_after: bool,
    pub dataset: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub data_seed: Option<u64>,
    pub checkpoint: Option<PathBuf>,
    /// Keys set by a config file or flag rather than left at default.
    pub explicit: BTreeSet<String>,
}

impl Default for Settings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            model: ModelKind::TransE,
            dim: 64,
            relation_dim: None,
            norm: t.norm,
            lr: t.lr,
            margin: t.margin,
            epochs: t.epochs,
            batch_size: t.batch_size,
            seed: t.seed,
            threads: None,
            out: PathBuf::from("run"),
            precision: Precision::F64,
            protocol: Protocol::Filtered,
            step_every: 0,
            step_factor: 0.5,
            normalize_entities: t.normalize_entities,
            resample_negatives: t.resample_negatives,
            shuffle: t.shuffle,
            strict: false,
            engine: Engine::Sparse,
            eval_after: false,
            dataset: None,
            synthetic: None,
            data_seed: None,
            checkpoint: None,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| format!("invalid value `{value}` for `{key}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(format!("invalid boolean `{value}` for `{key}`")),
    }
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "model" => self.model = parse(&key, v)?,
            "dim" => self.dim = parse(&key, v)?,
            "relation_dim" => self.relation_dim = Some(parse(&key, v)?),
            "norm" => self.norm = parse(&key, v)?,
            "lr" => self.lr = parse(&key, v)?,
            "margin" => self.margin = parse(&key, v)?,
            "epochs" => self.epochs = parse(&key, v)?,
            "batch_size" => self.batch_size = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "threads" => self.threads = Some(parse(&key, v)?),
            "out" => self.out = PathBuf::from(v),
            "precision" => {
                self.precision = match v.to_ascii_lowercase().as_str() {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(format!("invalid precision `{v}`; use f32 or f64")),
                }
            }
            "protocol" => self.protocol = parse(&key, v)?,
            "step_every" => self.step_every = parse(&key, v)?,
            "step_factor" => self.step_factor = parse(&key, v)?,
            "normalize_entities" => self.normalize_entities = parse_bool(&key, v)?,
            "resample_negatives" => self.resample_negatives = parse_bool(&key, v)?,
            "shuffle" => self.shuffle = parse_bool(&key, v)?,
            "strict" => self.strict = parse_bool(&key, v)?,
            "engine" => {
                self.engine = match v.to_ascii_lowercase().as_str() {
                    "sparse" => Engine::Sparse,
                    "dense" => Engine::Dense,
                    _ => return Err(format!("invalid engine `{v}`; use sparse or dense")),
                }
            }
            "eval_after" => self.eval_after = parse_bool(&key, v)?,
            "dataset" => self.dataset = Some(PathBuf::from(v)),
            "synthetic" => self.synthetic = Some(parse(&key, v)?),
            "data_seed" => self.data_seed = Some(parse(&key, v)?),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown setting `{key}`")),
        }
        self.explicit.insert(key);
        Ok(())
    }

    /// Applies every `key = value` line of `path`; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), n + 1))?;
            self.set(k, v).map_err(|e| format!("{}:{}: {e}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn model_config(&self) -> ModelConfig {
        let mut c = ModelConfig::new(self.model, self.dim).with_norm(self.norm);
        if let Some(dr) = self.relation_dim {
            c = c.with_relation_dim(dr);
        }
        c
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            margin: self.margin,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            norm: self.norm,
            scheduler: (self.step_every > 0).then_some(StepDecay {
                every: self.step_every,
                factor: self.step_factor,
            }),
            shuffle: self.shuffle,
            resample_negatives: self.resample_negatives,
            normalize_entities: self.normalize_entities,
        }
    }

    /// The settings that shape a model, as a config file `eval` can read.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model.name());
        let _ = writeln!(s, "dim = {}", self.dim);
        if let Some(dr) = self.relation_dim {
            let _ = writeln!(s, "relation_dim = {dr}");
        }
        let _ = writeln!(s, "norm = {}", self.norm);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "margin = {}", self.margin);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "precision = {}", if self.precision == Precision::F32 { "f32" } else { "f64" });
        let _ = writeln!(s, "step_every = {}", self.step_every);
        let _ = writeln!(s, "step_factor = {}", self.step_factor);
        let _ = writeln!(s, "normalize_entities = {}", self.normalize_entities);
        let _ = writeln!(s, "resample_negatives = {}", self.resample_negatives);
        let _ = writeln!(s, "shuffle = {}", self.shuffle);
        if let Some(d) = &self.dataset {
            let _ = writeln!(s, "dataset = {}", d.display());
        }
        if let Some(m) = &self.synthetic {
            let _ = writeln!(s, "synthetic = {}:{}:{}", m.entities, m.relations, m.triples);
        }
        if let Some(ds) = self.data_seed {
            let _ = writeln!(s, "data_seed = {ds}");
        }
        s
    }
}
