//! Negative sampling, the margin ranking loss and the epoch loop.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{dense_backward_into, dense_forward};
use crate::error::{Error, Result};
use crate::incidence::TripleBatch;
use crate::models::{backward_into, energy_sign, forward, ModelConfig, Norm, ScoreBatch};
use crate::scalar::Real;
use crate::store::{EmbeddingStore, Gradients, RowSupport, StepDecay};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub margin: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub norm: Norm,
    pub scheduler: Option<StepDecay>,
    /// Reshuffle the training triples every epoch.
    pub shuffle: bool,
    /// Draw fresh negatives every epoch instead of once per run.
    pub resample_negatives: bool,
    /// Project the entity rows of every batch onto the unit sphere after
    /// its step.
    pub normalize_entities: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 4e-4,
            margin: 0.5,
            epochs: 200,
            batch_size: 32768,
            seed: 0,
            norm: Norm::L2,
            scheduler: None,
            shuffle: true,
            resample_negatives: false,
            normalize_entities: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.margin < 0.0 || !self.margin.is_finite() {
            return Err(Error::Config(format!("margin must be finite and >= 0, got {}", self.margin)));
        }
        if self.lr < 0.0 || !self.lr.is_finite() {
            return Err(Error::Config(format!("lr must be finite and >= 0, got {}", self.lr)));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.scheduler.map_or(self.lr, |s| s.lr_at(self.lr, epoch))
    }
}

/// Which scoring path the epoch loop drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Sparse,
    Dense,
}

/// Uniform corruption: a fair coin picks head or tail, the replacement is
/// uniform over the other `N - 1` entities.
pub fn negative_sample(pos: &TripleBatch, seed: u64) -> Result<TripleBatch> {
    corrupt(pos, seed, false)
}

/// Like [`negative_sample`] but the replacement also avoids the opposite
/// endpoint, so no negative is a self-loop. Needs `N ≥ 3`.
pub fn negative_sample_without_loops(pos: &TripleBatch, seed: u64) -> Result<TripleBatch> {
    corrupt(pos, seed, true)
}

fn corrupt(pos: &TripleBatch, seed: u64, avoid_loops: bool) -> Result<TripleBatch> {
    let n = pos.num_entities();
    let needed = if avoid_loops { 3 } else { 2 };
    if n < needed && !pos.is_empty() {
        return Err(Error::Config(format!("negative sampling needs at least {needed} entities, have {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TripleBatch::empty(n, pos.num_relations());
    for (h, r, t) in pos.iter() {
        let corrupt_head = rng.gen_bool(0.5);
        let (orig, other) = if corrupt_head { (h, t) } else { (t, h) };
        let mut excluded = vec![orig];
        if avoid_loops && other != orig {
            excluded.push(other);
        }
        excluded.sort_unstable();
        let mut e = rng.gen_range(0..n - excluded.len());
        for &x in &excluded {
            if e >= x {
                e += 1;
            }
        }
        let (nh, nt) = if corrupt_head { (e, t) } else { (h, e) };
        out.push(nh, r, nt)?;
    }
    Ok(out)
}

/// Mean hinge `max(0, margin + pos − neg)` over energies, with its
/// subgradients. The hinge is active only when strictly positive.
pub fn margin_ranking_loss<T: Real>(pos: &[T], neg: &[T], margin: T) -> Result<(T, Vec<T>, Vec<T>)> {
    if pos.len() != neg.len() {
        return Err(Error::shape("margin_ranking_loss", format!("{} negatives", pos.len()), neg.len()));
    }
    if pos.is_empty() {
        return Ok((T::zero(), Vec::new(), Vec::new()));
    }
    let inv = T::one() / T::lit(pos.len() as f64);
    let mut total = T::zero();
    let mut d_pos = vec![T::zero(); pos.len()];
    for (i, (&p, &n)) in pos.iter().zip(neg).enumerate() {
        let term = margin + p - n;
        if term > T::zero() {
            total += term;
            d_pos[i] = inv;
        }
    }
    let d_neg = d_pos.iter().map(|&d| -d).collect();
    Ok((total * inv, d_pos, d_neg))
}

/// One JSON-lines record of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub loss: f64,
    pub t_forward_s: f64,
    pub t_backward_s: f64,
    pub t_step_s: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTotals {
    pub forward_s: f64,
    pub backward_s: f64,
    pub step_s: f64,
    pub wall_s: f64,
}

impl PhaseTotals {
    fn add(&mut self, r: &EpochReport) {
        self.forward_s += r.t_forward_s;
        self.backward_s += r.t_backward_s;
        self.step_s += r.t_step_s;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRun {
    pub epochs: Vec<EpochReport>,
    pub totals: PhaseTotals,
}

impl TrainingRun {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }
}

fn score<T: Real>(engine: Engine, model: &ModelConfig, b: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    match engine {
        Engine::Sparse => forward(model, b, store),
        Engine::Dense => dense_forward(model, b, store),
    }
}

fn accumulate<T: Real>(
    engine: Engine,
    model: &ModelConfig,
    sb: &ScoreBatch<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    match engine {
        Engine::Sparse => backward_into(model, sb, upstream, store, grads),
        Engine::Dense => dense_backward_into(sb, upstream, store, grads),
    }
}

fn epoch_order(len: usize, cfg: &TrainConfig, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    if cfg.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);
    }
    order
}

/// Mean hinge loss of one aligned positive/negative batch and its gradient
/// with respect to every parameter.
pub fn loss_and_gradients<T: Real>(
    store: &EmbeddingStore<T>,
    model: &ModelConfig,
    pos: &TripleBatch,
    neg: &TripleBatch,
    margin: T,
    engine: Engine,
) -> Result<(T, Gradients<T>)> {
    let sign = energy_sign::<T>(model.kind);
    let sb_pos = score(engine, model, pos, store)?;
    let sb_neg = score(engine, model, neg, store)?;
    let e_pos: Vec<T> = sb_pos.scores().iter().map(|&s| sign * s).collect();
    let e_neg: Vec<T> = sb_neg.scores().iter().map(|&s| sign * s).collect();
    let (loss, d_pos, d_neg) = margin_ranking_loss(&e_pos, &e_neg, margin)?;
    let mut grads = Gradients::zeros_like(store);
    let up_pos: Vec<T> = d_pos.iter().map(|&d| sign * d).collect();
    let up_neg: Vec<T> = d_neg.iter().map(|&d| sign * d).collect();
    accumulate(engine, model, &sb_pos, &up_pos, store, &mut grads)?;
    accumulate(engine, model, &sb_neg, &up_neg, store, &mut grads)?;
    Ok((loss, grads))
}

/// Runs one pass over `positives` in minibatches of `cfg.batch_size`
/// (the last one may be smaller), stepping after every batch.
///
/// `negatives[i]` is the corruption of `positives[i]`. The reported loss is
/// the mean hinge over all triples of the epoch.
#[allow(clippy::too_many_arguments)]
pub fn train_epoch<T: Real>(
    store: &mut EmbeddingStore<T>,
    model: &ModelConfig,
    positives: &TripleBatch,
    negatives: &TripleBatch,
    cfg: &TrainConfig,
    epoch: usize,
    engine: Engine,
) -> Result<EpochReport> {
    if positives.len() != negatives.len() {
        return Err(Error::shape("train_epoch", format!("{} negatives", positives.len()), negatives.len()));
    }
    cfg.validate()?;
    let sign = energy_sign::<T>(model.kind);
    let margin = T::lit(cfg.margin);
    let lr = T::lit(cfg.lr_at(epoch));
    let order = epoch_order(positives.len(), cfg, epoch);
    let (mut t_fwd, mut t_bwd, mut t_step) = (Duration::ZERO, Duration::ZERO, Duration::ZERO);
    let mut grads: Option<Gradients<T>> = None;
    let mut loss_sum = 0.0;

    for (bi, idx) in order.chunks(cfg.batch_size).enumerate() {
        let clock = Instant::now();
        let pos = positives.select(idx);
        let neg = negatives.select(idx);
        let sb_pos = score(engine, model, &pos, store)?;
        let sb_neg = score(engine, model, &neg, store)?;
        let e_pos: Vec<T> = sb_pos.scores().iter().map(|&s| sign * s).collect();
        let e_neg: Vec<T> = sb_neg.scores().iter().map(|&s| sign * s).collect();
        let (loss, d_pos, d_neg) = margin_ranking_loss(&e_pos, &e_neg, margin)?;
        let loss = loss.as_f64();
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: bi, loss });
        }
        loss_sum += loss * idx.len() as f64;
        t_fwd += clock.elapsed();

        let clock = Instant::now();
        let g = grads.get_or_insert_with(|| Gradients::zeros_like(store));
        let up_pos: Vec<T> = d_pos.iter().map(|&d| sign * d).collect();
        let up_neg: Vec<T> = d_neg.iter().map(|&d| sign * d).collect();
        accumulate(engine, model, &sb_pos, &up_pos, store, g)?;
        accumulate(engine, model, &sb_neg, &up_neg, store, g)?;
        t_bwd += clock.elapsed();

        let clock = Instant::now();
        let support = RowSupport::of(&[&pos, &neg]);
        store.sgd_step_rows(g, lr, &support)?;
        if cfg.normalize_entities {
            store.normalize_entity_rows(&support.entities);
        }
        g.zero_rows(&support);
        t_step += clock.elapsed();
    }

    let loss = if positives.is_empty() {
        0.0
    } else {
        loss_sum / positives.len() as f64
    };
    Ok(EpochReport {
        epoch,
        loss,
        t_forward_s: t_fwd.as_secs_f64(),
        t_backward_s: t_bwd.as_secs_f64(),
        t_step_s: t_step.as_secs_f64(),
    })
}

/// Negatives for a whole run; self-loops are avoided for models whose
/// incidence cannot encode them.
pub fn run_negatives(model: &ModelConfig, positives: &TripleBatch, seed: u64) -> Result<TripleBatch> {
    if model.kind.is_multiplicative() {
        negative_sample_without_loops(positives, seed)
    } else {
        negative_sample(positives, seed)
    }
}

/// Trains for `cfg.epochs` epochs, calling `on_epoch` after each one.
pub fn fit<T, F>(
    store: &mut EmbeddingStore<T>,
    model: &ModelConfig,
    train: &TripleBatch,
    cfg: &TrainConfig,
    engine: Engine,
    mut on_epoch: F,
) -> Result<TrainingRun>
where
    T: Real,
    F: FnMut(&EpochReport, &EmbeddingStore<T>) -> Result<()>,
{
    cfg.validate()?;
    store.check_compatible(model)?;
    let start = Instant::now();
    let mut run = TrainingRun {
        epochs: Vec::with_capacity(cfg.epochs),
        totals: PhaseTotals::default(),
    };
    if cfg.epochs == 0 {
        return Ok(run);
    }
    let mut negatives = run_negatives(model, train, cfg.seed)?;
    for epoch in 0..cfg.epochs {
        if cfg.resample_negatives && epoch > 0 {
            negatives = run_negatives(model, train, cfg.seed.wrapping_add(epoch as u64))?;
        }
        let report = train_epoch(store, model, train, &negatives, cfg, epoch, engine)?;
        log::debug!("epoch {epoch}: loss {:.6}", report.loss);
        run.totals.add(&report);
        on_epoch(&report, store)?;
        run.epochs.push(report);
    }
    run.totals.wall_s = start.elapsed().as_secs_f64();
    Ok(run)
}
