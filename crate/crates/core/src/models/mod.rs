//! Sparse forward scores and analytic backward passes.
//!
//! Every model first turns its batch into an incidence matrix and runs one
//! SpMM to produce the shared sub-expression (`h − t`, `h + r − t`, or a
//! semiring product), then finishes the score row by row. Backward passes
//! build the per-row upstream matrix and push it through the transposed
//! incidence.

mod complex;
mod config;
pub mod distance;
mod distmult;
mod rotate;
mod toruse;
mod transe;
mod transh;
mod transr;

use num_complex::Complex;
use rayon::prelude::*;

pub use config::{ModelConfig, ModelKind, Norm, Polarity};

use crate::baseline::DenseTape;
use crate::error::{Error, Result};
use crate::incidence::TripleBatch;
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, DenseMatrix};
use crate::store::{EmbeddingStore, Gradients};

/// Per-triple scores plus whatever the backward pass needs.
#[derive(Debug, Clone)]
pub struct ScoreBatch<T> {
    scores: Vec<T>,
    pub(crate) cache: Cache<T>,
}

#[derive(Debug, Clone)]
pub(crate) enum Cache<T> {
    /// TransE and TorusE: the `hrt` incidence and its product rows.
    Hrt {
        incidence: CsrMatrix<T>,
        hrt: DenseMatrix<T>,
    },
    /// TransR and TransH: the `ht` incidence, `u = h − t`, and the vector
    /// whose norm is the score.
    Projected {
        incidence: CsrMatrix<T>,
        relations: Vec<usize>,
        ht: DenseMatrix<T>,
        projected: DenseMatrix<T>,
    },
    /// DistMult and ComplEx; backward re-reads the embeddings.
    Product { incidence: CsrMatrix<T> },
    /// RotatE: the incidence and `q = h ⊙ r − t`.
    Rotate {
        incidence: CsrMatrix<T>,
        residual: DenseMatrix<Complex<T>>,
    },
    /// Produced by the dense gather/scatter baseline.
    Dense(DenseTape<T>),
}

impl<T> ScoreBatch<T> {
    pub(crate) fn new(scores: Vec<T>, cache: Cache<T>) -> Self {
        Self { scores, cache }
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn into_scores(self) -> Vec<T> {
        self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Scores `batch` with the sparse formulation of `config.kind`.
pub fn forward<T: Real>(config: &ModelConfig, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    check_inputs(config, batch, store)?;
    match config.kind {
        ModelKind::TransE => transe::forward(config.norm, batch, store),
        ModelKind::TransR => transr::forward(config.norm, batch, store),
        ModelKind::TransH => transh::forward(config.norm, batch, store),
        ModelKind::TorusE => toruse::forward(config.norm, batch, store),
        ModelKind::DistMult => distmult::forward(batch, store),
        ModelKind::ComplEx => complex::forward(batch, store),
        ModelKind::RotatE => rotate::forward(batch, store),
    }
}

/// Alias of [`forward`]: the uniform scoring entry point used by training
/// and evaluation.
pub fn score<T: Real>(batch: &TripleBatch, store: &EmbeddingStore<T>, config: &ModelConfig) -> Result<ScoreBatch<T>> {
    forward(config, batch, store)
}

/// Accumulates `Σ_i upstream[i] · ∂score_i/∂θ` into `grads`.
pub fn backward_into<T: Real>(
    config: &ModelConfig,
    sb: &ScoreBatch<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    store.check_compatible(config)?;
    if upstream.len() != sb.len() {
        return Err(Error::shape("backward", format!("{} upstream values", sb.len()), upstream.len()));
    }
    match (&sb.cache, config.kind) {
        (Cache::Hrt { incidence, hrt }, ModelKind::TransE) => {
            transe::backward(config.norm, incidence, hrt, upstream, grads)
        }
        (Cache::Hrt { incidence, hrt }, ModelKind::TorusE) => {
            toruse::backward(config.norm, incidence, hrt, upstream, grads)
        }
        (Cache::Projected { .. }, ModelKind::TransR) => transr::backward(config.norm, &sb.cache, upstream, store, grads),
        (Cache::Projected { .. }, ModelKind::TransH) => transh::backward(config.norm, &sb.cache, upstream, store, grads),
        (Cache::Product { incidence }, ModelKind::DistMult) => distmult::backward(incidence, upstream, store, grads),
        (Cache::Product { incidence }, ModelKind::ComplEx) => complex::backward(incidence, upstream, store, grads),
        (Cache::Rotate { incidence, residual }, ModelKind::RotatE) => {
            rotate::backward(incidence, residual, upstream, store, grads)
        }
        (Cache::Dense(_), _) => Err(Error::Config(
            "score batch came from the dense baseline; use baseline::dense_backward".into(),
        )),
        _ => Err(Error::Config(format!("score batch does not belong to {}", config.kind))),
    }
}

pub fn backward<T: Real>(
    config: &ModelConfig,
    sb: &ScoreBatch<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
) -> Result<Gradients<T>> {
    let mut grads = Gradients::zeros_like(store);
    backward_into(config, sb, upstream, store, &mut grads)?;
    Ok(grads)
}

/// `+1` for distance models, `-1` for plausibility models: multiplying a
/// score by this gives an energy where lower is better.
pub fn energy_sign<T: Real>(kind: ModelKind) -> T {
    match kind.polarity() {
        Polarity::Distance => T::one(),
        Polarity::Plausibility => -T::one(),
    }
}

pub fn energies<T: Real>(kind: ModelKind, scores: &[T]) -> Vec<T> {
    let s = energy_sign::<T>(kind);
    scores.iter().map(|&x| s * x).collect()
}

pub(crate) fn check_inputs<T: Real>(config: &ModelConfig, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<()> {
    config.validate()?;
    store.check_compatible(config)?;
    if batch.num_entities() != store.num_entities() || batch.num_relations() != store.num_relations() {
        return Err(Error::shape(
            "forward",
            format!("{} entities / {} relations", store.num_entities(), store.num_relations()),
            format!("{} / {}", batch.num_entities(), batch.num_relations()),
        ));
    }
    Ok(())
}

/// Applies `f` to every row of `m` in parallel, in row order.
pub(crate) fn map_rows<S, U, F>(m: &DenseMatrix<S>, f: F) -> Vec<U>
where
    S: Copy + Sync,
    U: Send,
    F: Fn(&[S]) -> U + Sync,
{
    (0..m.rows()).into_par_iter().map(|i| f(m.row(i))).collect()
}

/// Builds an `M × d` matrix row by row in parallel.
pub(crate) fn build_rows<S, F>(rows: usize, cols: usize, f: F) -> DenseMatrix<S>
where
    S: Copy + Send + Sync + num_traits::Zero,
    F: Fn(usize, &mut [S]) + Sync,
{
    let mut out = DenseMatrix::zeros(rows, cols);
    if cols > 0 {
        out.data_mut()
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
    out
}

/// Triple indices grouped by relation: `order[offsets[r]..offsets[r + 1]]`
/// lists, in increasing order, the triples with relation `r`.
pub(crate) fn group_by_relation(relations: &[usize], num_relations: usize) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; num_relations + 1];
    for &r in relations {
        offsets[r + 1] += 1;
    }
    for r in 0..num_relations {
        offsets[r + 1] += offsets[r];
    }
    let mut next = offsets.clone();
    let mut order = vec![0usize; relations.len()];
    for (i, &r) in relations.iter().enumerate() {
        order[next[r]] = i;
        next[r] += 1;
    }
    (offsets, order)
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
