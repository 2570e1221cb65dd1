//! Link-prediction ranking: Hits@k and MRR under raw or filtered protocols.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::dense_forward;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::incidence::TripleBatch;
use crate::models::{energy_sign, forward, ModelConfig};
use crate::scalar::Real;
use crate::store::EmbeddingStore;

pub const HITS_AT: [usize; 3] = [1, 3, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Raw,
    Filtered,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Protocol::Raw),
            "filtered" => Ok(Protocol::Filtered),
            _ => Err(Error::Config(format!("unknown protocol `{s}`"))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Raw => "raw",
            Protocol::Filtered => "filtered",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Head,
    Tail,
}

/// Known true triples, indexed by `(h, r)` → tails and `(r, t)` → heads.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    tails: HashMap<(usize, usize), HashSet<usize>>,
    heads: HashMap<(usize, usize), HashSet<usize>>,
}

impl FilterIndex {
    pub fn new<'a>(batches: impl IntoIterator<Item = &'a TripleBatch>) -> Self {
        let mut idx = Self::default();
        for b in batches {
            for (h, r, t) in b.iter() {
                idx.tails.entry((h, r)).or_default().insert(t);
                idx.heads.entry((r, t)).or_default().insert(h);
            }
        }
        idx
    }

    pub fn from_dataset(ds: &Dataset) -> Self {
        Self::new([&ds.train, &ds.valid, &ds.test])
    }

    /// Whether replacing `side` of `(h, r, t)` with `e` gives a known triple.
    pub fn contains(&self, (h, r, t): (usize, usize, usize), side: Side, e: usize) -> bool {
        let set = match side {
            Side::Head => self.heads.get(&(r, t)),
            Side::Tail => self.tails.get(&(h, r)),
        };
        set.is_some_and(|s| s.contains(&e))
    }
}

/// Energies of every replacement of `side`, in entity order.
///
/// Candidates that would be self-loops under a multiplicative model are
/// scored with the dense path, which accepts them.
pub fn candidate_energies<T: Real>(
    query: (usize, usize, usize),
    side: Side,
    store: &EmbeddingStore<T>,
    config: &ModelConfig,
) -> Result<Vec<T>> {
    let (h, r, t) = query;
    let n = store.num_entities();
    let nr = store.num_relations();
    let mut batch = TripleBatch::empty(n, nr);
    let mut loops = TripleBatch::empty(n, nr);
    let mut loop_at = None;
    for e in 0..n {
        let (ch, ct) = match side {
            Side::Head => (e, t),
            Side::Tail => (h, e),
        };
        if config.kind.is_multiplicative() && ch == ct {
            loops.push(ch, r, ct)?;
            loop_at = Some(e);
        } else {
            batch.push(ch, r, ct)?;
        }
    }
    let sign = energy_sign::<T>(config.kind);
    let mut energies: Vec<T> = forward(config, &batch, store)?.scores().iter().map(|&s| sign * s).collect();
    if let Some(e) = loop_at {
        let s = dense_forward(config, &loops, store)?.scores()[0];
        energies.insert(e, sign * s);
    }
    Ok(energies)
}

/// `1 +` the number of candidates with strictly lower energy than the true
/// entity. With a filter, candidates forming other known triples are skipped.
pub fn rank_entity<T: Real>(
    query: (usize, usize, usize),
    side: Side,
    store: &EmbeddingStore<T>,
    config: &ModelConfig,
    filter: Option<&FilterIndex>,
) -> Result<usize> {
    let energies = candidate_energies(query, side, store, config)?;
    let truth = match side {
        Side::Head => query.0,
        Side::Tail => query.2,
    };
    let target = energies[truth];
    let better = energies
        .iter()
        .enumerate()
        .filter(|&(e, &en)| e != truth && en < target && !filter.is_some_and(|f| f.contains(query, side, e)))
        .count();
    Ok(1 + better)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub hits_at: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub n_queries: usize,
    pub protocol: Protocol,
}

impl EvalReport {
    /// Aggregates ranks in the given order.
    pub fn from_ranks(ranks: &[usize], protocol: Protocol) -> Self {
        let q = ranks.len() as f64;
        let hits_at = HITS_AT
            .iter()
            .map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / q))
            .collect();
        let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / q;
        Self {
            hits_at,
            mrr,
            n_queries: ranks.len(),
            protocol,
        }
    }

    pub fn hits(&self, k: usize) -> f64 {
        self.hits_at.get(&k).copied().unwrap_or(f64::NAN)
    }
}

/// Head and tail ranks of every triple in `queries`, in order: head then
/// tail for triple 0, then triple 1, and so on.
pub fn rank_queries<T: Real>(
    queries: &TripleBatch,
    store: &EmbeddingStore<T>,
    config: &ModelConfig,
    filter: Option<&FilterIndex>,
) -> Result<Vec<usize>> {
    let per_triple: Vec<Result<[usize; 2]>> = (0..queries.len())
        .into_par_iter()
        .map(|i| {
            let q = queries.get(i);
            Ok([
                rank_entity(q, Side::Head, store, config, filter)?,
                rank_entity(q, Side::Tail, store, config, filter)?,
            ])
        })
        .collect();
    let mut ranks = Vec::with_capacity(2 * queries.len());
    for r in per_triple {
        ranks.extend(r?);
    }
    Ok(ranks)
}

/// Ranks both sides of every test triple. The filter set is the union of
/// all three splits.
pub fn evaluate<T: Real>(ds: &Dataset, store: &EmbeddingStore<T>, config: &ModelConfig, protocol: Protocol) -> Result<EvalReport> {
    let filter = (protocol == Protocol::Filtered).then(|| FilterIndex::from_dataset(ds));
    evaluate_split(&ds.test, store, config, filter.as_ref(), protocol)
}

pub fn evaluate_split<T: Real>(
    queries: &TripleBatch,
    store: &EmbeddingStore<T>,
    config: &ModelConfig,
    filter: Option<&FilterIndex>,
    protocol: Protocol,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::Dataset("no test triples to evaluate".into()));
    }
    if queries.num_entities() != store.num_entities() || queries.num_relations() != store.num_relations() {
        return Err(Error::shape(
            "evaluate",
            format!("{} entities / {} relations", store.num_entities(), store.num_relations()),
            format!("{} / {}", queries.num_entities(), queries.num_relations()),
        ));
    }
    let ranks = rank_queries(queries, store, config, filter)?;
    Ok(EvalReport::from_ranks(&ranks, protocol))
}
