//! Triplet incidence matrices.
//!
//! Multiplying an incidence matrix by the embedding table replaces the
//! per-triple gather of `h`, `r`, `t` with one SpMM, and its transpose
//! replaces the matching gradient scatter. Entities occupy columns `[0, N)`
//! and relations `[N, N + R)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::CooMatrix;

/// A batch of `(head, relation, tail)` id triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleBatch {
    heads: Vec<usize>,
    relations: Vec<usize>,
    tails: Vec<usize>,
    num_entities: usize,
    num_relations: usize,
}

impl TripleBatch {
    pub fn new(
        heads: Vec<usize>,
        relations: Vec<usize>,
        tails: Vec<usize>,
        num_entities: usize,
        num_relations: usize,
    ) -> Result<Self> {
        if heads.len() != relations.len() || heads.len() != tails.len() {
            return Err(Error::Structure(format!(
                "triple arrays differ in length: {} heads, {} relations, {} tails",
                heads.len(),
                relations.len(),
                tails.len()
            )));
        }
        let batch = Self {
            heads,
            relations,
            tails,
            num_entities,
            num_relations,
        };
        for (i, (h, r, t)) in batch.iter().enumerate() {
            if h >= num_entities || t >= num_entities || r >= num_relations {
                return Err(Error::Structure(format!(
                    "triple {i} = ({h}, {r}, {t}) outside {num_entities} entities / {num_relations} relations"
                )));
            }
        }
        Ok(batch)
    }

    pub fn from_triples(
        triples: &[(usize, usize, usize)],
        num_entities: usize,
        num_relations: usize,
    ) -> Result<Self> {
        Self::new(
            triples.iter().map(|t| t.0).collect(),
            triples.iter().map(|t| t.1).collect(),
            triples.iter().map(|t| t.2).collect(),
            num_entities,
            num_relations,
        )
    }

    pub fn empty(num_entities: usize, num_relations: usize) -> Self {
        Self {
            heads: Vec::new(),
            relations: Vec::new(),
            tails: Vec::new(),
            num_entities,
            num_relations,
        }
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn relations(&self) -> &[usize] {
        &self.relations
    }

    pub fn tails(&self) -> &[usize] {
        &self.tails
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn get(&self, i: usize) -> (usize, usize, usize) {
        (self.heads[i], self.relations[i], self.tails[i])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            heads: self.heads[range.clone()].to_vec(),
            relations: self.relations[range.clone()].to_vec(),
            tails: self.tails[range].to_vec(),
            num_entities: self.num_entities,
            num_relations: self.num_relations,
        }
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            heads: indices.iter().map(|&i| self.heads[i]).collect(),
            relations: indices.iter().map(|&i| self.relations[i]).collect(),
            tails: indices.iter().map(|&i| self.tails[i]).collect(),
            num_entities: self.num_entities,
            num_relations: self.num_relations,
        }
    }

    /// Same triples interpreted against a (larger or equal) id space.
    pub fn with_counts(&self, num_entities: usize, num_relations: usize) -> Result<Self> {
        Self::new(
            self.heads.clone(),
            self.relations.clone(),
            self.tails.clone(),
            num_entities,
            num_relations,
        )
    }

    pub fn push(&mut self, h: usize, r: usize, t: usize) -> Result<()> {
        if h >= self.num_entities || t >= self.num_entities || r >= self.num_relations {
            return Err(Error::Structure(format!("triple ({h}, {r}, {t}) out of range")));
        }
        self.heads.push(h);
        self.relations.push(r);
        self.tails.push(t);
        Ok(())
    }

    /// Index of the first triple whose head equals its tail.
    pub fn first_self_loop(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.heads[i] == self.tails[i])
    }
}

/// `M × N` matrix with `+1` at the head and `-1` at the tail of each row.
/// `A · E` yields `h − t`; a self-loop cancels to an empty row.
pub fn build_ht<T: Real>(batch: &TripleBatch) -> CooMatrix<T> {
    let mut coo = CooMatrix::with_capacity(batch.len(), batch.num_entities(), 2 * batch.len());
    for (i, (h, _, t)) in batch.iter().enumerate() {
        coo.push(i, h, T::one()).expect("validated batch");
        coo.push(i, t, -T::one()).expect("validated batch");
    }
    coo
}

/// `M × (N + R)` matrix with `+1` at the head, `-1` at the tail and `+1` at
/// `N + relation`. `A · [E; R]` yields `h + r − t`.
pub fn build_hrt<T: Real>(batch: &TripleBatch) -> CooMatrix<T> {
    let n = batch.num_entities();
    let mut coo = CooMatrix::with_capacity(batch.len(), n + batch.num_relations(), 3 * batch.len());
    for (i, (h, r, t)) in batch.iter().enumerate() {
        coo.push(i, h, T::one()).expect("validated batch");
        coo.push(i, t, -T::one()).expect("validated batch");
        coo.push(i, n + r, T::one()).expect("validated batch");
    }
    coo
}

/// Marker layout for product semirings: `+1` at head, tail and `N + relation`.
///
/// With `conjugate_tail` the tail carries `-1`, which the complex product
/// semiring reads as "select the conjugate". The same `-1` tail marker is the
/// subtract marker of the rotation kernel.
///
/// Rejects self-loops: one cell cannot carry two multiplicative markers.
pub fn build_multiplicative<T: Real>(batch: &TripleBatch, conjugate_tail: bool) -> Result<CooMatrix<T>> {
    if let Some(row) = batch.first_self_loop() {
        return Err(Error::DegenerateTriple {
            row,
            entity: batch.heads()[row],
        });
    }
    let n = batch.num_entities();
    let tail_marker = if conjugate_tail { -T::one() } else { T::one() };
    let mut coo = CooMatrix::with_capacity(batch.len(), n + batch.num_relations(), 3 * batch.len());
    for (i, (h, r, t)) in batch.iter().enumerate() {
        coo.push(i, h, T::one()).expect("validated batch");
        coo.push(i, t, tail_marker).expect("validated batch");
        coo.push(i, n + r, T::one()).expect("validated batch");
    }
    Ok(coo)
}
