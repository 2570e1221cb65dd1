#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsekge::models::distance::torus_wrap;
use sparsekge::{EmbeddingStore, ModelConfig, ModelKind, Norm, TripleBatch};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a − b| ≤ tol · max(|a|, |b|, floor)`.
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

pub struct Limits {
    pub max_entities: usize,
    pub max_relations: usize,
    pub max_dim: usize,
    pub max_triples: usize,
}

pub const SMALL: Limits = Limits {
    max_entities: 50,
    max_relations: 8,
    max_dim: 16,
    max_triples: 64,
};

pub fn random_config(kind: ModelKind, rng: &mut ChaCha8Rng, max_dim: usize) -> ModelConfig {
    let d = rng.gen_range(1..=max_dim);
    let norm = if rng.gen_bool(0.5) { Norm::L1 } else { Norm::L2 };
    let mut c = ModelConfig::new(kind, d).with_norm(norm);
    if kind == ModelKind::TransR {
        c = c.with_relation_dim(rng.gen_range(1..=max_dim));
    }
    c
}

/// A seeded store with every table, including projections and normals,
/// overwritten by uniform values in `(-1, 1)`.
pub fn random_store(c: &ModelConfig, n: usize, nr: usize, rng: &mut ChaCha8Rng) -> EmbeddingStore<f64> {
    let mut s = EmbeddingStore::init(c, n, nr, rng.gen()).unwrap();
    let mut fill = |v: &mut [f64]| v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    fill(s.entities_mut().data_mut());
    fill(s.relations_mut().data_mut());
    if let Some(p) = s.projections_mut() {
        fill(p.data_mut());
    }
    if let Some(w) = s.normals_mut() {
        fill(w.data_mut());
        let d = w.cols();
        for row in w.data_mut().chunks_mut(d) {
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    s
}

/// Random triples; multiplicative models never get `h == t`.
pub fn random_batch(kind: ModelKind, n: usize, nr: usize, m: usize, rng: &mut ChaCha8Rng) -> TripleBatch {
    let mut b = TripleBatch::empty(n, nr);
    while b.len() < m {
        let (h, r, t) = (rng.gen_range(0..n), rng.gen_range(0..nr), rng.gen_range(0..n));
        if kind.is_multiplicative() && h == t {
            continue;
        }
        b.push(h, r, t).unwrap();
    }
    b
}

pub struct Instance {
    pub config: ModelConfig,
    pub store: EmbeddingStore<f64>,
    pub batch: TripleBatch,
    pub upstream: Vec<f64>,
}

pub fn random_instance(kind: ModelKind, rng: &mut ChaCha8Rng, lim: &Limits) -> Instance {
    let min_n = if kind.is_multiplicative() { 3 } else { 2 };
    let n = rng.gen_range(min_n..=lim.max_entities);
    let nr = rng.gen_range(1..=lim.max_relations);
    let m = rng.gen_range(1..=lim.max_triples);
    let config = random_config(kind, rng, lim.max_dim);
    let store = random_store(&config, n, nr, rng);
    let batch = random_batch(kind, n, nr, m, rng);
    let upstream = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Instance {
        config,
        store,
        batch,
        upstream,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-coordinate arguments of the non-smooth part of each score: the
/// vector under the norm, or the complex residual moduli for RotatE.
pub fn pre_norm_rows(c: &ModelConfig, s: &EmbeddingStore<f64>, b: &TripleBatch) -> Vec<Vec<f64>> {
    let (e, rel) = (s.entities(), s.relations());
    b.iter()
        .map(|(h, r, t)| {
            let (hv, rv, tv) = (e.row(h), rel.row(r), e.row(t));
            match c.kind {
                ModelKind::TransE | ModelKind::TorusE => (0..hv.len()).map(|k| hv[k] + rv[k] - tv[k]).collect(),
                ModelKind::TransR => {
                    let (de, m) = (c.entity_dim, s.projections().unwrap().row(r));
                    (0..c.relation_dim)
                        .map(|a| {
                            let row = &m[a * de..(a + 1) * de];
                            dot(row, hv) - dot(row, tv) + rv[a]
                        })
                        .collect()
                }
                ModelKind::TransH => {
                    let w = s.normals().unwrap().row(r);
                    let (wh, wt) = (dot(w, hv), dot(w, tv));
                    (0..hv.len()).map(|k| hv[k] - wh * w[k] + rv[k] - tv[k] + wt * w[k]).collect()
                }
                ModelKind::RotatE => (0..hv.len() / 2)
                    .map(|k| {
                        let (hr, hi, rr, ri) = (hv[2 * k], hv[2 * k + 1], rv[2 * k], rv[2 * k + 1]);
                        let re = hr * rr - hi * ri - tv[2 * k];
                        let im = hr * ri + hi * rr - tv[2 * k + 1];
                        (re * re + im * im).sqrt()
                    })
                    .collect(),
                ModelKind::DistMult | ModelKind::ComplEx => Vec::new(),
            }
        })
        .collect()
}

/// Whether every score of `b` is at least `gap` away from a point where
/// it is not differentiable.
pub fn smooth_at(c: &ModelConfig, s: &EmbeddingStore<f64>, b: &TripleBatch, gap: f64) -> bool {
    pre_norm_rows(c, s, b).iter().flatten().all(|&v| match c.kind {
        ModelKind::TorusE => {
            let w = torus_wrap(v).abs();
            w < 0.5 - gap && (c.norm == Norm::L2 || w > gap)
        }
        ModelKind::RotatE => v > gap,
        _ => c.norm == Norm::L2 || v.abs() > gap,
    })
}

/// Parameter groups as flat mutable slices, named like `Gradients::groups`.
pub fn param_groups(s: &EmbeddingStore<f64>) -> Vec<(&'static str, usize)> {
    let mut g = vec![("entity", s.entities().data().len()), ("relation", s.relations().data().len())];
    if let Some(p) = s.projections() {
        g.push(("projection", p.data().len()));
    }
    if let Some(w) = s.normals() {
        g.push(("normal", w.data().len()));
    }
    g
}

pub fn param_mut<'a>(s: &'a mut EmbeddingStore<f64>, group: &str) -> &'a mut [f64] {
    match group {
        "entity" => s.entities_mut().data_mut(),
        "relation" => s.relations_mut().data_mut(),
        "projection" => s.projections_mut().unwrap().data_mut(),
        "normal" => s.normals_mut().unwrap().data_mut(),
        _ => unreachable!(),
    }
}
