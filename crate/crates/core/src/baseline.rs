//! Naive dense gather/scatter reference for every model.
//!
//! Forward gathers the head, relation and tail rows of each triple into
//! their own matrices and evaluates the score formula directly. Backward
//! materializes one gradient row per gathered row and scatter-adds them into
//! the parameter tables triple by triple. Single-threaded on purpose.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::incidence::TripleBatch;
use crate::models::distance::{modulus, norm, norm_grad, torus_distance, torus_grad};
use crate::models::{check_inputs, Cache, ModelConfig, ModelKind, Norm, ScoreBatch};
use crate::scalar::Real;
use crate::sparse::{as_complex, as_complex_mut, DenseMatrix};
use crate::store::{EmbeddingStore, Gradients};

/// Gathered operands kept for [`dense_backward`].
#[derive(Debug, Clone)]
pub struct DenseTape<T> {
    kind: ModelKind,
    norm: Norm,
    batch: TripleBatch,
    head: DenseMatrix<T>,
    relation: DenseMatrix<T>,
    tail: DenseMatrix<T>,
    /// TransR `M_r` blocks or TransH normals, one per triple.
    extra: Option<DenseMatrix<T>>,
    /// Translational models: the vector whose norm is the score.
    /// RotatE: the interleaved residual `h ⊙ r − t`.
    pre_norm: Option<DenseMatrix<T>>,
}

fn gather<T: Real>(table: &DenseMatrix<T>, ids: &[usize]) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(ids.len(), table.cols());
    for (i, &id) in ids.iter().enumerate() {
        out.row_mut(i).copy_from_slice(table.row(id));
    }
    out
}

fn scatter<T: Real>(table: &mut DenseMatrix<T>, ids: &[usize], rows: &DenseMatrix<T>) {
    for (i, &id) in ids.iter().enumerate() {
        for (g, &v) in table.row_mut(id).iter_mut().zip(rows.row(i)) {
            *g += v;
        }
    }
}

/// `out = M v` for a row-major `rows × v.len()` block.
fn mat_vec<T: Real>(m: &[T], v: &[T], out: &mut [T]) {
    let c = v.len();
    for (a, o) in out.iter_mut().enumerate() {
        *o = m[a * c..(a + 1) * c].iter().zip(v).map(|(&x, &y)| x * y).sum();
    }
}

/// `out = Mᵀ v` for a row-major `v.len() × out.len()` block.
fn mat_t_vec<T: Real>(m: &[T], v: &[T], out: &mut [T]) {
    let c = out.len();
    out.fill(T::zero());
    for (a, &va) in v.iter().enumerate() {
        for (o, &x) in out.iter_mut().zip(&m[a * c..(a + 1) * c]) {
            *o += x * va;
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Scores `batch` by direct gather-and-evaluate.
///
/// Unlike the sparse path this accepts self-loops in the multiplicative
/// models.
pub fn dense_forward<T: Real>(config: &ModelConfig, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    check_inputs(config, batch, store)?;
    let m = batch.len();
    let head = gather(store.entities(), batch.heads());
    let relation = gather(store.relations(), batch.relations());
    let tail = gather(store.entities(), batch.tails());
    let mut extra = None;
    let mut pre_norm = None;
    let mut scores = vec![T::zero(); m];

    match config.kind {
        ModelKind::TransE | ModelKind::TorusE => {
            let mut v = DenseMatrix::zeros(m, store.entity_dim());
            for i in 0..m {
                let (h, r, t) = (head.row(i), relation.row(i), tail.row(i));
                for (k, vk) in v.row_mut(i).iter_mut().enumerate() {
                    *vk = h[k] + r[k] - t[k];
                }
                scores[i] = if config.kind == ModelKind::TransE {
                    norm(v.row(i), config.norm)
                } else {
                    torus_distance(v.row(i), config.norm)
                };
            }
            pre_norm = Some(v);
        }
        ModelKind::TransR => {
            let proj = store
                .projections()
                .ok_or_else(|| Error::Config("TransR needs a projection table".into()))?;
            let mr = gather(proj, batch.relations());
            let dr = store.relation_dim();
            let mut v = DenseMatrix::zeros(m, dr);
            let (mut mh, mut mt) = (vec![T::zero(); dr], vec![T::zero(); dr]);
            for i in 0..m {
                mat_vec(mr.row(i), head.row(i), &mut mh);
                mat_vec(mr.row(i), tail.row(i), &mut mt);
                let r = relation.row(i);
                for (k, vk) in v.row_mut(i).iter_mut().enumerate() {
                    *vk = mh[k] + r[k] - mt[k];
                }
                scores[i] = norm(v.row(i), config.norm);
            }
            extra = Some(mr);
            pre_norm = Some(v);
        }
        ModelKind::TransH => {
            let normals = store
                .normals()
                .ok_or_else(|| Error::Config("TransH needs a hyperplane normal table".into()))?;
            let w = gather(normals, batch.relations());
            let mut v = DenseMatrix::zeros(m, store.entity_dim());
            for i in 0..m {
                let (h, r, t, wi) = (head.row(i), relation.row(i), tail.row(i), w.row(i));
                let (wh, wt) = (dot(wi, h), dot(wi, t));
                for (k, vk) in v.row_mut(i).iter_mut().enumerate() {
                    *vk = (h[k] - wh * wi[k]) + r[k] - (t[k] - wt * wi[k]);
                }
                scores[i] = norm(v.row(i), config.norm);
            }
            extra = Some(w);
            pre_norm = Some(v);
        }
        ModelKind::DistMult => {
            for (i, s) in scores.iter_mut().enumerate() {
                let (h, r, t) = (head.row(i), relation.row(i), tail.row(i));
                *s = (0..h.len()).map(|k| h[k] * r[k] * t[k]).sum();
            }
        }
        ModelKind::ComplEx => {
            for (i, s) in scores.iter_mut().enumerate() {
                let (h, r, t) = (as_complex(head.row(i)), as_complex(relation.row(i)), as_complex(tail.row(i)));
                *s = (0..h.len()).map(|k| (h[k] * r[k] * t[k].conj()).re).sum();
            }
        }
        ModelKind::RotatE => {
            let mut q = DenseMatrix::zeros(m, store.entity_dim() * 2);
            for (i, s) in scores.iter_mut().enumerate() {
                let (h, r, t) = (as_complex(head.row(i)), as_complex(relation.row(i)), as_complex(tail.row(i)));
                let qi = as_complex_mut(q.row_mut(i));
                for k in 0..h.len() {
                    qi[k] = h[k] * r[k] - t[k];
                }
                *s = qi.iter().map(|&z| modulus(z)).sum();
            }
            pre_norm = Some(q);
        }
    }

    let tape = DenseTape {
        kind: config.kind,
        norm: config.norm,
        batch: batch.clone(),
        head,
        relation,
        tail,
        extra,
        pre_norm,
    };
    Ok(ScoreBatch::new(scores, Cache::Dense(tape)))
}

/// Scatter-adds `Σ_i upstream[i] · ∂score_i/∂θ` into `grads`.
pub fn dense_backward_into<T: Real>(
    sb: &ScoreBatch<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    let Cache::Dense(tape) = &sb.cache else {
        return Err(Error::Config("score batch did not come from dense_forward".into()));
    };
    if upstream.len() != sb.len() {
        return Err(Error::shape("dense_backward", format!("{} upstream values", sb.len()), upstream.len()));
    }
    if tape.kind != store.kind() {
        return Err(Error::Config(format!("score batch belongs to {}, store to {}", tape.kind, store.kind())));
    }
    let m = tape.batch.len();
    let (ew, rw) = (tape.head.cols(), tape.relation.cols());
    let mut g_head = DenseMatrix::zeros(m, ew);
    let mut g_rel = DenseMatrix::zeros(m, rw);
    let mut g_tail = DenseMatrix::zeros(m, ew);
    let mut g_extra = tape.extra.as_ref().map(|x| DenseMatrix::zeros(m, x.cols()));

    match tape.kind {
        ModelKind::TransE | ModelKind::TorusE => {
            let v = tape.pre_norm.as_ref().expect("recorded in forward");
            for i in 0..m {
                let d = g_rel.row_mut(i);
                if tape.kind == ModelKind::TransE {
                    norm_grad(v.row(i), tape.norm, upstream[i], d);
                } else {
                    torus_grad(v.row(i), tape.norm, upstream[i], d);
                }
                let d = g_rel.row(i).to_vec();
                g_head.row_mut(i).copy_from_slice(&d);
                for (o, x) in g_tail.row_mut(i).iter_mut().zip(d) {
                    *o = -x;
                }
            }
        }
        ModelKind::TransR => {
            let v = tape.pre_norm.as_ref().expect("recorded in forward");
            let mr = tape.extra.as_ref().expect("recorded in forward");
            let gm = g_extra.as_mut().expect("allocated above");
            let mut du = vec![T::zero(); ew];
            for i in 0..m {
                norm_grad(v.row(i), tape.norm, upstream[i], g_rel.row_mut(i));
                let d = g_rel.row(i);
                mat_t_vec(mr.row(i), d, &mut du);
                g_head.row_mut(i).copy_from_slice(&du);
                for (o, &x) in g_tail.row_mut(i).iter_mut().zip(&du) {
                    *o = -x;
                }
                let (h, t) = (tape.head.row(i), tape.tail.row(i));
                let gmi = gm.row_mut(i);
                for (a, &da) in d.iter().enumerate() {
                    for k in 0..ew {
                        gmi[a * ew + k] = da * h[k] - da * t[k];
                    }
                }
            }
        }
        ModelKind::TransH => {
            let v = tape.pre_norm.as_ref().expect("recorded in forward");
            let w = tape.extra.as_ref().expect("recorded in forward");
            let gw = g_extra.as_mut().expect("allocated above");
            for i in 0..m {
                norm_grad(v.row(i), tape.norm, upstream[i], g_rel.row_mut(i));
                let (d, wi, h, t) = (g_rel.row(i), w.row(i), tape.head.row(i), tape.tail.row(i));
                let (wd, wh, wt) = (dot(wi, d), dot(wi, h), dot(wi, t));
                let (gh, gt, gwi) = (g_head.row_mut(i), g_tail.row_mut(i), gw.row_mut(i));
                for k in 0..ew {
                    gh[k] = d[k] - wd * wi[k];
                    gt[k] = -(d[k] - wd * wi[k]);
                    gwi[k] = -wd * h[k] - wh * d[k] + wd * t[k] + wt * d[k];
                }
            }
        }
        ModelKind::DistMult => {
            for i in 0..m {
                let (h, r, t, u) = (tape.head.row(i), tape.relation.row(i), tape.tail.row(i), upstream[i]);
                for k in 0..ew {
                    g_head.row_mut(i)[k] = u * r[k] * t[k];
                    g_rel.row_mut(i)[k] = u * h[k] * t[k];
                    g_tail.row_mut(i)[k] = u * h[k] * r[k];
                }
            }
        }
        ModelKind::ComplEx => {
            for i in 0..m {
                let h = as_complex(tape.head.row(i));
                let r = as_complex(tape.relation.row(i));
                let t = as_complex(tape.tail.row(i));
                let u = upstream[i];
                for k in 0..h.len() {
                    as_complex_mut(g_head.row_mut(i))[k] = r[k].conj() * t[k] * u;
                    as_complex_mut(g_rel.row_mut(i))[k] = h[k].conj() * t[k] * u;
                    as_complex_mut(g_tail.row_mut(i))[k] = h[k] * r[k] * u;
                }
            }
        }
        ModelKind::RotatE => {
            let q = tape.pre_norm.as_ref().expect("recorded in forward");
            for i in 0..m {
                let h = as_complex(tape.head.row(i));
                let r = as_complex(tape.relation.row(i));
                let qi = as_complex(q.row(i));
                for k in 0..h.len() {
                    let g: Complex<T> = qi[k] * (upstream[i] / modulus(qi[k]));
                    as_complex_mut(g_head.row_mut(i))[k] = g * r[k].conj();
                    as_complex_mut(g_rel.row_mut(i))[k] = g * h[k].conj();
                    as_complex_mut(g_tail.row_mut(i))[k] = -g;
                }
            }
        }
    }

    let b = &tape.batch;
    scatter(&mut grads.entities, b.heads(), &g_head);
    scatter(&mut grads.relations, b.relations(), &g_rel);
    scatter(&mut grads.entities, b.tails(), &g_tail);
    if let Some(ge) = g_extra {
        let sink = match tape.kind {
            ModelKind::TransR => grads.projections.as_mut(),
            _ => grads.normals.as_mut(),
        }
        .ok_or_else(|| Error::Config("gradient set lacks the auxiliary table".into()))?;
        scatter(sink, b.relations(), &ge);
    }
    Ok(())
}

pub fn dense_backward<T: Real>(sb: &ScoreBatch<T>, upstream: &[T], store: &EmbeddingStore<T>) -> Result<Gradients<T>> {
    let mut grads = Gradients::zeros_like(store);
    dense_backward_into(sb, upstream, store, &mut grads)?;
    Ok(grads)
}
