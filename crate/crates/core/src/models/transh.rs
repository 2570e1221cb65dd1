//! TransH: `‖u + d_r − (w_r·u) w_r‖` with `u = h − t` from one `ht` SpMM.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::incidence::{build_ht, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{spmm, spmm_transpose_into, DenseMatrix, PlusTimes};
use crate::store::{EmbeddingStore, Gradients};

use super::distance::{norm, norm_grad};
use super::{build_rows, dot, group_by_relation, map_rows, Cache, Norm, ScoreBatch};

fn normals<T: Real>(store: &EmbeddingStore<T>) -> Result<&DenseMatrix<T>> {
    store
        .normals()
        .ok_or_else(|| Error::Config("TransH needs a hyperplane normal table".into()))
}

pub(super) fn forward<T: Real>(norm_kind: Norm, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    let w = normals(store)?;
    let incidence = build_ht::<T>(batch).to_csr();
    let ht = spmm(&incidence, store.entities(), &PlusTimes)?;
    let rels = batch.relations();
    let projected = build_rows(batch.len(), store.entity_dim(), |i, p| {
        let (u, wr, dr) = (ht.row(i), w.row(rels[i]), store.relations().row(rels[i]));
        let wu = dot(wr, u);
        for (k, pk) in p.iter_mut().enumerate() {
            *pk = u[k] + dr[k] - wu * wr[k];
        }
    });
    let scores = map_rows(&projected, |p| norm(p, norm_kind));
    Ok(ScoreBatch::new(
        scores,
        Cache::Projected {
            incidence,
            relations: rels.to_vec(),
            ht,
            projected,
        },
    ))
}

pub(super) fn backward<T: Real>(
    norm_kind: Norm,
    cache: &Cache<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    let Cache::Projected {
        incidence,
        relations,
        ht,
        projected,
    } = cache
    else {
        unreachable!("dispatched on cache kind")
    };
    let w = normals(store)?;
    let de = store.entity_dim();

    let d = build_rows(projected.rows(), de, |i, out| norm_grad(projected.row(i), norm_kind, upstream[i], out));

    // ∂L/∂u = (I − w wᵀ) ∂L/∂p
    let du = build_rows(d.rows(), de, |i, out| {
        let (di, wr) = (d.row(i), w.row(relations[i]));
        let wd = dot(wr, di);
        for (k, o) in out.iter_mut().enumerate() {
            *o = di[k] - wd * wr[k];
        }
    });
    spmm_transpose_into(incidence, &du, &mut grads.entities.row_slices_mut())?;

    // d_r gets ∂L/∂p; w_r gets −(w·∂L/∂p) u − (w·u) ∂L/∂p
    let (offsets, order) = group_by_relation(relations, store.num_relations());
    let normal_grad = grads
        .normals
        .as_mut()
        .ok_or_else(|| Error::Config("gradient set lacks a normal table".into()))?;
    grads
        .relations
        .row_slices_mut()
        .into_par_iter()
        .zip(normal_grad.row_slices_mut())
        .enumerate()
        .for_each(|(r, (gd, gw))| {
            let wr = w.row(r);
            for &i in &order[offsets[r]..offsets[r + 1]] {
                let (di, ui) = (d.row(i), ht.row(i));
                let (wd, wu) = (dot(wr, di), dot(wr, ui));
                for k in 0..de {
                    gd[k] += di[k];
                    gw[k] -= wd * ui[k] + wu * di[k];
                }
            }
        });
    Ok(())
}
