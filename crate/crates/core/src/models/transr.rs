//! TransR: `‖M_r (h − t) + r‖` on the `ht` SpMM.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::incidence::{build_ht, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{spmm, spmm_transpose_into, DenseMatrix, PlusTimes};
use crate::store::{EmbeddingStore, Gradients};

use super::distance::{norm, norm_grad};
use super::{build_rows, dot, group_by_relation, map_rows, Cache, Norm, ScoreBatch};

fn projections<T: Real>(store: &EmbeddingStore<T>) -> Result<&DenseMatrix<T>> {
    store
        .projections()
        .ok_or_else(|| Error::Config("TransR needs a projection table".into()))
}

pub(super) fn forward<T: Real>(norm_kind: Norm, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    let proj = projections(store)?;
    let (de, dr) = (store.entity_dim(), store.relation_dim());
    let incidence = build_ht::<T>(batch).to_csr();
    let ht = spmm(&incidence, store.entities(), &PlusTimes)?;
    let rels = batch.relations();
    let projected = build_rows(batch.len(), dr, |i, v| {
        let m = proj.row(rels[i]);
        let u = ht.row(i);
        let r = store.relations().row(rels[i]);
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = dot(&m[k * de..(k + 1) * de], u) + r[k];
        }
    });
    let scores = map_rows(&projected, |v| norm(v, norm_kind));
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
    let proj = projections(store)?;
    let (de, dr) = (store.entity_dim(), store.relation_dim());

    // ∂L/∂v per triple
    let d = build_rows(projected.rows(), dr, |i, out| norm_grad(projected.row(i), norm_kind, upstream[i], out));

    // ∂L/∂u = M_rᵀ ∂L/∂v, then through the incidence to the entities
    let du = build_rows(d.rows(), de, |i, out| {
        let m = proj.row(relations[i]);
        for (k, &dk) in d.row(i).iter().enumerate() {
            for (o, &mkj) in out.iter_mut().zip(&m[k * de..(k + 1) * de]) {
                *o += dk * mkj;
            }
        }
    });
    spmm_transpose_into(incidence, &du, &mut grads.entities.row_slices_mut())?;

    // relation vectors and projections, grouped by relation
    let (offsets, order) = group_by_relation(relations, store.num_relations());
    let proj_grad = grads
        .projections
        .as_mut()
        .ok_or_else(|| Error::Config("gradient set lacks a projection table".into()))?;
    grads
        .relations
        .row_slices_mut()
        .into_par_iter()
        .zip(proj_grad.row_slices_mut())
        .enumerate()
        .for_each(|(r, (gr, gm))| {
            for &i in &order[offsets[r]..offsets[r + 1]] {
                let (di, ui) = (d.row(i), ht.row(i));
                for (k, &dk) in di.iter().enumerate() {
                    gr[k] += dk;
                    for (o, &uj) in gm[k * de..(k + 1) * de].iter_mut().zip(ui) {
                        *o += dk * uj;
                    }
                }
            }
        });
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::models::{backward, forward, ModelConfig, ModelKind};
    use crate::sparse::DenseMatrix;
    use crate::{EmbeddingStore, TripleBatch};

    fn store(proj: Vec<f64>) -> (EmbeddingStore<f64>, ModelConfig) {
        let c = ModelConfig::new(ModelKind::TransR, 2);
        let mut s = EmbeddingStore::init(&c, 2, 1, 0).unwrap();
        *s.entities_mut() = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        *s.relations_mut() = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        *s.projections_mut().unwrap() = DenseMatrix::from_vec(1, 4, proj).unwrap();
        (s, c)
    }

    #[test]
    fn identity_projection_matches_transe() {
        let (s, c) = store(vec![1.0, 0.0, 0.0, 1.0]);
        let b = TripleBatch::from_triples(&[(0, 0, 1)], 2, 1).unwrap();
        let got = forward(&c, &b, &s).unwrap().scores()[0];
        // h + r − t = [3.5, 7]
        let want = (3.5f64 * 3.5 + 49.0).sqrt();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn zero_projection_scores_relation_norm() {
        let (s, c) = store(vec![0.0; 4]);
        let b = TripleBatch::from_triples(&[(0, 0, 1)], 2, 1).unwrap();
        assert!((forward(&c, &b, &s).unwrap().scores()[0] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn projection_gradient_sums_outer_products() {
        // two triples of the same relation; ∂‖v‖/∂M = D uᵀ summed
        let (s, c) = store(vec![0.5, -0.25, 1.0, 2.0]);
        let b = TripleBatch::from_triples(&[(0, 0, 1), (1, 0, 0)], 2, 1).unwrap();
        let sb = forward(&c, &b, &s).unwrap();
        let g = backward(&c, &sb, &[1.0, 1.0], &s).unwrap();

        let m = [[0.5, -0.25], [1.0, 2.0]];
        let r = [3.0, 4.0];
        let mut want = [0.0; 4];
        for u in [[0.5, 3.0], [-0.5, -3.0]] {
            let v = [m[0][0] * u[0] + m[0][1] * u[1] + r[0], m[1][0] * u[0] + m[1][1] * u[1] + r[1]];
            let n = (v[0] * v[0] + v[1] * v[1] + 1e-12f64).sqrt();
            for k in 0..2 {
                for j in 0..2 {
                    want[k * 2 + j] += v[k] / n * u[j];
                }
            }
        }
        let got = g.projections.as_ref().unwrap().row(0);
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream() {
        let (s, c) = store(vec![0.5, -0.25, 1.0, 2.0]);
        let b = TripleBatch::from_triples(&[(0, 0, 1)], 2, 1).unwrap();
        let sb = forward(&c, &b, &s).unwrap();
        let g = backward(&c, &sb, &[0.0], &s).unwrap();
        assert!(g.groups().iter().all(|(_, m)| m.data().iter().all(|&v| v == 0.0)));
    }
}
