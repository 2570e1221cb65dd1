//! Learnable parameters, their gradients, the SGD step and checkpoints.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::TripleBatch;
use crate::models::{ModelConfig, ModelKind, Norm};
use crate::scalar::Real;
use crate::sparse::{stacked_row_slices_mut, DenseMatrix, Stacked};

const CHECKPOINT_MAGIC: &[u8; 8] = b"SPKGECKP";
const CHECKPOINT_VERSION: u32 = 1;

/// All learnable tables of one model.
///
/// Entity and relation tables are kept separate; [`EmbeddingStore::stacked_view`]
/// addresses them as one `(N + R) × d` operand without copying.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore<T> {
    kind: ModelKind,
    entity_dim: usize,
    relation_dim: usize,
    entities: DenseMatrix<T>,
    relations: DenseMatrix<T>,
    /// TransR `M_r`, one row-major `d_r × d_e` block per relation.
    projections: Option<DenseMatrix<T>>,
    /// TransH hyperplane normals `w_r`, unit length.
    normals: Option<DenseMatrix<T>>,
    seed: u64,
}

impl<T: Real> EmbeddingStore<T> {
    /// Seeded initialization: rows uniform in `±6/√d`, TransR projections
    /// set to the identity block, TransH normals random unit vectors.
    pub fn init(config: &ModelConfig, num_entities: usize, num_relations: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entities = uniform(&mut rng, num_entities, config.entity_width(), config.entity_dim);
        let relations = uniform(&mut rng, num_relations, config.relation_width(), config.relation_dim);

        let projections = (config.kind == ModelKind::TransR).then(|| {
            let (dr, de) = (config.relation_dim, config.entity_dim);
            let mut p = DenseMatrix::zeros(num_relations, dr * de);
            for r in 0..num_relations {
                let block = p.row_mut(r);
                for i in 0..dr.min(de) {
                    block[i * de + i] = T::one();
                }
            }
            p
        });

        let normals = (config.kind == ModelKind::TransH).then(|| {
            let mut w = uniform(&mut rng, num_relations, config.entity_dim, config.entity_dim);
            normalize_rows(&mut w);
            w
        });

        Ok(Self {
            kind: config.kind,
            entity_dim: config.entity_dim,
            relation_dim: config.relation_dim,
            entities,
            relations,
            projections,
            normals,
            seed,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn entity_dim(&self) -> usize {
        self.entity_dim
    }

    pub fn relation_dim(&self) -> usize {
        self.relation_dim
    }

    pub fn num_entities(&self) -> usize {
        self.entities.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.rows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The model configuration this store was built for, with `norm`.
    pub fn config(&self, norm: Norm) -> ModelConfig {
        ModelConfig {
            kind: self.kind,
            entity_dim: self.entity_dim,
            relation_dim: self.relation_dim,
            norm,
        }
    }

    pub fn check_compatible(&self, config: &ModelConfig) -> Result<()> {
        if config.kind != self.kind
            || config.entity_dim != self.entity_dim
            || config.relation_dim != self.relation_dim
        {
            return Err(Error::Config(format!(
                "store holds {} (d_e={}, d_r={}) but config asks for {} (d_e={}, d_r={})",
                self.kind,
                self.entity_dim,
                self.relation_dim,
                config.kind,
                config.entity_dim,
                config.relation_dim
            )));
        }
        Ok(())
    }

    pub fn entities(&self) -> &DenseMatrix<T> {
        &self.entities
    }

    pub fn entities_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.entities
    }

    pub fn relations(&self) -> &DenseMatrix<T> {
        &self.relations
    }

    pub fn relations_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.relations
    }

    pub fn projections(&self) -> Option<&DenseMatrix<T>> {
        self.projections.as_ref()
    }

    pub fn projections_mut(&mut self) -> Option<&mut DenseMatrix<T>> {
        self.projections.as_mut()
    }

    pub fn normals(&self) -> Option<&DenseMatrix<T>> {
        self.normals.as_ref()
    }

    pub fn normals_mut(&mut self) -> Option<&mut DenseMatrix<T>> {
        self.normals.as_mut()
    }

    /// `[entities; relations]` as one operand; relation `j` is row `N + j`.
    pub fn stacked_view(&self) -> Result<Stacked<'_, T>> {
        if self.relations.rows() > 0 && self.entities.cols() != self.relations.cols() {
            return Err(Error::shape(
                "stacked_view",
                format!("relation width {}", self.entities.cols()),
                self.relations.cols(),
            ));
        }
        Stacked::new(&self.entities, &self.relations)
    }

    fn groups_mut(&mut self) -> Vec<(&'static str, &mut DenseMatrix<T>)> {
        let mut g = vec![("entity", &mut self.entities), ("relation", &mut self.relations)];
        if let Some(p) = self.projections.as_mut() {
            g.push(("projection", p));
        }
        if let Some(w) = self.normals.as_mut() {
            g.push(("normal", w));
        }
        g
    }

    /// `param -= lr * grad` for every table, then re-projects TransH normals
    /// onto the unit sphere. Nothing is updated if any gradient is non-finite.
    pub fn sgd_step(&mut self, grads: &Gradients<T>, lr: T) -> Result<()> {
        grads.check_shapes(self)?;
        for (name, g) in grads.groups() {
            if g.data().par_iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { param: name });
            }
        }
        for ((_, p), (_, g)) in self.groups_mut().into_iter().zip(grads.groups()) {
            p.data_mut()
                .par_iter_mut()
                .zip(g.data().par_iter())
                .for_each(|(p, &g)| *p -= lr * g);
        }
        if let Some(w) = self.normals.as_mut() {
            normalize_rows(w);
        }
        Ok(())
    }

    /// [`EmbeddingStore::sgd_step`] restricted to the rows in `support`.
    ///
    /// Gradient rows outside the support must be zero; the result then
    /// equals the full step, except that only supported normals are
    /// re-projected.
    pub fn sgd_step_rows(&mut self, grads: &Gradients<T>, lr: T, support: &RowSupport) -> Result<()> {
        grads.check_shapes(self)?;
        support.check(self)?;
        for (name, g) in grads.groups() {
            let rows = support.rows_for(name);
            if rows.iter().any(|&i| g.row(i).iter().any(|v| !v.is_finite())) {
                return Err(Error::NonFiniteGradient { param: name });
            }
        }
        for ((name, p), (_, g)) in self.groups_mut().into_iter().zip(grads.groups()) {
            for &i in support.rows_for(name) {
                for (p, &g) in p.row_mut(i).iter_mut().zip(g.row(i)) {
                    *p -= lr * g;
                }
            }
        }
        if let Some(w) = self.normals.as_mut() {
            for &r in &support.relations {
                normalize_row(w.row_mut(r));
            }
        }
        Ok(())
    }

    /// Projects the given entity rows onto the unit L2 sphere.
    pub fn normalize_entity_rows(&mut self, rows: &[usize]) {
        for &i in rows {
            normalize_row(self.entities.row_mut(i));
        }
    }

    /// Projects every entity row onto the unit L2 sphere.
    pub fn normalize_entities(&mut self) {
        normalize_rows(&mut self.entities);
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    /// Versioned header, then little-endian `f64` blocks in the order
    /// entity, relation, projection, normal.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
        w.write_u32::<LittleEndian>(self.kind.tag())?;
        for v in [
            self.num_entities(),
            self.num_relations(),
            self.entity_dim,
            self.relation_dim,
        ] {
            w.write_u64::<LittleEndian>(v as u64)?;
        }
        w.write_u64::<LittleEndian>(self.seed)?;
        let mut blocks = vec![&self.entities, &self.relations];
        blocks.extend(self.projections.as_ref());
        blocks.extend(self.normals.as_ref());
        for b in blocks {
            for &v in b.data() {
                w.write_f64::<LittleEndian>(v.as_f64())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let tag = r.read_u32::<LittleEndian>()?;
        let kind = ModelKind::from_tag(tag).ok_or_else(|| Error::Checkpoint(format!("unknown model tag {tag}")))?;
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = usize::try_from(r.read_u64::<LittleEndian>()?)
                .map_err(|_| Error::Checkpoint("dimension overflows usize".into()))?;
        }
        let [n, nr, de, dr] = dims;
        let seed = r.read_u64::<LittleEndian>()?;
        let config = ModelConfig {
            kind,
            entity_dim: de,
            relation_dim: dr,
            norm: Norm::L2,
        };
        config.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;

        let mut read_block = |rows: usize, cols: usize| -> Result<DenseMatrix<T>> {
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                data.push(T::lit(r.read_f64::<LittleEndian>()?));
            }
            DenseMatrix::from_vec(rows, cols, data)
        };
        let entities = read_block(n, config.entity_width())?;
        let relations = read_block(nr, config.relation_width())?;
        let projections = match kind {
            ModelKind::TransR => Some(read_block(nr, dr * de)?),
            _ => None,
        };
        let normals = match kind {
            ModelKind::TransH => Some(read_block(nr, de)?),
            _ => None,
        };
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after parameter blocks".into()));
        }
        Ok(Self {
            kind,
            entity_dim: de,
            relation_dim: dr,
            entities,
            relations,
            projections,
            normals,
            seed,
        })
    }
}

/// Gradient tables shadowing every parameter of an [`EmbeddingStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub entities: DenseMatrix<T>,
    pub relations: DenseMatrix<T>,
    pub projections: Option<DenseMatrix<T>>,
    pub normals: Option<DenseMatrix<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(store: &EmbeddingStore<T>) -> Self {
        let like = |m: &DenseMatrix<T>| DenseMatrix::zeros(m.rows(), m.cols());
        Self {
            entities: like(&store.entities),
            relations: like(&store.relations),
            projections: store.projections.as_ref().map(like),
            normals: store.normals.as_ref().map(like),
        }
    }

    pub fn set_zero(&mut self) {
        self.entities.set_zero();
        self.relations.set_zero();
        if let Some(p) = self.projections.as_mut() {
            p.set_zero();
        }
        if let Some(w) = self.normals.as_mut() {
            w.set_zero();
        }
    }

    pub fn groups(&self) -> Vec<(&'static str, &DenseMatrix<T>)> {
        let mut g = vec![("entity", &self.entities), ("relation", &self.relations)];
        if let Some(p) = self.projections.as_ref() {
            g.push(("projection", p));
        }
        if let Some(w) = self.normals.as_ref() {
            g.push(("normal", w));
        }
        g
    }

    /// Row sinks for the stacked `[entities; relations]` gradient.
    pub fn stacked_sinks(&mut self) -> Vec<&mut [T]> {
        stacked_row_slices_mut(&mut self.entities, &mut self.relations)
    }

    /// Zeroes only the rows in `support`.
    pub fn zero_rows(&mut self, support: &RowSupport) {
        let mut groups = vec![("entity", &mut self.entities), ("relation", &mut self.relations)];
        if let Some(p) = self.projections.as_mut() {
            groups.push(("projection", p));
        }
        if let Some(w) = self.normals.as_mut() {
            groups.push(("normal", w));
        }
        for (name, g) in groups {
            for &i in support.rows_for(name) {
                g.row_mut(i).fill(T::zero());
            }
        }
    }

    /// Largest absolute difference to `other` over all groups.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.groups()
            .into_iter()
            .zip(other.groups())
            .flat_map(|((_, a), (_, b))| a.data().iter().zip(b.data()).map(|(&x, &y)| (x - y).abs()))
            .fold(T::zero(), T::max)
    }

    fn check_shapes(&self, store: &EmbeddingStore<T>) -> Result<()> {
        let ours = self.groups();
        let theirs = [
            Some(&store.entities),
            Some(&store.relations),
            store.projections.as_ref(),
            store.normals.as_ref(),
        ];
        let theirs: Vec<_> = theirs.into_iter().flatten().collect();
        if ours.len() != theirs.len() || ours.iter().zip(&theirs).any(|((_, g), p)| g.shape() != p.shape()) {
            return Err(Error::shape(
                "sgd_step",
                "gradients shaped like the store",
                "mismatched gradient tables",
            ));
        }
        Ok(())
    }
}

/// Halves (or scales by `factor`) the learning rate every `every` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDecay {
    pub every: usize,
    pub factor: f64,
}

impl StepDecay {
    pub fn new(every: usize) -> Self {
        Self { every, factor: 0.5 }
    }

    /// Learning rate for 0-based `epoch`.
    pub fn lr_at(&self, base: f64, epoch: usize) -> f64 {
        if self.every == 0 {
            return base;
        }
        base * self.factor.powi((epoch / self.every) as i32)
    }
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, dim: usize) -> DenseMatrix<T> {
    let bound = 6.0 / (dim as f64).sqrt();
    let data = (0..rows * cols).map(|_| T::lit(rng.gen_range(-bound..=bound))).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized above")
}

fn normalize_rows<T: Real>(m: &mut DenseMatrix<T>) {
    let cols = m.cols();
    if cols == 0 {
        return;
    }
    m.data_mut().par_chunks_mut(cols).for_each(normalize_row);
}

fn normalize_row<T: Real>(row: &mut [T]) {
    let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        row.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Entity and relation rows referenced by some batches, sorted and unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RowSupport {
    pub entities: Vec<usize>,
    pub relations: Vec<usize>,
}

impl RowSupport {
    pub fn of(batches: &[&TripleBatch]) -> Self {
        let collect = |ids: &mut dyn Iterator<Item = usize>| {
            let mut v: Vec<usize> = ids.collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        Self {
            entities: collect(&mut batches.iter().flat_map(|b| b.heads().iter().chain(b.tails()).copied())),
            relations: collect(&mut batches.iter().flat_map(|b| b.relations().iter().copied())),
        }
    }

    fn rows_for(&self, group: &str) -> &[usize] {
        if group == "entity" {
            &self.entities
        } else {
            &self.relations
        }
    }

    fn check<T: Real>(&self, store: &EmbeddingStore<T>) -> Result<()> {
        let e_ok = self.entities.last().is_none_or(|&e| e < store.num_entities());
        let r_ok = self.relations.last().is_none_or(|&r| r < store.num_relations());
        if e_ok && r_ok {
            Ok(())
        } else {
            Err(Error::shape("sgd_step_rows", "row ids inside the store", "out-of-range row id"))
        }
    }
}
