//! Knowledge graph embedding training where embedding gather and gradient
//! scatter are replaced by sparse-dense matrix products over triplet
//! incidence matrices.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for callers that do not care.

pub mod baseline;
pub mod data;
pub mod error;
pub mod eval;
pub mod incidence;
pub mod models;
pub mod scalar;
pub mod sparse;
pub mod store;
pub mod training;

pub use data::{generate_synthetic, load_tsv, Dataset};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport, Protocol};
pub use incidence::TripleBatch;
pub use models::{ModelConfig, ModelKind, Norm};
pub use scalar::Real;
pub use store::{EmbeddingStore, Gradients, RowSupport, StepDecay};
pub use training::{fit, Engine, EpochReport, TrainConfig};

pub type Store = EmbeddingStore<f64>;
pub type Store32 = EmbeddingStore<f32>;
pub type Grads = Gradients<f64>;
pub type Grads32 = Gradients<f32>;
pub type Dense = sparse::DenseMatrix<f64>;
pub type Csr = sparse::CsrMatrix<f64>;
pub type Coo = sparse::CooMatrix<f64>;
