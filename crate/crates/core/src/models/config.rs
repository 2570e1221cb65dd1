use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    TransR,
    TransH,
    TorusE,
    DistMult,
    ComplEx,
    RotatE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::TransE,
        ModelKind::TransR,
        ModelKind::TransH,
        ModelKind::TorusE,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::RotatE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::TransR => "transr",
            ModelKind::TransH => "transh",
            ModelKind::TorusE => "toruse",
            ModelKind::DistMult => "distmult",
            ModelKind::ComplEx => "complex",
            ModelKind::RotatE => "rotate",
        }
    }

    /// Stable numeric tag used in checkpoints.
    pub fn tag(self) -> u32 {
        match self {
            ModelKind::TransE => 1,
            ModelKind::TransR => 2,
            ModelKind::TransH => 3,
            ModelKind::TorusE => 4,
            ModelKind::DistMult => 5,
            ModelKind::ComplEx => 6,
            ModelKind::RotatE => 7,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Embeddings are complex; each logical dimension takes two reals.
    pub fn is_complex(self) -> bool {
        matches!(self, ModelKind::ComplEx | ModelKind::RotatE)
    }

    /// Uses a product-semiring incidence, which cannot express `h == t`.
    pub fn is_multiplicative(self) -> bool {
        matches!(self, ModelKind::DistMult | ModelKind::ComplEx | ModelKind::RotatE)
    }

    pub fn polarity(self) -> Polarity {
        match self {
            ModelKind::DistMult | ModelKind::ComplEx => Polarity::Plausibility,
            _ => Polarity::Distance,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

/// Direction in which a model's score improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Lower is better.
    Distance,
    /// Higher is better.
    Plausibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            _ => Err(Error::Config(format!("unknown norm `{s}`"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        })
    }
}

/// Model family and embedding dimensions.
///
/// For complex models the dimensions count complex components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub entity_dim: usize,
    pub relation_dim: usize,
    pub norm: Norm,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, dim: usize) -> Self {
        Self {
            kind,
            entity_dim: dim,
            relation_dim: dim,
            norm: Norm::L2,
        }
    }

    pub fn with_relation_dim(mut self, dim: usize) -> Self {
        self.relation_dim = dim;
        self
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.entity_dim == 0 || self.relation_dim == 0 {
            return Err(Error::Config("embedding dimensions must be positive".into()));
        }
        if self.kind != ModelKind::TransR && self.entity_dim != self.relation_dim {
            return Err(Error::Config(format!(
                "{} requires equal entity and relation dimensions (got {} and {})",
                self.kind, self.entity_dim, self.relation_dim
            )));
        }
        Ok(())
    }

    /// Reals per entity row.
    pub fn entity_width(&self) -> usize {
        if self.kind.is_complex() {
            2 * self.entity_dim
        } else {
            self.entity_dim
        }
    }

    /// Reals per relation row.
    pub fn relation_width(&self) -> usize {
        if self.kind.is_complex() {
            2 * self.relation_dim
        } else {
            self.relation_dim
        }
    }
}
