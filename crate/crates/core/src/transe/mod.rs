//! TransE embeddings: a triple (h, r, t) is plausible when `h + r ≈ t`.
//!
//! Training minimizes the margin loss `max(0, d_pos - d_neg + margin)` with one filtered
//! corruption per positive triple, using mini-batch SGD and renormalizing entity rows to
//! unit L2 norm after every update. Literal triples are not embedded.

mod io;
pub mod train;

pub use io::{read_model, write_model};
pub use train::{corrupt, distance_subgradient, margin_loss, pair_loss_and_grad, train, train_triples, PairGrad};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn apply(self, x: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => x.map(f64::abs).sum(),
            Norm::L2 => x.map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransEConfig {
    pub dim: usize,
    pub margin: f64,
    pub norm: Norm,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TransEConfig {
    fn default() -> Self {
        Self {
            dim: 50,
            margin: 1.0,
            norm: Norm::L1,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 64,
            seed: 42,
        }
    }
}

impl TransEConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.dim == 0 {
            errs.push("transe.dim must be >= 1".to_string());
        }
        if self.margin.is_nan() || self.margin <= 0.0 {
            errs.push(format!("transe.margin = {} must be > 0", self.margin));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            errs.push(format!("transe.learning_rate = {} must be > 0", self.learning_rate));
        }
        if self.batch_size == 0 {
            errs.push("transe.batch_size must be >= 1".to_string());
        }
        errs
    }
}

/// Entity and relation embedding matrices, row-major, one row per catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TransEModel {
    pub config: TransEConfig,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<f32>,
    relations: Vec<f32>,
    /// URIs of the entity rows, empty when the model was built without a graph.
    pub entity_uris: Vec<String>,
    pub relation_uris: Vec<String>,
}

pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normalize_row(row: &mut [f32]) {
    let norm = row.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in row.iter_mut() {
            *v = (*v as f64 / norm) as f32;
        }
    }
}

/// Uniform initialization in `[-6/sqrt(dim), 6/sqrt(dim)]`, every row L2-normalized.
pub fn init_model(num_entities: usize, num_relations: usize, cfg: &TransEConfig) -> TransEModel {
    let dim = cfg.dim;
    let bound = 6.0 / (dim as f64).sqrt();
    let mut rng = init_rng(cfg.seed);
    let mut sample = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| rng.random_range(-bound..bound) as f32)
            .collect()
    };
    let mut relations = sample(num_relations * dim);
    let mut entities = sample(num_entities * dim);
    relations.chunks_mut(dim).for_each(normalize_row);
    entities.chunks_mut(dim).for_each(normalize_row);
    TransEModel {
        config: cfg.clone(),
        num_entities,
        num_relations,
        entities,
        relations,
        entity_uris: Vec::new(),
        relation_uris: Vec::new(),
    }
}

impl TransEModel {
    pub(crate) fn from_parts(
        config: TransEConfig,
        num_entities: usize,
        num_relations: usize,
        entities: Vec<f32>,
        relations: Vec<f32>,
    ) -> Self {
        Self {
            config,
            num_entities,
            num_relations,
            entities,
            relations,
            entity_uris: Vec::new(),
            relation_uris: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn entity_vector(&self, e: EntityId) -> Result<&[f32]> {
        if e.0 >= self.num_entities {
            return Err(Error::UnknownEntity(e.0));
        }
        let d = self.dim();
        Ok(&self.entities[e.0 * d..(e.0 + 1) * d])
    }

    pub fn relation_vector(&self, r: RelationId) -> Result<&[f32]> {
        if r.0 >= self.num_relations {
            return Err(Error::UnknownRelation(r.0));
        }
        let d = self.dim();
        Ok(&self.relations[r.0 * d..(r.0 + 1) * d])
    }

    /// Row index of an entity URI in this model's catalog.
    pub fn entity_by_uri(&self, uri: &str) -> Option<EntityId> {
        self.entity_uris.iter().position(|u| u == uri).map(EntityId)
    }

    pub(crate) fn entities_mut(&mut self) -> &mut [f32] {
        &mut self.entities
    }

    pub(crate) fn relations_mut(&mut self) -> &mut [f32] {
        &mut self.relations
    }

    pub(crate) fn raw_entities(&self) -> &[f32] {
        &self.entities
    }

    pub(crate) fn raw_relations(&self) -> &[f32] {
        &self.relations
    }

    /// Distance `‖h + r − t‖` under the configured norm.
    pub fn score(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        let (h, r, t) = (self.entity_vector(h)?, self.relation_vector(r)?, self.entity_vector(t)?);
        Ok(self.config.norm.apply(
            h.iter()
                .zip(r)
                .zip(t)
                .map(|((h, r), t)| *h as f64 + *r as f64 - *t as f64),
        ))
    }

    /// Rank (1-based) of the true tail among all entities when scoring `(h, r, ?)`.
    pub fn tail_rank(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<usize> {
        let target = self.score(h, r, t)?;
        let mut better = 0;
        for e in 0..self.num_entities {
            if e != t.0 && self.score(h, r, EntityId(e))? < target {
                better += 1;
            }
        }
        Ok(better + 1)
    }
}
