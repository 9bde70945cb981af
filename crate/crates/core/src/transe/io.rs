//! Model persistence: a JSON manifest plus a payload of little-endian f32 values,
//! entity rows then relation rows, row-major.

use serde::{Deserialize, Serialize};

use super::{Norm, TransEConfig, TransEModel};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Manifest {
    dim: usize,
    norm: Norm,
    margin: f64,
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
    seed: u64,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<String>,
    relations: Vec<String>,
}

/// Returns `(manifest JSON, binary payload)`.
pub fn write_model(model: &TransEModel) -> (Vec<u8>, Vec<u8>) {
    let c = &model.config;
    let manifest = Manifest {
        dim: c.dim,
        norm: c.norm,
        margin: c.margin,
        learning_rate: c.learning_rate,
        epochs: c.epochs,
        batch_size: c.batch_size,
        seed: c.seed,
        num_entities: model.num_entities(),
        num_relations: model.num_relations(),
        entities: model.entity_uris.clone(),
        relations: model.relation_uris.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    let payload: Vec<u8> = model
        .raw_entities()
        .iter()
        .chain(model.raw_relations())
        .flat_map(|v| v.to_le_bytes())
        .collect();
    (json, payload)
}

pub fn read_model(manifest: &[u8], payload: &[u8]) -> Result<TransEModel> {
    let m: Manifest = serde_json::from_slice(manifest).map_err(|e| Error::json(manifest, &e))?;
    let rows = m.num_entities + m.num_relations;
    let expected = rows * m.dim * 4;
    if payload.len() != expected {
        return Err(Error::Invalid(format!(
            "model payload has {} bytes, manifest implies {expected}",
            payload.len()
        )));
    }
    for (name, catalog, count) in [
        ("entity", &m.entities, m.num_entities),
        ("relation", &m.relations, m.num_relations),
    ] {
        if !catalog.is_empty() && catalog.len() != count {
            return Err(Error::Invalid(format!(
                "{name} catalog has {} URIs for {count} rows",
                catalog.len()
            )));
        }
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let split = m.num_entities * m.dim;
    let config = TransEConfig {
        dim: m.dim,
        margin: m.margin,
        norm: m.norm,
        learning_rate: m.learning_rate,
        epochs: m.epochs,
        batch_size: m.batch_size,
        seed: m.seed,
    };
    let mut model = TransEModel::from_parts(
        config,
        m.num_entities,
        m.num_relations,
        values[..split].to_vec(),
        values[split..].to_vec(),
    );
    model.entity_uris = m.entities;
    model.relation_uris = m.relations;
    Ok(model)
}
