use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{init_model, init_rng, normalize_row, Norm, TransEConfig, TransEModel};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

/// (head, relation, tail) as raw catalog indices.
pub type IdTriple = (usize, usize, usize);

/// `max(0, d_pos − d_neg + margin)`.
pub fn margin_loss(d_pos: f64, d_neg: f64, margin: f64) -> f64 {
    (d_pos - d_neg + margin).max(0.0)
}

/// Subgradient of `‖x‖` with respect to `x`. Zero where the norm is not differentiable
/// (per coordinate at 0 for L1, at the origin for L2).
pub fn distance_subgradient(x: &[f64], norm: Norm) -> Vec<f64> {
    match norm {
        Norm::L1 => x
            .iter()
            .map(|v| {
                if *v > 0.0 {
                    1.0
                } else if *v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        Norm::L2 => {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|v| v / n).collect()
            }
        }
    }
}

/// Gradients of the margin loss for one positive/negative pair sharing a relation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrad {
    pub head: Vec<f64>,
    pub relation: Vec<f64>,
    pub tail: Vec<f64>,
    pub neg_head: Vec<f64>,
    pub neg_tail: Vec<f64>,
}

/// Margin loss of `(h, r, t)` against `(h', r, t')` and its subgradient in every argument.
pub fn pair_loss_and_grad(
    h: &[f64],
    r: &[f64],
    t: &[f64],
    neg_h: &[f64],
    neg_t: &[f64],
    margin: f64,
    norm: Norm,
) -> (f64, PairGrad) {
    let pos: Vec<f64> = (0..h.len()).map(|i| h[i] + r[i] - t[i]).collect();
    let neg: Vec<f64> = (0..h.len()).map(|i| neg_h[i] + r[i] - neg_t[i]).collect();
    let d_pos = norm.apply(pos.iter().copied());
    let d_neg = norm.apply(neg.iter().copied());
    let loss = margin_loss(d_pos, d_neg, margin);
    let dim = h.len();
    if loss <= 0.0 {
        let z = vec![0.0; dim];
        return (
            loss,
            PairGrad {
                head: z.clone(),
                relation: z.clone(),
                tail: z.clone(),
                neg_head: z.clone(),
                neg_tail: z,
            },
        );
    }
    let gp = distance_subgradient(&pos, norm);
    let gn = distance_subgradient(&neg, norm);
    (
        loss,
        PairGrad {
            head: gp.clone(),
            relation: gp.iter().zip(&gn).map(|(p, n)| p - n).collect(),
            tail: gp.iter().map(|v| -v).collect(),
            neg_head: gn.iter().map(|v| -v).collect(),
            neg_tail: gn,
        },
    )
}

/// Replaces the head or the tail (each with probability 1/2) by a uniformly drawn entity,
/// re-drawing until the result differs from `triple` and is not in `known`.
///
/// If no filtered corruption turns up after a bounded number of draws, the corruption
/// space is enumerated; when every corruption is a known triple, an unfiltered one is
/// returned. Requires `num_entities >= 2`.
pub fn corrupt<R: Rng + ?Sized>(
    triple: IdTriple,
    num_entities: usize,
    known: &HashSet<IdTriple>,
    rng: &mut R,
) -> IdTriple {
    assert!(num_entities >= 2, "corruption needs at least two entities");
    let (h, r, t) = triple;
    let attempts = 32 + 4 * num_entities;
    for _ in 0..attempts {
        let e = rng.random_range(0..num_entities);
        let candidate = if rng.random_bool(0.5) { (e, r, t) } else { (h, r, e) };
        if candidate != triple && !known.contains(&candidate) {
            return candidate;
        }
    }
    let all = (0..num_entities)
        .map(|e| (e, r, t))
        .chain((0..num_entities).map(|e| (h, r, e)))
        .filter(|c| *c != triple);
    let mut fallback = None;
    for c in all {
        if !known.contains(&c) {
            return c;
        }
        fallback.get_or_insert(c);
    }
    fallback.expect("two entities give at least one distinct corruption")
}

/// Trains on the entity-entity triples of `g`; the model's catalogs mirror the graph.
pub fn train(g: &KnowledgeGraph, cfg: &TransEConfig) -> Result<(TransEModel, Vec<f64>)> {
    let triples = g.entity_triples();
    let (mut model, history) =
        train_triples(g.num_entities(), g.num_relations(), &triples, cfg)?;
    model.entity_uris = g.entity_uris().map(String::from).collect();
    model.relation_uris = g.relation_uris().map(String::from).collect();
    Ok((model, history))
}

/// Mini-batch SGD over raw index triples. Returns the model and the mean loss of each epoch.
pub fn train_triples(
    num_entities: usize,
    num_relations: usize,
    triples: &[IdTriple],
    cfg: &TransEConfig,
) -> Result<(TransEModel, Vec<f64>)> {
    if triples.is_empty() {
        return Err(Error::NothingToTrain);
    }
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::InvalidConfig(errs));
    }
    if num_entities < 2 {
        return Err(Error::Invalid("training needs at least two entities".into()));
    }
    for &(h, r, t) in triples {
        if h >= num_entities || t >= num_entities {
            return Err(Error::UnknownEntity(h.max(t)));
        }
        if r >= num_relations {
            return Err(Error::UnknownRelation(r));
        }
    }

    let mut model = init_model(num_entities, num_relations, cfg);
    let dim = cfg.dim;
    let known: HashSet<IdTriple> = triples.iter().copied().collect();
    let mut rng = init_rng(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut ent_grad: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            let mut rel_grad: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &i in batch {
                let pos = triples[i];
                let neg = corrupt(pos, num_entities, &known, &mut rng);
                let row = |m: &[f32], k: usize| -> Vec<f64> {
                    m[k * dim..(k + 1) * dim].iter().map(|v| *v as f64).collect()
                };
                let ents = model.raw_entities();
                let rels = model.raw_relations();
                let (loss, g) = pair_loss_and_grad(
                    &row(ents, pos.0),
                    &row(rels, pos.1),
                    &row(ents, pos.2),
                    &row(ents, neg.0),
                    &row(ents, neg.2),
                    cfg.margin,
                    cfg.norm,
                );
                epoch_loss += loss;
                if loss <= 0.0 {
                    continue;
                }
                for (k, grad) in [
                    (pos.0, &g.head),
                    (pos.2, &g.tail),
                    (neg.0, &g.neg_head),
                    (neg.2, &g.neg_tail),
                ] {
                    accumulate(&mut ent_grad, k, grad, dim);
                }
                accumulate(&mut rel_grad, pos.1, &g.relation, dim);
            }
            let lr = cfg.learning_rate;
            let ents = model.entities_mut();
            for (k, grad) in &ent_grad {
                let row = &mut ents[k * dim..(k + 1) * dim];
                for (v, g) in row.iter_mut().zip(grad) {
                    *v = (*v as f64 - lr * g) as f32;
                }
                normalize_row(row);
            }
            let rels = model.relations_mut();
            for (k, grad) in &rel_grad {
                let row = &mut rels[k * dim..(k + 1) * dim];
                for (v, g) in row.iter_mut().zip(grad) {
                    *v = (*v as f64 - lr * g) as f32;
                }
            }
        }
        history.push(epoch_loss / triples.len() as f64);
    }
    Ok((model, history))
}

fn accumulate(acc: &mut BTreeMap<usize, Vec<f64>>, key: usize, grad: &[f64], dim: usize) {
    let slot = acc.entry(key).or_insert_with(|| vec![0.0; dim]);
    for (s, g) in slot.iter_mut().zip(grad) {
        *s += g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::EntityId;
    use crate::synth::planted_translation_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn margin_loss_examples() {
        assert_eq!(margin_loss(0.5, 2.0, 1.0), 0.0);
        assert_eq!(margin_loss(2.0, 0.5, 1.0), 2.5);
        assert_eq!(margin_loss(1.3, 1.3, 0.7), 0.7);
    }

    #[test]
    fn corruption_space_of_two_entities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let known: HashSet<IdTriple> = [(0, 0, 1)].into_iter().collect();
        let mut seen = HashSet::new();
        for _ in 0..200 {
            let c = corrupt((0, 0, 1), 2, &known, &mut rng);
            assert!(c == (1, 0, 1) || c == (0, 0, 0), "{c:?}");
            seen.insert(c);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn corruption_is_filtered_and_keeps_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let known: HashSet<IdTriple> = [(0, 2, 1), (1, 2, 1), (0, 2, 2)].into_iter().collect();
        for _ in 0..500 {
            let c = corrupt((0, 2, 1), 5, &known, &mut rng);
            assert_ne!(c, (0, 2, 1));
            assert_eq!(c.1, 2);
            assert!(!known.contains(&c));
            assert!(c.0 == 0 || c.2 == 1);
        }
    }

    #[test]
    fn saturated_corruption_space_falls_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let known: HashSet<IdTriple> = [(0, 0, 0), (0, 0, 1), (1, 0, 1)].into_iter().collect();
        let c = corrupt((0, 0, 1), 2, &known, &mut rng);
        assert_ne!(c, (0, 0, 1));
    }

    #[test]
    fn nothing_to_train() {
        let cfg = TransEConfig::default();
        assert!(matches!(train_triples(3, 1, &[], &cfg), Err(Error::NothingToTrain)));
        let g = KnowledgeGraph::new();
        assert!(matches!(train(&g, &cfg), Err(Error::NothingToTrain)));
    }

    #[test]
    fn zero_epochs_is_init() {
        let cfg = TransEConfig {
            dim: 8,
            epochs: 0,
            ..TransEConfig::default()
        };
        let (m, h) = train_triples(4, 1, &[(0, 0, 1)], &cfg).unwrap();
        assert!(h.is_empty());
        assert_eq!(m, init_model(4, 1, &cfg));
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let fixture = planted_translation_graph(20, 2, 8, 11);
        let cfg = TransEConfig {
            dim: 16,
            epochs: 60,
            batch_size: 8,
            learning_rate: 0.02,
            seed: 5,
            ..TransEConfig::default()
        };
        let (m1, h1) = train_triples(20, 2, &fixture.triples, &cfg).unwrap();
        let (m2, h2) = train_triples(20, 2, &fixture.triples, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        assert!(h1.last().unwrap() < h1.first().unwrap());
        for e in 0..20 {
            let v = m1.entity_vector(EntityId(e)).unwrap();
            let n: f64 = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
        assert_ne!(
            m1.entity_vector(EntityId(0)).unwrap(),
            m1.entity_vector(EntityId(1)).unwrap()
        );
    }

    #[test]
    fn finite_difference_spot_check() {
        let h = [0.3, -0.2, 0.5];
        let r = [0.1, 0.4, -0.3];
        let t = [0.6, 0.1, 0.05];
        let nh = [-0.4, 0.9, 0.2];
        let nt = [0.2, -0.7, 0.45];
        for norm in [Norm::L1, Norm::L2] {
            let (_, g) = pair_loss_and_grad(&h, &r, &t, &nh, &nt, 3.0, norm);
            let eps = 1e-6;
            for i in 0..3 {
                let mut hp = h;
                hp[i] += eps;
                let mut hm = h;
                hm[i] -= eps;
                let fd = (pair_loss_and_grad(&hp, &r, &t, &nh, &nt, 3.0, norm).0
                    - pair_loss_and_grad(&hm, &r, &t, &nh, &nt, 3.0, norm).0)
                    / (2.0 * eps);
                assert!((fd - g.head[i]).abs() < 1e-6);
            }
        }
    }
}
