use std::collections::VecDeque;

use super::{EntityId, KnowledgeGraph, RelationId, Triple, TripleObject};
use crate::error::{Error, Result};

/// Detaches the neighbourhood of `seeds` within `hops` undirected entity-entity steps.
///
/// Entity-entity triples are kept when both endpoints are reached; literal triples when
/// their head is. Literals never extend the frontier. Ids are re-densified in ascending
/// order of the original ids, so extracting with every entity as a seed reproduces `g`.
pub fn extract_subgraph(
    g: &KnowledgeGraph,
    seeds: &[EntityId],
    hops: usize,
) -> Result<KnowledgeGraph> {
    let n = g.num_entities();
    let mut depth: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if s.0 >= n {
            return Err(Error::UnknownEntity(s.0));
        }
        if depth[s.0].is_none() {
            depth[s.0] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(e) = queue.pop_front() {
        let d = depth[e.0].expect("queued entities have a depth");
        if d == hops {
            continue;
        }
        for &nb in g.neighbors(e) {
            if depth[nb.0].is_none() {
                depth[nb.0] = Some(d + 1);
                queue.push_back(nb);
            }
        }
    }

    let keep = |e: EntityId| depth[e.0].is_some();
    let mut out = KnowledgeGraph::new();
    let mut entity_map: Vec<Option<EntityId>> = vec![None; n];
    for i in (0..n).filter(|&i| keep(EntityId(i))) {
        let e = &g.entities[i];
        entity_map[i] = Some(out.intern_entity(&e.uri, &e.label));
    }

    let kept: Vec<&Triple> = g
        .triples()
        .iter()
        .filter(|t| keep(t.head) && t.tail_entity().is_none_or(keep))
        .collect();
    let mut relation_used = vec![false; g.num_relations()];
    for t in &kept {
        relation_used[t.relation.0] = true;
    }
    let mut relation_map: Vec<Option<RelationId>> = vec![None; g.num_relations()];
    for (i, used) in relation_used.iter().enumerate() {
        if *used {
            relation_map[i] = Some(out.intern_relation(&g.relations[i]));
        }
    }

    for t in kept {
        let tail = match &t.tail {
            TripleObject::Entity(e) => TripleObject::Entity(entity_map[e.0].expect("kept")),
            TripleObject::Literal(s) => TripleObject::Literal(s.clone()),
        };
        out.add_triple(Triple {
            head: entity_map[t.head.0].expect("kept"),
            relation: relation_map[t.relation.0].expect("used"),
            tail,
        })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::UriObject;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn chain() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (h, t) in [("ex:a", "ex:b"), ("ex:b", "ex:c"), ("ex:c", "ex:d")] {
            g.add_uri_triple(h, "ex:next", UriObject::Entity(t));
        }
        g.add_uri_triple("ex:a", "ex:name", UriObject::Literal("A"));
        g.add_uri_triple("ex:d", "ex:name", UriObject::Literal("D"));
        g
    }

    fn uris(g: &KnowledgeGraph) -> Vec<String> {
        g.entity_uris().map(String::from).collect()
    }

    #[test]
    fn two_hops_on_chain() {
        let g = chain();
        let a = g.entity_by_uri("ex:a").unwrap();
        let sub = extract_subgraph(&g, &[a], 2).unwrap();
        assert_eq!(uris(&sub), vec!["ex:a", "ex:b", "ex:c"]);
        assert_eq!(sub.entity_triples().len(), 2);
        // a's literal survives, d's does not
        assert_eq!(sub.stats().triples, 3);
    }

    #[test]
    fn zero_hops_keeps_only_seed_literals() {
        let g = chain();
        let a = g.entity_by_uri("ex:a").unwrap();
        let sub = extract_subgraph(&g, &[a], 0).unwrap();
        assert_eq!(uris(&sub), vec!["ex:a"]);
        assert_eq!(sub.entity_triples().len(), 0);
        assert_eq!(sub.stats().triples, 1);
    }

    #[test]
    fn all_seeds_reproduce_graph() {
        let g = chain();
        let all: Vec<EntityId> = (0..g.num_entities()).map(EntityId).collect();
        let sub = extract_subgraph(&g, &all, 1).unwrap();
        assert_eq!(sub.triples(), g.triples());
        assert_eq!(uris(&sub), uris(&g));
        assert_eq!(sub.stats(), g.stats());
    }

    #[test]
    fn unknown_seed_is_an_error() {
        let g = chain();
        let err = extract_subgraph(&g, &[EntityId(17)], 2).unwrap_err();
        assert!(err.to_string().contains("17"));
    }

    /// Independent oracle: Floyd-Warshall style all-pairs hop distances.
    fn reachable_oracle(n: usize, edges: &[(usize, usize)], seeds: &[usize], hops: usize) -> BTreeSet<usize> {
        const INF: usize = usize::MAX / 4;
        let mut dist = vec![vec![INF; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(a, b) in edges {
            if a != b {
                dist[a][b] = 1;
                dist[b][a] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        (0..n)
            .filter(|&v| seeds.iter().any(|&s| dist[s][v] <= hops))
            .collect()
    }

    proptest! {
        #[test]
        fn matches_distance_oracle_and_is_monotone(
            n in 1usize..50,
            raw_edges in proptest::collection::vec((0usize..50, 0usize..50), 0..80),
            raw_seeds in proptest::collection::vec(0usize..50, 1..4),
            hops in 0usize..4,
        ) {
            let edges: Vec<(usize, usize)> = raw_edges.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let seeds: Vec<usize> = raw_seeds.into_iter().map(|s| s % n).collect();
            let mut g = KnowledgeGraph::new();
            for i in 0..n {
                g.intern_entity(&format!("ex:{i}"), &format!("{i}"));
            }
            for &(a, b) in &edges {
                g.add_uri_triple(&format!("ex:{a}"), "ex:r", UriObject::Entity(&format!("ex:{b}")));
            }
            let seed_ids: Vec<EntityId> = seeds.iter().map(|&s| EntityId(s)).collect();
            let sub = extract_subgraph(&g, &seed_ids, hops).unwrap();
            let got: BTreeSet<usize> = sub.entity_uris().map(|u| u[3..].parse().unwrap()).collect();
            prop_assert_eq!(&got, &reachable_oracle(n, &edges, &seeds, hops));
            let wider = extract_subgraph(&g, &seed_ids, hops + 1).unwrap();
            let wider_set: BTreeSet<usize> = wider.entity_uris().map(|u| u[3..].parse().unwrap()).collect();
            prop_assert!(got.is_subset(&wider_set));
        }
    }
}
