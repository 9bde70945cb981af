//! In-memory triple store for the movie knowledge graph.
//!
//! Entities and relations are identified by URIs and interned into dense ids. Tails are
//! either entities or string literals; only entity-entity triples enter the undirected
//! adjacency index used for hop traversal.

mod insert;
mod ndjson;
mod subgraph;

pub use insert::{movie_uri, relations, slug};
pub use ndjson::{read_ndjson, write_ndjson};
pub use subgraph::extract_subgraph;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TripleObject {
    Entity(EntityId),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: TripleObject,
}

impl Triple {
    pub fn tail_entity(&self) -> Option<EntityId> {
        match self.tail {
            TripleObject::Entity(e) => Some(e),
            TripleObject::Literal(_) => None,
        }
    }
}

/// What an entity was minted as; controls which entities label matching may reuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Movie,
    Person,
    Genre,
    Other,
}

impl EntityKind {
    fn from_uri(uri: &str) -> Self {
        if uri.starts_with(insert::MOVIE_PREFIX) {
            EntityKind::Movie
        } else if uri.starts_with(insert::PERSON_PREFIX) {
            EntityKind::Person
        } else if uri.starts_with(insert::GENRE_PREFIX) {
            EntityKind::Genre
        } else {
            EntityKind::Other
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Entity {
    uri: String,
    label: String,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    entity_index: HashMap<String, EntityId>,
    // canonical label -> ids in ascending order
    label_index: HashMap<String, Vec<EntityId>>,
    relations: Vec<String>,
    relation_index: HashMap<String, RelationId>,
    triples: Vec<Triple>,
    triple_set: HashSet<Triple>,
    adjacency: Vec<Vec<EntityId>>,
}

/// Canonical form used for label matching: trimmed, lower-cased, single spaces.
pub fn canonical_label(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub triples: usize,
    pub entities: usize,
    pub relations: usize,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            triples: self.triples.len(),
            entities: self.entities.len(),
            relations: self.relations.len(),
        }
    }

    pub fn entity_uri(&self, id: EntityId) -> Result<&str> {
        self.entities
            .get(id.0)
            .map(|e| e.uri.as_str())
            .ok_or(Error::UnknownEntity(id.0))
    }

    pub fn entity_label(&self, id: EntityId) -> Result<&str> {
        self.entities
            .get(id.0)
            .map(|e| e.label.as_str())
            .ok_or(Error::UnknownEntity(id.0))
    }

    pub fn entity_kind(&self, id: EntityId) -> Result<EntityKind> {
        self.entity_uri(id).map(EntityKind::from_uri)
    }

    pub fn relation_uri(&self, id: RelationId) -> Result<&str> {
        self.relations
            .get(id.0)
            .map(String::as_str)
            .ok_or(Error::UnknownRelation(id.0))
    }

    pub fn entity_by_uri(&self, uri: &str) -> Option<EntityId> {
        self.entity_index.get(uri).copied()
    }

    pub fn relation_by_uri(&self, uri: &str) -> Option<RelationId> {
        self.relation_index.get(uri).copied()
    }

    pub fn entity_uris(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().map(|e| e.uri.as_str())
    }

    pub fn relation_uris(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(String::as_str)
    }

    /// Entity matching: the lowest id whose canonical label equals the canonical input.
    pub fn match_entity(&self, label: &str) -> Option<EntityId> {
        self.label_index
            .get(&canonical_label(label))
            .and_then(|ids| ids.first().copied())
    }

    pub(crate) fn match_entity_of_kind(&self, label: &str, kinds: &[EntityKind]) -> Option<EntityId> {
        self.label_index.get(&canonical_label(label)).and_then(|ids| {
            ids.iter()
                .copied()
                .find(|id| kinds.contains(&EntityKind::from_uri(&self.entities[id.0].uri)))
        })
    }

    /// Undirected entity neighbours (with multiplicity, one per triple endpoint).
    pub fn neighbors(&self, id: EntityId) -> &[EntityId] {
        self.adjacency.get(id.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Returns the id for `uri`, minting a new entity with `label` if it is unknown.
    pub fn intern_entity(&mut self, uri: &str, label: &str) -> EntityId {
        if let Some(id) = self.entity_index.get(uri) {
            return *id;
        }
        let id = EntityId(self.entities.len());
        self.entities.push(Entity {
            uri: uri.to_string(),
            label: label.to_string(),
        });
        self.entity_index.insert(uri.to_string(), id);
        self.label_index
            .entry(canonical_label(label))
            .or_default()
            .push(id);
        self.adjacency.push(Vec::new());
        id
    }

    pub fn intern_relation(&mut self, uri: &str) -> RelationId {
        if let Some(id) = self.relation_index.get(uri) {
            return *id;
        }
        let id = RelationId(self.relations.len());
        self.relations.push(uri.to_string());
        self.relation_index.insert(uri.to_string(), id);
        id
    }

    /// Replaces an entity's label, keeping the label index consistent.
    pub fn set_label(&mut self, id: EntityId, label: &str) -> Result<()> {
        let entity = self.entities.get_mut(id.0).ok_or(Error::UnknownEntity(id.0))?;
        let old = canonical_label(&entity.label);
        entity.label = label.to_string();
        if let Some(ids) = self.label_index.get_mut(&old) {
            ids.retain(|x| *x != id);
            if ids.is_empty() {
                self.label_index.remove(&old);
            }
        }
        let ids = self.label_index.entry(canonical_label(label)).or_default();
        let pos = ids.partition_point(|x| *x < id);
        ids.insert(pos, id);
        Ok(())
    }

    /// Adds a triple; returns false if it was already present.
    pub fn add_triple(&mut self, triple: Triple) -> Result<bool> {
        if triple.head.0 >= self.entities.len() {
            return Err(Error::UnknownEntity(triple.head.0));
        }
        if triple.relation.0 >= self.relations.len() {
            return Err(Error::UnknownRelation(triple.relation.0));
        }
        if let Some(t) = triple.tail_entity() {
            if t.0 >= self.entities.len() {
                return Err(Error::UnknownEntity(t.0));
            }
        }
        if self.triple_set.contains(&triple) {
            return Ok(false);
        }
        if let Some(t) = triple.tail_entity() {
            self.adjacency[triple.head.0].push(t);
            self.adjacency[t.0].push(triple.head);
        }
        self.triple_set.insert(triple.clone());
        self.triples.push(triple);
        Ok(true)
    }

    /// Adds a triple given by URIs, interning unknown entities and relations.
    pub fn add_uri_triple(&mut self, head: &str, relation: &str, tail: UriObject<'_>) -> bool {
        let h = self.intern_entity(head, &insert::label_from_uri(head));
        let r = self.intern_relation(relation);
        let tail = match tail {
            UriObject::Entity(uri) => {
                TripleObject::Entity(self.intern_entity(uri, &insert::label_from_uri(uri)))
            }
            UriObject::Literal(s) => TripleObject::Literal(s.to_string()),
        };
        self.add_triple(Triple {
            head: h,
            relation: r,
            tail,
        })
        .expect("interned ids are in range")
    }

    /// All entity tails of `head` under `relation`, in insertion order.
    pub fn objects(&self, head: EntityId, relation: RelationId) -> Vec<EntityId> {
        self.triples
            .iter()
            .filter(|t| t.head == head && t.relation == relation)
            .filter_map(Triple::tail_entity)
            .collect()
    }

    /// Every entity-entity triple as (head, relation, tail) ids.
    pub fn entity_triples(&self) -> Vec<(usize, usize, usize)> {
        self.triples
            .iter()
            .filter_map(|t| t.tail_entity().map(|tail| (t.head.0, t.relation.0, tail.0)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum UriObject<'a> {
    Entity(&'a str),
    Literal(&'a str),
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chain() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (h, t) in [("ex:a", "ex:b"), ("ex:b", "ex:c"), ("ex:c", "ex:d")] {
            g.add_uri_triple(h, "ex:next", UriObject::Entity(t));
        }
        g
    }

    #[test]
    fn empty_graph() {
        let g = KnowledgeGraph::new();
        assert_eq!(
            g.stats(),
            GraphStats {
                triples: 0,
                entities: 0,
                relations: 0
            }
        );
        assert_eq!(g.match_entity("anything"), None);
    }

    #[test]
    fn chain_stats() {
        let g = chain();
        assert_eq!(
            g.stats(),
            GraphStats {
                triples: 3,
                entities: 4,
                relations: 1
            }
        );
    }

    #[test]
    fn match_after_insert_and_injectivity() {
        let mut g = KnowledgeGraph::new();
        let a = g.intern_entity("ex:hafez", "حافظ");
        let b = g.intern_entity("ex:saadi", "سعدی");
        assert_ne!(a, b);
        assert_eq!(g.match_entity("  حافظ "), Some(a));
        assert_eq!(g.match_entity("سعدی"), Some(b));
    }

    #[test]
    fn duplicate_triples_ignored_and_adjacency_consistent() {
        let mut g = chain();
        assert!(!g.add_uri_triple("ex:a", "ex:next", UriObject::Entity("ex:b")));
        assert_eq!(g.stats().triples, 3);
        let b = g.entity_by_uri("ex:b").unwrap();
        assert_eq!(g.neighbors(b).len(), 2);
        g.add_uri_triple("ex:a", "ex:name", UriObject::Literal("A"));
        let a = g.entity_by_uri("ex:a").unwrap();
        assert_eq!(g.neighbors(a).len(), 1);
    }

    #[test]
    fn rejects_out_of_range_ids() {
        let mut g = chain();
        let bad = Triple {
            head: EntityId(99),
            relation: RelationId(0),
            tail: TripleObject::Literal("x".into()),
        };
        assert!(matches!(g.add_triple(bad), Err(Error::UnknownEntity(99))));
    }
}
