use super::{canonical_label, EntityId, EntityKind, KnowledgeGraph, Triple, TripleObject};
use crate::corpus::MovieRecord;

pub(crate) const MOVIE_PREFIX: &str = "mfb:movie/";
pub(crate) const PERSON_PREFIX: &str = "mfb:person/";
pub(crate) const GENRE_PREFIX: &str = "mfb:genre/";

/// Relation URIs minted by record insertion.
pub mod relations {
    pub const DIRECTOR: &str = "mfb:director";
    pub const PRODUCER: &str = "mfb:producer";
    pub const ACTOR: &str = "mfb:actor";
    pub const GENRE: &str = "mfb:genre";
    pub const TITLE: &str = "mfb:title";
    pub const ENGLISH_TITLE: &str = "mfb:english_title";
    pub const STORYLINE: &str = "mfb:storyline";
    pub const RELEASE_YEAR: &str = "mfb:release_year";
    pub const DURATION: &str = "mfb:duration";
}

/// URI path segment for a label: canonical form with spaces as underscores.
pub fn slug(label: &str) -> String {
    canonical_label(label).replace(' ', "_")
}

pub fn movie_uri(id: &str) -> String {
    format!(
        "{MOVIE_PREFIX}{}",
        id.split_whitespace().collect::<Vec<_>>().join("_")
    )
}

fn person_uri(name: &str) -> String {
    format!("{PERSON_PREFIX}{}", slug(name))
}

fn genre_uri(name: &str) -> String {
    format!("{GENRE_PREFIX}{}", slug(name))
}

/// Best-effort readable label for an entity known only by URI.
pub(crate) fn label_from_uri(uri: &str) -> String {
    let tail = [MOVIE_PREFIX, PERSON_PREFIX, GENRE_PREFIX]
        .iter()
        .find_map(|p| uri.strip_prefix(p))
        .unwrap_or_else(|| {
            uri.rfind(['/', '#', ':'])
                .map(|i| &uri[i + 1..])
                .unwrap_or(uri)
        });
    tail.replace('_', " ")
}

impl KnowledgeGraph {
    fn match_or_mint(&mut self, uri: String, name: &str, kind: EntityKind) -> EntityId {
        if let Some(id) = self.entity_by_uri(&uri) {
            return id;
        }
        if let Some(id) = self.match_entity_of_kind(name, &[kind, EntityKind::Other]) {
            return id;
        }
        self.intern_entity(&uri, name.trim())
    }

    /// Adds the triples describing one movie and returns those that were new.
    ///
    /// The movie entity is `mfb:movie/<id>`. People and genres are matched against
    /// existing entities (by URI, then by label) before a new one is minted. Scalar
    /// attributes become literal-tail triples.
    pub fn insert_record(&mut self, record: &MovieRecord) -> Vec<Triple> {
        let uri = movie_uri(&record.id);
        let movie = match self.entity_by_uri(&uri) {
            Some(id) => id,
            None => self.intern_entity(&uri, record.title.trim()),
        };

        let mut added = Vec::new();
        let linked: [(&str, &[String], EntityKind); 4] = [
            (relations::DIRECTOR, &record.directors, EntityKind::Person),
            (relations::PRODUCER, &record.producers, EntityKind::Person),
            (relations::ACTOR, &record.actors, EntityKind::Person),
            (relations::GENRE, &record.genres, EntityKind::Genre),
        ];
        for (rel, names, kind) in linked {
            for name in names.iter().filter(|n| !n.trim().is_empty()) {
                let target_uri = match kind {
                    EntityKind::Genre => genre_uri(name),
                    _ => person_uri(name),
                };
                let target = self.match_or_mint(target_uri, name, kind);
                let relation = self.intern_relation(rel);
                self.push_new(&mut added, movie, relation, TripleObject::Entity(target));
            }
        }

        let literals = [
            (relations::TITLE, Some(record.title.clone())),
            (relations::ENGLISH_TITLE, record.english_title.clone()),
            (relations::STORYLINE, record.storyline.clone()),
            (relations::RELEASE_YEAR, record.release_year.map(|y| y.to_string())),
            (relations::DURATION, record.duration.map(|d| d.to_string())),
        ];
        for (rel, value) in literals {
            if let Some(value) = value {
                let relation = self.intern_relation(rel);
                self.push_new(&mut added, movie, relation, TripleObject::Literal(value));
            }
        }
        added
    }

    fn push_new(
        &mut self,
        added: &mut Vec<Triple>,
        head: EntityId,
        relation: super::RelationId,
        tail: TripleObject,
    ) {
        let triple = Triple {
            head,
            relation,
            tail,
        };
        if self
            .add_triple(triple.clone())
            .expect("ids come from this graph")
        {
            added.push(triple);
        }
    }

    /// Entity ids of every movie minted by record insertion.
    pub fn movie_entities(&self) -> Vec<EntityId> {
        self.entity_uris()
            .enumerate()
            .filter(|(_, uri)| uri.starts_with(MOVIE_PREFIX))
            .map(|(i, _)| EntityId(i))
            .collect()
    }
}
