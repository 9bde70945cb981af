use serde::{Deserialize, Serialize};

use super::{insert::relations, EntityKind, KnowledgeGraph, TripleObject, UriObject};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct TripleOut<'a> {
    h: &'a str,
    r: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lit: Option<&'a str>,
}

#[derive(Deserialize)]
struct TripleIn {
    h: String,
    r: String,
    t: Option<String>,
    lit: Option<String>,
}

/// Serializes every triple as one JSON object per line, in insertion order.
pub fn write_ndjson(g: &KnowledgeGraph) -> Vec<u8> {
    let mut out = Vec::new();
    for t in g.triples() {
        let line = TripleOut {
            h: &g.entities[t.head.0].uri,
            r: &g.relations[t.relation.0],
            t: t.tail_entity().map(|e| g.entities[e.0].uri.as_str()),
            lit: match &t.tail {
                TripleObject::Literal(s) => Some(s.as_str()),
                TripleObject::Entity(_) => None,
            },
        };
        serde_json::to_writer(&mut out, &line).expect("triple serializes");
        out.push(b'\n');
    }
    out
}

/// Loads a graph from newline-delimited triples. Blank lines are skipped.
///
/// Movie entities take their label from their `mfb:title` literal when present.
pub fn read_ndjson(bytes: &[u8]) -> Result<KnowledgeGraph> {
    let mut g = KnowledgeGraph::new();
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Json {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    let mut offset = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += line.len();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: TripleIn = serde_json::from_str(trimmed).map_err(|e| Error::Json {
            offset: start + e.column().saturating_sub(1),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        let tail = match (&parsed.t, &parsed.lit) {
            (Some(t), None) => UriObject::Entity(t),
            (None, Some(l)) => UriObject::Literal(l),
            _ => {
                return Err(Error::Invalid(format!(
                    "line {}: exactly one of \"t\" and \"lit\" is required",
                    lineno + 1
                )))
            }
        };
        g.add_uri_triple(&parsed.h, &parsed.r, tail);
    }

    if let Some(title_rel) = g.relation_by_uri(relations::TITLE) {
        let titled: Vec<_> = g
            .triples()
            .iter()
            .filter(|t| t.relation == title_rel)
            .filter_map(|t| match &t.tail {
                TripleObject::Literal(s) => Some((t.head, s.clone())),
                TripleObject::Entity(_) => None,
            })
            .collect();
        for (head, title) in titled {
            if g.entity_kind(head)? == EntityKind::Movie {
                g.set_label(head, &title)?;
            }
        }
    }
    Ok(g)
}
