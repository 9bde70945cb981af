//! Movie records scraped from several sources and their fusion into one dataset.

mod fuse;
mod levenshtein;

pub use fuse::{fuse, normalize_title, FusionConfig};
pub use levenshtein::{levenshtein, normalized_distance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A score given to a movie by one source, on a 0-10 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub source: String,
    pub score: f64,
}

/// One movie with its textual and entity-valued attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieRecord {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub english_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storyline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poster_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release_year: Option<i32>,
    #[serde(default)]
    pub rates: Vec<Rate>,
    #[serde(default)]
    pub genres: Vec<String>,
    #[serde(default)]
    pub directors: Vec<String>,
    #[serde(default)]
    pub producers: Vec<String>,
    #[serde(default)]
    pub actors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_sale: Option<u64>,
    pub sources: Vec<String>,
}

/// Wire shape: everything optional so that missing fields can be reported per record.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    title: Option<String>,
    english_title: Option<String>,
    storyline: Option<String>,
    poster_url: Option<String>,
    release_year: Option<i32>,
    #[serde(default)]
    rates: Vec<Rate>,
    #[serde(default)]
    genres: Vec<String>,
    #[serde(default)]
    directors: Vec<String>,
    #[serde(default)]
    producers: Vec<String>,
    #[serde(default)]
    actors: Vec<String>,
    duration: Option<u32>,
    total_sale: Option<u64>,
    #[serde(default)]
    sources: Vec<String>,
}

/// Parses a JSON array of records. Every record must carry `title` and a non-empty `sources`.
///
/// A missing `id` becomes `<first source>:<index>`.
pub fn parse_records(bytes: &[u8]) -> Result<Vec<MovieRecord>> {
    parse_with_source(bytes, None)
}

/// Parses one source's record file; records without `sources` are attributed to `source`.
pub fn parse_source_file(bytes: &[u8], source: &str) -> Result<Vec<MovieRecord>> {
    parse_with_source(bytes, Some(source))
}

fn parse_with_source(bytes: &[u8], source: Option<&str>) -> Result<Vec<MovieRecord>> {
    let values: Vec<serde_json::Value> =
        serde_json::from_slice(bytes).map_err(|e| Error::json(bytes, &e))?;
    values
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            let raw: RawRecord = serde_json::from_value(value).map_err(|e| Error::Record {
                index,
                message: e.to_string(),
            })?;
            raw.into_record(index, source)
        })
        .collect()
}

impl RawRecord {
    fn into_record(self, index: usize, default_source: Option<&str>) -> Result<MovieRecord> {
        let title = self
            .title
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::Record {
                index,
                message: "missing title".into(),
            })?;
        let mut sources = dedup(self.sources);
        if sources.is_empty() {
            match default_source {
                Some(s) => sources.push(s.to_string()),
                None => {
                    return Err(Error::Record {
                        index,
                        message: "missing sources".into(),
                    })
                }
            }
        }
        if let Some(rate) = self.rates.iter().find(|r| !(0.0..=10.0).contains(&r.score)) {
            return Err(Error::Record {
                index,
                message: format!("rate {} from {} outside [0,10]", rate.score, rate.source),
            });
        }
        let id = self
            .id
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| format!("{}:{index}", sources[0]));
        Ok(MovieRecord {
            id,
            title,
            english_title: non_blank(self.english_title),
            storyline: non_blank(self.storyline),
            poster_url: non_blank(self.poster_url),
            release_year: self.release_year,
            rates: dedup_rates(self.rates),
            genres: dedup(self.genres),
            directors: dedup(self.directors),
            producers: dedup(self.producers),
            actors: dedup(self.actors),
            duration: self.duration,
            total_sale: self.total_sale,
            sources,
        })
    }
}

fn non_blank(s: Option<String>) -> Option<String> {
    s.filter(|s| !s.trim().is_empty())
}

/// Removes exact duplicates, keeping first occurrences in order.
pub(crate) fn dedup(items: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    items
        .into_iter()
        .filter(|s| seen.insert(s.clone()))
        .collect()
}

pub(crate) fn dedup_rates(rates: Vec<Rate>) -> Vec<Rate> {
    let mut out: Vec<Rate> = Vec::with_capacity(rates.len());
    for r in rates {
        if !out.iter().any(|o| o.source == r.source && o.score == r.score) {
            out.push(r);
        }
    }
    out
}

/// Serializes records as a pretty JSON array (the fused-dataset file format).
pub fn to_json(records: &[MovieRecord]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(records).expect("records serialize");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_array() {
        assert!(parse_records(b"[]").unwrap().is_empty());
    }

    #[test]
    fn single_record_round_trips() {
        let input = r#"[{"title":"A","genres":["درام"],"sources":["filimo"]}]"#;
        let recs = parse_records(input.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].title, "A");
        assert_eq!(recs[0].genres, vec!["درام".to_string()]);
        assert_eq!(recs[0].storyline, None);
        let again = parse_records(&to_json(&recs)).unwrap();
        assert_eq!(again, recs);
    }

    #[test]
    fn missing_title_names_index() {
        let err = parse_records(br#"[{"genres":["x"]}]"#).unwrap_err();
        assert_eq!(err.to_string(), "record 0: missing title");
        let err = parse_records(br#"[{"title":"ok","sources":["s"]},{"title":"  "}]"#).unwrap_err();
        assert_eq!(err.to_string(), "record 1: missing title");
    }

    #[test]
    fn malformed_json_reports_offset() {
        let err = parse_records(b"[{\"title\": }]").unwrap_err();
        match err {
            Error::Json { offset, .. } => assert_eq!(offset, 11),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_ignored_and_blanks_absent() {
        let input = r#"[{"title":"B","storyline":"","poster":"x","actors":["a","a","b"]}]"#;
        let recs = parse_source_file(input.as_bytes(), "namava").unwrap();
        assert_eq!(recs[0].storyline, None);
        assert_eq!(recs[0].actors, vec!["a", "b"]);
        assert_eq!(recs[0].sources, vec!["namava"]);
        assert_eq!(recs[0].id, "namava:0");
    }

    #[test]
    fn out_of_range_rate_rejected() {
        let input = r#"[{"title":"B","sources":["s"],"rates":[{"source":"s","score":11}]}]"#;
        assert!(parse_records(input.as_bytes()).is_err());
    }
}
