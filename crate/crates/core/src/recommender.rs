//! Per-feature cosine similarity combined under feature weights, and top-k lists.
//!
//! Five features: the TF-IDF text vector (title + storyline) and the mean TransE
//! vectors of a movie's directors, producers, actors and genres. The combined score is
//! the weighted mean of the cosines of the features both movies have:
//!
//! ```text
//! S(a, b) = Σ_f w_f · cos_f(a, b) / Σ_f w_f      (f present in both)
//! ```
//!
//! which is invariant to rescaling the weights.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::MovieRecord;
use crate::error::{Error, Result};
use crate::kg::{movie_uri, relations, KnowledgeGraph};
use crate::tfidf::{tokenize, SparseVector, TfidfModel};
use crate::transe::TransEModel;

pub const NUM_FEATURES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Text = 0,
    Director = 1,
    Producer = 2,
    Actors = 3,
    Genre = 4,
}

impl Feature {
    pub const ALL: [Feature; NUM_FEATURES] = [
        Feature::Text,
        Feature::Director,
        Feature::Producer,
        Feature::Actors,
        Feature::Genre,
    ];
}

/// Cosine of two dense vectors; 0 if either has zero norm.
pub fn cosine_dense(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(ratio(dot, na, nb))
}

pub fn cosine_sparse(a: &SparseVector, b: &SparseVector) -> f64 {
    ratio(a.dot(b), a.norm(), b.norm())
}

fn ratio(dot: f64, na: f64, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Feature vectors of one movie. Entity features are absent when the movie has no entity
/// for that relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieFeatureVectors {
    pub movie: String,
    pub text: SparseVector,
    pub director: Option<Vec<f64>>,
    pub producer: Option<Vec<f64>>,
    pub actors: Option<Vec<f64>>,
    pub genre: Option<Vec<f64>>,
}

impl MovieFeatureVectors {
    fn dense(&self, f: Feature) -> Option<&[f64]> {
        match f {
            Feature::Text => None,
            Feature::Director => self.director.as_deref(),
            Feature::Producer => self.producer.as_deref(),
            Feature::Actors => self.actors.as_deref(),
            Feature::Genre => self.genre.as_deref(),
        }
    }

    pub fn has(&self, f: Feature) -> bool {
        match f {
            Feature::Text => !self.text.is_empty(),
            _ => self.dense(f).is_some(),
        }
    }

    /// Cosine for one feature, `None` unless both movies have it.
    pub fn feature_cosine(&self, other: &Self, f: Feature) -> Result<Option<f64>> {
        if !self.has(f) || !other.has(f) {
            return Ok(None);
        }
        match f {
            Feature::Text => Ok(Some(cosine_sparse(&self.text, &other.text))),
            _ => cosine_dense(self.dense(f).expect("has"), other.dense(f).expect("has")).map(Some),
        }
    }
}

/// Non-negative weights, order (text, director, producer, actors, genre), not all zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; NUM_FEATURES]", into = "[f64; NUM_FEATURES]")]
pub struct FeatureWeights([f64; NUM_FEATURES]);

impl FeatureWeights {
    pub fn new(w: [f64; NUM_FEATURES]) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Invalid(format!("weights must be finite and >= 0: {w:?}")));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(Error::Invalid("at least one weight must be positive".into()));
        }
        Ok(Self(w))
    }

    pub fn uniform() -> Self {
        Self([1.0; NUM_FEATURES])
    }

    pub fn values(&self) -> [f64; NUM_FEATURES] {
        self.0
    }

    pub fn get(&self, f: Feature) -> f64 {
        self.0[f as usize]
    }
}

impl TryFrom<[f64; NUM_FEATURES]> for FeatureWeights {
    type Error = Error;
    fn try_from(w: [f64; NUM_FEATURES]) -> Result<Self> {
        Self::new(w)
    }
}

impl From<FeatureWeights> for [f64; NUM_FEATURES] {
    fn from(w: FeatureWeights) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedScore {
    pub score: f64,
    /// False when no positively weighted feature is present in both movies (score is 0).
    pub has_shared_feature: bool,
}

pub fn weighted_similarity(
    a: &MovieFeatureVectors,
    b: &MovieFeatureVectors,
    w: &FeatureWeights,
) -> Result<WeightedScore> {
    let mut num = 0.0;
    let mut den = 0.0;
    for f in Feature::ALL {
        let wf = w.get(f);
        if wf == 0.0 {
            continue;
        }
        if let Some(c) = a.feature_cosine(b, f)? {
            num += wf * c;
            den += wf;
        }
    }
    Ok(if den > 0.0 {
        WeightedScore {
            score: num / den,
            has_shared_feature: true,
        }
    } else {
        WeightedScore {
            score: 0.0,
            has_shared_feature: false,
        }
    })
}

/// Feature vectors for a corpus, ordered by movie id.
#[derive(Debug, Clone, Default)]
pub struct FeatureIndex {
    movies: Vec<MovieFeatureVectors>,
    position: HashMap<String, usize>,
}

impl FeatureIndex {
    pub fn new(mut movies: Vec<MovieFeatureVectors>) -> Result<Self> {
        movies.sort_by(|a, b| a.movie.cmp(&b.movie));
        if let Some(w) = movies.windows(2).find(|w| w[0].movie == w[1].movie) {
            return Err(Error::Invalid(format!("duplicate movie id {}", w[0].movie)));
        }
        let position = movies
            .iter()
            .enumerate()
            .map(|(i, m)| (m.movie.clone(), i))
            .collect();
        Ok(Self { movies, position })
    }

    pub fn len(&self) -> usize {
        self.movies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.movies.is_empty()
    }

    pub fn get(&self, movie: &str) -> Option<&MovieFeatureVectors> {
        self.position.get(movie).map(|&i| &self.movies[i])
    }

    pub fn movies(&self) -> &[MovieFeatureVectors] {
        &self.movies
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub movie: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub target: String,
    pub recommendations: Vec<Recommendation>,
}

/// Scores every other movie and keeps the `k` best; ties go to the smaller movie id.
pub fn recommend(
    target: &str,
    k: usize,
    w: &FeatureWeights,
    index: &FeatureIndex,
) -> Result<RecommendationList> {
    if k == 0 {
        return Err(Error::Invalid("k must be >= 1".into()));
    }
    let t = index
        .get(target)
        .ok_or_else(|| Error::UnknownMovie(target.to_string()))?;
    let mut scored: Vec<(usize, f64)> = index
        .movies
        .par_iter()
        .enumerate()
        .filter(|(_, m)| m.movie != target)
        .map(|(i, m)| weighted_similarity(t, m, w).map(|s| (i, s.score)))
        .collect::<Result<_>>()?;
    // index order is movie-id order, so the secondary key is the id tie-break
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(RecommendationList {
        target: target.to_string(),
        recommendations: scored
            .into_iter()
            .map(|(i, score)| Recommendation {
                movie: index.movies[i].movie.clone(),
                score,
            })
            .collect(),
    })
}

/// Text of a movie fed to TF-IDF: title, then storyline.
pub fn movie_text(record: &MovieRecord) -> String {
    match &record.storyline {
        Some(s) => format!("{} {}", record.title, s),
        None => record.title.clone(),
    }
}

/// Builds feature vectors for `records` from the graph neighbourhood of each movie.
///
/// Entity features average the TransE vectors of the movie's tails under the matching
/// relation; embeddings are looked up by URI in the model's catalog.
pub fn build_feature_vectors(
    records: &[MovieRecord],
    tfidf: &TfidfModel,
    transe: &TransEModel,
    kg: &KnowledgeGraph,
) -> Result<FeatureIndex> {
    let model_rows: HashMap<&str, usize> = transe
        .entity_uris
        .iter()
        .enumerate()
        .map(|(i, u)| (u.as_str(), i))
        .collect();
    let rel = |uri: &str| kg.relation_by_uri(uri);
    let feature_relations = [
        rel(relations::DIRECTOR),
        rel(relations::PRODUCER),
        rel(relations::ACTOR),
        rel(relations::GENRE),
    ];

    let movies = records
        .iter()
        .map(|record| {
            let uri = movie_uri(&record.id);
            let movie = kg
                .entity_by_uri(&uri)
                .ok_or_else(|| Error::MovieNotInGraph(record.id.clone()))?;
            let mut dense: [Option<Vec<f64>>; 4] = Default::default();
            for (slot, relation) in dense.iter_mut().zip(feature_relations) {
                let Some(relation) = relation else { continue };
                let members = kg.objects(movie, relation);
                if members.is_empty() {
                    continue;
                }
                let mut sum = vec![0.0; transe.dim()];
                for e in &members {
                    let member_uri = kg.entity_uri(*e)?;
                    let row = model_rows
                        .get(member_uri)
                        .ok_or_else(|| Error::EntityNotEmbedded(member_uri.to_string()))?;
                    let v = transe.entity_vector(crate::kg::EntityId(*row))?;
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += *x as f64;
                    }
                }
                let n = members.len() as f64;
                *slot = Some(sum.into_iter().map(|s| s / n).collect());
            }
            let [director, producer, actors, genre] = dense;
            Ok(MovieFeatureVectors {
                movie: record.id.clone(),
                text: tfidf.vectorize(&tokenize(&movie_text(record))),
                director,
                producer,
                actors,
                genre,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureIndex::new(movies)
}
