//! Seeded synthetic data: planted TransE graphs, feature corpora with hidden weights,
//! and a small multi-source movie fixture for the command-line pipeline.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{MovieRecord, Rate};
use crate::eval::ReferenceRecommendations;
use crate::ga::Chromosome;
use crate::recommender::{recommend, FeatureIndex, FeatureWeights, MovieFeatureVectors};
use crate::tfidf::SparseVector;
use crate::transe::train::IdTriple;

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub num_entities: usize,
    pub num_relations: usize,
    pub triples: Vec<IdTriple>,
}

/// Entities are random unit vectors; for every (head, relation) the tail is the entity
/// nearest to `head + relation`, so the triples follow a translation structure.
pub fn planted_translation_graph(
    num_entities: usize,
    num_relations: usize,
    planted_dim: usize,
    seed: u64,
) -> PlantedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entities: Vec<Vec<f64>> = (0..num_entities).map(|_| unit_vector(&mut rng, planted_dim)).collect();
    let relations: Vec<Vec<f64>> = (0..num_relations)
        .map(|_| unit_vector(&mut rng, planted_dim).into_iter().map(|x| x * 0.8).collect())
        .collect();
    let mut triples = Vec::new();
    for (h, hv) in entities.iter().enumerate() {
        for (r, rv) in relations.iter().enumerate() {
            let target: Vec<f64> = hv.iter().zip(rv).map(|(a, b)| a + b).collect();
            let t = (0..num_entities)
                .filter(|&e| e != h)
                .min_by(|&a, &b| {
                    let da: f64 = entities[a].iter().zip(&target).map(|(x, y)| (x - y).powi(2)).sum();
                    let db: f64 = entities[b].iter().zip(&target).map(|(x, y)| (x - y).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .expect("at least two entities");
            triples.push((h, r, t));
        }
    }
    PlantedGraph {
        num_entities,
        num_relations,
        triples,
    }
}

#[derive(Debug, Clone)]
pub struct WeightedCorpus {
    pub index: FeatureIndex,
    pub reference: ReferenceRecommendations,
    pub training: Vec<String>,
    pub hidden: Chromosome,
}

/// Random feature vectors for `num_movies` movies; each movie's reference list is its top-`k`
/// under the `hidden` weights.
pub fn weighted_corpus(num_movies: usize, hidden: Chromosome, k: usize, seed: u64) -> WeightedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = 60;
    let dim = 8;
    let movies: Vec<MovieFeatureVectors> = (0..num_movies)
        .map(|i| {
            let text = SparseVector::from_pairs(
                (0..6)
                    .map(|_| (rng.random_range(0..vocab), rng.random_range(0.1..1.0)))
                    .collect(),
            );
            let mut dense = || Some(unit_vector(&mut rng, dim));
            MovieFeatureVectors {
                movie: format!("m{i:03}"),
                text,
                director: dense(),
                producer: dense(),
                actors: dense(),
                genre: dense(),
            }
        })
        .collect();
    let index = FeatureIndex::new(movies).expect("ids are unique");
    let weights = FeatureWeights::new(hidden).expect("hidden weights are valid");
    let reference: BTreeMap<String, Vec<String>> = index
        .movies()
        .iter()
        .map(|m| {
            let list = recommend(&m.movie, k, &weights, &index).expect("movie is indexed");
            (m.movie.clone(), list.recommendations.into_iter().map(|r| r.movie).collect())
        })
        .collect();
    let training = reference.keys().cloned().collect();
    WeightedCorpus {
        index,
        reference: ReferenceRecommendations::new(reference).expect("lists are non-empty"),
        training,
        hidden,
    }
}

/// Multi-source record fixture for the command-line pipeline.
#[derive(Debug, Clone)]
pub struct RecordFixture {
    /// (source name, records)
    pub sources: Vec<(String, Vec<MovieRecord>)>,
    /// Ground-truth similar movies (same group), keyed by fused movie id.
    pub reference: ReferenceRecommendations,
}

const GENRES: [&str; 6] = ["درام", "کمدی", "جنایی", "اجتماعی", "خانوادگی", "جنگی"];
const FIRST: [&str; 12] = [
    "Ali", "Reza", "Leila", "Hamid", "Negar", "Saeed", "Parisa", "Navid", "Shirin", "Bahram", "Mina", "Kaveh",
];
const LAST: [&str; 10] = [
    "Hatami", "Karimi", "Moradi", "Rahimi", "Tavakoli", "Sadeghi", "Jafari", "Ahmadi", "Nouri", "Farahani",
];
const THEMES: [[&str; 6]; 6] = [
    ["family", "inheritance", "house", "brother", "secret", "dinner"],
    ["war", "soldier", "front", "letter", "border", "return"],
    ["thief", "police", "money", "chase", "bank", "night"],
    ["wedding", "mistake", "neighbor", "comedy", "taxi", "cousin"],
    ["school", "teacher", "exam", "village", "child", "winter"],
    ["divorce", "court", "judge", "marriage", "lawyer", "truth"],
];

/// Six groups of movies sharing a genre, a director pool, a cast pool and storyline words;
/// split across two sources with overlapping, slightly re-typed titles.
pub fn record_fixture(movies_per_group: usize, seed: u64) -> RecordFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let person = |rng: &mut ChaCha8Rng| {
        format!("{} {}", FIRST.choose(rng).expect("non-empty"), LAST.choose(rng).expect("non-empty"))
    };
    let mut all: Vec<(usize, MovieRecord)> = Vec::new();
    for (g, theme) in THEMES.iter().enumerate() {
        let directors: Vec<String> = (0..2).map(|_| person(&mut rng)).collect();
        let cast: Vec<String> = (0..5).map(|_| person(&mut rng)).collect();
        for i in 0..movies_per_group {
            let n = g * movies_per_group + i;
            let words: Vec<&str> = (0..8).map(|_| *theme.choose(&mut rng).expect("non-empty")).collect();
            let mut actors: Vec<String> = cast.choose_multiple(&mut rng, 3).cloned().collect();
            actors.push(person(&mut rng));
            all.push((
                g,
                MovieRecord {
                    id: format!("mv{n:03}"),
                    title: format!("{} {} {}", theme[i % 6], TITLE_WORDS[n % TITLE_WORDS.len()], n),
                    english_title: None,
                    storyline: Some(format!("A story about {}.", words.join(" "))),
                    poster_url: None,
                    release_year: Some(1990 + (n as i32 * 7) % 33),
                    rates: vec![Rate {
                        source: "filimo".into(),
                        score: (rng.random_range(40..95) as f64) / 10.0,
                    }],
                    genres: vec![GENRES[g].to_string()],
                    directors: vec![directors.choose(&mut rng).expect("non-empty").clone()],
                    producers: if n.is_multiple_of(3) { vec![] } else { vec![person(&mut rng)] },
                    actors,
                    duration: Some(80 + (n as u32 * 13) % 50),
                    total_sale: None,
                    sources: vec!["filimo".into()],
                },
            ));
        }
    }

    let total = all.len();
    let mut filimo = Vec::new();
    let mut namava = Vec::new();
    for (n, (_, rec)) in all.iter().enumerate() {
        if n < total * 2 / 3 {
            filimo.push(rec.clone());
        }
        if n >= total / 3 {
            let mut copy = rec.clone();
            copy.id = format!("nm{n:03}");
            copy.sources = vec!["namava".into()];
            copy.rates = vec![Rate {
                source: "namava".into(),
                score: (rng.random_range(40..95) as f64) / 10.0,
            }];
            if n < total * 2 / 3 {
                // overlapping movie: same title up to case and padding, extra metadata
                copy.title = format!(" {} ", copy.title.to_uppercase());
                copy.english_title = Some(format!("Movie {n}"));
                copy.total_sale = Some(1_000_000 + n as u64 * 1000);
            } else {
                copy.id = rec.id.clone();
            }
            namava.push(copy);
        }
    }

    let reference: BTreeMap<String, Vec<String>> = all
        .iter()
        .map(|(g, rec)| {
            let similar: Vec<String> = all
                .iter()
                .filter(|(g2, r2)| g2 == g && r2.id != rec.id)
                .map(|(_, r2)| r2.id.clone())
                .take(4)
                .collect();
            (rec.id.clone(), similar)
        })
        .collect();
    RecordFixture {
        sources: vec![("filimo".into(), filimo), ("namava".into(), namava)],
        reference: ReferenceRecommendations::new(reference).expect("groups have several movies"),
    }
}

const TITLE_WORDS: [&str; 7] = ["Dawn", "Road", "Shadow", "Garden", "River", "Glass", "Stone"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fuse, FusionConfig};

    #[test]
    fn planted_graph_shape() {
        let g = planted_translation_graph(30, 3, 8, 1);
        assert_eq!(g.triples.len(), 90);
        assert!(g.triples.iter().all(|&(h, _, t)| h != t && t < 30));
    }

    #[test]
    fn hidden_weights_reproduce_reference() {
        let c = weighted_corpus(20, [1.0, 0.2, 0.0, 0.5, 0.1], 4, 2);
        assert_eq!(c.reference.len(), 20);
        assert!(c.reference.movies().all(|m| c.reference.get(m).unwrap().len() == 4));
    }

    #[test]
    fn fixture_fuses_to_one_record_per_movie() {
        let fx = record_fixture(6, 7);
        let sources: Vec<Vec<MovieRecord>> = fx.sources.iter().map(|(_, r)| r.clone()).collect();
        let cfg = FusionConfig {
            source_precedence: vec!["filimo".into(), "namava".into()],
            ..FusionConfig::default()
        };
        let fused = fuse(&sources, &cfg);
        assert_eq!(fused.len(), 36);
        let mut ids: Vec<_> = fused.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        let mut expected: Vec<_> = fx.reference.movies().map(String::from).collect();
        expected.sort();
        assert_eq!(ids, expected);
    }
}
