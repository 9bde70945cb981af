//! Coverage, precision@k, recall and F1, and relevance labels derived from user opinions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recommender::{recommend, FeatureIndex, FeatureWeights};

/// `|top_k(recommended) ∩ relevant| / min(k, |recommended|)`; 0 for an empty list.
pub fn precision_at_k<T: Eq + Hash>(recommended: &[T], relevant: &HashSet<T>, k: usize) -> f64 {
    let top = &recommended[..k.min(recommended.len())];
    if top.is_empty() {
        return 0.0;
    }
    let hits = top.iter().filter(|r| relevant.contains(r)).count();
    hits as f64 / top.len() as f64
}

pub fn recall<T: Eq + Hash>(recommended: &[T], relevant: &HashSet<T>) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevant);
    }
    let hits = recommended
        .iter()
        .collect::<HashSet<_>>()
        .into_iter()
        .filter(|r| relevant.contains(r))
        .count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Percentage of a catalog of `catalog_size` items that was ever recommended.
pub fn coverage(recommended_ever: usize, catalog_size: usize) -> f64 {
    assert!(catalog_size >= 1, "catalog must be non-empty");
    recommended_ever as f64 * 100.0 / catalog_size as f64
}

/// Movie id -> ordered list of movies considered similar to it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Vec<String>>", into = "BTreeMap<String, Vec<String>>")]
pub struct ReferenceRecommendations(BTreeMap<String, Vec<String>>);

impl ReferenceRecommendations {
    pub fn new(map: BTreeMap<String, Vec<String>>) -> Result<Self> {
        for (movie, list) in &map {
            if list.is_empty() {
                return Err(Error::Invalid(format!("reference list for {movie} is empty")));
            }
            if list.contains(movie) {
                return Err(Error::Invalid(format!("{movie} references itself")));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, movie: &str) -> Option<&[String]> {
        self.0.get(movie).map(Vec::as_slice)
    }

    pub fn movies(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let map: BTreeMap<String, Vec<String>> =
            serde_json::from_slice(bytes).map_err(|e| Error::json(bytes, &e))?;
        Self::new(map)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.0).expect("reference serializes");
        out.push(b'\n');
        out
    }
}

impl TryFrom<BTreeMap<String, Vec<String>>> for ReferenceRecommendations {
    type Error = Error;
    fn try_from(map: BTreeMap<String, Vec<String>>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<ReferenceRecommendations> for BTreeMap<String, Vec<String>> {
    fn from(r: ReferenceRecommendations) -> Self {
        r.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub movie: String,
    pub shown: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub user: String,
    pub movie: String,
    pub candidate: String,
    pub similar: bool,
}

/// Questionnaire answers: which shown candidates each user marked as similar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionDataset {
    #[serde(default)]
    pub version: Option<String>,
    pub users: Vec<String>,
    pub queries: Vec<Query>,
    pub opinions: Vec<Opinion>,
}

impl OpinionDataset {
    /// Parses and checks that every opinion names a listed user and a shown candidate.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let ds: OpinionDataset = serde_json::from_slice(bytes).map_err(|e| Error::json(bytes, &e))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let users: HashSet<&str> = self.users.iter().map(String::as_str).collect();
        let shown: HashSet<(&str, &str)> = self
            .queries
            .iter()
            .flat_map(|q| q.shown.iter().map(move |c| (q.movie.as_str(), c.as_str())))
            .collect();
        for (i, o) in self.opinions.iter().enumerate() {
            if !users.contains(o.user.as_str()) {
                return Err(Error::Invalid(format!("opinion {i}: unknown user {}", o.user)));
            }
            if !shown.contains(&(o.movie.as_str(), o.candidate.as_str())) {
                return Err(Error::Invalid(format!(
                    "opinion {i}: {} was not shown for {}",
                    o.candidate, o.movie
                )));
            }
        }
        Ok(())
    }
}

/// A candidate is relevant to a query when at least `threshold` of the users who answered
/// for it marked it similar. A user's last answer for a pair counts. Relevant candidates
/// keep their shown order; queries left without any are dropped.
pub fn relevance_from_opinions(ds: &OpinionDataset, threshold: f64) -> ReferenceRecommendations {
    let mut answers: HashMap<(&str, &str), HashMap<&str, bool>> = HashMap::new();
    for o in &ds.opinions {
        answers
            .entry((o.movie.as_str(), o.candidate.as_str()))
            .or_default()
            .insert(o.user.as_str(), o.similar);
    }
    let mut out = BTreeMap::new();
    for q in &ds.queries {
        let mut seen = HashSet::new();
        let relevant: Vec<String> = q
            .shown
            .iter()
            .filter(|c| **c != q.movie && seen.insert(c.as_str()))
            .filter(|c| {
                answers
                    .get(&(q.movie.as_str(), c.as_str()))
                    .is_some_and(|votes| {
                        let yes = votes.values().filter(|v| **v).count();
                        yes as f64 / votes.len() as f64 >= threshold
                    })
            })
            .cloned()
            .collect();
        if !relevant.is_empty() {
            out.entry(q.movie.clone())
                .or_insert_with(Vec::new)
                .extend(relevant);
        }
    }
    for list in out.values_mut() {
        let mut seen = HashSet::new();
        list.retain(|c| seen.insert(c.clone()));
    }
    ReferenceRecommendations(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieMetrics {
    pub movie: String,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_movie: Vec<MovieMetrics>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    /// Percentage of the catalog recommended at least once.
    pub coverage: f64,
    pub movies_evaluated: usize,
    pub recommended_distinct: usize,
    pub catalog_size: usize,
}

/// Recommends `|ref[m]|` movies for every reference query and scores them against the
/// reference list.
pub fn evaluate_system(
    index: &FeatureIndex,
    weights: &FeatureWeights,
    reference: &ReferenceRecommendations,
    catalog_size: usize,
) -> Result<EvalReport> {
    let queries: Vec<(&str, &[String])> = reference.0.iter().map(|(m, l)| (m.as_str(), l.as_slice())).collect();
    let results: Vec<(MovieMetrics, Vec<String>)> = queries
        .par_iter()
        .map(|(movie, relevant_list)| {
            let k = relevant_list.len();
            let list = recommend(movie, k, weights, index)?;
            let recs: Vec<String> = list.recommendations.into_iter().map(|r| r.movie).collect();
            let relevant: HashSet<String> = relevant_list.iter().cloned().collect();
            let p = precision_at_k(&recs, &relevant, k);
            let r = recall(&recs, &relevant)?;
            Ok((
                MovieMetrics {
                    movie: movie.to_string(),
                    k,
                    precision: p,
                    recall: r,
                    f1: f1(p, r),
                },
                recs,
            ))
        })
        .collect::<Result<_>>()?;

    let n = results.len();
    let mean = |f: fn(&MovieMetrics) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else {
            results.iter().map(|(m, _)| f(m)).sum::<f64>() / n as f64
        }
    };
    let mean_precision = mean(|m| m.precision);
    let mean_recall = mean(|m| m.recall);
    let mean_f1 = mean(|m| m.f1);
    let recommended: BTreeSet<&str> = results
        .iter()
        .flat_map(|(_, recs)| recs.iter().map(String::as_str))
        .collect();
    Ok(EvalReport {
        mean_precision,
        mean_recall,
        mean_f1,
        coverage: coverage(recommended.len(), catalog_size.max(1)),
        movies_evaluated: n,
        recommended_distinct: recommended.len(),
        catalog_size,
        per_movie: results.into_iter().map(|(m, _)| m).collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::tests_support::six_movie_index;
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> HashSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn list(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precision_examples() {
        let recs = list(&["a", "b", "c", "d", "e", "f"]);
        assert!((precision_at_k(&recs, &set(&["b", "e", "f"]), 5) - 0.4).abs() < 1e-12);
        assert_eq!(precision_at_k(&recs[..2], &set(&["a", "b", "z"]), 5), 1.0);
        assert_eq!(precision_at_k(&recs, &set(&["z"]), 3), 0.0);
        assert_eq!(precision_at_k::<String>(&[], &set(&["z"]), 3), 0.0);
    }

    #[test]
    fn recall_examples() {
        let rel = set(&["a", "b", "c", "d", "e", "f"]);
        assert_eq!(recall(&list(&["a", "c", "e", "x"]), &rel).unwrap(), 0.5);
        assert_eq!(recall(&list(&["a", "b", "c", "d", "e", "f"]), &rel).unwrap(), 1.0);
        assert_eq!(recall(&list(&["x"]), &rel).unwrap(), 0.0);
        assert!(matches!(recall(&list(&["x"]), &set(&[])), Err(Error::EmptyRelevant)));
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(0.5, 0.5), 0.5);
        assert_eq!(f1(1.0, 0.0), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
        assert!((f1(0.672, 0.644) - 0.6577).abs() < 5e-4);
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(coverage(285, 300), 95.0);
        assert_eq!(coverage(0, 300), 0.0);
        assert_eq!(coverage(300, 300), 100.0);
    }

    fn opinions(votes: &[bool]) -> OpinionDataset {
        let users: Vec<String> = (0..votes.len()).map(|i| format!("u{i}")).collect();
        OpinionDataset {
            version: Some("v1.0".into()),
            users: users.clone(),
            queries: vec![Query {
                movie: "q".into(),
                shown: list(&["c"]),
            }],
            opinions: users
                .iter()
                .zip(votes)
                .map(|(u, v)| Opinion {
                    user: u.clone(),
                    movie: "q".into(),
                    candidate: "c".into(),
                    similar: *v,
                })
                .collect(),
        }
    }

    #[test]
    fn opinion_votes() {
        let yes3 = opinions(&[true, true, true, false]);
        assert_eq!(relevance_from_opinions(&yes3, 0.5).get("q"), Some(&list(&["c"])[..]));
        let yes1 = opinions(&[true, false, false, false]);
        assert!(relevance_from_opinions(&yes1, 0.5).is_empty());
        let all = opinions(&[true, true]);
        assert_eq!(relevance_from_opinions(&all, 1.0).len(), 1);
    }

    #[test]
    fn opinion_validation() {
        let mut ds = opinions(&[true]);
        ds.opinions[0].user = "ghost".into();
        assert!(ds.validate().is_err());
        let mut ds = opinions(&[true]);
        ds.opinions[0].candidate = "unseen".into();
        assert!(ds.validate().is_err());
        let json = r#"{"version":"v1.0","users":["u"],"queries":[{"movie":"q","shown":["c"]}],
                       "opinions":[{"user":"u","movie":"q","candidate":"c","similar":true}]}"#;
        assert_eq!(OpinionDataset::from_json(json.as_bytes()).unwrap().opinions.len(), 1);
    }

    #[test]
    fn reference_validation() {
        assert!(ReferenceRecommendations::from_json(br#"{"a":["a"]}"#).is_err());
        assert!(ReferenceRecommendations::from_json(br#"{"a":[]}"#).is_err());
        let r = ReferenceRecommendations::from_json(br#"{"a":["b","c"]}"#).unwrap();
        assert_eq!(ReferenceRecommendations::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn evaluate_two_queries_by_hand() {
        let idx = six_movie_index();
        let reference = ReferenceRecommendations::new(BTreeMap::from([
            ("m0".to_string(), list(&["m1", "m2"])),
            ("m3".to_string(), list(&["m4", "m0"])),
        ]))
        .unwrap();
        let report = evaluate_system(&idx, &FeatureWeights::uniform(), &reference, 6).unwrap();
        // m0 -> [m1, m2]: 2/2; m3 -> [m4, m5]: 1/2
        assert_eq!(report.per_movie[0].precision, 1.0);
        assert_eq!(report.per_movie[1].precision, 0.5);
        assert!((report.mean_precision - 0.75).abs() < 1e-12);
        assert!((report.mean_recall - 0.75).abs() < 1e-12);
        assert!((report.mean_f1 - 0.75).abs() < 1e-12);
        // union {m1, m2, m4, m5}
        assert_eq!(report.recommended_distinct, 4);
        assert!((report.coverage - 400.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_exact_reference_and_half_coverage() {
        let idx = six_movie_index();
        let reference = ReferenceRecommendations::new(BTreeMap::from([
            ("m0".to_string(), list(&["m1"])),
            ("m1".to_string(), list(&["m0"])),
            ("m3".to_string(), list(&["m4"])),
        ]))
        .unwrap();
        let report = evaluate_system(&idx, &FeatureWeights::uniform(), &reference, 6).unwrap();
        assert_eq!(report.mean_precision, 1.0);
        assert_eq!(report.mean_recall, 1.0);
        assert_eq!(report.mean_f1, 1.0);
        assert_eq!(report.coverage, 50.0);
    }

    proptest! {
        #[test]
        fn precision_equals_recall_at_matching_k(
            pool in proptest::collection::btree_set(0u32..40, 2..30),
            split in 1usize..30,
            relevant_pick in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let pool: Vec<u32> = pool.into_iter().collect();
            let k = split.min(pool.len());
            let recommended = &pool[..k];
            let mut relevant: HashSet<u32> = pool.iter().zip(&relevant_pick).filter(|(_, b)| **b).map(|(x, _)| *x).take(k).collect();
            let mut filler = 100u32;
            while relevant.len() < k {
                relevant.insert(filler);
                filler += 1;
            }
            let p = precision_at_k(recommended, &relevant, k);
            let r = recall(recommended, &relevant).unwrap();
            prop_assert_eq!(p, r);
        }

        #[test]
        fn f1_symmetric_and_between(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            prop_assert_eq!(f1(p, r), f1(r, p));
            if p + r > 0.0 {
                let v = f1(p, r);
                prop_assert!(v >= p.min(r) - 1e-15 && v <= p.max(r) + 1e-15);
            }
        }
    }
}
