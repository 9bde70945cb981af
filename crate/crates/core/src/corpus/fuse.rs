use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::levenshtein::normalized_chars;
use super::{dedup, dedup_rates, MovieRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Maximum normalized Levenshtein distance for two titles to count as the same movie.
    pub title_distance_threshold: f64,
    /// Sources in decreasing authority; scalar conflicts resolve to the first listed source.
    pub source_precedence: Vec<String>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            title_distance_threshold: 0.2,
            source_precedence: Vec::new(),
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(0.0..=1.0).contains(&self.title_distance_threshold) {
            errs.push(format!(
                "fusion.title_distance_threshold = {} not in [0,1]",
                self.title_distance_threshold
            ));
        }
        errs
    }
}

/// Comparison key for titles: trimmed, ASCII letters lower-cased.
pub fn normalize_title(title: &str) -> String {
    title.trim().to_ascii_lowercase()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so the representative does not depend on union order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Merges duplicate movies across (and within) sources.
///
/// Two records match when the normalized distance of their normalized titles is at most
/// the threshold; clusters are the transitive closure of that relation. Within a cluster
/// members are ordered by source precedence, then input order: scalar fields take the
/// first present value, list fields are unioned.
pub fn fuse(sources: &[Vec<MovieRecord>], cfg: &FusionConfig) -> Vec<MovieRecord> {
    let records: Vec<&MovieRecord> = sources.iter().flatten().collect();
    let n = records.len();
    if n == 0 {
        return Vec::new();
    }
    let keys: Vec<Vec<char>> = records
        .iter()
        .map(|r| normalize_title(&r.title).chars().collect())
        .collect();
    let threshold = cfg.title_distance_threshold;

    let matches: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let keys = &keys;
            ((i + 1)..n).filter_map(move |j| {
                let (a, b) = (&keys[i], &keys[j]);
                let longest = a.len().max(b.len()).max(1);
                // the length gap is a lower bound on the distance
                let gap = a.len().abs_diff(b.len());
                if gap as f64 / longest as f64 > threshold {
                    return None;
                }
                (normalized_chars(a, b) <= threshold).then_some((i, j))
            })
        })
        .collect();

    let mut uf = UnionFind::new(n);
    for (i, j) in matches {
        uf.union(i, j);
    }

    let rank = precedence_ranks(&records, &cfg.source_precedence);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let root = uf.find(i);
        let slot = *cluster_of_root.entry(root).or_insert_with(|| {
            clusters.push(Vec::new());
            clusters.len() - 1
        });
        clusters[slot].push(i);
    }

    let mut used_ids: HashMap<String, usize> = HashMap::new();
    clusters
        .into_iter()
        .map(|mut members| {
            members.sort_by_key(|&i| (record_rank(records[i], &rank), i));
            let mut merged = merge(members.iter().map(|&i| records[i]));
            let count = used_ids.entry(merged.id.clone()).or_insert(0);
            *count += 1;
            if *count > 1 {
                merged.id = format!("{}#{}", merged.id, count);
            }
            merged
        })
        .collect()
}

fn precedence_ranks(records: &[&MovieRecord], precedence: &[String]) -> HashMap<String, usize> {
    let mut rank: HashMap<String, usize> = precedence
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    // sources missing from the precedence list rank after it, in order of appearance
    for r in records {
        for s in &r.sources {
            let next = rank.len();
            rank.entry(s.clone()).or_insert(next);
        }
    }
    rank
}

fn record_rank(record: &MovieRecord, rank: &HashMap<String, usize>) -> usize {
    record
        .sources
        .iter()
        .filter_map(|s| rank.get(s).copied())
        .min()
        .unwrap_or(usize::MAX)
}

fn merge<'a>(mut members: impl Iterator<Item = &'a MovieRecord>) -> MovieRecord {
    let mut out = members.next().expect("cluster is non-empty").clone();
    for m in members {
        out.english_title = out.english_title.or_else(|| m.english_title.clone());
        out.storyline = out.storyline.or_else(|| m.storyline.clone());
        out.poster_url = out.poster_url.or_else(|| m.poster_url.clone());
        out.release_year = out.release_year.or(m.release_year);
        out.duration = out.duration.or(m.duration);
        out.total_sale = out.total_sale.or(m.total_sale);
        out.rates.extend(m.rates.iter().cloned());
        out.genres.extend(m.genres.iter().cloned());
        out.directors.extend(m.directors.iter().cloned());
        out.producers.extend(m.producers.iter().cloned());
        out.actors.extend(m.actors.iter().cloned());
        out.sources.extend(m.sources.iter().cloned());
    }
    out.rates = dedup_rates(out.rates);
    out.genres = dedup(out.genres);
    out.directors = dedup(out.directors);
    out.producers = dedup(out.producers);
    out.actors = dedup(out.actors);
    out.sources = dedup(out.sources);
    out
}
