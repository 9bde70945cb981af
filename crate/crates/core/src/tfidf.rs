//! TF-IDF over tokenized movie text.
//!
//! `idf(t) = ln(D / (D_t + 1))` exactly as defined, so a term present in every
//! document gets a negative weight (and a term in `D - 1` documents a zero weight).
//! Term frequency is normalized either by the number of distinct terms in the document
//! or by the count of its most frequent term.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfMode {
    /// raw count / number of distinct terms in the document
    ByLength,
    /// raw count / count of the most frequent term in the document
    #[default]
    ByMaxFreq,
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds from arbitrary pairs: sorts, sums duplicate indices, drops zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|e| e.1 != 0.0);
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|(i, w)| (*i, w * factor)).collect())
    }
}

/// Unicode word segmentation, ASCII letters lower-cased, single-character tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words()
        .filter(|w| w.chars().count() >= 2)
        .map(str::to_ascii_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    num_docs: usize,
    tf_mode: TfMode,
    #[serde(skip)]
    idf: Vec<f64>,
}

/// On-disk form: vocabulary as a term -> index map.
#[derive(Serialize, Deserialize)]
struct TfidfFile {
    vocabulary: BTreeMap<String, usize>,
    doc_freq: Vec<usize>,
    num_docs: usize,
    tf_mode: TfMode,
}

/// Fits vocabulary and document frequencies. Index assignment follows first occurrence.
pub fn fit(docs: &[Vec<String>], tf_mode: TfMode) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut terms = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut doc_freq: Vec<usize> = Vec::new();
    for doc in docs {
        let mut seen_in_doc = std::collections::HashSet::new();
        for term in doc {
            let id = *index.entry(term.clone()).or_insert_with(|| {
                terms.push(term.clone());
                doc_freq.push(0);
                terms.len() - 1
            });
            if seen_in_doc.insert(id) {
                doc_freq[id] += 1;
            }
        }
    }
    Ok(TfidfModel::assemble(terms, doc_freq, docs.len(), tf_mode))
}

impl TfidfModel {
    fn assemble(terms: Vec<String>, doc_freq: Vec<usize>, num_docs: usize, tf_mode: TfMode) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let idf = doc_freq
            .iter()
            .map(|&df| (num_docs as f64 / (df as f64 + 1.0)).ln())
            .collect();
        Self {
            terms,
            index,
            doc_freq,
            num_docs,
            tf_mode,
            idf,
        }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn tf_mode(&self) -> TfMode {
        self.tf_mode
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<usize> {
        self.term_index(term).map(|i| self.doc_freq[i])
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.term_index(term).map(|i| self.idf[i])
    }

    /// Term frequencies of `doc` under the model's normalization (out-of-vocabulary terms
    /// count towards the normalizer).
    pub fn term_frequencies(&self, doc: &[String]) -> Vec<(String, f64)> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        let mut pos: HashMap<&str, usize> = HashMap::new();
        for term in doc {
            match pos.get(term.as_str()) {
                Some(&i) => counts[i].1 += 1,
                None => {
                    pos.insert(term, counts.len());
                    counts.push((term.clone(), 1));
                }
            }
        }
        let denom = match self.tf_mode {
            TfMode::ByLength => counts.len(),
            TfMode::ByMaxFreq => counts.iter().map(|c| c.1).max().unwrap_or(0),
        } as f64;
        counts
            .into_iter()
            .map(|(t, c)| (t, c as f64 / denom))
            .collect()
    }

    pub fn vectorize(&self, doc: &[String]) -> SparseVector {
        let pairs = self
            .term_frequencies(doc)
            .into_iter()
            .filter_map(|(t, tf)| self.term_index(&t).map(|i| (i, tf * self.idf[i])))
            .collect();
        SparseVector::from_pairs(pairs)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let file = TfidfFile {
            vocabulary: self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect(),
            doc_freq: self.doc_freq.clone(),
            num_docs: self.num_docs,
            tf_mode: self.tf_mode,
        };
        let mut out = serde_json::to_vec_pretty(&file).expect("tfidf model serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: TfidfFile = serde_json::from_slice(bytes).map_err(|e| Error::json(bytes, &e))?;
        let n = file.vocabulary.len();
        if file.doc_freq.len() != n {
            return Err(Error::Invalid(format!(
                "doc_freq has {} entries for {n} terms",
                file.doc_freq.len()
            )));
        }
        let mut terms = vec![None; n];
        for (term, i) in file.vocabulary {
            match terms.get_mut(i) {
                Some(slot @ None) => *slot = Some(term),
                _ => return Err(Error::Invalid(format!("vocabulary index {i} out of range or repeated"))),
            }
        }
        if file.doc_freq.iter().any(|&df| df == 0 || df > file.num_docs) {
            return Err(Error::Invalid("doc_freq outside [1, num_docs]".into()));
        }
        let terms = terms.into_iter().map(|t| t.expect("every slot filled")).collect();
        Ok(Self::assemble(terms, file.doc_freq, file.num_docs, file.tf_mode))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenizer_rules() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("The cat, the CAT."), toks(&["the", "cat", "the", "cat"]));
        assert_eq!(tokenize("فیلم سینمایی فیلم"), toks(&["فیلم", "سینمایی", "فیلم"]));
        assert_eq!(tokenize("a b cd"), toks(&["cd"]));
    }

    #[test]
    fn idf_values_follow_formula() {
        let docs = vec![toks(&["x", "all"]), toks(&["all", "y"]), toks(&["all"])];
        let m = fit(&docs, TfMode::ByMaxFreq).unwrap();
        assert!((m.idf("x").unwrap() - (1.5f64).ln()).abs() < 1e-12);
        assert!((m.idf("x").unwrap() - 0.4054651081).abs() < 1e-9);
        assert!((m.idf("all").unwrap() - (-0.2876820725)).abs() < 1e-9);
        let single = fit(&[toks(&["w"])], TfMode::ByMaxFreq).unwrap();
        assert!(single.idf("w").unwrap() < 0.0);
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(matches!(fit(&[], TfMode::ByLength), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn tf_modes() {
        let doc = toks(&["a", "a", "b"]);
        let docs = vec![doc.clone(), toks(&["c"]), toks(&["d"])];
        for mode in [TfMode::ByMaxFreq, TfMode::ByLength] {
            let m = fit(&docs, mode).unwrap();
            let tf: HashMap<String, f64> = m.term_frequencies(&doc).into_iter().collect();
            assert_eq!(tf["a"], 1.0);
            assert_eq!(tf["b"], 0.5);
        }
        let m = fit(&docs, TfMode::ByMaxFreq).unwrap();
        assert!(m.vectorize(&[]).is_empty());
    }

    #[test]
    fn out_of_vocabulary_terms_skipped() {
        let m = fit(&[toks(&["a"]), toks(&["b"]), toks(&["c"])], TfMode::ByMaxFreq).unwrap();
        let v = m.vectorize(&toks(&["a", "zzz"]));
        assert_eq!(v.len(), 1);
        assert_eq!(v.entries()[0].0, 0);
    }

    #[test]
    fn json_round_trip() {
        let m = fit(&[toks(&["b", "a"]), toks(&["a", "فیلم"])], TfMode::ByLength).unwrap();
        let back = TfidfModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.term_index("b"), Some(0));
    }

    #[test]
    fn sparse_vector_invariants() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0), (2, 0.0)]);
        assert_eq!(v.entries(), &[(1, 2.0)]);
    }

    proptest! {
        #[test]
        fn vectors_are_sorted_and_deterministic(
            docs in proptest::collection::vec(proptest::collection::vec("[a-e]{1,2}", 0..8), 1..6),
            mode in prop_oneof![Just(TfMode::ByLength), Just(TfMode::ByMaxFreq)],
        ) {
            let m = fit(&docs, mode).unwrap();
            for doc in &docs {
                let v = m.vectorize(doc);
                prop_assert_eq!(&v, &m.vectorize(doc));
                prop_assert!(v.entries().windows(2).all(|w| w[0].0 < w[1].0));
                prop_assert!(v.entries().iter().all(|e| e.1 != 0.0));
                let distinct_nonzero = doc
                    .iter()
                    .collect::<std::collections::HashSet<_>>()
                    .into_iter()
                    .filter(|t| m.idf(t).unwrap() != 0.0)
                    .count();
                prop_assert_eq!(v.len(), distinct_nonzero);
            }
            for (i, t) in m.terms.iter().enumerate() {
                prop_assert!(m.doc_freq[i] >= 1 && m.doc_freq[i] <= docs.len());
                prop_assert_eq!(m.term_index(t), Some(i));
            }
        }
    }
}
