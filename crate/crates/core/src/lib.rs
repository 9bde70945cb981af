//! Weighted content-based movie recommendation over a movie knowledge graph.
//!
//! The pipeline stages live in their own modules:
//!
//! - [`corpus`]: per-source record parsing and Levenshtein-based fusion
//! - [`kg`]: triple store, record insertion, k-hop subgraph detachment
//! - [`transe`]: TransE embeddings trained with margin loss and filtered negatives
//! - [`tfidf`]: tokenizer and TF-IDF sparse vectors
//! - [`recommender`]: per-feature cosine, weighted combination, top-k lists
//! - [`ga`]: real-coded genetic algorithm over the five feature weights
//! - [`eval`]: coverage, precision@k, recall, F1 and opinion-derived relevance
//! - [`pipeline`]: file-based stage orchestration used by the `kgrec` binary

pub mod corpus;
pub mod error;
pub mod eval;
pub mod ga;
pub mod kg;
pub mod pipeline;
pub mod recommender;
pub mod synth;
pub mod tfidf;
pub mod transe;

pub use error::{Error, Result};
