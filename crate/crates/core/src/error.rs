use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },

    #[error("record {index}: {message}")]
    Record { index: usize, message: String },

    #[error("unknown entity id {0}")]
    UnknownEntity(usize),

    #[error("unknown relation id {0}")]
    UnknownRelation(usize),

    #[error("entity {0} has no embedding in the model")]
    EntityNotEmbedded(String),

    #[error("movie {0} is not in the knowledge graph")]
    MovieNotInGraph(String),

    #[error("unknown movie {0}")]
    UnknownMovie(String),

    #[error("nothing to train: graph has no entity-entity triples")]
    NothingToTrain,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("relevant set is empty")]
    EmptyRelevant,

    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("missing artifacts: {}", .0.iter().map(|(p, s)| format!("{} (run `{s}` first)", p.display())).collect::<Vec<_>>().join(", "))]
    MissingArtifacts(Vec<(PathBuf, &'static str)>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Converts a serde_json error into [`Error::Json`], turning line/column into a byte offset.
    pub(crate) fn json(input: &[u8], err: &serde_json::Error) -> Self {
        let offset = byte_offset(input, err.line(), err.column());
        Error::Json {
            offset,
            message: err.to_string(),
        }
    }
}

fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start = input
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == b'\n')
        .nth(line.saturating_sub(2))
        .map(|(i, _)| i + 1)
        .filter(|_| line > 1)
        .unwrap_or(0);
    (line_start + column.saturating_sub(1)).min(input.len())
}
