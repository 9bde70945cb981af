//! File-based pipeline stages. Each stage reads the artifacts of earlier stages from the
//! working directory, writes its own, and returns a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{self, FusionConfig, MovieRecord};
use crate::error::{Error, Result};
use crate::eval::{self, OpinionDataset, ReferenceRecommendations};
use crate::ga::{self, GaConfig};
use crate::kg::{self, KnowledgeGraph};
use crate::recommender::{self, FeatureIndex, FeatureWeights, RecommendationList};
use crate::synth;
use crate::tfidf::{self, TfMode, TfidfModel};
use crate::transe::{self, TransEConfig};

pub const FUSED: &str = "fused.json";
pub const KG: &str = "kg.ndjson";
pub const MOVIE_KG: &str = "movie_kg.ndjson";
pub const TRANSE_MANIFEST: &str = "transe.json";
pub const TRANSE_PAYLOAD: &str = "transe.bin";
pub const TFIDF: &str = "tfidf.json";
pub const RECOMMENDATIONS: &str = "recommendations.json";
pub const GA: &str = "ga.json";
pub const EVAL: &str = "eval.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFile {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub work_dir: PathBuf,
    pub sources: Vec<SourceFile>,
    #[serde(default)]
    pub seed_graph: Option<PathBuf>,
    #[serde(default)]
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub opinions: Option<PathBuf>,
    #[serde(default = "default_opinion_threshold")]
    pub opinion_threshold: f64,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default = "default_hops")]
    pub hops: usize,
    #[serde(default)]
    pub transe: TransEConfig,
    #[serde(default)]
    pub tf_mode: TfMode,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Weights used when no optimized weights exist yet.
    #[serde(default)]
    pub weights: Option<[f64; 5]>,
    /// Movies the GA trains on; defaults to every reference movie.
    #[serde(default)]
    pub training_movies: Option<Vec<String>>,
}

fn default_opinion_threshold() -> f64 {
    0.5
}

fn default_hops() -> usize {
    2
}

fn default_k() -> usize {
    10
}

impl PipelineConfig {
    /// Reads a config file; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_slice(&bytes).map_err(|e| Error::json(&bytes, &e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.work_dir);
        self.sources.iter_mut().for_each(|s| fix(&mut s.path));
        for p in [&mut self.seed_graph, &mut self.reference, &mut self.opinions]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Every violated constraint, one message per field.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.sources.is_empty() {
            errs.push("sources must list at least one file".into());
        }
        let mut names = std::collections::HashSet::new();
        for s in &self.sources {
            if !names.insert(&s.name) {
                errs.push(format!("sources: duplicate source name {}", s.name));
            }
            if !s.path.exists() {
                errs.push(format!("sources.{}: {} does not exist", s.name, s.path.display()));
            }
        }
        for (field, path) in [
            ("seed_graph", &self.seed_graph),
            ("reference", &self.reference),
            ("opinions", &self.opinions),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    errs.push(format!("{field}: {} does not exist", p.display()));
                }
            }
        }
        if !(self.opinion_threshold > 0.0 && self.opinion_threshold <= 1.0) {
            errs.push(format!("opinion_threshold = {} not in (0,1]", self.opinion_threshold));
        }
        if self.k == 0 {
            errs.push("k must be >= 1".into());
        }
        if let Some(w) = self.weights {
            if let Err(e) = FeatureWeights::new(w) {
                errs.push(format!("weights: {e}"));
            }
        }
        errs.extend(self.fusion.validate());
        errs.extend(self.transe.validate());
        errs.extend(self.ga.validate());
        errs
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.work_dir.join(name)
    }
}

fn stage_of(artifact: &str) -> &'static str {
    match artifact {
        FUSED => "fuse",
        KG => "build-kg",
        MOVIE_KG => "detach",
        TRANSE_MANIFEST | TRANSE_PAYLOAD => "train-transe",
        TFIDF => "fit-tfidf",
        GA => "optimize",
        RECOMMENDATIONS => "recommend",
        _ => "evaluate",
    }
}

/// Fails with every missing artifact and the stage that produces it.
pub fn require(cfg: &PipelineConfig, artifacts: &[&str]) -> Result<()> {
    let missing: Vec<(PathBuf, &'static str)> = artifacts
        .iter()
        .map(|a| (cfg.artifact(a), stage_of(a)))
        .filter(|(p, _)| !p.exists())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingArtifacts(missing))
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    write(path, &bytes)
}

fn load_fused(cfg: &PipelineConfig) -> Result<Vec<MovieRecord>> {
    corpus::parse_records(&read(&cfg.artifact(FUSED))?)
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    kg::read_ndjson(&read(path)?)
}

/// Everything needed to score movies against each other.
pub struct Engine {
    pub records: Vec<MovieRecord>,
    pub index: FeatureIndex,
}

impl Engine {
    /// Loads fused records, the detached graph, TransE and TF-IDF models from `work_dir`.
    pub fn open(work_dir: &Path) -> Result<Self> {
        let missing: Vec<(PathBuf, &'static str)> =
            [FUSED, MOVIE_KG, TRANSE_MANIFEST, TRANSE_PAYLOAD, TFIDF]
                .iter()
                .map(|a| (work_dir.join(a), stage_of(a)))
                .filter(|(p, _)| !p.exists())
                .collect();
        if !missing.is_empty() {
            return Err(Error::MissingArtifacts(missing));
        }
        let records = corpus::parse_records(&read(&work_dir.join(FUSED))?)?;
        let graph = load_graph(&work_dir.join(MOVIE_KG))?;
        let transe = transe::read_model(
            &read(&work_dir.join(TRANSE_MANIFEST))?,
            &read(&work_dir.join(TRANSE_PAYLOAD))?,
        )?;
        let tfidf = TfidfModel::from_json(&read(&work_dir.join(TFIDF))?)?;
        let index = recommender::build_feature_vectors(&records, &tfidf, &transe, &graph)?;
        Ok(Self { records, index })
    }

    pub fn recommend(&self, movie: &str, k: usize, w: &FeatureWeights) -> Result<RecommendationList> {
        recommender::recommend(movie, k, w, &self.index)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaArtifact {
    pub best_weights: [f64; 5],
    pub best_fitness: f64,
    pub trace: Vec<ga::GenerationRecord>,
    pub training_movies: usize,
    pub config: GaConfig,
}

/// Optimized weights if `optimize` has run, else configured weights, else uniform.
fn current_weights(cfg: &PipelineConfig) -> Result<(FeatureWeights, &'static str)> {
    let ga_path = cfg.artifact(GA);
    if ga_path.exists() {
        let bytes = read(&ga_path)?;
        let art: GaArtifact = serde_json::from_slice(&bytes).map_err(|e| Error::json(&bytes, &e))?;
        if let Ok(w) = FeatureWeights::new(art.best_weights) {
            return Ok((w, "optimized"));
        }
    }
    match cfg.weights {
        Some(w) => Ok((FeatureWeights::new(w)?, "config")),
        None => Ok((FeatureWeights::uniform(), "uniform")),
    }
}

pub fn fuse(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let mut inputs = Vec::new();
    let mut read_count = 0;
    for s in &cfg.sources {
        let recs = corpus::parse_source_file(&read(&s.path)?, &s.name)?;
        read_count += recs.len();
        inputs.push(recs);
    }
    let mut fusion = cfg.fusion.clone();
    if fusion.source_precedence.is_empty() {
        fusion.source_precedence = cfg.sources.iter().map(|s| s.name.clone()).collect();
    }
    let fused = corpus::fuse(&inputs, &fusion);
    let out = cfg.artifact(FUSED);
    write(&out, &corpus::to_json(&fused))?;
    Ok(json!({"stage": "fuse", "input_records": read_count, "records": fused.len(), "output": out}))
}

pub fn build_kg(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    require(cfg, &[FUSED])?;
    let records = load_fused(cfg)?;
    let mut g = match &cfg.seed_graph {
        Some(p) => load_graph(p)?,
        None => KnowledgeGraph::new(),
    };
    let seed_stats = g.stats();
    let mut added = 0;
    for r in &records {
        added += g.insert_record(r).len();
    }
    let out = cfg.artifact(KG);
    write(&out, &kg::write_ndjson(&g))?;
    let stats = g.stats();
    Ok(json!({
        "stage": "build-kg",
        "seed_triples": seed_stats.triples,
        "added_triples": added,
        "triples": stats.triples,
        "entities": stats.entities,
        "relations": stats.relations,
        "output": out,
    }))
}

pub fn detach(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    require(cfg, &[KG])?;
    let g = load_graph(&cfg.artifact(KG))?;
    let seeds = g.movie_entities();
    let sub = kg::extract_subgraph(&g, &seeds, cfg.hops)?;
    let out = cfg.artifact(MOVIE_KG);
    write(&out, &kg::write_ndjson(&sub))?;
    let stats = sub.stats();
    Ok(json!({
        "stage": "detach",
        "movies": seeds.len(),
        "hops": cfg.hops,
        "triples": stats.triples,
        "entities": stats.entities,
        "relations": stats.relations,
        "output": out,
    }))
}

pub fn train_transe(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    require(cfg, &[MOVIE_KG])?;
    let g = load_graph(&cfg.artifact(MOVIE_KG))?;
    let (model, history) = transe::train(&g, &cfg.transe)?;
    let (manifest, payload) = transe::write_model(&model);
    let out = cfg.artifact(TRANSE_MANIFEST);
    write(&out, &manifest)?;
    write(&cfg.artifact(TRANSE_PAYLOAD), &payload)?;
    Ok(json!({
        "stage": "train-transe",
        "entities": model.num_entities(),
        "relations": model.num_relations(),
        "triples": g.entity_triples().len(),
        "epochs": history.len(),
        "first_epoch_loss": history.first(),
        "final_epoch_loss": history.last(),
        "output": out,
    }))
}

pub fn fit_tfidf(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    require(cfg, &[FUSED])?;
    let records = load_fused(cfg)?;
    let docs: Vec<Vec<String>> = records
        .iter()
        .map(|r| tfidf::tokenize(&recommender::movie_text(r)))
        .collect();
    let model = tfidf::fit(&docs, cfg.tf_mode)?;
    let out = cfg.artifact(TFIDF);
    write(&out, &model.to_json())?;
    Ok(json!({
        "stage": "fit-tfidf",
        "documents": model.num_docs(),
        "vocabulary": model.vocabulary_size(),
        "output": out,
    }))
}

/// Recommendations for one movie, or for every movie when `movie` is `None`.
pub fn recommend(
    cfg: &PipelineConfig,
    movie: Option<&str>,
    k: Option<usize>,
) -> Result<Vec<RecommendationList>> {
    require(cfg, &[FUSED, MOVIE_KG, TRANSE_MANIFEST, TRANSE_PAYLOAD, TFIDF])?;
    let engine = Engine::open(&cfg.work_dir)?;
    let (weights, _) = current_weights(cfg)?;
    let k = k.unwrap_or(cfg.k);
    let targets: Vec<String> = match movie {
        Some(m) => vec![m.to_string()],
        None => engine.index.movies().iter().map(|m| m.movie.clone()).collect(),
    };
    let lists = targets
        .iter()
        .map(|t| engine.recommend(t, k, &weights))
        .collect::<Result<Vec<_>>>()?;
    write_json(&cfg.artifact(RECOMMENDATIONS), &lists)?;
    Ok(lists)
}

fn load_reference(path: &Path) -> Result<ReferenceRecommendations> {
    ReferenceRecommendations::from_json(&read(path)?)
}

pub fn optimize(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let reference_path = cfg
        .reference
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(vec!["reference: required by optimize".into()]))?;
    require(cfg, &[FUSED, MOVIE_KG, TRANSE_MANIFEST, TRANSE_PAYLOAD, TFIDF])?;
    let reference = load_reference(reference_path)?;
    let engine = Engine::open(&cfg.work_dir)?;
    let training: Vec<String> = match &cfg.training_movies {
        Some(list) => list.clone(),
        None => reference.movies().map(String::from).collect(),
    };
    let outcome = ga::optimize(&training, &reference, &engine.index, &cfg.ga)?;
    let uniform = ga::fitness(&[1.0; 5], &training, &reference, &engine.index)?;
    let artifact = GaArtifact {
        best_weights: outcome.best,
        best_fitness: outcome.best_fitness,
        trace: outcome.trace,
        training_movies: training.len(),
        config: cfg.ga.clone(),
    };
    let out = cfg.artifact(GA);
    write_json(&out, &artifact)?;
    Ok(json!({
        "stage": "optimize",
        "training_movies": training.len(),
        "generations": artifact.trace.len(),
        "uniform_fitness": uniform,
        "best_fitness": artifact.best_fitness,
        "best_weights": artifact.best_weights,
        "output": out,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalArtifact {
    pub weights: [f64; 5],
    pub weights_source: String,
    pub relevance_source: String,
    pub report: eval::EvalReport,
}

pub fn evaluate(cfg: &PipelineConfig, force_uniform: bool) -> Result<serde_json::Value> {
    require(cfg, &[FUSED, MOVIE_KG, TRANSE_MANIFEST, TRANSE_PAYLOAD, TFIDF])?;
    let (reference, relevance_source) = match (&cfg.opinions, &cfg.reference) {
        (Some(p), _) => {
            let ds = OpinionDataset::from_json(&read(p)?)?;
            (eval::relevance_from_opinions(&ds, cfg.opinion_threshold), "opinions")
        }
        (None, Some(p)) => (load_reference(p)?, "reference"),
        (None, None) => {
            return Err(Error::InvalidConfig(vec![
                "reference or opinions: evaluate needs one of them".into(),
            ]))
        }
    };
    let engine = Engine::open(&cfg.work_dir)?;
    let (weights, source) = if force_uniform {
        (FeatureWeights::uniform(), "uniform")
    } else {
        current_weights(cfg)?
    };
    let report = eval::evaluate_system(&engine.index, &weights, &reference, engine.records.len())?;
    let out = cfg.artifact(EVAL);
    let summary = json!({
        "stage": "evaluate",
        "movies_evaluated": report.movies_evaluated,
        "precision": report.mean_precision,
        "recall": report.mean_recall,
        "f1": report.mean_f1,
        "coverage": report.coverage,
        "weights": source,
        "output": out,
    });
    write_json(
        &out,
        &EvalArtifact {
            weights: weights.values(),
            weights_source: source.into(),
            relevance_source: relevance_source.into(),
            report,
        },
    )?;
    Ok(summary)
}

/// Writes the bundled synthetic fixture: two source files, a reference file and a config.
pub fn write_fixture(dir: &Path, movies_per_group: usize, seed: u64) -> Result<PathBuf> {
    let fx = synth::record_fixture(movies_per_group, seed);
    let mut sources = Vec::new();
    for (name, records) in &fx.sources {
        let file = format!("{name}.json");
        write(&dir.join(&file), &corpus::to_json(records))?;
        sources.push(SourceFile {
            name: name.clone(),
            path: PathBuf::from(file),
        });
    }
    write(&dir.join("reference.json"), &fx.reference.to_json())?;
    let cfg = PipelineConfig {
        work_dir: PathBuf::from("work"),
        sources,
        seed_graph: None,
        reference: Some(PathBuf::from("reference.json")),
        opinions: None,
        opinion_threshold: default_opinion_threshold(),
        fusion: FusionConfig {
            source_precedence: fx.sources.iter().map(|(n, _)| n.clone()).collect(),
            ..FusionConfig::default()
        },
        hops: default_hops(),
        transe: TransEConfig {
            dim: 32,
            epochs: 50,
            batch_size: 32,
            ..TransEConfig::default()
        },
        tf_mode: TfMode::default(),
        ga: GaConfig {
            generations: 20,
            ..GaConfig::default()
        },
        k: default_k(),
        weights: None,
        training_movies: None,
    };
    let path = dir.join("config.json");
    write_json(&path, &cfg)?;
    Ok(path)
}
