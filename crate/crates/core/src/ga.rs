//! Real-coded genetic algorithm over the five feature weights.
//!
//! Fitness is mean precision@k over a training set, with `k` for each movie equal to the
//! length of its reference list. Each generation keeps the elite unchanged and fills the
//! rest by tournament selection, arithmetic crossover and clamped Gaussian mutation.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::eval::ReferenceRecommendations;
use crate::error::{Error, Result};
use crate::eval::precision_at_k;
use crate::recommender::{recommend, FeatureIndex, FeatureWeights, NUM_FEATURES};

pub type Chromosome = [f64; NUM_FEATURES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub generations: usize,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub mutation_sigma: f64,
    pub seed: u64,
    pub parallelism: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 8,
            crossover_rate: 0.5,
            mutation_rate: 0.2,
            generations: 50,
            tournament_size: 2,
            elitism_count: 1,
            mutation_sigma: 0.1,
            seed: 42,
            parallelism: 8,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.population_size == 0 {
            errs.push("ga.population_size must be >= 1".into());
        }
        for (name, v) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(format!("ga.{name} = {v} not in [0,1]"));
            }
        }
        if self.generations == 0 {
            errs.push("ga.generations must be >= 1".into());
        }
        if self.tournament_size == 0 {
            errs.push("ga.tournament_size must be >= 1".into());
        }
        if self.elitism_count >= self.population_size {
            errs.push(format!(
                "ga.elitism_count = {} must be < population_size = {}",
                self.elitism_count, self.population_size
            ));
        }
        if self.mutation_sigma.is_nan() || self.mutation_sigma <= 0.0 {
            errs.push(format!("ga.mutation_sigma = {} must be > 0", self.mutation_sigma));
        }
        if self.parallelism == 0 {
            errs.push("ga.parallelism must be >= 1".into());
        }
        errs
    }
}

/// Mean precision@k of `w` over `training`. An all-zero chromosome scores 0.
pub fn fitness(
    w: &Chromosome,
    training: &[String],
    reference: &ReferenceRecommendations,
    index: &FeatureIndex,
) -> Result<f64> {
    for m in training {
        if reference.get(m).is_none() {
            return Err(Error::Invalid(format!("training movie {m} has no reference list")));
        }
    }
    if training.is_empty() {
        return Ok(0.0);
    }
    let Ok(weights) = FeatureWeights::new(*w) else {
        return Ok(0.0);
    };
    let mut total = 0.0;
    for m in training {
        let relevant_list = reference.get(m).expect("checked above");
        let k = relevant_list.len();
        let recs: Vec<String> = recommend(m, k, &weights, index)?
            .recommendations
            .into_iter()
            .map(|r| r.movie)
            .collect();
        let relevant: HashSet<String> = relevant_list.iter().cloned().collect();
        total += precision_at_k(&recs, &relevant, k);
    }
    Ok(total / training.len() as f64)
}

fn tournament<R: Rng + ?Sized>(fitnesses: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitnesses.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitnesses.len());
        if fitnesses[c] > fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Produces the next generation.
///
/// The `elitism_count` fittest chromosomes (ties to the lower index) are copied in their
/// original order; the remaining slots are children of two tournament winners.
pub fn ga_step<R: Rng + ?Sized>(
    population: &[Chromosome],
    fitnesses: &[f64],
    cfg: &GaConfig,
    rng: &mut R,
) -> Vec<Chromosome> {
    assert_eq!(population.len(), fitnesses.len());
    let n = population.len();
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    let mut elite: Vec<usize> = ranked[..cfg.elitism_count.min(n)].to_vec();
    elite.sort_unstable();

    let mutation = Normal::new(0.0, cfg.mutation_sigma).expect("sigma > 0");
    let mut next: Vec<Chromosome> = elite.iter().map(|&i| population[i]).collect();
    while next.len() < n {
        let p1 = population[tournament(fitnesses, cfg.tournament_size, rng)];
        let p2 = population[tournament(fitnesses, cfg.tournament_size, rng)];
        let mut child = if rng.random_bool(cfg.crossover_rate) {
            let beta: f64 = rng.random();
            std::array::from_fn(|g| beta * p1[g] + (1.0 - beta) * p2[g])
        } else {
            p1
        };
        for gene in child.iter_mut() {
            if rng.random_bool(cfg.mutation_rate) {
                *gene += mutation.sample(rng);
            }
            *gene = gene.clamp(0.0, 1.0);
        }
        next.push(child);
    }
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness in this generation's population.
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub best_fitness: f64,
    pub trace: Vec<GenerationRecord>,
}

/// How population fitness is evaluated inside [`optimize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Serial,
    Parallel,
}

pub fn optimize(
    training: &[String],
    reference: &ReferenceRecommendations,
    index: &FeatureIndex,
    cfg: &GaConfig,
) -> Result<GaOutcome> {
    optimize_with(training, reference, index, cfg, Evaluation::Parallel, |_, _| {})
}

/// Runs the GA; `on_generation` sees every population (after evaluation) with its fitnesses.
pub fn optimize_with(
    training: &[String],
    reference: &ReferenceRecommendations,
    index: &FeatureIndex,
    cfg: &GaConfig,
    evaluation: Evaluation,
    mut on_generation: impl FnMut(&[Chromosome], &[f64]),
) -> Result<GaOutcome> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::InvalidConfig(errs));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let evaluate = |population: &[Chromosome]| -> Result<Vec<f64>> {
        match evaluation {
            Evaluation::Serial => population
                .iter()
                .map(|c| fitness(c, training, reference, index))
                .collect(),
            Evaluation::Parallel => pool.install(|| {
                population
                    .par_iter()
                    .map(|c| fitness(c, training, reference, index))
                    .collect()
            }),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| std::array::from_fn(|_| rng.random::<f64>()))
        .collect();
    let mut best: Option<(Chromosome, f64)> = None;
    let mut trace = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let fitnesses = evaluate(&population)?;
        on_generation(&population, &fitnesses);
        let (i, f) = fitnesses
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, f)| if f > acc.1 { (i, f) } else { acc });
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((population[i], f));
        }
        trace.push(GenerationRecord {
            generation,
            best_fitness: f,
        });
        if generation + 1 < cfg.generations {
            population = ga_step(&population, &fitnesses, cfg, &mut rng);
        }
    }
    let (best, best_fitness) = best.expect("at least one generation");
    Ok(GaOutcome {
        best,
        best_fitness,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{weighted_corpus, WeightedCorpus};

    fn corpus() -> WeightedCorpus {
        weighted_corpus(30, [0.9, 0.05, 0.05, 0.6, 0.1], 5, 3)
    }

    #[test]
    fn disabled_operators_keep_population() {
        let pop: Vec<Chromosome> = vec![[0.1; 5], [0.5; 5], [0.9; 5]];
        let cfg = GaConfig {
            population_size: 3,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            elitism_count: 3,
            ..GaConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ga_step(&pop, &[0.3, 0.1, 0.2], &cfg, &mut rng), pop);
    }

    #[test]
    fn step_is_bounded_and_deterministic() {
        let pop: Vec<Chromosome> = (0..8).map(|i| [i as f64 / 8.0, 1.0, 0.0, 0.5, 0.99]).collect();
        let fit: Vec<f64> = (0..8).map(|i| (i % 3) as f64).collect();
        let cfg = GaConfig {
            mutation_rate: 1.0,
            mutation_sigma: 2.0,
            ..GaConfig::default()
        };
        let a = ga_step(&pop, &fit, &cfg, &mut ChaCha8Rng::seed_from_u64(4));
        let b = ga_step(&pop, &fit, &cfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|g| (0.0..=1.0).contains(g)));
        // elite is the first chromosome with fitness 2
        assert_eq!(a[0], pop[2]);
    }

    #[test]
    fn fitness_examples() {
        let c = corpus();
        let perfect = fitness(&c.hidden, &c.training, &c.reference, &c.index).unwrap();
        assert_eq!(perfect, 1.0);
        let scaled: Chromosome = c.hidden.map(|w| w * 0.5);
        assert_eq!(fitness(&scaled, &c.training, &c.reference, &c.index).unwrap(), perfect);
        let mut missing = c.training.clone();
        missing.push("nope".into());
        assert!(fitness(&c.hidden, &missing, &c.reference, &c.index).is_err());
        assert_eq!(fitness(&[0.0; 5], &c.training, &c.reference, &c.index).unwrap(), 0.0);
    }

    #[test]
    fn fitness_is_mean_of_precisions() {
        use std::collections::BTreeMap;
        // six-movie text fixture: m0 -> [m1, m2], m3 -> [m4, m5]
        let idx = crate::eval::tests_support::six_movie_index();
        let reference = ReferenceRecommendations::new(BTreeMap::from([
            ("m0".to_string(), vec!["m1".to_string(), "m2".to_string()]),
            ("m3".to_string(), vec!["m4".to_string(), "m0".to_string()]),
        ]))
        .unwrap();
        let training = vec!["m0".to_string(), "m3".to_string()];
        let f = fitness(&[1.0; 5], &training, &reference, &idx).unwrap();
        assert!((f - 0.75).abs() < 1e-12);
    }

    #[test]
    fn optimize_trace_and_monotonicity() {
        let c = corpus();
        let cfg = GaConfig {
            generations: 15,
            seed: 9,
            ..GaConfig::default()
        };
        let out = optimize(&c.training, &c.reference, &c.index, &cfg).unwrap();
        assert_eq!(out.trace.len(), 15);
        assert!(out.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
        assert!(out.best.iter().all(|g| (0.0..=1.0).contains(g)));
        assert_eq!(out.best_fitness, out.trace.last().unwrap().best_fitness);
    }

    #[test]
    fn invalid_config_rejected() {
        let c = corpus();
        let cfg = GaConfig {
            elitism_count: 8,
            crossover_rate: 1.5,
            ..GaConfig::default()
        };
        match optimize(&c.training, &c.reference, &c.index, &cfg) {
            Err(Error::InvalidConfig(errs)) => assert_eq!(errs.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
