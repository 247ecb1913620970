//! The mutation-only evolutionary search over IT expressions.

pub mod config;
pub mod mutation;
pub mod selection;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{ConfigError, EvolutionConfig, MutationOp, Selection};
pub use mutation::{mutate, random_individual, random_term, NoEligibleMutation};
pub use selection::select;

use crate::data::Dataset;
use crate::expr::{Individual, Term};
use crate::fitting::{fit_columns, FitConfig};

const STREAM_INIT: u64 = 1;
const STREAM_MUTATE: u64 = 2;
const STREAM_SELECT: u64 = 3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream named by `(seed, tag, a, b)`.
pub fn derive_seed(seed: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut h = splitmix(seed);
    for part in [tag, a, b] {
        h = splitmix(h ^ part);
    }
    h
}

/// Independent generator for the stream named by `(seed, tag, a, b)`.
pub fn stream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, a, b))
}

type Column = Option<Arc<[f64]>>;

/// Fits term lists on a fixed training set, memoizing evaluated columns.
///
/// The cache only stores pure evaluations, so results do not depend on
/// cache state or on evaluation order.
pub struct Evaluator<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    fit: FitConfig,
    cache: Mutex<HashMap<Term, Column>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(rows: &'a [Vec<f64>], y: &'a [f64], fit: FitConfig) -> Self {
        Self { rows, y, fit, cache: Mutex::new(HashMap::new()) }
    }

    fn column(&self, term: &Term) -> Column {
        if let Some(col) = self.cache.lock().expect("cache lock").get(term) {
            return col.clone();
        }
        let col: Column = term.column(self.rows).map(Arc::from);
        self.cache.lock().expect("cache lock").insert(term.clone(), col.clone());
        col
    }

    pub fn fit(&self, terms: Vec<Term>) -> Individual {
        let cols: Vec<Column> = terms.iter().map(|t| self.column(t)).collect();
        let views: Vec<Option<&[f64]>> = cols.iter().map(|c| c.as_deref()).collect();
        fit_columns(&terms, &views, self.y, &self.fit)
    }

    /// Drops cached columns of terms not used by `keep`.
    pub fn retain(&self, keep: &[Individual]) {
        let live: HashSet<&Term> = keep.iter().flat_map(|i| &i.terms).collect();
        self.cache.lock().expect("cache lock").retain(|t, _| live.contains(t));
    }
}

/// Summary of one generation's population after selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub median_fitness: f64,
    pub mean_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best: Individual,
    /// Entry 0 describes the initial population.
    pub history: Vec<GenerationStats>,
}

fn stats(generation: usize, pop: &[Individual], best_ever: f64) -> GenerationStats {
    let mut f: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
    f.sort_by(f64::total_cmp);
    let median = if f.len() % 2 == 1 { f[f.len() / 2] } else { 0.5 * (f[f.len() / 2 - 1] + f[f.len() / 2]) };
    let mean_length = pop.iter().map(|i| i.len() as f64).sum::<f64>() / pop.len() as f64;
    GenerationStats { generation, best_fitness: best_ever, median_fitness: median, mean_length }
}

/// Runs the search on a dataset.
pub fn evolve(data: &Dataset, cfg: &EvolutionConfig) -> Result<RunResult, ConfigError> {
    evolve_xy(&data.x, &data.y, cfg)
}

/// Runs the search on raw rows and targets.
///
/// Mutation within a generation runs in parallel; each individual draws
/// from its own stream, so the result is independent of thread count.
pub fn evolve_xy(rows: &[Vec<f64>], y: &[f64], cfg: &EvolutionConfig) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    let d = rows.first().map(Vec::len).unwrap_or(0);
    if d == 0 || rows.len() != y.len() {
        return Err(ConfigError::Invalid("dataset must be non-empty with matching targets".into()));
    }
    let eval = Evaluator::new(rows, y, cfg.fit);

    let mut pop: Vec<Individual> = (0..cfg.pop)
        .into_par_iter()
        .map(|i| random_individual(d, cfg, &eval, &mut stream(cfg.seed, STREAM_INIT, 0, i as u64)))
        .collect();
    let mut best = pop[selection::best_index(&pop).expect("pop > 0")].clone();
    let mut history = vec![stats(0, &pop, best.fitness)];

    for gen in 1..=cfg.generations {
        let children: Vec<Individual> = pop
            .par_iter()
            .enumerate()
            .map(|(i, ind)| {
                let mut rng = stream(cfg.seed, STREAM_MUTATE, gen as u64, i as u64);
                match mutate(ind, cfg, &eval, &mut rng) {
                    Ok((child, _)) => child,
                    Err(_) => ind.clone(),
                }
            })
            .collect();
        if let Some(i) = selection::best_index(&children) {
            if children[i].fitness < best.fitness {
                best = children[i].clone();
            }
        }
        let mut rng = stream(cfg.seed, STREAM_SELECT, gen as u64, 0);
        pop = select(pop, children, cfg.pop, cfg.selection, &mut rng);
        eval.retain(&pop);
        history.push(stats(gen, &pop, best.fitness));
    }
    Ok(RunResult { best, history })
}
