//! Greedy breadth-first search over IT expressions, seeded with a linear model.
//!
//! Each node proposes candidate terms built from its own terms, fits every
//! subset of candidates added to it, and keeps the improving subsets that
//! are not contained in another improving subset.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Individual, Term};
use crate::fitting::{fit, FitConfig};
use crate::transforms::TransformSet;

/// Largest candidate count for which every subset is enumerated.
pub const POWER_SET_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymTreeError {
    #[error("{0} candidates exceed the power-set limit")]
    TooManyCandidates(usize),
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("dataset must be non-empty with matching targets")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymTreeConfig {
    /// Terms with `|weight|` below this are pruned after each fit.
    pub threshold: f64,
    pub max_iter: usize,
    pub time_budget: Duration,
    pub fit: FitConfig,
}

impl Default for SymTreeConfig {
    fn default() -> Self {
        Self { threshold: 1e-4, max_iter: 3, time_budget: Duration::from_secs(3600), fit: FitConfig::ols() }
    }
}

impl SymTreeConfig {
    pub fn validate(&self) -> Result<(), SymTreeError> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(SymTreeError::InvalidThreshold(self.threshold));
        }
        Ok(())
    }
}

/// New terms derived from `ind`: interactions of every ordered pair of its
/// terms (keeping the first term's function) and every function swap.
///
/// All-zero strengths, existing terms and repeats are removed.
pub fn candidate_terms(ind: &Individual, funcs: &TransformSet) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    let push = |t: Term, out: &mut Vec<Term>| {
        if !t.is_constant() && !ind.terms.contains(&t) && !out.contains(&t) {
            out.push(t);
        }
    };
    for sign in [1, -1] {
        for a in &ind.terms {
            for b in &ind.terms {
                let s = a.strengths.iter().zip(&b.strengths).map(|(x, y)| x + sign * y).collect();
                push(Term::new(s, a.func), &mut out);
            }
        }
    }
    for a in &ind.terms {
        for &f in funcs.ids() {
            if f != a.func {
                push(Term::new(a.strengths.clone(), f), &mut out);
            }
        }
    }
    out
}

/// Drops terms with `|w| < threshold` and refits. Returns `None` when the
/// pruned expression would be empty or nothing was pruned.
fn prune(ind: &Individual, rows: &[Vec<f64>], y: &[f64], cfg: &SymTreeConfig) -> Option<Individual> {
    let kept: Vec<Term> =
        ind.terms.iter().zip(&ind.weights).filter(|(_, w)| w.abs() >= cfg.threshold).map(|(t, _)| t.clone()).collect();
    if kept.is_empty() || kept.len() == ind.terms.len() {
        return None;
    }
    Some(fit(&Individual::new(kept), rows, y, &cfg.fit))
}

/// Prunes `child`, keeping the pruned form only if it still beats `parent`.
fn finish(child: Individual, parent: f64, rows: &[Vec<f64>], y: &[f64], cfg: &SymTreeConfig) -> Individual {
    match prune(&child, rows, y, cfg) {
        Some(p) if p.fitness < parent => p,
        _ => child,
    }
}

fn with_terms(ind: &Individual, extra: impl IntoIterator<Item = Term>) -> Individual {
    let mut terms = ind.terms.clone();
    terms.extend(extra);
    Individual::new(terms)
}

/// Children of `ind` from the power set of its candidates.
pub fn expand(
    ind: &Individual,
    rows: &[Vec<f64>],
    y: &[f64],
    cfg: &SymTreeConfig,
    funcs: &TransformSet,
) -> Result<Vec<Individual>, SymTreeError> {
    let cands = candidate_terms(ind, funcs);
    if cands.len() > POWER_SET_LIMIT {
        return Err(SymTreeError::TooManyCandidates(cands.len()));
    }
    let subsets: Vec<u32> = (1..(1u32 << cands.len())).collect();
    let improving: Vec<(u32, Individual)> = subsets
        .into_par_iter()
        .filter_map(|mask| {
            let chosen = (0..cands.len()).filter(|&c| mask & (1 << c) != 0).map(|c| cands[c].clone());
            let child = fit(&with_terms(ind, chosen), rows, y, &cfg.fit);
            (child.fitness < ind.fitness).then_some((mask, child))
        })
        .collect();
    let maximal: Vec<&(u32, Individual)> =
        improving.iter().filter(|(m, _)| !improving.iter().any(|(o, _)| o != m && o & m == *m)).collect();
    Ok(maximal.into_iter().map(|(_, child)| finish(child.clone(), ind.fitness, rows, y, cfg)).collect())
}

/// Single child built by adding improving candidates one at a time, best first.
pub fn expand_greedy(
    ind: &Individual,
    rows: &[Vec<f64>],
    y: &[f64],
    cfg: &SymTreeConfig,
    funcs: &TransformSet,
) -> Vec<Individual> {
    let cands = candidate_terms(ind, funcs);
    let mut singles: Vec<(usize, f64)> = cands
        .par_iter()
        .enumerate()
        .map(|(c, t)| (c, fit(&with_terms(ind, [t.clone()]), rows, y, &cfg.fit).fitness))
        .filter(|&(_, f)| f < ind.fitness)
        .collect();
    singles.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut current = ind.clone();
    for (c, _) in singles {
        let next = fit(&with_terms(&current, [cands[c].clone()]), rows, y, &cfg.fit);
        if next.fitness < current.fitness {
            current = next;
        }
    }
    if current.fitness < ind.fitness {
        vec![finish(current, ind.fitness, rows, y, cfg)]
    } else {
        Vec::new()
    }
}

/// Breadth-first search for at most `max_iter` levels or `time_budget`.
///
/// Returns the best individual fitted along the way.
pub fn symtree_search(
    rows: &[Vec<f64>],
    y: &[f64],
    cfg: &SymTreeConfig,
    funcs: &TransformSet,
) -> Result<Individual, SymTreeError> {
    cfg.validate()?;
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 || rows.len() != y.len() {
        return Err(SymTreeError::EmptyDataset);
    }
    let start = Instant::now();
    let root = fit(&Individual::linear(d), rows, y, &cfg.fit);
    let mut best = root.clone();
    let mut level = vec![root];
    for _ in 0..cfg.max_iter {
        let mut next = Vec::new();
        for node in &level {
            if start.elapsed() >= cfg.time_budget {
                return Ok(best);
            }
            let children = match expand(node, rows, y, cfg, funcs) {
                Ok(c) => c,
                Err(_) => expand_greedy(node, rows, y, cfg, funcs),
            };
            for child in children {
                if child.fitness < best.fitness {
                    best = child.clone();
                }
                next.push(child);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(best)
}
