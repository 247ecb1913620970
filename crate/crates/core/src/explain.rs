//! Closed-form partial derivatives, gradients and marginal-effect curves.
//!
//! For a term `w t(p(x))` with `p(x) = prod x_i^k_i` the derivative with
//! respect to `x_j` is `w t'(p(x)) k_j x_j^(k_j - 1) prod_{i != j} x_i^k_i`.
//! The reduced power is evaluated directly, so `x_j = 0` is only a problem
//! when `k_j < 1`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{int_pow, ExprError, Individual};
use crate::transforms::TransformId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error("partial derivative {j} is undefined: {reason}")]
    EvaluationError { j: usize, reason: String },
    #[error("marginal-effect grid is empty")]
    EmptyGrid,
    #[error("marginal effect is undefined at {g}")]
    UndefinedAt { g: f64 },
    #[error("variable {j} out of range for dimension {d}")]
    VariableOutOfRange { j: usize, d: usize },
    #[error("term {term}: its factor free of variable {j} is undefined on every training row")]
    NoValidRows { term: usize, j: usize },
    #[error("individual is not fitted")]
    NotFitted,
}

/// One term of a partial derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffTerm {
    pub weight: f64,
    pub strengths: Vec<i32>,
    pub func: TransformId,
}

/// Symbolic `d f / d x_j`: only terms with nonzero weight and `k_j != 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialDerivative {
    pub var: usize,
    pub terms: Vec<DiffTerm>,
}

/// `prod_{i != j} x_i^k_i`.
fn free_factor(strengths: &[i32], j: usize, x: &[f64]) -> Result<f64, String> {
    let mut acc = 1.0;
    for (i, (&k, &xi)) in strengths.iter().zip(x).enumerate() {
        if i == j || k == 0 {
            continue;
        }
        if xi == 0.0 && k < 0 {
            return Err(format!("x{i} = 0 with negative strength"));
        }
        acc *= int_pow(xi, k);
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err("interaction overflow".into())
    }
}

/// `x^(k - 1)` for `k != 0`.
fn reduced_power(x: f64, k: i32) -> Result<f64, String> {
    if x == 0.0 && k < 1 {
        return Err("variable is 0 with strength below 1".into());
    }
    Ok(int_pow(x, k - 1))
}

impl DiffTerm {
    /// `t'(q x_j^k_j) k_j x_j^(k_j - 1) q` for a given x_j-free factor `q`.
    fn eval_with(&self, j: usize, xj: f64, q: f64) -> Result<f64, String> {
        let k = self.strengths[j];
        let p = q * int_pow(xj, k);
        if !p.is_finite() {
            return Err("interaction overflow".into());
        }
        let dt = self.func.derivative(p).map_err(|e| e.to_string())?;
        let v = self.weight * dt * f64::from(k) * reduced_power(xj, k)? * q;
        if v.is_finite() {
            Ok(v)
        } else {
            Err("derivative overflow".into())
        }
    }
}

impl PartialDerivative {
    pub fn eval(&self, x: &[f64]) -> Result<f64, ExplainError> {
        let j = self.var;
        let err = |reason: String| ExplainError::EvaluationError { j, reason };
        let mut acc = 0.0;
        for t in &self.terms {
            let q = free_factor(&t.strengths, j, x).map_err(err)?;
            acc += t.eval_with(j, x[j], q).map_err(err)?;
        }
        Ok(acc)
    }
}

/// The partial derivative of `ind` with respect to variable `j`.
pub fn partial(ind: &Individual, j: usize) -> PartialDerivative {
    let terms = ind
        .terms
        .iter()
        .zip(&ind.weights)
        .filter(|(t, &w)| w != 0.0 && t.strengths.get(j).is_some_and(|&k| k != 0))
        .map(|(t, &w)| DiffTerm { weight: w, strengths: t.strengths.clone(), func: t.func })
        .collect();
    PartialDerivative { var: j, terms }
}

fn check(ind: &Individual, j: usize) -> Result<usize, ExplainError> {
    if !ind.is_fitted() {
        return Err(ExplainError::NotFitted);
    }
    let d = ind.dim().unwrap_or(0);
    if j >= d {
        return Err(ExplainError::VariableOutOfRange { j, d });
    }
    Ok(d)
}

/// All partial derivatives at `x`.
pub fn gradient(ind: &Individual, x: &[f64]) -> Result<Vec<f64>, ExplainError> {
    let d = check(ind, 0)?;
    if x.len() != d {
        return Err(ExplainError::EvaluationError {
            j: 0,
            reason: ExprError::DimensionMismatch { expected: d, got: x.len() }.to_string(),
        });
    }
    (0..d).map(|j| partial(ind, j).eval(x)).collect()
}

/// Marginal effect of `x_j` at each grid point; `None` where undefined.
///
/// In every differentiated term, the factor free of `x_j` is replaced by
/// its mean over the training rows on which it evaluates.
pub fn marginal_effect_points(
    ind: &Individual,
    j: usize,
    train: &[Vec<f64>],
    grid: &[f64],
) -> Result<Vec<Option<f64>>, ExplainError> {
    check(ind, j)?;
    if grid.is_empty() {
        return Err(ExplainError::EmptyGrid);
    }
    let pd = partial(ind, j);
    let means = pd
        .terms
        .iter()
        .enumerate()
        .map(|(term, t)| {
            let vals: Vec<f64> = train.iter().filter_map(|row| free_factor(&t.strengths, j, row).ok()).collect();
            if vals.is_empty() {
                Err(ExplainError::NoValidRows { term, j })
            } else {
                Ok(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(grid
        .iter()
        .map(|&g| pd.terms.iter().zip(&means).try_fold(0.0, |acc, (t, &q)| t.eval_with(j, g, q).map(|v| acc + v)).ok())
        .collect())
}

/// Marginal-effect curve over `grid`; fails at the first undefined point.
pub fn marginal_effect(ind: &Individual, j: usize, train: &[Vec<f64>], grid: &[f64]) -> Result<Vec<f64>, ExplainError> {
    marginal_effect_points(ind, j, train, grid)?
        .into_iter()
        .zip(grid)
        .map(|(v, &g)| v.ok_or(ExplainError::UndefinedAt { g }))
        .collect()
}
