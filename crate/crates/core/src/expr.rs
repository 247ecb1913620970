//! Interaction-Transformation expressions.
//!
//! An expression is an affine combination `w0 + sum_i w_i * t_i(p_i(x))`,
//! where each `p_i` is a monomial with integer exponents (the term's
//! strengths) and `t_i` a univariate transformation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transforms::{DomainError, TransformId};

/// Exponents up to this magnitude are evaluated by repeated multiplication.
const SMALL_POWER: i32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("division by zero: variable {var} is 0 with negative strength")]
    DivisionByZero { var: usize },
    #[error("interaction value is not finite")]
    NonFiniteInteraction,
    #[error("every term failed to evaluate on the training data")]
    AllTermsInvalid,
    #[error("prediction failed on row {row}")]
    PredictionError { row: usize },
    #[error("expected {expected} values per row, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("individual is not fitted")]
    NotFitted,
}

/// One transformed interaction: a strength per variable plus a function id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub strengths: Vec<i32>,
    pub func: TransformId,
}

impl Term {
    pub fn new(strengths: Vec<i32>, func: TransformId) -> Self {
        Self { strengths, func }
    }

    /// The linear term `x_var` under the identity.
    pub fn linear(dim: usize, var: usize) -> Self {
        let mut strengths = vec![0; dim];
        strengths[var] = 1;
        Self::new(strengths, TransformId::Id)
    }

    pub fn dim(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_constant(&self) -> bool {
        self.strengths.iter().all(|&k| k == 0)
    }

    /// Evaluates the monomial `prod x_i^k_i`, skipping zero strengths.
    pub fn interaction(&self, x: &[f64]) -> Result<f64, ExprError> {
        if x.len() != self.strengths.len() {
            return Err(ExprError::DimensionMismatch { expected: self.strengths.len(), got: x.len() });
        }
        let mut acc = 1.0;
        for (var, (&k, &xi)) in self.strengths.iter().zip(x).enumerate() {
            if k == 0 {
                continue;
            }
            if xi == 0.0 && k < 0 {
                return Err(ExprError::DivisionByZero { var });
            }
            acc *= int_pow(xi, k);
        }
        if acc.is_finite() {
            Ok(acc)
        } else {
            Err(ExprError::NonFiniteInteraction)
        }
    }

    /// Evaluates `t(p(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        let p = self.interaction(x)?;
        Ok(self.func.apply(p)?)
    }

    /// Evaluates the term over every row; `None` if any row fails.
    pub fn column(&self, rows: &[Vec<f64>]) -> Option<Vec<f64>> {
        rows.iter().map(|row| self.eval(row).ok()).collect()
    }

    fn render_interaction(&self, names: &[String]) -> String {
        let factors: Vec<String> = self
            .strengths
            .iter()
            .zip(names)
            .filter(|(&k, _)| k != 0)
            .map(|(&k, name)| if k == 1 { name.clone() } else { format!("{name}^{k}") })
            .collect();
        if factors.is_empty() {
            "1".to_string()
        } else {
            factors.join("·")
        }
    }
}

/// `x^k` for integer `k`; exact repeated multiplication for small `|k|`.
pub(crate) fn int_pow(x: f64, k: i32) -> f64 {
    if k.abs() > SMALL_POWER {
        return x.powf(f64::from(k));
    }
    let mut acc = 1.0;
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// Free-function form of [`Term::eval`].
pub fn eval_term(term: &Term, x: &[f64]) -> Result<f64, ExprError> {
    term.eval(x)
}

/// One flag per term: true iff the term evaluated on every training row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityMask(pub Vec<bool>);

impl ValidityMask {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.0.iter().filter(|&&v| v).count()
    }

    pub fn any_valid(&self) -> bool {
        self.0.iter().any(|&v| v)
    }
}

/// Evaluated features of the valid terms, stored column by column.
pub type Columns = Vec<Vec<f64>>;

/// Evaluates each term over `rows`. Columns of invalid terms are left out
/// of `Z`; the mask records which terms survived, in term order.
pub fn feature_matrix(terms: &[Term], rows: &[Vec<f64>]) -> Result<(Columns, ValidityMask), ExprError> {
    let mut columns = Vec::with_capacity(terms.len());
    let mut mask = Vec::with_capacity(terms.len());
    for term in terms {
        match term.column(rows) {
            Some(col) => {
                columns.push(col);
                mask.push(true);
            }
            None => mask.push(false),
        }
    }
    if columns.is_empty() {
        return Err(ExprError::AllTermsInvalid);
    }
    Ok((columns, ValidityMask(mask)))
}

/// An IT expression together with its fitted coefficients and fitness.
///
/// `weights` is empty until the individual is fitted. A fitness of
/// `+inf` marks an individual none of whose terms could be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub terms: Vec<Term>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub fitness: f64,
}

impl Individual {
    /// An unfitted individual.
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms, weights: Vec::new(), intercept: 0.0, fitness: f64::INFINITY }
    }

    /// The linear model `w0 + sum_i w_i x_i`, unfitted.
    pub fn linear(dim: usize) -> Self {
        Self::new((0..dim).map(|var| Term::linear(dim, var)).collect())
    }

    pub fn is_fitted(&self) -> bool {
        !self.terms.is_empty() && self.weights.len() == self.terms.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(Term::dim)
    }

    /// Predicts a single sample. Zero-weight terms are skipped; with
    /// `protected`, a term that fails contributes 0 instead of failing.
    pub fn predict_row(&self, x: &[f64], protected: bool) -> Result<f64, ExprError> {
        if !self.is_fitted() {
            return Err(ExprError::NotFitted);
        }
        let mut acc = self.intercept;
        for (term, &w) in self.terms.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            match term.eval(x) {
                Ok(v) => acc += w * v,
                Err(e @ ExprError::DimensionMismatch { .. }) => return Err(e),
                Err(e) if !protected => return Err(e),
                Err(_) => {}
            }
        }
        if acc.is_finite() || protected {
            Ok(if acc.is_finite() { acc } else { self.intercept })
        } else {
            Err(ExprError::NonFiniteInteraction)
        }
    }

    /// Human-readable form, e.g. `0.000 + 3.500·sin(x1^2·x2)`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = format!("{:.3}", self.intercept);
        for (i, term) in self.terms.iter().enumerate() {
            let w = self.weights.get(i).copied().unwrap_or(0.0);
            let _ = write!(out, " + {:.3}·{}({})", w, term.func, term.render_interaction(names));
        }
        out
    }

    pub fn to_model(&self) -> ModelJson {
        ModelJson {
            terms: self.terms.iter().map(|t| t.strengths.clone()).collect(),
            funs: self.terms.iter().map(|t| t.func).collect(),
            weights: self.weights.clone(),
            intercept: self.intercept,
            fitness: self.fitness.is_finite().then_some(self.fitness),
        }
    }
}

/// Predicts every row of `rows`.
///
/// In unprotected mode the first failing row aborts with
/// [`ExprError::PredictionError`]; in protected mode failing terms
/// contribute 0 to the affected rows.
pub fn predict(ind: &Individual, rows: &[Vec<f64>], protected: bool) -> Result<Vec<f64>, ExprError> {
    if !ind.is_fitted() {
        return Err(ExprError::NotFitted);
    }
    rows.iter()
        .enumerate()
        .map(|(row, x)| {
            ind.predict_row(x, protected).map_err(|e| match e {
                ExprError::DimensionMismatch { .. } => e,
                _ => ExprError::PredictionError { row },
            })
        })
        .collect()
}

/// Free-function form of [`Individual::render`].
pub fn render(ind: &Individual, names: &[String]) -> String {
    ind.render(names)
}

/// Serialized model layout: parallel `terms` / `funs` / `weights` lists.
///
/// Non-finite fitness is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub terms: Vec<Vec<i32>>,
    pub funs: Vec<TransformId>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub fitness: Option<f64>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model has {terms} terms but {funs} functions")]
    FunsLength { terms: usize, funs: usize },
    #[error("model has {terms} terms but {weights} weights")]
    WeightsLength { terms: usize, weights: usize },
    #[error("model has no terms")]
    Empty,
    #[error("terms have inconsistent dimensions")]
    RaggedTerms,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TryFrom<ModelJson> for Individual {
    type Error = ModelError;

    fn try_from(m: ModelJson) -> Result<Self, Self::Error> {
        if m.terms.is_empty() {
            return Err(ModelError::Empty);
        }
        if m.terms.len() != m.funs.len() {
            return Err(ModelError::FunsLength { terms: m.terms.len(), funs: m.funs.len() });
        }
        if m.terms.len() != m.weights.len() {
            return Err(ModelError::WeightsLength { terms: m.terms.len(), weights: m.weights.len() });
        }
        let dim = m.terms[0].len();
        if m.terms.iter().any(|t| t.len() != dim) {
            return Err(ModelError::RaggedTerms);
        }
        let terms = m.terms.into_iter().zip(m.funs).map(|(s, f)| Term::new(s, f)).collect();
        Ok(Individual {
            terms,
            weights: m.weights,
            intercept: m.intercept,
            fitness: m.fitness.unwrap_or(f64::INFINITY),
        })
    }
}

impl Individual {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model()).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let model: ModelJson = serde_json::from_str(s)?;
        model.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TransformId::*;

    fn sin_log_model() -> Individual {
        Individual {
            terms: vec![Term::new(vec![2, 1], Sin), Term::new(vec![-1, 3], Log)],
            weights: vec![3.5, 5.0],
            intercept: 0.0,
            fitness: f64::INFINITY,
        }
    }

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn eval_term_examples() {
        let t = Term::new(vec![2, 1], Sin);
        assert!((t.eval(&[1.0, 1.0]).unwrap() - 1f64.sin()).abs() < 1e-15);
        assert_eq!(Term::new(vec![0, 0], Id).eval(&[5.0, 9.0]).unwrap(), 1.0);
        assert!(matches!(Term::new(vec![-1, 3], Log).eval(&[0.0, 2.0]), Err(ExprError::DivisionByZero { var: 0 })));
    }

    #[test]
    fn zero_base_positive_power_is_valid() {
        assert_eq!(Term::new(vec![3, 0], Id).eval(&[0.0, 4.0]).unwrap(), 0.0);
        assert_eq!(Term::new(vec![0, 2], Id).eval(&[0.0, 3.0]).unwrap(), 9.0);
    }

    #[test]
    fn large_powers_fall_back_to_powf() {
        assert_eq!(int_pow(2.0, 10), 1024.0);
        assert_eq!(int_pow(2.0, -9), 1.0 / 512.0);
        assert_eq!(int_pow(-3.0, 3), -27.0);
        assert_eq!(int_pow(-2.0, 11), -2048.0);
    }

    #[test]
    fn overflowing_interaction_is_error() {
        let t = Term::new(vec![8, 8], Id);
        assert_eq!(t.eval(&[1e30, 1e30]), Err(ExprError::NonFiniteInteraction));
    }

    #[test]
    fn feature_matrix_examples() {
        let terms = vec![Term::new(vec![1, 0], Id), Term::new(vec![0, 1], Id)];
        let rows = vec![vec![2.0, 3.0], vec![4.0, 5.0]];
        let (z, mask) = feature_matrix(&terms, &rows).unwrap();
        assert_eq!(z, vec![vec![2.0, 4.0], vec![3.0, 5.0]]);
        assert_eq!(mask, ValidityMask(vec![true, true]));

        let err = feature_matrix(&[Term::new(vec![-1, 0], Id)], &[vec![0.0, 1.0]]);
        assert_eq!(err, Err(ExprError::AllTermsInvalid));

        let rows = vec![vec![1.0, 1.0], vec![0.1, 0.2]];
        let (z, mask) = feature_matrix(&sin_log_model().terms, &rows).unwrap();
        assert_eq!(mask.0, vec![true, true]);
        let expected = [[1f64.sin(), 0.0], [0.002f64.sin(), 0.08f64.ln()]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((z[c][r] - expected[r][c]).abs() < 1e-14, "Z[{r}][{c}]");
            }
        }
    }

    #[test]
    fn feature_matrix_drops_invalid_columns() {
        let terms = vec![Term::new(vec![1], Log), Term::new(vec![1], Id), Term::new(vec![-1], Id)];
        let rows = vec![vec![-1.0], vec![0.0], vec![2.0]];
        let (z, mask) = feature_matrix(&terms, &rows).unwrap();
        assert_eq!(mask.0, vec![false, true, false]);
        assert_eq!(z, vec![vec![-1.0, 0.0, 2.0]]);
    }

    #[test]
    fn predict_examples() {
        let ind = Individual { terms: vec![Term::new(vec![1], Id)], weights: vec![2.0], intercept: 3.0, fitness: 0.0 };
        assert_eq!(predict(&ind, &[vec![5.0]], false).unwrap(), vec![13.0]);

        let out = predict(&sin_log_model(), &[vec![1.0, 1.0]], false).unwrap();
        assert!((out[0] - 3.5 * 1f64.sin()).abs() < 1e-14);
        assert!((out[0] - 2.945).abs() < 1e-3);

        let ind =
            Individual { terms: vec![Term::new(vec![-1], Log)], weights: vec![1.5], intercept: 0.25, fitness: 0.0 };
        assert_eq!(predict(&ind, &[vec![0.0]], true).unwrap(), vec![0.25]);
        assert_eq!(predict(&ind, &[vec![2.0], vec![0.0]], false), Err(ExprError::PredictionError { row: 1 }));
    }

    #[test]
    fn predict_requires_fitted() {
        let ind = Individual::new(vec![Term::new(vec![1], Id)]);
        assert_eq!(predict(&ind, &[vec![1.0]], true), Err(ExprError::NotFitted));
    }

    #[test]
    fn render_examples() {
        assert_eq!(sin_log_model().render(&names(2)), "0.000 + 3.500·sin(x1^2·x2) + 5.000·log(x1^-1·x2^3)");
        let ind =
            Individual { terms: vec![Term::new(vec![0, 0], Id)], weights: vec![1.0], intercept: 0.0, fitness: 0.0 };
        assert_eq!(ind.render(&names(2)), "0.000 + 1.000·id(1)");
    }

    #[test]
    fn model_json_layout() {
        let mut ind = sin_log_model();
        ind.fitness = 0.5;
        let v: serde_json::Value = serde_json::from_str(&ind.to_json()).unwrap();
        assert_eq!(v["terms"], serde_json::json!([[2, 1], [-1, 3]]));
        assert_eq!(v["funs"], serde_json::json!(["sin", "log"]));
        assert_eq!(v["weights"], serde_json::json!([3.5, 5.0]));
        assert_eq!(v["intercept"], serde_json::json!(0.0));
        assert_eq!(v["fitness"], serde_json::json!(0.5));
        assert_eq!(Individual::from_json(&ind.to_json()).unwrap(), ind);

        let inf = sin_log_model();
        let back = Individual::from_json(&inf.to_json()).unwrap();
        assert!(back.fitness.is_infinite());
    }

    #[test]
    fn model_json_rejects_mismatched_lengths() {
        let bad = r#"{"terms":[[1]],"funs":["id","sin"],"weights":[1.0],"intercept":0.0,"fitness":null}"#;
        assert!(matches!(Individual::from_json(bad), Err(ModelError::FunsLength { .. })));
    }
}
