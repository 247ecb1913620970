//! Least-squares adjustment of the affine weights of an expression.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{feature_matrix, Individual, Term};

/// Ridge strength used when the design matrix is rank deficient.
pub const FALLBACK_LAMBDA: f64 = 1e-8;

/// Diagonal entries of R below this (on unit-norm columns) mark rank deficiency.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearModel {
    Ols,
    Ridge,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("lambda must be finite and non-negative, got {0}")]
    NegativeLambda(f64),
    #[error("ridge requires lambda > 0")]
    ZeroRidgeLambda,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("rmse of an empty vector")]
    Empty,
}

/// Linear model used to adjust the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model: LinearModel,
    pub lambda: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { model: LinearModel::Ols, lambda: 0.0 }
    }
}

impl FitConfig {
    pub fn ols() -> Self {
        Self::default()
    }

    pub fn ridge(lambda: f64) -> Result<Self, FitError> {
        let cfg = Self { model: LinearModel::Ridge, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(FitError::NegativeLambda(self.lambda));
        }
        if self.model == LinearModel::Ridge && self.lambda == 0.0 {
            return Err(FitError::ZeroRidgeLambda);
        }
        Ok(())
    }
}

/// Intercept and one weight per input column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

/// Root mean squared error.
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64, FitError> {
    if y.len() != yhat.len() {
        return Err(FitError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(FitError::Empty);
    }
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

/// Fits the weights of `ind` on `(rows, y)`.
///
/// Terms that fail on any row keep weight 0 and do not enter the system.
/// If no term is valid the fitness is `+inf`.
pub fn fit(ind: &Individual, rows: &[Vec<f64>], y: &[f64], cfg: &FitConfig) -> Individual {
    match feature_matrix(&ind.terms, rows) {
        Ok((columns, mask)) => {
            let mut it = columns.iter();
            let cols: Vec<Option<&[f64]>> =
                mask.0.iter().map(|&ok| if ok { it.next().map(Vec::as_slice) } else { None }).collect();
            fit_columns(&ind.terms, &cols, y, cfg)
        }
        Err(_) => invalid(&ind.terms),
    }
}

/// Fits given precomputed columns, `None` marking an invalid term.
pub fn fit_columns(terms: &[Term], cols: &[Option<&[f64]>], y: &[f64], cfg: &FitConfig) -> Individual {
    debug_assert_eq!(terms.len(), cols.len());
    let valid: Vec<&[f64]> = cols.iter().flatten().copied().collect();
    if valid.is_empty() || y.is_empty() {
        return invalid(terms);
    }
    let sol = solve(&valid, y, cfg);
    let mut yhat = vec![sol.intercept; y.len()];
    for (col, &w) in valid.iter().zip(&sol.weights) {
        if w != 0.0 {
            for (p, z) in yhat.iter_mut().zip(col.iter()) {
                *p += w * z;
            }
        }
    }
    let fitness = rmse(y, &yhat).ok().filter(|f| f.is_finite()).unwrap_or(f64::INFINITY);

    let mut it = sol.weights.into_iter();
    let weights = cols.iter().map(|c| if c.is_some() { it.next().unwrap_or(0.0) } else { 0.0 }).collect();
    Individual { terms: terms.to_vec(), weights, intercept: sol.intercept, fitness }
}

fn invalid(terms: &[Term]) -> Individual {
    Individual { terms: terms.to_vec(), weights: vec![0.0; terms.len()], intercept: 0.0, fitness: f64::INFINITY }
}

/// Euclidean norm computed without intermediate overflow.
fn scaled_norm(v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    max * v.iter().map(|x| (x / max) * (x / max)).sum::<f64>().sqrt()
}

/// Solves `min ||y - w0 - Z w||^2 (+ lambda ||w||^2)` for columns `Z`.
///
/// Columns are scaled to unit norm before a Householder QR of `[1 | Z]`.
/// If R has a negligible diagonal entry the system is re-solved as a ridge
/// problem with [`FALLBACK_LAMBDA`] on the scaled columns, refined by a few
/// iterated-Tikhonov steps so the residual approaches the least-squares
/// one. The intercept is never penalized. All-zero columns get weight 0.
pub fn solve(columns: &[&[f64]], y: &[f64], cfg: &FitConfig) -> LinearSolution {
    let n = y.len();
    let scales: Vec<f64> = columns.iter().map(|c| scaled_norm(c)).collect();
    let active: Vec<usize> = (0..columns.len()).filter(|&j| scales[j] > 0.0 && scales[j].is_finite()).collect();

    let sqrt_n = (n as f64).sqrt();
    let mut design: Vec<Vec<f64>> = Vec::with_capacity(active.len() + 1);
    design.push(vec![1.0 / sqrt_n; n]);
    for &j in &active {
        let s = scales[j];
        design.push(columns[j].iter().map(|z| z / s).collect());
    }

    let coef = match cfg.model {
        LinearModel::Ridge if cfg.lambda > 0.0 => {
            let pen: Vec<f64> = active.iter().map(|&j| cfg.lambda.sqrt() / scales[j]).collect();
            Qr::new(augment(&design, &pen)).solve(&padded(y, pen.len()))
        }
        _ => {
            let qr = Qr::new(design);
            if qr.full_rank() {
                qr.solve(y)
            } else {
                let pen = vec![FALLBACK_LAMBDA.sqrt(); active.len()];
                let qr = Qr::new(augment(&qr.into_columns(), &pen));
                let mut rhs = padded(y, pen.len());
                let mut coef = qr.solve(&rhs);
                for _ in 0..REFINE_STEPS {
                    for (k, p) in pen.iter().enumerate() {
                        rhs[n + k] = p * coef[k + 1];
                    }
                    coef = qr.solve(&rhs);
                }
                coef
            }
        }
    };

    let mut weights = vec![0.0; columns.len()];
    for (k, &j) in active.iter().enumerate() {
        weights[j] = coef[k + 1] / scales[j];
    }
    LinearSolution { intercept: coef[0] / sqrt_n, weights }
}

/// Iterated-Tikhonov steps applied after a rank-deficiency fallback.
const REFINE_STEPS: usize = 4;

/// Appends one penalty row per non-intercept column.
fn augment(design: &[Vec<f64>], pen: &[f64]) -> Vec<Vec<f64>> {
    let extra = pen.len();
    design
        .iter()
        .enumerate()
        .map(|(c, col)| {
            let mut out = Vec::with_capacity(col.len() + extra);
            out.extend_from_slice(col);
            out.extend((0..extra).map(|r| if c >= 1 && r == c - 1 { pen[r] } else { 0.0 }));
            out
        })
        .collect()
}

fn padded(y: &[f64], extra: usize) -> Vec<f64> {
    let mut out = y.to_vec();
    out.resize(y.len() + extra, 0.0);
    out
}

/// Householder QR of a column-major matrix.
///
/// `factored[k][k..]` holds the k-th Householder vector, `factored[j][..k]`
/// for `j > k` the strict upper triangle of R, `diag` its diagonal.
struct Qr {
    original: Vec<Vec<f64>>,
    factored: Vec<Vec<f64>>,
    vtv: Vec<f64>,
    diag: Vec<f64>,
    rows: usize,
}

impl Qr {
    fn new(columns: Vec<Vec<f64>>) -> Self {
        let p = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut a = columns.clone();
        let mut vtv = vec![0.0; p];
        let mut diag = vec![0.0; p];
        for k in 0..p.min(rows) {
            let norm = scaled_norm(&a[k][k..]);
            if norm <= RANK_TOL {
                continue;
            }
            let alpha = if a[k][k] > 0.0 { -norm } else { norm };
            a[k][k] -= alpha;
            let s: f64 = a[k][k..].iter().map(|x| x * x).sum();
            let (head, tail) = a.split_at_mut(k + 1);
            let v = &head[k][k..];
            for col in tail.iter_mut() {
                reflect(v, s, &mut col[k..]);
            }
            vtv[k] = s;
            diag[k] = alpha;
        }
        Self { original: columns, factored: a, vtv, diag, rows }
    }

    fn full_rank(&self) -> bool {
        self.rows >= self.diag.len() && self.diag.iter().all(|d| d.abs() > RANK_TOL)
    }

    fn into_columns(self) -> Vec<Vec<f64>> {
        self.original
    }

    /// Least-squares coefficients; entries for negligible pivots are 0.
    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let p = self.diag.len();
        let mut b = y.to_vec();
        for k in 0..p.min(self.rows) {
            if self.vtv[k] > 0.0 {
                reflect(&self.factored[k][k..], self.vtv[k], &mut b[k..]);
            }
        }
        let mut coef = vec![0.0; p];
        for k in (0..p.min(self.rows)).rev() {
            if self.diag[k].abs() <= RANK_TOL {
                continue;
            }
            let mut s = b[k];
            for (j, c) in coef.iter().enumerate().skip(k + 1) {
                s -= self.factored[j][k] * c;
            }
            coef[k] = s / self.diag[k];
        }
        coef
    }
}

/// Applies the reflection `I - 2 v v^T / vtv` to `x`.
fn reflect(v: &[f64], vtv: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vtv;
    for (c, vi) in x.iter_mut().zip(v) {
        *c -= f * vi;
    }
}
