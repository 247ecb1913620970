//! Disentanglement of the transformed features of an expression.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Individual, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("need at least two non-constant features, got {0}")]
    TooFewFeatures(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    /// Mean absolute pairwise Pearson correlation, in `[0, 1]`.
    pub value: f64,
    pub pairs: usize,
}

/// Centered copy of `col` and its norm, or `None` for a constant column.
fn centered(col: &[f64]) -> Option<(Vec<f64>, f64)> {
    if col.len() < 2 {
        return None;
    }
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // Spread at rounding level of the values counts as constant.
    if !norm.is_finite() || norm <= 1e-12 * scale * (col.len() as f64).sqrt() {
        return None;
    }
    Some((c, norm))
}

/// Mean of `|pearson(Z_a, Z_b)|` over unordered pairs of non-constant columns.
///
/// `columns` holds one feature per entry, each of length n.
pub fn disentanglement(columns: &[Vec<f64>]) -> Result<CorrelationReport, MetricsError> {
    let live: Vec<(Vec<f64>, f64)> = columns.iter().filter_map(|c| centered(c)).collect();
    let m = live.len();
    if m < 2 {
        return Err(MetricsError::TooFewFeatures(m));
    }
    let mut sum = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            let dot: f64 = live[a].0.iter().zip(&live[b].0).map(|(x, y)| x * y).sum();
            sum += (dot / (live[a].1 * live[b].1)).abs().min(1.0);
        }
    }
    let pairs = m * (m - 1) / 2;
    Ok(CorrelationReport { value: sum / pairs as f64, pairs })
}

/// Disentanglement of the distinct valid terms of `ind` evaluated on `rows`.
pub fn expression_disentanglement(ind: &Individual, rows: &[Vec<f64>]) -> Result<CorrelationReport, MetricsError> {
    let mut seen: Vec<&Term> = Vec::new();
    let mut columns = Vec::new();
    for term in &ind.terms {
        if seen.contains(&term) {
            continue;
        }
        seen.push(term);
        if let Some(col) = term.column(rows) {
            columns.push(col);
        }
    }
    disentanglement(&columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_and_opposite_columns() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        assert!((disentanglement(&[a.clone(), a.clone()]).unwrap().value - 1.0).abs() < 1e-15);
        let r = disentanglement(&[a, vec![4.0, 3.0, 2.0, 1.0]]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.pairs, 1);
    }

    #[test]
    fn independent_columns_are_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
        assert!(disentanglement(&[a, b]).unwrap().value < 0.05);
    }

    #[test]
    fn constant_columns_are_dropped() {
        let r = disentanglement(&[vec![1.0, 2.0, 4.0], vec![5.0; 3], vec![2.0, 1.0, 0.5]]).unwrap();
        assert_eq!(r.pairs, 1);
        assert_eq!(disentanglement(&[vec![1.0, 2.0], vec![3.0, 3.0]]), Err(MetricsError::TooFewFeatures(1)));
    }

    #[test]
    fn expression_ignores_duplicate_and_invalid_terms() {
        use crate::transforms::TransformId::*;
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 - 1.0, (i * i) as f64]).collect();
        let t = |s: Vec<i32>, f| Term::new(s, f);
        let ind = Individual {
            terms: vec![t(vec![1, 0], Id), t(vec![1, 0], Id), t(vec![0, 1], Id), t(vec![1, 0], Log)],
            weights: vec![1.0, 1.0, 1.0, 0.0],
            intercept: 0.0,
            fitness: 0.0,
        };
        let r = expression_disentanglement(&ind, &rows).unwrap();
        assert_eq!(r.pairs, 1);
    }

    proptest! {
        #[test]
        fn affine_invariant_and_bounded(
            seed in any::<u64>(), m in 2usize..6, a in 0usize..6, scale in 0.5f64..10.0, shift in -10.0f64..10.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|_| base.iter().map(|b| b * rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let r = disentanglement(&cols).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.value));
            let mut moved = cols.clone();
            let a = a % m;
            moved[a] = moved[a].iter().map(|v| scale * v + shift).collect();
            prop_assert!((disentanglement(&moved).unwrap().value - r.value).abs() <= 1e-12);
            let mut perm = cols.clone();
            perm.reverse();
            prop_assert!((disentanglement(&perm).unwrap().value - r.value).abs() <= 1e-12);
        }
    }
}
