//! Dataset loading and cross-validation folds.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}, column {column}: not a number")]
    ParseError { line: usize, column: usize },
    #[error("line {line}, column {column}: non-finite value")]
    NonFiniteValue { line: usize, column: usize },
    #[error("target column '{0}' not found")]
    MissingTarget(String),
    #[error("line {line}: expected {expected} fields, got {got}")]
    Ragged { line: usize, expected: usize, got: usize },
    #[error("dataset needs a header, at least one row and at least two columns")]
    Empty,
    #[error("k must satisfy 2 <= k <= n (k = {k}, n = {n})")]
    InvalidK { k: usize, n: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rows of predictors plus one target per row. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub names: Vec<String>,
    pub target: String,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    /// The rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            names: self.names.clone(),
            target: self.target.clone(),
        }
    }
}

/// Loads a comma-separated file with one header row.
///
/// `target` names the response column; by default it is the last column.
pub fn load_csv(path: impl AsRef<Path>, target: Option<&str>) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path)?;
    read_csv(file, target)
}

pub fn read_csv<R: Read>(reader: R, target: Option<&str>) -> Result<Dataset, DataError> {
    let (header, table) = read_table(reader)?;
    if header.len() < 2 {
        return Err(DataError::Empty);
    }
    let t = match target {
        Some(name) => header.iter().position(|h| h == name).ok_or_else(|| DataError::MissingTarget(name.into()))?,
        None => header.len() - 1,
    };
    let mut x = Vec::with_capacity(table.len());
    let mut y = Vec::with_capacity(table.len());
    for mut row in table {
        y.push(row.remove(t));
        x.push(row);
    }
    let target = header[t].clone();
    let names = header.into_iter().enumerate().filter(|&(i, _)| i != t).map(|(_, h)| h).collect();
    Ok(Dataset { x, y, names, target })
}

/// Loads every column of a headed CSV file as a predictor.
pub fn load_features(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>), DataError> {
    read_table(std::fs::File::open(path)?)
}

/// Header and numeric rows of a CSV source; at least one row is required.
pub fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>), DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut line = 1;
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if let csv::ErrorKind::UnequalLengths { expected_len, len, .. } = e.kind() {
                    return Err(DataError::Ragged {
                        line: line + 1,
                        expected: *expected_len as usize,
                        got: *len as usize,
                    });
                }
                return Err(e.into());
            }
        }
        line += 1;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let column = c + 1;
                let v: f64 = field.parse().map_err(|_| DataError::ParseError { line, column })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(DataError::NonFiniteValue { line, column })
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if header.is_empty() || rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok((header, rows))
}

/// Assignment of each of `n` rows to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold index of every row.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random balanced assignment of `n` rows to `k` folds.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    if k < 2 || k > n {
        return Err(DataError::InvalidK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % k;
    }
    Ok(FoldPlan { k, seed, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL: &str = "a,b,t\n1,2,3\n4,5,6\n";

    #[test]
    fn load_examples() {
        let d = read_csv(SMALL.as_bytes(), None).unwrap();
        assert_eq!(d.x, vec![vec![1.0, 2.0], vec![4.0, 5.0]]);
        assert_eq!(d.y, vec![3.0, 6.0]);
        assert_eq!(d.names, vec!["a", "b"]);
        assert_eq!(d.target, "t");

        let d = read_csv(SMALL.as_bytes(), Some("a")).unwrap();
        assert_eq!(d.x, vec![vec![2.0, 3.0], vec![5.0, 6.0]]);
        assert_eq!(d.y, vec![1.0, 4.0]);
    }

    #[test]
    fn load_rejects_bad_cells() {
        let err = read_csv("a,t\n1,2\nNaN,3\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, DataError::NonFiniteValue { line: 3, column: 1 }), "{err}");
        let err = read_csv("a,t\n1,x\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, DataError::ParseError { line: 2, column: 2 }), "{err}");
        assert!(matches!(read_csv(SMALL.as_bytes(), Some("z")), Err(DataError::MissingTarget(_))));
        assert!(matches!(read_csv("a,t\n".as_bytes(), None), Err(DataError::Empty)));
        assert!(matches!(read_csv("a,t\n1,2,3\n".as_bytes(), None), Err(DataError::Ragged { .. })));
    }

    #[test]
    fn kfold_examples() {
        assert_eq!(kfold(10, 5, 1).unwrap().fold_sizes(), vec![2; 5]);
        let mut sizes = kfold(11, 5, 1).unwrap().fold_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
        assert_eq!(kfold(30, 5, 9).unwrap(), kfold(30, 5, 9).unwrap());
        assert!(matches!(kfold(3, 1, 0), Err(DataError::InvalidK { .. })));
        assert!(matches!(kfold(3, 4, 0), Err(DataError::InvalidK { .. })));
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let plan = kfold(n, k, seed).unwrap();
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut seen: Vec<usize> = (0..k).flat_map(|f| plan.test_indices(f)).collect();
            seen.sort();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            for f in 0..k {
                prop_assert_eq!(plan.train_indices(f).len() + plan.test_indices(f).len(), n);
            }
        }
    }
}
