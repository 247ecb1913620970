//! Univariate transformation functions and their first derivatives.
//!
//! Every function is total over the finite reals except where the math says
//! otherwise; those points surface as [`DomainError`] so the caller can
//! discard the term (training) or protect it (prediction).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest argument accepted by `exp`.
pub const EXP_LIMIT: f64 = 700.0;

/// Identifier of a transformation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformId {
    Id,
    Sin,
    Cos,
    Tanh,
    SqrtAbs,
    Log,
    Exp,
}

/// A transformation or its derivative could not be evaluated at `v`.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{id}({v}) is undefined")]
pub struct DomainError {
    pub id: TransformId,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformSetError {
    #[error("transformation set is empty")]
    Empty,
    #[error("duplicate transformation function '{0}'")]
    Duplicate(TransformId),
    #[error("unknown transformation function '{0}'")]
    Unknown(String),
}

impl TransformId {
    pub const ALL: [TransformId; 7] = [
        TransformId::Id,
        TransformId::Sin,
        TransformId::Cos,
        TransformId::Tanh,
        TransformId::SqrtAbs,
        TransformId::Log,
        TransformId::Exp,
    ];

    /// Lowercase name used in model files and config files.
    pub fn name(self) -> &'static str {
        match self {
            TransformId::Id => "id",
            TransformId::Sin => "sin",
            TransformId::Cos => "cos",
            TransformId::Tanh => "tanh",
            TransformId::SqrtAbs => "sqrt_abs",
            TransformId::Log => "log",
            TransformId::Exp => "exp",
        }
    }

    /// Evaluates the function at `v`.
    pub fn apply(self, v: f64) -> Result<f64, DomainError> {
        let err = DomainError { id: self, v };
        if !v.is_finite() {
            return Err(err);
        }
        let out = match self {
            TransformId::Id => v,
            TransformId::Sin => v.sin(),
            TransformId::Cos => v.cos(),
            TransformId::Tanh => v.tanh(),
            TransformId::SqrtAbs => v.abs().sqrt(),
            TransformId::Log => {
                if v <= 0.0 {
                    return Err(err);
                }
                v.ln()
            }
            TransformId::Exp => {
                if v > EXP_LIMIT {
                    return Err(err);
                }
                v.exp()
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(err)
        }
    }

    /// Evaluates the first derivative at `v`.
    pub fn derivative(self, v: f64) -> Result<f64, DomainError> {
        let err = DomainError { id: self, v };
        if !v.is_finite() {
            return Err(err);
        }
        let out = match self {
            TransformId::Id => 1.0,
            TransformId::Sin => v.cos(),
            TransformId::Cos => -v.sin(),
            TransformId::Tanh => {
                let t = v.tanh();
                1.0 - t * t
            }
            TransformId::SqrtAbs => {
                if v == 0.0 {
                    return Err(err);
                }
                v.signum() / (2.0 * v.abs().sqrt())
            }
            TransformId::Log => {
                if v <= 0.0 {
                    return Err(err);
                }
                1.0 / v
            }
            TransformId::Exp => {
                if v > EXP_LIMIT {
                    return Err(err);
                }
                v.exp()
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(err)
        }
    }
}

/// Free-function form of [`TransformId::apply`].
pub fn apply(id: TransformId, v: f64) -> Result<f64, DomainError> {
    id.apply(v)
}

/// Free-function form of [`TransformId::derivative`].
pub fn derivative(id: TransformId, v: f64) -> Result<f64, DomainError> {
    id.derivative(v)
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformId {
    type Err = TransformSetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        TransformId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| TransformSetError::Unknown(s.to_string()))
    }
}

/// Ordered, duplicate-free, non-empty list of enabled transformations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TransformId>", into = "Vec<TransformId>")]
pub struct TransformSet(Vec<TransformId>);

impl TransformSet {
    pub fn new(ids: Vec<TransformId>) -> Result<Self, TransformSetError> {
        if ids.is_empty() {
            return Err(TransformSetError::Empty);
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(TransformSetError::Duplicate(*id));
            }
        }
        Ok(Self(ids))
    }

    /// All seven functions, in canonical order.
    pub fn all() -> Self {
        Self(TransformId::ALL.to_vec())
    }

    pub fn ids(&self) -> &[TransformId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: TransformId) -> bool {
        self.0.contains(&id)
    }
}

impl TryFrom<Vec<TransformId>> for TransformSet {
    type Error = TransformSetError;

    fn try_from(ids: Vec<TransformId>) -> Result<Self, Self::Error> {
        Self::new(ids)
    }
}

impl From<TransformSet> for Vec<TransformId> {
    fn from(set: TransformSet) -> Self {
        set.0
    }
}

impl FromStr for TransformSet {
    type Err = TransformSetError;

    /// Parses a comma-separated list such as `id,sin,log`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ids = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>, _>>()?;
        Self::new(ids)
    }
}

impl fmt::Display for TransformSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|id| id.name()).collect();
        f.write_str(&names.join(","))
    }
}
