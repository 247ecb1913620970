//! Search parameters and their flat `key=value` file format.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::{FitConfig, FitError, LinearModel};
use crate::transforms::{TransformSet, TransformSetError};

/// Hard cap on the magnitude of any strength produced by mutation.
pub const STRENGTH_CAP: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOp {
    Drop,
    Add,
    ReplaceInteraction,
    PositiveInteraction,
    NegativeInteraction,
    ReplaceTransformation,
}

impl MutationOp {
    pub const ALL: [MutationOp; 6] = [
        MutationOp::Drop,
        MutationOp::Add,
        MutationOp::ReplaceInteraction,
        MutationOp::PositiveInteraction,
        MutationOp::NegativeInteraction,
        MutationOp::ReplaceTransformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOp::Drop => "drop",
            MutationOp::Add => "add",
            MutationOp::ReplaceInteraction => "replace_interaction",
            MutationOp::PositiveInteraction => "positive_interaction",
            MutationOp::NegativeInteraction => "negative_interaction",
            MutationOp::ReplaceTransformation => "replace_transformation",
        }
    }
}

impl fmt::Display for MutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOp {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        MutationOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| ConfigError::InvalidValue { key: "mutation_set".into(), value: s.into() })
    }
}

/// Parses a comma-separated operator list such as `add,drop`.
pub fn parse_mutation_set(s: &str) -> Result<BTreeSet<MutationOp>, ConfigError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

pub fn format_mutation_set(set: &BTreeSet<MutationOp>) -> String {
    set.iter().map(|op| op.name()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    Tournament,
    Roulette,
    ElitistReplacement,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::Tournament => "tournament",
            Selection::Roulette => "roulette",
            Selection::ElitistReplacement => "elitist_replacement",
        }
    }
}

impl FromStr for Selection {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tournament" => Ok(Selection::Tournament),
            "roulette" => Ok(Selection::Roulette),
            "elitist_replacement" | "elitist-replacement" => Ok(Selection::ElitistReplacement),
            other => Err(ConfigError::InvalidValue { key: "selection".into(), value: other.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for key '{key}'")]
    InvalidValue { key: String, value: String },
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Funcs(#[from] TransformSetError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Parameters of one evolutionary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub pop: usize,
    pub funcs: TransformSet,
    pub generations: usize,
    pub n_terms: usize,
    pub lb: i32,
    pub ub: i32,
    pub min_drop: usize,
    pub max_add: usize,
    pub fit: FitConfig,
    pub seed: u64,
    pub mutation_set: BTreeSet<MutationOp>,
    pub selection: Selection,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            pop: 100,
            funcs: TransformSet::all(),
            generations: 100,
            n_terms: 15,
            lb: -3,
            ub: 3,
            min_drop: 2,
            max_add: 15,
            fit: FitConfig::ols(),
            seed: 0,
            mutation_set: MutationOp::ALL.into_iter().collect(),
            selection: Selection::Tournament,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.pop == 0 {
            return bad("pop must be positive".into());
        }
        if self.n_terms == 0 {
            return bad("n_terms must be positive".into());
        }
        if self.lb > self.ub {
            return bad(format!("lb ({}) must not exceed ub ({})", self.lb, self.ub));
        }
        if self.lb == 0 && self.ub == 0 {
            return bad("strength range [lb, ub] must contain a nonzero value".into());
        }
        if self.lb.abs() > STRENGTH_CAP || self.ub.abs() > STRENGTH_CAP {
            return bad(format!("strength range must lie within [-{STRENGTH_CAP}, {STRENGTH_CAP}]"));
        }
        if self.min_drop < 2 {
            return bad("min_drop must be at least 2".into());
        }
        if self.max_add == 0 {
            return bad("max_add must be positive".into());
        }
        if self.mutation_set.is_empty() {
            return bad("mutation_set must not be empty".into());
        }
        self.fit.validate()?;
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::InvalidValue { key: key.into(), value: value.into() })
        }
        match key {
            "pop" => self.pop = num(key, value)?,
            "funcs" => self.funcs = value.parse()?,
            "generations" => self.generations = num(key, value)?,
            "n_terms" => self.n_terms = num(key, value)?,
            "lb" => self.lb = num(key, value)?,
            "ub" => self.ub = num(key, value)?,
            "min_drop" => self.min_drop = num(key, value)?,
            "max_add" => self.max_add = num(key, value)?,
            "model" => {
                self.fit.model = match value {
                    "ols" => LinearModel::Ols,
                    "ridge" => LinearModel::Ridge,
                    _ => return Err(ConfigError::InvalidValue { key: key.into(), value: value.into() }),
                }
            }
            "lambda" => self.fit.lambda = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mutation_set" => self.mutation_set = parse_mutation_set(value)?,
            "selection" => self.selection = value.parse()?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Parses a config file over the defaults and validates the result.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies every setting in `text` without validating and returns the
    /// keys that were set.
    ///
    /// Blank lines and anything after `#` are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<Vec<String>, ConfigError> {
        let mut keys = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value.trim())?;
            keys.push(key.trim().to_string());
        }
        Ok(keys)
    }

    /// The config in the same `key=value` format accepted by [`Self::from_kv`].
    pub fn to_kv(&self) -> String {
        let model = match self.fit.model {
            LinearModel::Ols => "ols",
            LinearModel::Ridge => "ridge",
        };
        format!(
            "pop={}\nfuncs={}\ngenerations={}\nn_terms={}\nlb={}\nub={}\nmin_drop={}\nmax_add={}\nmodel={}\nlambda={}\nseed={}\nmutation_set={}\nselection={}\n",
            self.pop,
            self.funcs,
            self.generations,
            self.n_terms,
            self.lb,
            self.ub,
            self.min_drop,
            self.max_add,
            model,
            self.fit.lambda,
            self.seed,
            format_mutation_set(&self.mutation_set),
            self.selection.name(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EvolutionConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_key_values_and_comments() {
        let text = "# ablation\npop = 50\nfuncs=id,sin\nmutation_set=add,drop # comment\n\nselection=roulette\nmodel=ridge\nlambda=0.1\n";
        let cfg = EvolutionConfig::from_kv(text).unwrap();
        assert_eq!(cfg.pop, 50);
        assert_eq!(cfg.funcs.len(), 2);
        assert_eq!(cfg.mutation_set, [MutationOp::Add, MutationOp::Drop].into_iter().collect());
        assert_eq!(cfg.selection, Selection::Roulette);
        assert_eq!(cfg.fit.model, LinearModel::Ridge);
    }

    #[test]
    fn round_trips_through_text() {
        let cfg = EvolutionConfig {
            seed: 42,
            mutation_set: parse_mutation_set("positive_interaction,negative_interaction").unwrap(),
            ..EvolutionConfig::default()
        };
        assert_eq!(EvolutionConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = EvolutionConfig::from_kv("popsize=3").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("popsize".into()));
        assert!(err.to_string().contains("popsize"));
    }

    #[test]
    fn rejects_invalid_settings() {
        for text in ["min_drop=1", "mutation_set=", "lb=0\nub=0", "lb=2\nub=1", "pop=x", "model=ridge"] {
            assert!(EvolutionConfig::from_kv(text).is_err(), "{text}");
        }
        assert!(matches!(EvolutionConfig::from_kv("just a line"), Err(ConfigError::Syntax { line: 1 })));
    }
}
