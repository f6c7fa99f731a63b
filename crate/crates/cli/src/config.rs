//! Experiment configuration: a JSON document holding a parameter grid per
//! subcommand, a seed list and budgets. The grid is the cartesian product
//! of its list-valued fields, expanded in field order (first field
//! outermost).

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use padic_approx::num::parse_rational;
use serde::{Deserialize, Deserializer};

/// An exact rational accepted as a JSON string (`"3/2"`, `"1.5"`) or number.
#[derive(Clone, Debug, PartialEq)]
pub struct Rational(pub BigRational);

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a rational, got {other}"))),
        };
        parse_rational(&text)
            .map(Rational)
            .map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn rationals(v: &[Rational]) -> Vec<BigRational> {
    v.iter().map(|r| r.0.clone()).collect()
}

fn default_precision() -> Vec<usize> {
    vec![64]
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    #[default]
    Fast,
    Brute,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub start_exp: u32,
    pub end_exp: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountGrid {
    pub p: Vec<u64>,
    #[serde(rename = "N")]
    pub n_bound: Vec<u64>,
    pub tau: Vec<Vec<Rational>>,
    #[serde(default = "default_precision")]
    pub precision: Vec<usize>,
    #[serde(default)]
    pub method: CountMethod,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// estimate the Diophantine exponent of each sampled point to
    /// evaluate the exponent-based upper bound
    #[serde(default)]
    pub exponent: Option<Schedule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusChoice {
    Lambda1,
    TwoLambda1,
    #[serde(rename = "sqrt_n_N")]
    SqrtNN,
}

fn default_radii() -> Vec<RadiusChoice> {
    vec![RadiusChoice::Lambda1, RadiusChoice::TwoLambda1, RadiusChoice::SqrtNN]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeGrid {
    pub p: Vec<u64>,
    #[serde(rename = "N")]
    pub n_bound: Vec<u64>,
    pub tau: Vec<Vec<Rational>>,
    #[serde(default = "default_precision")]
    pub precision: Vec<usize>,
    #[serde(default = "default_radii")]
    pub radii: Vec<RadiusChoice>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empirical {
    pub p: u64,
    pub k_max: u32,
    pub fit_from: u32,
    #[serde(default = "default_empirical_precision")]
    pub precision: usize,
}

fn default_empirical_precision() -> usize {
    64
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionGrid {
    pub tau_d: Vec<Vec<Rational>>,
    pub tau_m: Vec<Vec<Rational>>,
    #[serde(default)]
    pub empirical: Option<Empirical>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub levels: Vec<u32>,
    pub center: Vec<u128>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UbiquityGrid {
    pub p: Vec<u64>,
    pub tau_d: Vec<Vec<Rational>>,
    pub tau_m: Vec<Vec<Rational>>,
    #[serde(rename = "M")]
    pub m_param: Vec<u64>,
    pub k: Vec<u32>,
    /// `None` entries mean the whole space
    #[serde(default = "default_balls")]
    pub ball: Vec<Option<BallSpec>>,
    #[serde(default = "default_precision")]
    pub precision: Vec<usize>,
}

fn default_balls() -> Vec<Option<BallSpec>> {
    vec![None]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentGrid {
    pub p: Vec<u64>,
    pub n: Vec<usize>,
    pub start_exp: Vec<u32>,
    pub end_exp: Vec<u32>,
    #[serde(default = "default_precision")]
    pub precision: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Count,
    Lattice,
    Dimension,
    Ubiquity,
    Exponent,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Count => "count",
            Subcommand::Lattice => "lattice",
            Subcommand::Dimension => "dimension",
            Subcommand::Ubiquity => "ubiquity",
            Subcommand::Exponent => "exponent",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Grid {
    Count(CountGrid),
    Lattice(LatticeGrid),
    Dimension(DimensionGrid),
    Ubiquity(UbiquityGrid),
    Exponent(ExponentGrid),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    subcommand: Option<String>,
    grid: serde_json::Value,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    budget_ops: Option<u128>,
    #[serde(default)]
    wall_clock_secs: Option<u64>,
    #[serde(default)]
    parallel: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    inject_fault: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub grid: Grid,
    pub seeds: Vec<u64>,
    pub budget_ops: Option<u128>,
    pub wall_clock_secs: Option<u64>,
    pub parallel: Option<usize>,
    pub out: Option<PathBuf>,
    /// test hook: treat every counting lower bound as violated
    pub inject_fault: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Schema(String),
}

impl ExperimentConfig {
    pub fn parse(text: &str, subcommand: Subcommand) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        if let Some(s) = &raw.subcommand {
            if s != subcommand.name() {
                return Err(ConfigError::Schema(format!(
                    "config is for `{s}` but was run with `{}`",
                    subcommand.name()
                )));
            }
        }
        let schema = |e: serde_json::Error| ConfigError::Schema(format!("grid: {e}"));
        let grid = match subcommand {
            Subcommand::Count => Grid::Count(serde_json::from_value(raw.grid).map_err(schema)?),
            Subcommand::Lattice => Grid::Lattice(serde_json::from_value(raw.grid).map_err(schema)?),
            Subcommand::Dimension => Grid::Dimension(serde_json::from_value(raw.grid).map_err(schema)?),
            Subcommand::Ubiquity => Grid::Ubiquity(serde_json::from_value(raw.grid).map_err(schema)?),
            Subcommand::Exponent => Grid::Exponent(serde_json::from_value(raw.grid).map_err(schema)?),
        };
        let config = ExperimentConfig {
            subcommand,
            grid,
            seeds: raw.seeds.unwrap_or_else(|| vec![0]),
            budget_ops: raw.budget_ops,
            wall_clock_secs: raw.wall_clock_secs,
            parallel: raw.parallel,
            out: raw.out,
            inject_fault: raw.inject_fault,
        };
        config.check_finite()?;
        Ok(config)
    }

    pub fn load(path: &Path, subcommand: Subcommand) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, subcommand)
    }

    fn check_finite(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::Schema("seed list is empty".into()));
        }
        if self.parallel == Some(0) {
            return Err(ConfigError::Schema("parallel must be at least 1".into()));
        }
        let empty = match &self.grid {
            Grid::Count(g) => g.p.is_empty() || g.n_bound.is_empty() || g.tau.is_empty() || g.precision.is_empty(),
            Grid::Lattice(g) => {
                g.p.is_empty() || g.n_bound.is_empty() || g.tau.is_empty() || g.precision.is_empty() || g.radii.is_empty()
            }
            Grid::Dimension(g) => g.tau_d.is_empty() || g.tau_m.is_empty(),
            Grid::Ubiquity(g) => {
                g.p.is_empty()
                    || g.tau_d.is_empty()
                    || g.tau_m.is_empty()
                    || g.m_param.is_empty()
                    || g.k.is_empty()
                    || g.ball.is_empty()
                    || g.precision.is_empty()
            }
            Grid::Exponent(g) => {
                g.p.is_empty() || g.n.is_empty() || g.start_exp.is_empty() || g.end_exp.is_empty() || g.precision.is_empty()
            }
        };
        if empty {
            return Err(ConfigError::Schema("every grid list needs at least one value".into()));
        }
        Ok(())
    }
}

/// Parses `--seeds`: a comma-separated list of integers, or the path of a
/// file holding whitespace- or comma-separated integers (or a JSON array).
pub fn parse_seeds(arg: &str) -> Result<Vec<u64>, ConfigError> {
    let from_text = |text: &str| -> Option<Vec<u64>> {
        let seeds: Option<Vec<u64>> = text
            .split(|c: char| c == ',' || c.is_whitespace() || c == '[' || c == ']')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().ok())
            .collect();
        seeds.filter(|s| !s.is_empty())
    };
    if let Some(seeds) = from_text(arg) {
        return Ok(seeds);
    }
    let path = PathBuf::from(arg);
    let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path, source })?;
    from_text(&text).ok_or_else(|| ConfigError::Schema(format!("no seeds found in {arg}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_count_grid() {
        let text = r#"{"grid": {"p": [2], "N": [64, 128], "tau": [["3/2"], [1.2, "13/10"]]}, "seeds": [1, 2]}"#;
        let cfg = ExperimentConfig::parse(text, Subcommand::Count).unwrap();
        match cfg.grid {
            Grid::Count(g) => {
                assert_eq!(g.tau[1][0].0, parse_rational("6/5").unwrap());
                assert_eq!(g.precision, vec![64]);
                assert_eq!(g.method, CountMethod::Fast);
            }
            _ => unreachable!(),
        }
        assert_eq!(cfg.seeds, vec![1, 2]);
    }

    #[test]
    fn rejects_unknown_fields_and_mismatch() {
        let bad = r#"{"grid": {"p": [2], "N": [64], "tau": [["3/2"]], "bogus": 1}}"#;
        assert!(ExperimentConfig::parse(bad, Subcommand::Count).is_err());
        let wrong = r#"{"subcommand": "lattice", "grid": {"p": [2], "N": [64], "tau": [["3/2"]]}}"#;
        assert!(ExperimentConfig::parse(wrong, Subcommand::Count).is_err());
        let empty = r#"{"grid": {"p": [], "N": [64], "tau": [["3/2"]]}}"#;
        assert!(ExperimentConfig::parse(empty, Subcommand::Count).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1,2,3").unwrap(), vec![1, 2, 3]);
        let dir = std::env::temp_dir().join(format!("seeds-{}", std::process::id()));
        std::fs::write(&dir, "4\n5\n6\n").unwrap();
        assert_eq!(parse_seeds(dir.to_str().unwrap()).unwrap(), vec![4, 5, 6]);
        std::fs::remove_file(dir).ok();
    }
}
