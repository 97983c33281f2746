//! Run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::choquet::{DictionaryStrategy, FunctionalOracle, RiskMetric, SimpleRandomVariable};
use crate::elicit::{ConvergenceFamily, Statistic};
use crate::error::{Error, Result};
use crate::games::{build_distortion, build_family, Family, Game};
use crate::space::{parse_rational, FiniteSpace, SpaceKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Uniform(usize),
    /// Atom weights as `"p/q"`, integer or decimal strings.
    Weighted(Vec<String>),
}

impl SpaceConfig {
    pub fn build(&self) -> Result<FiniteSpace> {
        match self {
            SpaceConfig::Uniform(n) => FiniteSpace::uniform(*n),
            SpaceConfig::Weighted(ws) => {
                let ws = ws.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>()?;
                FiniteSpace::build(&SpaceKind::Weighted(ws))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalConfig {
    Riskmetric { metric: RiskMetric },
    Expectation,
    Coordinate { atom: usize },
    /// `φ` given on finitely many variables.
    Table { entries: Vec<(Vec<f64>, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetConfig {
    /// A capacity family `h ∘ P`.
    Family { family: Family },
    /// `h(x) = max(x, level)` for `x > 0`.
    Floor { level: f64 },
    /// Full game table indexed by event bitmask.
    Game { table: Vec<f64> },
    Functional { functional: FunctionalConfig },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Analyze,
    ElicitVar,
    Converge,
    Demo(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<DictionaryStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Recursion depth `T` for elicit-var.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sequence: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Statistic>,
    /// Directory holding demo golden files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default)]
    pub options: Options,
}

fn default_version() -> u32 {
    super::report::SCHEMA_VERSION
}

/// What a target resolves to on a given space.
pub enum Target {
    Game { game: Game, family: Option<Family> },
    Functional(FunctionalOracle),
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != super::report::SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema version {}", self.schema_version)));
        }
        if let Some(dir) = &self.options.golden_dir {
            if !dir.is_dir() {
                return Err(Error::Config(format!("golden directory {} does not exist", dir.display())));
            }
        }
        let needs_target = !matches!(self.task, Task::Demo(_));
        if needs_target && self.target.is_none() {
            return Err(Error::Config("missing target block".into()));
        }
        if needs_target && self.task != Task::Converge && self.space.is_none() {
            return Err(Error::Config("missing space block".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<FiniteSpace> {
        self.space.as_ref().ok_or_else(|| Error::Config("missing space block".into()))?.build()
    }

    pub fn target(&self, space: &FiniteSpace) -> Result<Target> {
        let target = self.target.as_ref().ok_or_else(|| Error::Config("missing target block".into()))?;
        let p = space.probability();
        Ok(match target {
            TargetConfig::Family { family } => Target::Game { game: build_family(family, p)?, family: Some(family.clone()) },
            TargetConfig::Floor { level } => {
                let h = ConvergenceFamily::Floor { level: *level }.distortion()?;
                Target::Game { game: build_distortion(&h, p)?, family: None }
            }
            TargetConfig::Game { table } => Target::Game { game: Game::from_table(space.atoms(), table.clone())?, family: None },
            TargetConfig::Functional { functional } => Target::Functional(match functional {
                FunctionalConfig::Riskmetric { metric } => FunctionalOracle::riskmetric(metric, p)?,
                FunctionalConfig::Expectation => FunctionalOracle::expectation(p),
                FunctionalConfig::Coordinate { atom } => {
                    if *atom >= space.atoms() {
                        return Err(Error::Config(format!("atom {atom} is outside the space")));
                    }
                    FunctionalOracle::coordinate(*atom)
                }
                FunctionalConfig::Table { entries } => {
                    let entries = entries
                        .iter()
                        .map(|(x, fx)| Ok((SimpleRandomVariable::new(x.clone())?, *fx)))
                        .collect::<Result<Vec<_>>>()?;
                    FunctionalOracle::table(entries)
                }
            }),
        })
    }

    /// The family for `converge`, from a family or floor target.
    pub fn convergence_family(&self) -> Result<ConvergenceFamily> {
        match &self.target {
            Some(TargetConfig::Family { family: Family::Entropic { alpha } }) => Ok(ConvergenceFamily::Entropic { alpha: *alpha }),
            Some(TargetConfig::Family { family: Family::Es { beta } }) => Ok(ConvergenceFamily::Es { beta: *beta }),
            Some(TargetConfig::Floor { level }) => Ok(ConvergenceFamily::Floor { level: *level }),
            _ => Err(Error::Config("converge needs an entropic, es or floor target".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_family_config() {
        let cfg = RunConfig::parse(
            r#"{"task":"analyze","space":{"uniform":8},"target":{"kind":"family","family":{"family":"es","beta":0.75}}}"#,
        )
        .unwrap();
        let space = cfg.space().unwrap();
        assert!(matches!(cfg.target(&space).unwrap(), Target::Game { family: Some(Family::Es { .. }), .. }));
    }

    #[test]
    fn parses_var_and_weighted() {
        let cfg = RunConfig::parse(
            r#"{"task":"elicit_var","space":{"weighted":["2/3","1/3"]},"target":{"kind":"family","family":{"family":"var","gamma":"1/2"}},"options":{"depth":3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.space().unwrap().atoms(), 2);
        assert_eq!(cfg.options.depth, Some(3));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(RunConfig::parse(r#"{"task":"analyze"}"#), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse(r#"{"task":"analyze","bogus":1}"#), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("not json"), Err(Error::Config(_))));
        assert!(RunConfig::parse(r#"{"task":{"demo":"ex1"}}"#).is_ok());
    }
}
