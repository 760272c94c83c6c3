//! Flat `key = value` experiment configuration files.
//!
//! ```text
//! # comments start with '#'
//! evolve.population = 128
//! evolve.generations = 200
//! init.filter-probability = 0.2
//! operator.group-balance = 0.5
//! operator.type1.xp-add-branch = 0.16
//! ```
//!
//! Operator weights for the structure type not being evolved are accepted
//! and ignored, so one file can serve both types.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::evolve::EvolveConfig;
use crate::genome::StructureType;
use crate::variation::OperatorKind;
use crate::xslt::TransformLimits;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key {key}")]
    Duplicate { line: usize, key: String },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
}

/// Parsed key/value pairs, in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

/// Experiment-level settings that live outside `EvolveConfig`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOverrides {
    pub runs: Option<usize>,
    pub stype: Option<StructureType>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigFileError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigFileError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigFileError::Syntax { line: i + 1 });
            }
            if entries.insert(k.to_owned(), v.to_owned()).is_some() {
                return Err(ConfigFileError::Duplicate {
                    line: i + 1,
                    key: k.to_owned(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Experiment keys (`evolve.runs`, `evolve.type`) read ahead of the
    /// evolution settings, since the type picks the operator table.
    pub fn experiment(&self) -> Result<ExperimentOverrides, ConfigFileError> {
        let mut out = ExperimentOverrides::default();
        if let Some(v) = self.entries.get("evolve.runs") {
            out.runs = Some(parse_value("evolve.runs", v)?);
        }
        if let Some(v) = self.entries.get("evolve.type") {
            out.stype = Some(parse_value("evolve.type", v)?);
        }
        Ok(out)
    }

    /// Applies every evolution key to `config`. Unknown keys are errors.
    pub fn apply(&self, config: &mut EvolveConfig) -> Result<(), ConfigFileError> {
        for (key, value) in &self.entries {
            let k = key.as_str();
            match k {
                "evolve.runs" | "evolve.type" => {}
                "evolve.population" => config.population = parse_value(k, value)?,
                "evolve.generations" => config.generations = parse_value(k, value)?,
                "evolve.tournament" => config.tournament = parse_value(k, value)?,
                "evolve.elitism" => config.elitism = parse_value(k, value)?,
                "evolve.seed" => config.seed = parse_value(k, value)?,
                "evolve.applications-per-offspring" => config.applications_per_offspring = parse_value(k, value)?,
                "evolve.wrapper-tag" => config.wrapper_tag = value.clone(),
                "evolve.line-tag" => config.line_tag = value.clone(),
                "init.min-templates" => config.init.min_templates = parse_value(k, value)?,
                "init.max-templates" => config.init.max_templates = parse_value(k, value)?,
                "init.min-instructions" => config.init.min_instructions = parse_value(k, value)?,
                "init.max-instructions" => config.init.max_instructions = parse_value(k, value)?,
                "init.shallow-bias" => config.init.shallow_bias = parse_value(k, value)?,
                "init.filter-probability" => config.init.filter_probability = parse_value(k, value)?,
                "limits.max-recursion-depth" => {
                    limits_mut(config).max_recursion_depth = parse_value(k, value)?;
                }
                "limits.max-output-lines" => {
                    limits_mut(config).max_output_lines = parse_value(k, value)?;
                }
                "operator.group-balance" => config.table.group_balance = parse_value(k, value)?,
                _ => {
                    let Some(rest) = k.strip_prefix("operator.") else {
                        return Err(ConfigFileError::UnknownKey(key.clone()));
                    };
                    let (stype, kind) = rest
                        .split_once('.')
                        .ok_or_else(|| ConfigFileError::UnknownKey(key.clone()))?;
                    let stype: StructureType = stype.parse().map_err(|_| ConfigFileError::UnknownKey(key.clone()))?;
                    let kind: OperatorKind = kind.parse().map_err(|_| ConfigFileError::UnknownKey(key.clone()))?;
                    let weight: f64 = parse_value(k, value)?;
                    if stype == config.stype {
                        config.table.set_weight(kind, weight);
                    }
                }
            }
        }
        Ok(())
    }
}

fn limits_mut(config: &mut EvolveConfig) -> &mut TransformLimits {
    config.limits.get_or_insert_with(TransformLimits::default)
}

fn parse_value<T>(key: &str, value: &str) -> Result<T, ConfigFileError>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigFileError::BadValue {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let text = "\
# a comment
evolve.population = 64   # trailing comment
evolve.runs = 5
evolve.type = 2
init.filter-probability = 0.1
operator.group-balance = 0.4
operator.type2.xp-add-branch = 0.5
operator.type1.xp-set-descendant = 0.9
limits.max-output-lines = 500
";
        let file = ConfigFile::parse(text).unwrap();
        let exp = file.experiment().unwrap();
        assert_eq!(exp.runs, Some(5));
        assert_eq!(exp.stype, Some(StructureType::Type2));
        let mut c = EvolveConfig::new(StructureType::Type2);
        file.apply(&mut c).unwrap();
        assert_eq!(c.population, 64);
        assert_eq!(c.init.filter_probability, 0.1);
        assert_eq!(c.table.group_balance, 0.4);
        assert_eq!(c.table.weight(OperatorKind::XpAddBranch), 0.5);
        assert_eq!(c.table.weight(OperatorKind::XpSetDescendant), 0.0);
        assert_eq!(c.limits.unwrap().max_output_lines, 500);
        c.check().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ConfigFile::parse("novalue"),
            Err(ConfigFileError::Syntax { line: 1 })
        ));
        assert!(matches!(
            ConfigFile::parse("a = 1\na = 2"),
            Err(ConfigFileError::Duplicate { line: 2, .. })
        ));
        let mut c = EvolveConfig::new(StructureType::Type1);
        let f = ConfigFile::parse("evolve.populaton = 3").unwrap();
        assert!(matches!(f.apply(&mut c), Err(ConfigFileError::UnknownKey(_))));
        let f = ConfigFile::parse("operator.type1.xp-fly = 3").unwrap();
        assert!(matches!(f.apply(&mut c), Err(ConfigFileError::UnknownKey(_))));
        let f = ConfigFile::parse("evolve.population = many").unwrap();
        assert!(matches!(f.apply(&mut c), Err(ConfigFileError::BadValue { .. })));
    }
}
