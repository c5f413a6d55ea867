//! Instance loading, argument parsing and file output.

use ddbd::benders::mip::{mip_snapshots, MipInstance};
use ddbd::benders::BendersError;
use ddbd::dd::{CutRow, DdError, DecisionDiagram};
use ddbd::oracle::OracleError;
use ddbd::rect::RectError;
use ddbd::ucp::{gen_random_instance, ucp_snapshots, GenConfig, GenParams, UcpError, UcpInstance};
use ddbd::Sense;
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ucp(#[from] UcpError),
    #[error(transparent)]
    Benders(#[from] BendersError),
    #[error(transparent)]
    Rect(#[from] RectError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

/// Anything the CLI can load from a file or generate.
#[derive(Debug, Clone)]
pub enum Model {
    Ucp(UcpInstance),
    Mip(MipInstance),
    Diagram(DecisionDiagram),
}

impl Model {
    /// Reads a file, telling the formats apart by their top-level keys.
    pub fn load(path: &Path, sense: Option<Sense>) -> Result<Model, CliError> {
        let text = read_text(path)?;
        let schema = |message: String| CliError::Schema { path: path.display().to_string(), message };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| schema(e.to_string()))?;
        let model = if value.get("kind").and_then(|k| k.as_str()) == Some("mip") {
            Model::Mip(MipInstance::from_json(&text).map_err(|e| schema(e.to_string()))?)
        } else if value.get("layers").is_some() {
            Model::Diagram(DecisionDiagram::from_json(&text).map_err(|e: DdError| schema(e.to_string()))?)
        } else {
            let inst = UcpInstance::from_json(&text).map_err(|e| schema(e.to_string()))?;
            inst.validate().map_err(|e| schema(e.to_string()))?;
            Model::Ucp(inst)
        };
        model.with_sense(sense)
    }

    pub fn generated(params: GenParams, sense: Option<Sense>) -> Result<Model, CliError> {
        Model::Ucp(gen_random_instance(params, &GenConfig::default())).with_sense(sense)
    }

    fn with_sense(self, sense: Option<Sense>) -> Result<Model, CliError> {
        match (self, sense) {
            (Model::Mip(mut inst), Some(s)) => {
                inst.sense = s;
                Ok(Model::Mip(inst))
            }
            (Model::Ucp(_), Some(Sense::Max)) => Err(CliError::Usage("unit commitment minimizes cost; --sense max does not apply".into())),
            (Model::Diagram(_), Some(_)) => Err(CliError::Usage("--sense does not apply to a diagram file".into())),
            (model, _) => Ok(model),
        }
    }

    /// The root master diagram, then one diagram per cut of `cuts`.
    pub fn snapshots(&self, cuts: &[CutRow]) -> Result<Vec<DecisionDiagram>, CliError> {
        Ok(match self {
            Model::Ucp(inst) => ucp_snapshots(inst, cuts)?,
            Model::Mip(inst) => mip_snapshots(inst, cuts)?,
            Model::Diagram(dd) => vec![dd.clone()],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

fn numbers<T: std::str::FromStr>(text: &str, count: usize, what: &str) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {what}"));
    }
    parts.iter().map(|p| p.parse::<T>().map_err(|_| format!("`{p}` is not a non-negative integer"))).collect()
}

pub fn parse_gen(text: &str) -> Result<GenParams, String> {
    let v: Vec<u64> = numbers(text, 4, "n,T,S,seed")?;
    let size = |k: usize| usize::try_from(v[k]).map_err(|e| e.to_string());
    if v[..3].contains(&0) {
        return Err("n, T and S must be positive".into());
    }
    Ok(GenParams { units: size(0)?, periods: size(1)?, scenarios: size(2)?, seed: v[3] })
}

pub fn parse_size(text: &str) -> Result<(usize, usize, usize), String> {
    let v: Vec<usize> = numbers(text, 3, "n,T,S")?;
    if v.contains(&0) {
        return Err("n, T and S must be positive".into());
    }
    Ok((v[0], v[1], v[2]))
}

pub fn parse_seeds(text: &str) -> Result<Seeds, String> {
    if text.trim().is_empty() {
        return Ok(Seeds(Vec::new()));
    }
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| format!("`{p}` is not a seed")))
        .collect::<Result<Vec<_>, _>>()
        .map(Seeds)
}

pub fn parse_sense(text: &str) -> Result<Sense, String> {
    text.parse()
}

pub fn parse_time_limit(text: &str) -> Result<Duration, String> {
    let secs: f64 = text.parse().map_err(|_| format!("`{text}` is not a number of seconds"))?;
    if !(secs > 0.0 && secs.is_finite()) {
        return Err("the time limit must be positive".into());
    }
    Ok(Duration::from_secs_f64(secs))
}

/// Instance column for a file: its stem with commas replaced.
pub fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().replace(',', "_")).unwrap_or_default()
}

pub fn gen_name(p: GenParams) -> String {
    format!("gen-{}-{}-{}-{}", p.units, p.periods, p.scenarios, p.seed)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_params_parse() {
        assert_eq!(parse_gen("2,3,2,7").unwrap(), GenParams { units: 2, periods: 3, scenarios: 2, seed: 7 });
        assert!(parse_gen("2,3,2").is_err());
        assert!(parse_gen("0,3,2,1").is_err());
    }

    #[test]
    fn seed_lists_parse() {
        assert_eq!(parse_seeds("").unwrap(), Seeds(Vec::new()));
        assert_eq!(parse_seeds("1, 2,3").unwrap(), Seeds(vec![1, 2, 3]));
        assert!(parse_seeds("1,x").is_err());
    }

    #[test]
    fn time_limit_must_be_positive() {
        assert!(parse_time_limit("0").is_err());
        assert!(parse_time_limit("-1").is_err());
        assert_eq!(parse_time_limit("1.5").unwrap(), Duration::from_millis(1500));
    }
}
