//! Run configuration: a TOML file, overridden by flags and the endpoint
//! environment variable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::GenderMode;
use crate::gateway::EndpointConfig;
use crate::metrics::MonoRule;
use crate::model::{SourceKind, Variable};
use crate::taxonomy::LosReference;

use super::CliError;

/// Every field is optional in the file.
///
/// ```toml
/// seed = 1
/// variables = ["heart_rate", "gender"]
/// settings = ["raw", "template"]
/// out_dir = "out"
/// probes = "score,classify"
/// template_id = "default"
/// reference_days = [3.0, 7.0, 14.0, 21.0]
/// gender_mode = "full-term-map"
/// mono_rule = "strict"
/// group_by = "model,setting"
///
/// [endpoint]
/// base_url = "http://127.0.0.1:8765"
/// max_in_flight = 4
/// model_tag = "my-model"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub variables: Vec<String>,
    pub seed: Option<u64>,
    pub settings: Vec<SourceKind>,
    pub endpoint: EndpointConfig,
    pub probes: String,
    pub template_id: String,
    pub score_with_prompt: bool,
    pub reference_days: Option<[f64; 4]>,
    pub gender_mode: GenderMode,
    pub mono_rule: MonoRule,
    pub group_by: String,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            variables: Variable::ALL.iter().map(|v| v.as_str().to_string()).collect(),
            seed: None,
            settings: vec![SourceKind::Raw, SourceKind::Template],
            endpoint: EndpointConfig::default(),
            probes: "score,classify".into(),
            template_id: crate::gateway::DEFAULT_TEMPLATE_ID.into(),
            score_with_prompt: false,
            reference_days: None,
            gender_mode: GenderMode::default(),
            mono_rule: MonoRule::default(),
            group_by: "model,setting".into(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    pub fn variables(&self) -> Result<Vec<Variable>, CliError> {
        parse_variables(&self.variables)
    }

    pub fn reference(&self) -> Result<LosReference, CliError> {
        match self.reference_days {
            Some(days) => LosReference::new(days).map_err(|e| CliError::Input(e.to_string())),
            None => Ok(LosReference::default()),
        }
    }
}

pub fn parse_variables<S: AsRef<str>>(names: &[S]) -> Result<Vec<Variable>, CliError> {
    if names.is_empty() {
        return Err(CliError::Input("no variables selected".into()));
    }
    names
        .iter()
        .map(|n| Variable::parse(n.as_ref().trim()).ok_or_else(|| CliError::Input(format!("unknown variable {:?}", n.as_ref()))))
        .collect()
}

pub fn parse_settings(spec: &str) -> Result<Vec<SourceKind>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "raw" => Ok(SourceKind::Raw),
            "template" => Ok(SourceKind::Template),
            other => Err(CliError::Input(format!("unknown setting {other:?}"))),
        })
        .collect()
}

pub fn parse_reference_days(spec: &str) -> Result<[f64; 4], CliError> {
    let days: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad reference day {s:?}"))))
        .collect::<Result<_, _>>()?;
    days.try_into().map_err(|_| CliError::Input("reference days need four values".into()))
}
