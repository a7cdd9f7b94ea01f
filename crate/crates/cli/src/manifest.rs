//! Run manifests: enough to repeat a command and get the same bytes back.

use std::collections::BTreeMap;
use std::fs;

use serde::{Deserialize, Serialize};
use sfdsim::{ModelSpec, SimConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigEcho {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub integrator: String,
    pub seed: u64,
    pub record_every: usize,
}

impl From<&SimConfig> for ConfigEcho {
    fn from(c: &SimConfig) -> Self {
        ConfigEcho {
            t_start: c.t_start,
            t_end: c.t_end,
            dt: c.dt,
            integrator: c.integrator.name().to_string(),
            seed: c.seed,
            record_every: c.record_every,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub model: Option<String>,
    pub scenarios: Vec<String>,
    pub config: Option<ConfigEcho>,
    /// Every parameter value after scenario overrides.
    pub parameters: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Manifest {
            tool: "sfdsim".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            model: None,
            scenarios: Vec::new(),
            config: None,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn with_model(mut self, path: &str, spec: &ModelSpec) -> Self {
        self.model = Some(path.to_string());
        self.parameters = spec.params.iter().map(|p| (p.name.clone(), p.value)).collect();
        self
    }

    pub fn with_config(mut self, cfg: &SimConfig) -> Self {
        self.config = Some(cfg.into());
        self
    }

    /// Writes `<primary>.manifest.json` next to the first output.
    pub fn write_beside(&self, primary: &str) -> Result<String, CliError> {
        let path = format!("{primary}.manifest.json");
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Invalid(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(path)
    }

    pub fn read(path: &str) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{path}: {e}")))
    }
}
