use rayon::prelude::*;

use super::{run_scenario, Scenario, ScenarioError, ScenarioResult};
use crate::fmt_value;
use crate::model::ModelSpec;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// One run per axis value, in the order given. Scenario names are
/// `<parameter>=<value>`.
pub fn run_sweep(
    base: &ModelSpec,
    axis: &SweepAxis,
    cfg: &SimConfig,
    parallel: bool,
) -> Result<Vec<ScenarioResult>, ScenarioError> {
    if base.param(&axis.parameter).is_none() {
        return Err(ScenarioError::UnknownParameter(axis.parameter.clone()));
    }
    let scenario = |v: f64| {
        Scenario::named(format!("{}={}", axis.parameter, fmt_value(v))).set(&axis.parameter, v)
    };
    if parallel {
        axis.values
            .par_iter()
            .map(|&v| run_scenario(base, &scenario(v), cfg))
            .collect()
    } else {
        axis.values
            .iter()
            .map(|&v| run_scenario(base, &scenario(v), cfg))
            .collect()
    }
}
