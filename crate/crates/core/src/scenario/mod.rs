//! Scenarios as overrides of a base model, and the analyses built on them.

mod calibrate;
mod optimize;
mod sweep;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use calibrate::{calibrate, CalibrationProblem, CalibrationResult, FreeParam, Observations};
pub use optimize::{optimize_transport_policy, PolicyGrid, PolicyOutcome, PolicyRow};
pub use sweep::{run_sweep, SweepAxis};

use crate::model::{ActionOp, ModelSpec};
use crate::plant::{self, names, CostReport};
use crate::sim::{run_simulation, SimConfig, SimError};
use crate::trajectory::{Trajectory, TrajectoryError};
use crate::validate::{validate_model, ModelError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventOverride {
    pub interval: Option<f64>,
    pub start: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub parameter_overrides: BTreeMap<String, f64>,
    pub event_overrides: BTreeMap<String, EventOverride>,
}

impl Scenario {
    pub fn named(name: impl Into<String>) -> Self {
        Scenario {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn set(mut self, param: &str, value: f64) -> Self {
        self.parameter_overrides.insert(param.to_string(), value);
        self
    }

    pub fn event(mut self, event: &str, interval: Option<f64>, start: Option<f64>) -> Self {
        self.event_overrides
            .insert(event.to_string(), EventOverride { interval, start });
        self
    }

    /// Overrides of `self` followed by those of `other`; later values win.
    pub fn stacked(&self, other: &Scenario) -> Scenario {
        let mut out = self.clone();
        out.name = format!("{}+{}", self.name, other.name);
        out.parameter_overrides
            .extend(other.parameter_overrides.iter().map(|(k, v)| (k.clone(), *v)));
        for (k, o) in &other.event_overrides {
            let e = out.event_overrides.entry(k.clone()).or_default();
            e.interval = o.interval.or(e.interval);
            e.start = o.start.or(e.start);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("override key `{0}` does not name a parameter or event of the base model")]
    UnknownOverrideKey(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("observation at t={0} lies outside the simulation horizon")]
    ObservationOutsideHorizon(f64),
    #[error("results cover different horizons")]
    HorizonMismatch,
    #[error("no policy in the grid keeps sludge within the storage limit")]
    NoFeasiblePolicy,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Returns a copy of `base` with the scenario's overrides applied.
pub fn apply_scenario(base: &ModelSpec, s: &Scenario) -> Result<ModelSpec, ScenarioError> {
    let mut spec = base.clone();
    for (k, v) in &s.parameter_overrides {
        let p = spec
            .param_mut(k)
            .ok_or_else(|| ScenarioError::UnknownOverrideKey(k.clone()))?;
        p.value = *v;
    }
    for (k, o) in &s.event_overrides {
        let ev = spec
            .event_mut(k)
            .ok_or_else(|| ScenarioError::UnknownOverrideKey(k.clone()))?;
        if let Some(i) = o.interval {
            ev.interval = i;
        }
        if let Some(st) = o.start {
            ev.start = st;
        }
    }
    Ok(spec)
}

/// Scalar summaries of a run. Entries are `None` when the model lacks the
/// variables they are computed from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub saturation_time: Option<f64>,
    pub peak_sludge: Option<f64>,
    pub peak_vinasse: Option<f64>,
    pub total_sludge_removed: Option<f64>,
    pub threshold_cross_day: Option<f64>,
}

fn peak(traj: &Trajectory, name: &str) -> Option<f64> {
    traj.column(name)
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn compute_metrics(traj: &Trajectory) -> Metrics {
    let removed = traj.column(names::SLUDGE).map(|_| {
        traj.events
            .iter()
            .filter(|e| e.target == names::SLUDGE && e.op == ActionOp::SubtractClampedAtZero)
            .map(|e| e.amount)
            .sum()
    });
    Metrics {
        saturation_time: plant::saturation_time(traj).ok().flatten(),
        peak_sludge: peak(traj, names::SLUDGE),
        peak_vinasse: peak(traj, names::VINASSE),
        total_sludge_removed: removed,
        threshold_cross_day: plant::cost_breakdown(traj)
            .ok()
            .and_then(|r| r.threshold_cross_day),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub config: SimConfig,
    pub trajectory: Trajectory,
    /// Present when the model carries the plant's cost variables.
    pub cost_report: Option<CostReport>,
    pub metrics: Metrics,
}

/// Runs `spec` as-is, labelling the result with `scenario`.
pub fn run_spec(spec: &ModelSpec, scenario: Scenario, cfg: &SimConfig) -> Result<ScenarioResult, ScenarioError> {
    let model = validate_model(spec)?;
    let trajectory = run_simulation(&model, cfg)?;
    let cost_report = plant::cost_breakdown(&trajectory).ok();
    let metrics = compute_metrics(&trajectory);
    Ok(ScenarioResult {
        scenario,
        config: cfg.clone(),
        trajectory,
        cost_report,
        metrics,
    })
}

pub fn run_scenario(base: &ModelSpec, s: &Scenario, cfg: &SimConfig) -> Result<ScenarioResult, ScenarioError> {
    let spec = apply_scenario(base, s)?;
    run_spec(&spec, s.clone(), cfg)
}

/// `alt - baseline` for each cost item and metric; `None` where either side
/// lacks the value.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Comparison {
    pub transport: Option<f64>,
    pub coagulant: Option<f64>,
    pub operating: Option<f64>,
    pub capex: Option<f64>,
    pub total: Option<f64>,
    pub saturation_delay: Option<f64>,
    pub peak_sludge: Option<f64>,
    pub peak_vinasse: Option<f64>,
    pub total_sludge_removed: Option<f64>,
    pub threshold_cross_day: Option<f64>,
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

pub fn compare_to_baseline(baseline: &ScenarioResult, alt: &ScenarioResult) -> Result<Comparison, ScenarioError> {
    let (a, b) = (&baseline.config, &alt.config);
    if a.t_start != b.t_start || a.t_end != b.t_end || a.dt != b.dt {
        return Err(ScenarioError::HorizonMismatch);
    }
    let (ca, cb) = (baseline.cost_report.as_ref(), alt.cost_report.as_ref());
    let item = |f: fn(&CostReport) -> f64| diff(ca.map(f), cb.map(f));
    let (ma, mb) = (&baseline.metrics, &alt.metrics);
    Ok(Comparison {
        transport: item(|r| r.transport),
        coagulant: item(|r| r.coagulant),
        operating: item(|r| r.operating),
        capex: item(|r| r.capex),
        total: item(|r| r.total),
        saturation_delay: diff(ma.saturation_time, mb.saturation_time),
        peak_sludge: diff(ma.peak_sludge, mb.peak_sludge),
        peak_vinasse: diff(ma.peak_vinasse, mb.peak_vinasse),
        total_sludge_removed: diff(ma.total_sludge_removed, mb.total_sludge_removed),
        threshold_cross_day: diff(ma.threshold_cross_day, mb.threshold_cross_day),
    })
}
