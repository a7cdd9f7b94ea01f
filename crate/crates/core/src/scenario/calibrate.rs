//! Bounded pattern search against observed time series.

use serde::Serialize;

use super::ScenarioError;
use crate::model::{Kind, ModelSpec};
use crate::sim::{run_simulation, SimConfig, SimError};
use crate::trajectory::{Column, Table, Trajectory};
use crate::validate::validate_model;
use crate::GRID_TOL;

/// Observed series sharing one time axis. `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub times: Vec<f64>,
    pub series: Vec<Column>,
}

impl From<Table> for Observations {
    fn from(table: Table) -> Self {
        let mut columns = table.columns.into_iter();
        let times = columns.next().map(|c| c.values).unwrap_or_default();
        Observations {
            times,
            series: columns.collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeParam {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProblem {
    pub observed: Observations,
    pub free: Vec<FreeParam>,
    pub max_iter: usize,
    /// Stop once every step is below `tol` times its bound range.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub values: Vec<(String, f64)>,
    pub sse: f64,
    pub initial_sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|x| *x < t);
    if k < times.len() && (times[k] - t).abs() <= GRID_TOL {
        return values[k];
    }
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return values[k - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] + w * (values[k] - values[k - 1])
}

/// Sum of squared differences at every non-missing observation.
pub fn sse(traj: &Trajectory, obs: &Observations) -> Result<f64, ScenarioError> {
    let mut total = 0.0;
    for col in &obs.series {
        let sim = traj
            .column(&col.name)
            .ok_or_else(|| ScenarioError::UnknownVariable(col.name.clone()))?;
        for (t, y) in obs.times.iter().zip(&col.values) {
            if y.is_nan() {
                continue;
            }
            let r = interpolate(&traj.times, sim, *t) - y;
            total += r * r;
        }
    }
    Ok(total)
}

struct Objective<'a> {
    base: &'a ModelSpec,
    prob: &'a CalibrationProblem,
    cfg: &'a SimConfig,
}

impl Objective<'_> {
    fn eval(&self, x: &[f64]) -> Result<f64, ScenarioError> {
        let mut spec = self.base.clone();
        for (fp, v) in self.prob.free.iter().zip(x) {
            if let Some(p) = spec.param_mut(&fp.name) {
                p.value = *v;
            }
        }
        let model = validate_model(&spec)?;
        let traj = run_simulation(&model, self.cfg)?;
        sse(&traj, &self.prob.observed)
    }

    /// Candidate points that break the simulation count as infinitely bad.
    fn eval_candidate(&self, x: &[f64]) -> Result<f64, ScenarioError> {
        match self.eval(x) {
            Err(ScenarioError::Sim(SimError::NonFiniteResult { .. })) => Ok(f64::INFINITY),
            other => other.map(|f| if f.is_nan() { f64::INFINITY } else { f }),
        }
    }
}

fn check(base: &ModelSpec, prob: &CalibrationProblem, cfg: &SimConfig) -> Result<(), ScenarioError> {
    for fp in &prob.free {
        if base.param(&fp.name).is_none() {
            return Err(ScenarioError::UnknownParameter(fp.name.clone()));
        }
        if !(fp.lower.is_finite() && fp.upper.is_finite() && fp.lower < fp.upper) {
            return Err(ScenarioError::InvalidInput(format!(
                "bounds for `{}` must be finite with lower < upper",
                fp.name
            )));
        }
    }
    for col in &prob.observed.series {
        match base.kind_of(&col.name) {
            Some(Kind::Event) | None => return Err(ScenarioError::UnknownVariable(col.name.clone())),
            Some(_) => {}
        }
        if col.values.len() != prob.observed.times.len() {
            return Err(ScenarioError::InvalidInput(format!("column `{}` has the wrong length", col.name)));
        }
    }
    for &t in &prob.observed.times {
        if !(t >= cfg.t_start - GRID_TOL && t <= cfg.t_end + GRID_TOL) {
            return Err(ScenarioError::ObservationOutsideHorizon(t));
        }
    }
    if prob.tol.is_nan() || prob.tol <= 0.0 {
        return Err(ScenarioError::InvalidInput("tol must be positive".into()));
    }
    Ok(())
}

/// Fits the free parameters by coordinate pattern search.
///
/// Starts from the base values clamped into bounds with a step of a quarter
/// of each range. A sweep tries `+step` then `-step` on each parameter in
/// turn and keeps the first strict improvement; a sweep without any
/// improvement halves every step.
pub fn calibrate(base: &ModelSpec, prob: &CalibrationProblem, cfg: &SimConfig) -> Result<CalibrationResult, ScenarioError> {
    check(base, prob, cfg)?;
    let obj = Objective { base, prob, cfg };
    let ranges: Vec<f64> = prob.free.iter().map(|f| f.upper - f.lower).collect();
    let mut x: Vec<f64> = prob
        .free
        .iter()
        .map(|f| base.param_value(&f.name).unwrap_or(f.lower).clamp(f.lower, f.upper))
        .collect();
    let mut step: Vec<f64> = ranges.iter().map(|r| 0.25 * r).collect();
    let initial_sse = obj.eval(&x)?;
    let mut best = initial_sse;
    let mut iterations = 0;

    let small = |step: &[f64]| step.iter().zip(&ranges).all(|(s, r)| s / r < prob.tol);
    while !small(&step) && iterations < prob.max_iter {
        iterations += 1;
        let mut improved = false;
        for i in 0..x.len() {
            let fp = &prob.free[i];
            for dir in [1.0, -1.0] {
                let cand = (x[i] + dir * step[i]).clamp(fp.lower, fp.upper);
                if cand == x[i] {
                    continue;
                }
                let mut trial = x.clone();
                trial[i] = cand;
                let f = obj.eval_candidate(&trial)?;
                if f < best {
                    best = f;
                    x = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    Ok(CalibrationResult {
        values: prob.free.iter().map(|f| f.name.clone()).zip(x).collect(),
        sse: best,
        initial_sse,
        iterations,
        converged: small(&step),
    })
}
