//! Fixed-step integration of a validated model with scheduled events.
//!
//! Each step evaluates flows and auxiliaries from the current (post-event)
//! state, updates every stock simultaneously, then fires the events that land
//! on the new grid point. Stocks never go negative: when a step would drain a
//! stock below zero, the outflows of that stock are scaled down for that step
//! and the scaled ("realized") values are what the receiving stocks get.

use thiserror::Error;

use crate::expr::{eval_with, EvalContext, Expr, Slot};
use crate::model::ActionOp;
use crate::trajectory::{Column, EventRecord, Trajectory};
use crate::validate::ValidatedModel;

/// Grid tolerance, in days, for horizons and event schedules.
pub const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(format!("unknown integrator `{other}` (expected euler or rk4)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub seed: u64,
    /// Record every n-th step (1 = every step).
    pub record_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_start: 0.0,
            t_end: 365.0,
            dt: 1.0,
            integrator: Integrator::Euler,
            seed: 0,
            record_every: 1,
        }
    }
}

impl SimConfig {
    pub fn days(t_end: f64) -> Self {
        SimConfig {
            t_end,
            ..Default::default()
        }
    }

    /// Number of integration steps, checking that the horizon sits on the grid.
    pub fn steps(&self) -> Result<usize, SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidConfig("dt must be positive".into()));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_end < self.t_start {
            return Err(SimError::InvalidConfig("t_end must not precede t_start".into()));
        }
        if self.record_every == 0 {
            return Err(SimError::InvalidConfig("record_every must be at least 1".into()));
        }
        let ratio = (self.t_end - self.t_start) / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > GRID_TOL {
            return Err(SimError::InvalidConfig(format!(
                "horizon {}..{} is not a whole number of dt={} steps",
                self.t_start, self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("event `{0}` does not fire on the integration grid")]
    EventOffGrid(String),
    #[error("non-finite value for `{variable}` at t={t}: {detail}")]
    NonFiniteResult {
        variable: String,
        t: f64,
        detail: String,
    },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// Result of one integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub stocks: Vec<f64>,
    /// Realized flow rates (after the conserving clamp), per flow.
    pub flows: Vec<f64>,
}

/// Reusable evaluation buffer: parameters fixed, stocks and variables
/// rewritten for every evaluation.
struct Env<'m> {
    model: &'m ValidatedModel,
    values: Vec<f64>,
    seed: u64,
}

impl<'m> Env<'m> {
    fn new(model: &'m ValidatedModel, seed: u64) -> Self {
        let mut values = vec![0.0; model.n_vars()];
        for (i, p) in model.spec().params.iter().enumerate() {
            values[i] = p.value;
        }
        Env { model, values, seed }
    }

    fn eval(&self, expr: &Expr<Slot>, t: f64) -> Result<f64, crate::expr::EvalError> {
        let values = &self.values;
        eval_with(expr, EvalContext { t, seed: self.seed }, &|s: &Slot| {
            values.get(s.0).copied()
        })
    }

    fn set_stocks(&mut self, stocks: &[f64]) {
        let off = self.model.n_params;
        self.values[off..off + stocks.len()].copy_from_slice(stocks);
    }

    /// Evaluates flows and auxiliaries in dependency order at `stocks`, `t`.
    fn evaluate(&mut self, stocks: &[f64], t: f64) -> Result<(), SimError> {
        self.set_stocks(stocks);
        for (slot, expr) in &self.model.order {
            let v = self.eval(expr, t).map_err(|e| SimError::NonFiniteResult {
                variable: self.model.names[*slot].clone(),
                t,
                detail: e.to_string(),
            })?;
            self.values[*slot] = v;
        }
        Ok(())
    }

    fn flows(&self) -> Vec<f64> {
        let off = self.model.flow_slot(0);
        self.values[off..off + self.model.n_flows].to_vec()
    }
}

/// Scales draining flows so no stock goes below zero within the step.
///
/// A flow drains its source stocks when positive and its destination stocks
/// when negative. Each stock gets one factor in [0, 1] applied to all terms
/// draining it; a flow that drains several stocks takes the smallest factor.
/// Factors are first lowered from 1 until nothing changes. Feedback between
/// clamped stocks can make that descent geometric, so if it has not settled
/// the factors are instead raised from 0, where every pass is feasible.
fn conserve(model: &ValidatedModel, stocks: &[f64], raw: &[f64], dt: f64) -> Vec<f64> {
    const MAX_PASSES: usize = 200;
    let n = stocks.len();
    let drained_by = |j: usize| -> Vec<usize> {
        (0..n)
            .filter(|&s| {
                if raw[j] >= 0.0 {
                    model.outflows[s].contains(&j)
                } else {
                    model.inflows[s].contains(&j)
                }
            })
            .collect()
    };
    let drains: Vec<Vec<usize>> = (0..raw.len()).map(drained_by).collect();
    let realize = |factor: &[f64]| -> Vec<f64> {
        raw.iter()
            .zip(&drains)
            .map(|(&r, ds)| r * ds.iter().fold(1.0_f64, |m, &s| m.min(factor[s])))
            .collect()
    };
    let limits = |factor: &[f64]| -> Vec<f64> {
        let realized = realize(factor);
        (0..n)
            .map(|s| {
                let mut feed = 0.0;
                let mut drain = 0.0;
                for &j in &model.inflows[s] {
                    if raw[j] >= 0.0 {
                        feed += realized[j];
                    } else {
                        drain -= raw[j];
                    }
                }
                for &j in &model.outflows[s] {
                    if raw[j] > 0.0 {
                        drain += raw[j];
                    } else {
                        feed -= realized[j];
                    }
                }
                if drain > 0.0 && stocks[s] + dt * (feed - drain) < 0.0 {
                    ((stocks[s] + dt * feed) / (dt * drain)).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            })
            .collect()
    };

    let mut factor = vec![1.0_f64; n];
    for _ in 0..MAX_PASSES {
        let next: Vec<f64> = limits(&factor).iter().zip(&factor).map(|(a, b)| a.min(*b)).collect();
        if next == factor {
            return realize(&factor);
        }
        factor = next;
    }
    let mut factor = vec![0.0_f64; n];
    for _ in 0..MAX_PASSES {
        let next = limits(&factor);
        if next == factor {
            break;
        }
        factor = next;
    }
    realize(&factor)
}

fn apply_flows(model: &ValidatedModel, stocks: &[f64], flows: &[f64], dt: f64) -> Vec<f64> {
    (0..stocks.len())
        .map(|s| {
            let inflow: f64 = model.inflows[s].iter().fold(0.0, |acc, &j| acc + flows[j]);
            let outflow: f64 = model.outflows[s].iter().fold(0.0, |acc, &j| acc + flows[j]);
            (stocks[s] + dt * (inflow - outflow)).max(0.0)
        })
        .collect()
}

fn net_rates(model: &ValidatedModel, flows: &[f64]) -> Vec<f64> {
    (0..model.n_stocks)
        .map(|s| {
            let inflow: f64 = model.inflows[s].iter().fold(0.0, |acc, &j| acc + flows[j]);
            let outflow: f64 = model.outflows[s].iter().fold(0.0, |acc, &j| acc + flows[j]);
            inflow - outflow
        })
        .collect()
}

fn offset(stocks: &[f64], rates: &[f64], h: f64) -> Vec<f64> {
    stocks.iter().zip(rates).map(|(s, r)| s + h * r).collect()
}

fn check_stocks(model: &ValidatedModel, stocks: &[f64], t: f64) -> Result<(), SimError> {
    for (i, v) in stocks.iter().enumerate() {
        if !v.is_finite() {
            return Err(SimError::NonFiniteResult {
                variable: model.spec().stocks[i].name.clone(),
                t,
                detail: "stock overflow".into(),
            });
        }
    }
    Ok(())
}

/// One step; leaves `env` holding the stage-one evaluation at (`stocks`, `t`).
fn advance(
    env: &mut Env<'_>,
    stocks: &[f64],
    t: f64,
    dt: f64,
    integrator: Integrator,
) -> Result<StepOutput, SimError> {
    let model = env.model;
    let raw = match integrator {
        Integrator::Euler => {
            env.evaluate(stocks, t)?;
            env.flows()
        }
        Integrator::Rk4 => {
            let half = dt / 2.0;
            env.evaluate(stocks, t)?;
            let mut stage1 = env.values.clone();
            let k1 = env.flows();
            env.evaluate(&offset(stocks, &net_rates(model, &k1), half), t + half)?;
            let k2 = env.flows();
            env.evaluate(&offset(stocks, &net_rates(model, &k2), half), t + half)?;
            let k3 = env.flows();
            env.evaluate(&offset(stocks, &net_rates(model, &k3), dt), t + dt)?;
            let k4 = env.flows();
            std::mem::swap(&mut env.values, &mut stage1);
            (0..k1.len())
                .map(|j| (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0)
                .collect()
        }
    };
    let flows = conserve(model, stocks, &raw, dt);
    let next = apply_flows(model, stocks, &flows, dt);
    check_stocks(model, &next, t + dt)?;
    Ok(StepOutput { stocks: next, flows })
}

/// One forward-Euler step from `state` at time `t`.
pub fn step_euler(
    model: &ValidatedModel,
    state: &[f64],
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<StepOutput, SimError> {
    let mut env = Env::new(model, seed);
    advance(&mut env, state, t, dt, Integrator::Euler)
}

/// One classical Runge-Kutta step; the clamp applies to the combined update.
pub fn step_rk4(
    model: &ValidatedModel,
    state: &[f64],
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<StepOutput, SimError> {
    let mut env = Env::new(model, seed);
    advance(&mut env, state, t, dt, Integrator::Rk4)
}

/// Evaluates the initial stock values.
pub fn initial_state(model: &ValidatedModel, t: f64) -> Result<Vec<f64>, SimError> {
    let env = Env::new(model, 0);
    model
        .initials
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let v = env.eval(e, t).map_err(|err| SimError::NonFiniteResult {
                variable: model.spec().stocks[i].name.clone(),
                t,
                detail: err.to_string(),
            })?;
            Ok(v.max(0.0))
        })
        .collect()
}

/// Step indices at which an event fires: `first + k * every`, `first` may be
/// negative when the schedule started before the run.
struct Schedule {
    first: i64,
    every: i64,
}

impl Schedule {
    fn fires(&self, step: usize) -> bool {
        let s = step as i64;
        s >= self.first && (s - self.first) % self.every == 0
    }
}

fn schedule(model: &ValidatedModel, cfg: &SimConfig) -> Result<Vec<Schedule>, SimError> {
    model
        .events
        .iter()
        .map(|ev| {
            let first = ((ev.start - cfg.t_start) / cfg.dt).round();
            let every = (ev.interval / cfg.dt).round();
            let on_grid = (cfg.t_start + first * cfg.dt - ev.start).abs() <= GRID_TOL
                && (every * cfg.dt - ev.interval).abs() <= GRID_TOL
                && every >= 1.0;
            if !on_grid {
                return Err(SimError::EventOffGrid(ev.name.clone()));
            }
            Ok(Schedule {
                first: first as i64,
                every: every as i64,
            })
        })
        .collect()
}

fn fire_events(
    env: &mut Env<'_>,
    schedules: &[Schedule],
    step: usize,
    t: f64,
    stocks: &mut [f64],
    log: &mut Vec<EventRecord>,
) -> Result<(), SimError> {
    let model = env.model;
    let due: Vec<usize> = (0..schedules.len()).filter(|&i| schedules[i].fires(step)).collect();
    if due.is_empty() {
        return Ok(());
    }
    env.evaluate(stocks, t)?;
    for i in due {
        let ev = &model.events[i];
        for action in &ev.actions {
            let amount = env.eval(&action.amount, t).map_err(|e| SimError::NonFiniteResult {
                variable: ev.name.clone(),
                t,
                detail: e.to_string(),
            })?;
            let old = stocks[action.target];
            let (new, realized) = match action.op {
                ActionOp::Set => {
                    let v = amount.max(0.0);
                    (v, v)
                }
                ActionOp::Add => {
                    let v = (old + amount).max(0.0);
                    (v, v - old)
                }
                ActionOp::SubtractClampedAtZero => {
                    let removed = amount.max(0.0).min(old);
                    (old - removed, removed)
                }
            };
            stocks[action.target] = new;
            env.values[model.stock_slot(action.target)] = new;
            log.push(EventRecord {
                t,
                event: ev.name.clone(),
                target: model.spec().stocks[action.target].name.clone(),
                op: action.op,
                amount: realized,
                delta: new - old,
            });
        }
    }
    Ok(())
}

/// Runs `model` over the configured horizon.
///
/// Rows are recorded at `t_start` and every `record_every`-th step, after any
/// events at that time. Flow columns hold the realized rate used for the step
/// leaving that row; auxiliary columns hold their value at the row's state.
pub fn run_simulation(model: &ValidatedModel, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    let n_steps = cfg.steps()?;
    let schedules = schedule(model, cfg)?;
    let spec = model.spec();
    let mut env = Env::new(model, cfg.seed);
    let mut state = initial_state(model, cfg.t_start)?;

    let n_rows = n_steps / cfg.record_every + 1;
    let column = |name: &str| Column {
        name: name.to_string(),
        values: Vec::with_capacity(n_rows),
    };
    let var_names = spec.stocks.iter().map(|s| &s.name)
        .chain(spec.flows.iter().map(|f| &f.name))
        .chain(spec.auxes.iter().map(|a| &a.name));
    let mut columns: Vec<Column> = var_names.map(|n| column(n)).collect();
    let mut totals: Vec<Column> = spec.flows.iter().map(|f| column(&f.name)).collect();
    let mut cumulative = vec![0.0_f64; spec.flows.len()];
    let mut times = Vec::with_capacity(n_rows);
    let mut events = Vec::new();

    fire_events(&mut env, &schedules, 0, cfg.t_start, &mut state, &mut events)?;

    let n_stocks = model.n_stocks;
    let n_flows = model.n_flows;
    let aux_off = model.flow_slot(n_flows);
    for step in 0..=n_steps {
        let t = cfg.time_at(step);
        let record = step % cfg.record_every == 0;
        if step == n_steps && !record {
            break;
        }
        let out = advance(&mut env, &state, t, cfg.dt, cfg.integrator)?;
        if record {
            times.push(t);
            for (i, v) in state.iter().enumerate() {
                columns[i].values.push(*v);
            }
            for (j, v) in out.flows.iter().enumerate() {
                columns[n_stocks + j].values.push(*v);
            }
            for (k, col) in columns[n_stocks + n_flows..].iter_mut().enumerate() {
                col.values.push(env.values[aux_off + k]);
            }
            for (j, total) in totals.iter_mut().enumerate() {
                total.values.push(cumulative[j]);
            }
        }
        if step == n_steps {
            break;
        }
        for (c, f) in cumulative.iter_mut().zip(&out.flows) {
            *c += cfg.dt * f;
        }
        state = out.stocks;
        let next = cfg.time_at(step + 1);
        fire_events(&mut env, &schedules, step + 1, next, &mut state, &mut events)?;
    }

    Ok(Trajectory {
        times,
        columns,
        events,
        totals,
        parameters: spec.params.iter().map(|p| (p.name.clone(), p.value)).collect(),
        stock_count: n_stocks,
    })
}
