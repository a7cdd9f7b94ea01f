use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_scenario, Scenario, ScenarioError};
use crate::model::ModelSpec;
use crate::plant::names;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrid {
    pub intervals: Vec<f64>,
    pub truck_capacities: Vec<f64>,
    pub trucks_per_pickup: Vec<f64>,
    pub sludge_limit_kg: f64,
}

impl PolicyGrid {
    pub const DEFAULT_SLUDGE_LIMIT_KG: f64 = 6000.0;

    fn check(&self) -> Result<(), ScenarioError> {
        for (axis, values) in [
            ("intervals", &self.intervals),
            ("truck capacities", &self.truck_capacities),
            ("trucks per pickup", &self.trucks_per_pickup),
        ] {
            if values.is_empty() {
                return Err(ScenarioError::InvalidInput(format!("empty {axis} axis")));
            }
            if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(ScenarioError::InvalidInput(format!("{axis} must be positive")));
            }
        }
        if self.sludge_limit_kg.is_nan() || self.sludge_limit_kg < 0.0 {
            return Err(ScenarioError::InvalidInput("sludge limit must be non-negative".into()));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &i in &self.intervals {
            for &k in &self.truck_capacities {
                for &n in &self.trucks_per_pickup {
                    out.push((i, k, n));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRow {
    pub interval: f64,
    pub truck_kg: f64,
    pub trucks: f64,
    pub feasible: bool,
    pub total_cost: f64,
    pub peak_sludge: f64,
}

/// Feasible before infeasible, then cost, interval, truck size, truck count.
fn rank(a: &PolicyRow, b: &PolicyRow) -> Ordering {
    b.feasible
        .cmp(&a.feasible)
        .then(a.total_cost.total_cmp(&b.total_cost))
        .then(a.interval.total_cmp(&b.interval))
        .then(a.truck_kg.total_cmp(&b.truck_kg))
        .then(a.trucks.total_cmp(&b.trucks))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOutcome {
    pub best: PolicyRow,
    pub ranked: Vec<PolicyRow>,
}

pub fn policy_scenario(interval: f64, truck_kg: f64, trucks: f64) -> Scenario {
    Scenario::named(format!("pickup every {interval} d, {trucks} x {truck_kg} kg"))
        .set(names::TRUCK_CAPACITY, truck_kg)
        .set(names::TRUCKS_PER_PICKUP, trucks)
        .event(names::PICKUP_EVENT, Some(interval), Some(interval))
}

/// Evaluates every grid point and ranks them. The base model must carry
/// the plant's pickup event and truck parameters.
pub fn optimize_transport_policy(
    base: &ModelSpec,
    grid: &PolicyGrid,
    horizon: &SimConfig,
) -> Result<PolicyOutcome, ScenarioError> {
    grid.check()?;
    let mut ranked = grid
        .points()
        .into_par_iter()
        .map(|(interval, truck_kg, trucks)| {
            let r = run_scenario(base, &policy_scenario(interval, truck_kg, trucks), horizon)?;
            let traj = &r.trajectory;
            let peak_sludge = traj
                .require(names::SLUDGE)?
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let total_cost = *traj.require(names::TOTAL_COST)?.last().unwrap_or(&0.0);
            Ok(PolicyRow {
                interval,
                truck_kg,
                trucks,
                feasible: peak_sludge <= grid.sludge_limit_kg,
                total_cost,
                peak_sludge,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    ranked.sort_by(rank);
    match ranked.first() {
        Some(best) if best.feasible => Ok(PolicyOutcome {
            best: best.clone(),
            ranked,
        }),
        _ => Err(ScenarioError::NoFeasiblePolicy),
    }
}
