//! Independent day-loop simulator of the vinasse plant.
//!
//! Written directly against the plant equations with plain `f64` state and no
//! use of the engine, the expression evaluator, or the model builder. Tests
//! compare the engine's trajectories, metrics, and optimizer output to what
//! this loop produces.

#![allow(dead_code)]

use std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub struct OraclePlant {
    pub total_capacity: f64,
    pub base_capacity: f64,
    pub ethanol_production: f64,
    pub vinasse_per_ethanol: f64,
    pub pond_area: f64,
    pub sludge_density: f64,
    pub sigma: f64,
    pub k_evap: f64,
    pub alpha: f64,
    pub t_ref: f64,
    pub t_mean: f64,
    pub t_amp: f64,
    pub t_phase: f64,
    pub dose: f64,
    pub eta_max: f64,
    pub k_half: f64,
    pub truck_capacity_kg: f64,
    pub trucks_per_pickup: f64,
    pub pickup_interval_days: f64,
    pub trip_fixed_cost: f64,
    pub per_kg_cost: f64,
    pub coagulant_unit_cost: f64,
    pub op_cost_per_m3_day: f64,
    pub capex_per_m3: f64,
    pub amort_days: f64,
    pub cost_threshold: f64,
}

impl Default for OraclePlant {
    /// Mirrors the shipped baseline defaults.
    fn default() -> Self {
        OraclePlant {
            total_capacity: 18000.0,
            base_capacity: 18000.0,
            ethanol_production: 16000.0,
            vinasse_per_ethanol: 12.5,
            pond_area: 10000.0,
            sludge_density: 1100.0,
            sigma: 0.5,
            k_evap: 0.004,
            alpha: 0.03,
            t_ref: 16.0,
            t_mean: 16.0,
            t_amp: 6.0,
            t_phase: 0.0,
            dose: 0.0,
            eta_max: 0.8,
            k_half: 20.0,
            truck_capacity_kg: 3000.0,
            trucks_per_pickup: 1.0,
            pickup_interval_days: 30.0,
            trip_fixed_cost: 50000.0,
            per_kg_cost: 10.0,
            coagulant_unit_cost: 0.5,
            op_cost_per_m3_day: 0.0,
            capex_per_m3: 1500.0,
            amort_days: 3650.0,
            cost_threshold: 500000.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DayRecord {
    pub t: f64,
    pub vinasse: f64,
    pub sludge: f64,
    pub cost: f64,
    pub supply: f64,
    pub inflow: f64,
    pub evaporation: f64,
    pub settling: f64,
    pub production: f64,
}

#[derive(Clone, Debug)]
pub struct Pickup {
    pub t: f64,
    pub removed: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, Default)]
pub struct OracleRun {
    pub days: Vec<DayRecord>,
    pub pickups: Vec<Pickup>,
    pub cumulative_production: f64,
}

impl OracleRun {
    pub fn final_cost(&self) -> f64 {
        self.days.last().map(|d| d.cost).unwrap_or(0.0)
    }

    pub fn final_vinasse(&self) -> f64 {
        self.days.last().map(|d| d.vinasse).unwrap_or(0.0)
    }

    pub fn peak_sludge(&self) -> f64 {
        self.days.iter().map(|d| d.sludge).fold(0.0, f64::max)
    }

    pub fn peak_vinasse(&self) -> f64 {
        self.days.iter().map(|d| d.vinasse).fold(0.0, f64::max)
    }

    pub fn saturation_time(&self) -> Option<f64> {
        self.days
            .iter()
            .find(|d| d.inflow < d.supply - 1e-9)
            .map(|d| d.t)
    }
}

/// Forward-Euler day loop with daily steps from day 0 to `days`.
pub fn simulate(p: &OraclePlant, days: usize) -> OracleRun {
    let mut vinasse = 0.0_f64;
    let mut sludge = 0.0_f64;
    let mut cost = 0.0_f64;
    let mut run = OracleRun::default();
    let interval = p.pickup_interval_days.round() as usize;

    let rates = |t: f64, vinasse: f64| {
        let temperature = p.t_mean + p.t_amp * (TAU * (t - p.t_phase) / 365.0).sin();
        let supply = p.ethanol_production * p.vinasse_per_ethanol / 1000.0;
        let inflow = supply.min((0.0_f64).max((p.total_capacity - vinasse) / 1.0));
        let evaporation =
            p.k_evap * p.pond_area * (0.0_f64).max(1.0 + p.alpha * (temperature - p.t_ref));
        let eta = p.eta_max * p.dose / (p.dose + p.k_half);
        let production = p.sigma * inflow * (1.0 + eta);
        let settling = production / p.sludge_density;
        let op = p.op_cost_per_m3_day * vinasse;
        let coag = p.coagulant_unit_cost * p.dose * inflow;
        let capex = p.capex_per_m3 * (0.0_f64).max(p.total_capacity - p.base_capacity) / p.amort_days;
        (supply, inflow, evaporation, production, settling, op, coag, capex)
    };

    for day in 0..=days {
        let t = day as f64;
        let (supply, inflow, mut evaporation, production, mut settling, op, coag, capex) =
            rates(t, vinasse);
        let drain = evaporation + settling;
        if vinasse + (inflow - drain) < 0.0 {
            let factor = ((vinasse + inflow) / drain).clamp(0.0, 1.0);
            evaporation *= factor;
            settling *= factor;
        }
        run.days.push(DayRecord {
            t,
            vinasse,
            sludge,
            cost,
            supply,
            inflow,
            evaporation,
            settling,
            production,
        });
        if day == days {
            break;
        }

        vinasse = (vinasse + (inflow - (evaporation + settling))).max(0.0);
        sludge += production;
        run.cumulative_production += production;
        cost += op + coag + capex;

        let next = day + 1;
        if interval > 0 && next % interval == 0 {
            let load = sludge.min(p.truck_capacity_kg * p.trucks_per_pickup);
            let trip_cost =
                p.trip_fixed_cost * (load / p.truck_capacity_kg).ceil() + p.per_kg_cost * load;
            sludge -= load;
            cost += trip_cost;
            run.pickups.push(Pickup {
                t: next as f64,
                removed: load,
                cost: trip_cost,
            });
        }
    }
    run
}

/// One row of the exhaustive transport-policy table.
#[derive(Clone, Debug, PartialEq)]
pub struct OraclePolicyRow {
    pub interval: f64,
    pub truck_kg: f64,
    pub trucks: f64,
    pub feasible: bool,
    pub total_cost: f64,
    pub peak_sludge: f64,
}

/// Enumerates every policy, then sorts feasible rows by cost with the
/// interval / truck size / truck count tie-break, infeasible rows after.
pub fn brute_force_policies(
    base: &OraclePlant,
    intervals: &[f64],
    trucks_kg: &[f64],
    trucks: &[f64],
    sludge_limit: f64,
    days: usize,
) -> Vec<OraclePolicyRow> {
    let mut rows = Vec::new();
    for &interval in intervals {
        for &truck_kg in trucks_kg {
            for &n in trucks {
                let mut p = base.clone();
                p.pickup_interval_days = interval;
                p.truck_capacity_kg = truck_kg;
                p.trucks_per_pickup = n;
                let run = simulate(&p, days);
                let peak = run.peak_sludge();
                rows.push(OraclePolicyRow {
                    interval,
                    truck_kg,
                    trucks: n,
                    feasible: peak <= sludge_limit,
                    total_cost: run.final_cost(),
                    peak_sludge: peak,
                });
            }
        }
    }
    // simple insertion sort keeps this independent of the library's ordering code
    let key_less = |a: &OraclePolicyRow, b: &OraclePolicyRow| -> bool {
        if a.feasible != b.feasible {
            return a.feasible;
        }
        if a.total_cost != b.total_cost {
            return a.total_cost < b.total_cost;
        }
        if a.interval != b.interval {
            return a.interval < b.interval;
        }
        if a.truck_kg != b.truck_kg {
            return a.truck_kg < b.truck_kg;
        }
        a.trucks < b.trucks
    };
    for i in 1..rows.len() {
        let mut j = i;
        while j > 0 && key_less(&rows[j], &rows[j - 1]) {
            rows.swap(j, j - 1);
            j -= 1;
        }
    }
    rows
}
