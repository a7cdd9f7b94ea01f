//! Maps oracle plant settings onto the library's plant configuration.

#![allow(dead_code)]

use sfdsim::plant::{CoagulantResponse, CostParams, PlantConfig, PlantParams, TemperatureProfile, TransportPolicy};

use crate::oracle::OraclePlant;

pub fn to_config(p: &OraclePlant) -> PlantConfig {
    PlantConfig {
        plant: PlantParams {
            total_capacity: p.total_capacity,
            base_capacity: p.base_capacity,
            ethanol_production: p.ethanol_production,
            vinasse_per_ethanol: p.vinasse_per_ethanol,
            pond_area: p.pond_area,
            sludge_density: p.sludge_density,
            sigma: p.sigma,
            k_evap: p.k_evap,
            alpha: p.alpha,
            t_ref: p.t_ref,
            allow_any_ratio: false,
        },
        temperature: TemperatureProfile {
            mean: p.t_mean,
            amplitude: p.t_amp,
            phase: p.t_phase,
            noise_std_dev: 0.0,
        },
        coagulant: CoagulantResponse {
            dose: p.dose,
            eta_max: p.eta_max,
            k_half: p.k_half,
        },
        cost: CostParams {
            trip_fixed_cost: p.trip_fixed_cost,
            per_kg_cost: p.per_kg_cost,
            coagulant_unit_cost: p.coagulant_unit_cost,
            op_cost_per_m3_day: p.op_cost_per_m3_day,
            capex_per_m3: p.capex_per_m3,
            amort_days: p.amort_days,
            cost_threshold: p.cost_threshold,
        },
        policy: TransportPolicy {
            pickup_interval_days: p.pickup_interval_days,
            truck_capacity_kg: p.truck_capacity_kg,
            trucks_per_pickup: p.trucks_per_pickup,
        },
        currency: "CLP".into(),
    }
}
