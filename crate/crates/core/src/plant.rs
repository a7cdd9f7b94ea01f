//! The vinasse treatment plant model.
//!
//! Three stocks: stored vinasse (m3), settled sludge (kg) and cumulative cost.
//! Vinasse arrives at the distillery's production rate until the pond nears
//! capacity, then arrivals are throttled. It leaves by evaporation, which
//! follows a seasonal temperature cycle, and by settling into sludge, which
//! a coagulant dose enhances. Trucks remove sludge on a fixed schedule and
//! every pickup is charged per trip and per kilogram.
//!
//! Only the plant capacity (18000 m3), the pickup pattern (3000 kg every 30
//! days) and the 10-15 L/L vinasse ratio are measured figures. The remaining
//! constants are placeholders chosen to give plausible dynamics.

use std::f64::consts::TAU;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::lang::parse_expr;
use crate::model::{ActionOp, EventAction, EventDef, ModelSpec, ParamDef, StockDef, VarDef};
use crate::noise;
use crate::trajectory::{Trajectory, TrajectoryError};

/// Variable names used by the plant model.
pub mod names {
    pub const VINASSE: &str = "AccumulatedVinasse";
    pub const SLUDGE: &str = "AccumulatedSludge";
    pub const TOTAL_COST: &str = "TotalCost";
    pub const SUPPLY: &str = "vinasseSupply";
    pub const INFLOW: &str = "vinasseInflow";
    pub const EVAPORATION: &str = "evaporationRate";
    pub const SETTLING: &str = "sludgeSettlingOutflow";
    pub const SLUDGE_PRODUCTION: &str = "sludgeProductionRate";
    pub const OPERATING_COST: &str = "operatingCostRate";
    pub const COAGULANT_COST: &str = "coagulantCostRate";
    pub const CAPEX_COST: &str = "capexCostRate";
    pub const PICKUP_EVENT: &str = "pickup";
    pub const COST_THRESHOLD: &str = "CostThreshold";
    pub const TRUCK_CAPACITY: &str = "TruckCapacityKg";
    pub const TRUCKS_PER_PICKUP: &str = "TrucksPerPickup";
    pub const TOTAL_CAPACITY: &str = "TotalCapacity";
    pub const DOSE: &str = "Dose";
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    /// Pond capacity, m3.
    pub total_capacity: f64,
    /// Capacity already paid for; expansion beyond it is amortized, m3.
    pub base_capacity: f64,
    /// L/day.
    pub ethanol_production: f64,
    /// L vinasse per L ethanol.
    pub vinasse_per_ethanol: f64,
    /// m2.
    pub pond_area: f64,
    /// kg/m3 of settled sludge.
    pub sludge_density: f64,
    /// kg sludge per m3 vinasse received.
    pub sigma: f64,
    /// Evaporation depth at the reference temperature, m/day.
    pub k_evap: f64,
    /// Relative evaporation change per degree C.
    pub alpha: f64,
    /// Reference temperature, degrees C.
    pub t_ref: f64,
    /// Skip the 10-15 L/L range check.
    pub allow_any_ratio: bool,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
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
            allow_any_ratio: false,
        }
    }
}

/// `mean + amplitude * sin(2 pi (t - phase) / 365)`, plus optional daily noise.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    pub mean: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub noise_std_dev: f64,
}

impl Default for TemperatureProfile {
    fn default() -> Self {
        TemperatureProfile {
            mean: 16.0,
            amplitude: 6.0,
            phase: 0.0,
            noise_std_dev: 0.0,
        }
    }
}

/// Saturating dose response: `eta = eta_max * dose / (dose + k_half)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoagulantResponse {
    /// mg/L.
    pub dose: f64,
    pub eta_max: f64,
    /// mg/L.
    pub k_half: f64,
}

impl Default for CoagulantResponse {
    fn default() -> Self {
        CoagulantResponse {
            dose: 0.0,
            eta_max: 0.8,
            k_half: 20.0,
        }
    }
}

impl CoagulantResponse {
    pub fn enhancement(&self) -> f64 {
        self.eta_max * self.dose / (self.dose + self.k_half)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    pub trip_fixed_cost: f64,
    pub per_kg_cost: f64,
    /// Per (mg/L) of dose per m3 treated.
    pub coagulant_unit_cost: f64,
    pub op_cost_per_m3_day: f64,
    pub capex_per_m3: f64,
    pub amort_days: f64,
    pub cost_threshold: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
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

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPolicy {
    pub pickup_interval_days: f64,
    pub truck_capacity_kg: f64,
    pub trucks_per_pickup: f64,
}

impl Default for TransportPolicy {
    fn default() -> Self {
        TransportPolicy {
            pickup_interval_days: 30.0,
            truck_capacity_kg: 3000.0,
            trucks_per_pickup: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub plant: PlantParams,
    pub temperature: TemperatureProfile,
    pub coagulant: CoagulantResponse,
    pub cost: CostParams,
    pub policy: TransportPolicy,
    /// Currency label carried in the model header.
    pub currency: String,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            plant: PlantParams::default(),
            temperature: TemperatureProfile::default(),
            coagulant: CoagulantResponse::default(),
            cost: CostParams::default(),
            policy: TransportPolicy::default(),
            currency: "CLP".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

fn check(field: &'static str, value: f64, ok: bool, reason: &str) -> Result<(), PlantError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(PlantError::InvalidParameter {
            field,
            reason: format!("{reason}, got {value}"),
        })
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), PlantError> {
        let p = &self.plant;
        for (field, v) in [
            ("TotalCapacity", p.total_capacity),
            ("BaseCapacity", p.base_capacity),
            ("EthanolProduction", p.ethanol_production),
            ("VinassePerEthanol", p.vinasse_per_ethanol),
            ("PondArea", p.pond_area),
            ("SludgeDensity", p.sludge_density),
            ("Sigma", p.sigma),
            ("KEvap", p.k_evap),
        ] {
            check(field, v, v > 0.0, "must be positive")?;
        }
        if !p.allow_any_ratio {
            let r = p.vinasse_per_ethanol;
            check("VinassePerEthanol", r, (10.0..=15.0).contains(&r), "must lie in 10..=15 L/L")?;
        }
        check("Alpha", p.alpha, true, "must be finite")?;
        check("TRef", p.t_ref, true, "must be finite")?;

        let t = &self.temperature;
        check("TMean", t.mean, true, "must be finite")?;
        check("TAmp", t.amplitude, t.amplitude >= 0.0, "must be non-negative")?;
        check("TPhase", t.phase, true, "must be finite")?;
        check("TNoise", t.noise_std_dev, t.noise_std_dev >= 0.0, "must be non-negative")?;

        let c = &self.coagulant;
        check("Dose", c.dose, c.dose >= 0.0, "must be non-negative")?;
        check("EtaMax", c.eta_max, c.eta_max >= 0.0, "must be non-negative")?;
        check("KHalf", c.k_half, c.k_half > 0.0, "must be positive")?;

        let k = &self.cost;
        for (field, v) in [
            ("TripFixedCost", k.trip_fixed_cost),
            ("PerKgCost", k.per_kg_cost),
            ("CoagulantUnitCost", k.coagulant_unit_cost),
            ("OpCostPerM3Day", k.op_cost_per_m3_day),
            ("CapexPerM3", k.capex_per_m3),
            ("CostThreshold", k.cost_threshold),
        ] {
            check(field, v, v >= 0.0, "must be non-negative")?;
        }
        check("AmortDays", k.amort_days, k.amort_days > 0.0, "must be positive")?;

        let pol = &self.policy;
        check(
            "PickupIntervalDays",
            pol.pickup_interval_days,
            pol.pickup_interval_days > 0.0,
            "must be positive",
        )?;
        check("TruckCapacityKg", pol.truck_capacity_kg, pol.truck_capacity_kg > 0.0, "must be positive")?;
        check("TrucksPerPickup", pol.trucks_per_pickup, pol.trucks_per_pickup >= 1.0, "must be at least 1")?;
        Ok(())
    }
}

fn eq(src: &str) -> Expr {
    parse_expr(src).unwrap_or_else(|d| panic!("built-in equation `{src}` does not parse: {d}"))
}

fn param(name: &str, value: f64, unit: &str) -> ParamDef {
    ParamDef {
        name: name.to_string(),
        value,
        unit: Some(unit.to_string()),
    }
}

fn var(name: &str, rhs: &str, unit: Option<&str>) -> VarDef {
    VarDef {
        name: name.to_string(),
        rhs: eq(rhs),
        unit: unit.map(str::to_string),
    }
}

fn list(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Builds the plant model for `cfg`.
pub fn build_baseline(cfg: &PlantConfig) -> Result<ModelSpec, PlantError> {
    cfg.validate()?;
    let (p, t, c, k, pol) = (&cfg.plant, &cfg.temperature, &cfg.coagulant, &cfg.cost, &cfg.policy);
    let cur = cfg.currency.as_str();
    let params = vec![
        param("TotalCapacity", p.total_capacity, "m3"),
        param("BaseCapacity", p.base_capacity, "m3"),
        param("EthanolProduction", p.ethanol_production, "L_per_day"),
        param("VinassePerEthanol", p.vinasse_per_ethanol, "L_per_L"),
        param("PondArea", p.pond_area, "m2"),
        param("SludgeDensity", p.sludge_density, "kg_per_m3"),
        param("Sigma", p.sigma, "kg_per_m3"),
        param("KEvap", p.k_evap, "m_per_day"),
        param("Alpha", p.alpha, "per_degC"),
        param("TRef", p.t_ref, "degC"),
        param("TMean", t.mean, "degC"),
        param("TAmp", t.amplitude, "degC"),
        param("TPhase", t.phase, "day"),
        param("TNoise", t.noise_std_dev, "degC"),
        param("Dose", c.dose, "mg_per_L"),
        param("EtaMax", c.eta_max, "dimensionless"),
        param("KHalf", c.k_half, "mg_per_L"),
        param("TruckCapacityKg", pol.truck_capacity_kg, "kg"),
        param("TrucksPerPickup", pol.trucks_per_pickup, "trucks"),
        param("TripFixedCost", k.trip_fixed_cost, cur),
        param("PerKgCost", k.per_kg_cost, "per_kg"),
        param("CoagulantUnitCost", k.coagulant_unit_cost, "per_dose_m3"),
        param("OpCostPerM3Day", k.op_cost_per_m3_day, "per_m3_day"),
        param("CapexPerM3", k.capex_per_m3, "per_m3"),
        param("AmortDays", k.amort_days, "day"),
        param("CostThreshold", k.cost_threshold, cur),
    ];

    let stocks = vec![
        StockDef {
            name: names::VINASSE.into(),
            initial: Expr::Num(0.0),
            unit: Some("m3".into()),
            inflows: list(&[names::INFLOW]),
            outflows: list(&[names::EVAPORATION, names::SETTLING]),
        },
        StockDef {
            name: names::SLUDGE.into(),
            initial: Expr::Num(0.0),
            unit: Some("kg".into()),
            inflows: list(&[names::SLUDGE_PRODUCTION]),
            outflows: vec![],
        },
        StockDef {
            name: names::TOTAL_COST.into(),
            initial: Expr::Num(0.0),
            unit: Some(cur.into()),
            inflows: list(&[names::OPERATING_COST, names::COAGULANT_COST, names::CAPEX_COST]),
            outflows: vec![],
        },
    ];

    let auxes = vec![
        var(
            "temperature",
            "TMean + TAmp * sin(6.283185307179586 * (t - TPhase) / 365) + dailynoise(TNoise)",
            None,
        ),
        var(names::SUPPLY, "EthanolProduction * VinassePerEthanol / 1000", None),
        var("coagulantEnhancement", "EtaMax * Dose / (Dose + KHalf)", None),
        var("pickupLoad", "min(AccumulatedSludge, TruckCapacityKg * TrucksPerPickup)", None),
        var(
            "costRate",
            "operatingCostRate + coagulantCostRate + capexCostRate",
            None,
        ),
        var("costPerM3", "TotalCost / max(1, AccumulatedVinasse)", None),
    ];

    let flows = vec![
        var(
            names::INFLOW,
            "min(vinasseSupply, max(0, (TotalCapacity - AccumulatedVinasse) / 1))",
            Some("m3"),
        ),
        var(
            names::EVAPORATION,
            "KEvap * PondArea * max(0, 1 + Alpha * (temperature - TRef))",
            Some("m3"),
        ),
        var(
            names::SETTLING,
            "sludgeProductionRate / SludgeDensity",
            Some("m3"),
        ),
        var(
            names::SLUDGE_PRODUCTION,
            "Sigma * vinasseInflow * (1 + coagulantEnhancement)",
            Some("kg"),
        ),
        var(names::OPERATING_COST, "OpCostPerM3Day * AccumulatedVinasse", Some(cur)),
        var(names::COAGULANT_COST, "CoagulantUnitCost * Dose * vinasseInflow", Some(cur)),
        var(
            names::CAPEX_COST,
            "CapexPerM3 * max(0, TotalCapacity - BaseCapacity) / AmortDays",
            Some(cur),
        ),
    ];

    let events = vec![EventDef {
        name: names::PICKUP_EVENT.into(),
        start: pol.pickup_interval_days,
        interval: pol.pickup_interval_days,
        actions: vec![
            EventAction {
                target: names::SLUDGE.into(),
                op: ActionOp::SubtractClampedAtZero,
                amount: eq("pickupLoad"),
            },
            EventAction {
                target: names::TOTAL_COST.into(),
                op: ActionOp::Add,
                amount: eq("TripFixedCost * ceil(pickupLoad / TruckCapacityKg) + PerKgCost * pickupLoad"),
            },
        ],
    }];

    Ok(ModelSpec {
        name: Some("vinasse_plant".into()),
        currency: Some(cur.into()),
        params,
        stocks,
        flows,
        auxes,
        events,
    })
}

/// Ambient temperature at day `t`, in degrees C.
pub fn temperature(t: f64, profile: &TemperatureProfile, seed: u64) -> f64 {
    let base = profile.mean + profile.amplitude * (TAU * (t - profile.phase) / 365.0).sin();
    if profile.noise_std_dev > 0.0 {
        base + noise::daily_gaussian(seed, t) * profile.noise_std_dev
    } else {
        base
    }
}

/// First recorded time at which arrivals fall short of supply.
pub fn saturation_time(traj: &Trajectory) -> Result<Option<f64>, TrajectoryError> {
    let inflow = traj.require(names::INFLOW)?;
    let supply = traj.require(names::SUPPLY)?;
    Ok(inflow
        .iter()
        .zip(supply)
        .position(|(i, s)| *i < s - 1e-9)
        .map(|k| traj.times[k]))
}

/// Cumulative costs by item; `total` is the final `TotalCost` value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub transport: f64,
    pub coagulant: f64,
    pub operating: f64,
    pub capex: f64,
    pub total: f64,
    pub threshold_cross_day: Option<f64>,
}

impl CostReport {
    pub fn items_sum(&self) -> f64 {
        self.transport + self.coagulant + self.operating + self.capex
    }
}

/// Cumulative amount moved by `flow` over the whole trajectory.
///
/// Uses the engine's running totals when present; a trajectory read back
/// from CSV falls back to a left Riemann sum over the recorded rates, which
/// is exact for Euler runs recorded every step.
fn cumulative(traj: &Trajectory, flow: &str) -> Result<f64, TrajectoryError> {
    if let Some(total) = traj.total(flow) {
        return Ok(total.last().copied().unwrap_or(0.0));
    }
    let rates = traj.require(flow)?;
    Ok(traj
        .times
        .windows(2)
        .zip(rates)
        .map(|(w, r)| (w[1] - w[0]) * r)
        .sum())
}

pub fn cost_breakdown(traj: &Trajectory) -> Result<CostReport, TrajectoryError> {
    let cost = traj.require(names::TOTAL_COST)?;
    let transport = traj
        .events
        .iter()
        .filter(|e| e.target == names::TOTAL_COST)
        .map(|e| e.delta)
        .sum();
    let threshold = traj.parameter(names::COST_THRESHOLD);
    let threshold_cross_day = threshold.and_then(|th| {
        cost.iter()
            .position(|c| *c > th)
            .map(|k| traj.times[k])
    });
    Ok(CostReport {
        transport,
        coagulant: cumulative(traj, names::COAGULANT_COST)?,
        operating: cumulative(traj, names::OPERATING_COST)?,
        capex: cumulative(traj, names::CAPEX_COST)?,
        total: cost.last().copied().unwrap_or(0.0),
        threshold_cross_day,
    })
}
