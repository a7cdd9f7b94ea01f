use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sfdsim::lang::{lint_naming_at, parse_scenarios};
use sfdsim::scenario::{
    apply_scenario, calibrate, optimize_transport_policy, run_spec, run_sweep, CalibrationProblem, FreeParam,
    Observations, PolicyGrid, Scenario, SweepAxis,
};
use sfdsim::trajectory::read_table;
use sfdsim::{fmt_value, parse_model, validate_model, ModelSpec, SimConfig};

use crate::args::*;
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::plot::{render_svg, series_from_table, ChartSpec};
use crate::report::{format_diagnostic, print_diagnostics, stdout_color};

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

fn write(path: &str, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn load_model(path: &str) -> Result<ModelSpec, CliError> {
    let src = read(path)?;
    let out = parse_model(&src);
    if out.has_errors() {
        print_diagnostics(path, &out.diagnostics);
        return Err(CliError::Reported);
    }
    out.spec.ok_or(CliError::Reported)
}

fn load_scenarios(path: &str) -> Result<Vec<Scenario>, CliError> {
    parse_scenarios(&read(path)?).map_err(|diags| {
        print_diagnostics(path, &diags);
        CliError::Reported
    })
}

/// The model with every scenario stacked on top, plus the scenario used.
fn resolve(args: &ModelArgs) -> Result<(ModelSpec, Scenario), CliError> {
    let base = load_model(&args.model)?;
    let mut stacked: Option<Scenario> = None;
    for path in &args.scenario {
        for sc in load_scenarios(path)? {
            stacked = Some(match stacked {
                Some(s) => s.stacked(&sc),
                None => sc,
            });
        }
    }
    let scenario = stacked.unwrap_or_else(|| Scenario::named("baseline"));
    let spec = apply_scenario(&base, &scenario)?;
    validate_model(&spec)?;
    Ok((spec, scenario))
}

fn horizon(h: &HorizonArgs, default_end: f64) -> SimConfig {
    SimConfig {
        t_start: 0.0,
        t_end: h.t_end.unwrap_or(default_end),
        dt: h.dt,
        integrator: h.integrator,
        seed: h.seed,
        record_every: h.record_every,
    }
}

fn scenario_names(s: &Scenario, args: &ModelArgs) -> Vec<String> {
    if args.scenario.is_empty() {
        Vec::new()
    } else {
        s.name.split('+').map(str::to_string).collect()
    }
}

fn events_path(out: &str) -> String {
    match out.strip_suffix(".csv") {
        Some(stem) => format!("{stem}_events.csv"),
        None => format!("{out}_events.csv"),
    }
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let Some(t_end) = a.horizon.t_end else {
        return Err(CliError::Invalid("simulate needs --t-end".into()));
    };
    let (spec, scenario) = resolve(&a.model)?;
    let cfg = horizon(&a.horizon, t_end);
    let result = run_spec(&spec, scenario.clone(), &cfg)?;
    let traj = &result.trajectory;
    let events = a.events.clone().or_else(|| a.out.as_deref().map(events_path));
    match &a.out {
        Some(out) => write(out, &traj.to_csv())?,
        None => print!("{}", traj.to_csv()),
    }
    if let Some(ev) = &events {
        write(ev, &traj.events_to_csv())?;
    }
    if let Some(out) = &a.out {
        let mut m = Manifest::new("simulate", argv).with_model(&a.model.model, &spec).with_config(&cfg);
        m.scenarios = scenario_names(&scenario, &a.model);
        m.outputs = std::iter::once(out.clone()).chain(events).collect();
        m.write_beside(out)?;
    }
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Invalid(format!("{what}: `{s}` is not a number")))
}

/// `A:B:STEP` (inclusive) or `v1,v2,...`.
pub fn parse_values(spec: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (parse_f64(a, what)?, parse_f64(b, what)?, parse_f64(step, what)?);
            if step <= 0.0 || b < a {
                return Err(CliError::Invalid(format!("{what}: need A <= B and STEP > 0")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        [_] => spec.split(',').map(|v| parse_f64(v, what)).collect(),
        _ => Err(CliError::Invalid(format!("{what}: expected A:B:STEP or a comma list"))),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

pub fn sweep(a: &SweepArgs, argv: &[String]) -> Result<(), CliError> {
    let (name, values) = a
        .param
        .split_once('=')
        .ok_or_else(|| CliError::Invalid("--param expects Name=v1,v2,...".into()))?;
    let axis = SweepAxis {
        parameter: name.trim().to_string(),
        values: parse_values(values, "--param")?,
    };
    let (spec, scenario) = resolve(&a.model)?;
    let cfg = horizon(&a.horizon, 365.0);
    let results = run_sweep(&spec, &axis, &cfg, !a.sequential)?;

    fs::create_dir_all(&a.out_dir).map_err(CliError::io(&a.out_dir))?;
    let dir = Path::new(&a.out_dir);
    let width = results.len().to_string().len();
    let mut summary = String::from(
        "index,value,file,saturationTime,peakSludge,peakVinasse,totalSludgeRemoved,thresholdCrossDay,totalCost\n",
    );
    let mut outputs = Vec::new();
    for (i, (r, v)) in results.iter().zip(&axis.values).enumerate() {
        let file = format!("{}_{:0width$}.csv", axis.parameter, i + 1);
        let path = dir.join(&file).to_string_lossy().into_owned();
        write(&path, &r.trajectory.to_csv())?;
        outputs.push(path);
        let m = &r.metrics;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{}",
            i + 1,
            fmt_value(*v),
            file,
            opt(m.saturation_time),
            opt(m.peak_sludge),
            opt(m.peak_vinasse),
            opt(m.total_sludge_removed),
            opt(m.threshold_cross_day),
            opt(r.cost_report.as_ref().map(|c| c.total)),
        );
    }
    let summary_path = dir.join("summary.csv").to_string_lossy().into_owned();
    write(&summary_path, &summary)?;
    outputs.insert(0, summary_path.clone());

    let mut m = Manifest::new("sweep", argv).with_model(&a.model.model, &spec).with_config(&cfg);
    m.scenarios = scenario_names(&scenario, &a.model);
    m.outputs = outputs;
    m.write_beside(&summary_path)?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BestPolicy {
    interval: f64,
    truck_kg: f64,
    trucks: f64,
    total_cost: f64,
    peak_sludge: f64,
    sludge_limit_kg: f64,
}

fn json(value: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn optimize(a: &OptimizeArgs, argv: &[String]) -> Result<(), CliError> {
    let grid = PolicyGrid {
        intervals: parse_values(&a.interval, "--interval")?,
        truck_capacities: parse_values(&a.truck, "--truck")?,
        trucks_per_pickup: parse_values(&a.trucks, "--trucks")?,
        sludge_limit_kg: a.sludge_limit,
    };
    let (spec, scenario) = resolve(&a.model)?;
    let cfg = horizon(&a.horizon, 365.0);
    let outcome = optimize_transport_policy(&spec, &grid, &cfg)?;

    let mut table = String::from("interval,truckKg,trucks,feasible,totalCost,peakSludge\n");
    for r in &outcome.ranked {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{}",
            fmt_value(r.interval),
            fmt_value(r.truck_kg),
            fmt_value(r.trucks),
            r.feasible,
            fmt_value(r.total_cost),
            fmt_value(r.peak_sludge)
        );
    }
    let b = &outcome.best;
    let best = json(&BestPolicy {
        interval: b.interval,
        truck_kg: b.truck_kg,
        trucks: b.trucks,
        total_cost: b.total_cost,
        peak_sludge: b.peak_sludge,
        sludge_limit_kg: grid.sludge_limit_kg,
    })?;
    match &a.out {
        Some(out) => write(out, &table)?,
        None => print!("{table}"),
    }
    if let Some(path) = &a.best {
        write(path, &best)?;
    }
    if let Some(primary) = a.out.as_ref().or(a.best.as_ref()) {
        let mut m = Manifest::new("optimize", argv).with_model(&a.model.model, &spec).with_config(&cfg);
        m.scenarios = scenario_names(&scenario, &a.model);
        m.outputs = a.out.iter().chain(&a.best).cloned().collect();
        m.write_beside(primary)?;
    }
    eprintln!(
        "best: pickup every {} days, {} x {} kg trucks, total cost {:.2}",
        b.interval, b.trucks, b.truck_kg, b.total_cost
    );
    Ok(())
}

fn parse_fit(spec: &str) -> Result<Vec<FreeParam>, CliError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let bad = || CliError::Invalid(format!("--fit: `{item}` is not Name=lo:hi"));
            let (name, bounds) = item.split_once('=').ok_or_else(bad)?;
            let (lo, hi) = bounds.split_once(':').ok_or_else(bad)?;
            Ok(FreeParam {
                name: name.trim().to_string(),
                lower: parse_f64(lo, "--fit")?,
                upper: parse_f64(hi, "--fit")?,
            })
        })
        .collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FitReport {
    parameters: serde_json::Map<String, serde_json::Value>,
    sse: f64,
    initial_sse: f64,
    iterations: usize,
    converged: bool,
}

pub fn calibrate_cmd(a: &CalibrateArgs, argv: &[String]) -> Result<(), CliError> {
    let observed: Observations = read_table(&read(&a.data)?)?.into();
    let (spec, scenario) = resolve(&a.model)?;
    let last = observed.times.iter().copied().fold(0.0, f64::max);
    let default_end = (last / a.horizon.dt).ceil() * a.horizon.dt;
    let cfg = horizon(&a.horizon, default_end);
    let prob = CalibrationProblem {
        observed,
        free: parse_fit(&a.fit)?,
        max_iter: a.max_iter,
        tol: a.tol,
    };
    let fit = calibrate(&spec, &prob, &cfg)?;
    let report = json(&FitReport {
        parameters: fit
            .values
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect(),
        sse: fit.sse,
        initial_sse: fit.initial_sse,
        iterations: fit.iterations,
        converged: fit.converged,
    })?;
    match &a.out {
        Some(out) => {
            write(out, &report)?;
            let mut fitted = spec.clone();
            for (k, v) in &fit.values {
                if let Some(p) = fitted.param_mut(k) {
                    p.value = *v;
                }
            }
            let mut m = Manifest::new("calibrate", argv).with_model(&a.model.model, &fitted).with_config(&cfg);
            m.scenarios = scenario_names(&scenario, &a.model);
            m.outputs = vec![out.clone()];
            m.write_beside(out)?;
        }
        None => print!("{report}"),
    }
    Ok(())
}

pub fn lint(a: &LintArgs) -> Result<(), CliError> {
    let src = read(&a.model)?;
    let out = parse_model(&src);
    let mut diags = out.diagnostics.clone();
    if let Some(spec) = &out.spec {
        diags.extend(lint_naming_at(spec, &out.positions));
    }
    sfdsim::lang::sort_diagnostics(&mut diags);
    let color = stdout_color();
    for d in &diags {
        println!("{}", format_diagnostic(&a.model, d, color));
    }
    if out.has_errors() {
        return Err(CliError::Reported);
    }
    if let Some(spec) = &out.spec {
        validate_model(spec)?;
    }
    Ok(())
}

pub fn plot(a: &PlotArgs, argv: &[String]) -> Result<(), CliError> {
    let table = read_table(&read(&a.run)?)?;
    let spec = a.model.as_deref().map(load_model).transpose()?;
    let unit_of = |name: &str| -> Option<String> {
        let s = spec.as_ref()?;
        s.stocks
            .iter()
            .find(|x| x.name == name)
            .and_then(|x| x.unit.clone())
            .or_else(|| s.flows.iter().chain(&s.auxes).find(|x| x.name == name).and_then(|x| x.unit.clone()))
            .or_else(|| s.param(name).and_then(|p| p.unit.clone()))
    };
    let series = series_from_table(&table, &a.vars, unit_of)?;
    if a.width == 0 || a.height == 0 {
        return Err(CliError::Invalid("--width and --height must be positive".into()));
    }
    let svg = render_svg(&ChartSpec {
        series,
        width: a.width,
        height: a.height,
    });
    write(&a.svg, &svg)?;
    let mut m = Manifest::new("plot", argv);
    m.model = a.model.clone();
    m.outputs = vec![a.svg.clone()];
    m.write_beside(&a.svg)?;
    Ok(())
}

/// Re-runs the recorded arguments.
pub fn replay(a: &ReplayArgs) -> Result<Vec<String>, CliError> {
    let m = Manifest::read(&a.manifest)?;
    if m.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Invalid("a manifest cannot replay another replay".into()));
    }
    Ok(m.argv)
}
