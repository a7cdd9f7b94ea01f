//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p sfdsim-cli --test acceptance`.

#[path = "../../core/tests/support/bridge.rs"]
mod bridge;
mod common;
#[path = "../../core/tests/support/oracle.rs"]
mod oracle;
#[path = "../../core/tests/support/random_models.rs"]
mod random_models;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{code, fixture, fixtures, sfdsim_in, stderr};
use oracle::{brute_force_policies, simulate, OraclePlant};
use sfdsim::lang::{format_scenarios, lint_naming_at, parse_scenarios};
use sfdsim::plant::{build_baseline, names, saturation_time};
use sfdsim::scenario::{calibrate, optimize_transport_policy, CalibrationProblem, FreeParam, Observations, PolicyGrid};
use sfdsim::trajectory::Column;
use sfdsim::{format_model, parse_model, run_simulation, validate_model, Integrator, ModelSpec, SimConfig, Trajectory};
use tempfile::tempdir;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(path: &Path) -> Result<ModelSpec, String> {
    let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_model(&src).into_result().map_err(|d| format!("{}: {d:?}", path.display()))
}

fn run(spec: &ModelSpec, cfg: &SimConfig) -> Result<Trajectory, String> {
    let model = validate_model(spec).map_err(|e| e.to_string())?;
    run_simulation(&model, cfg).map_err(|e| e.to_string())
}

fn column<'a>(t: &'a Trajectory, name: &str) -> Result<&'a [f64], String> {
    t.column(name).ok_or_else(|| format!("missing column {name}"))
}

fn baseline_reproduction() -> Outcome {
    let spec = load(&fixtures().join("baseline.sfd"))?;
    ensure(spec.param_value(names::TOTAL_CAPACITY) == Some(18000.0), || "capacity is not 18000".into())?;
    let started = Instant::now();
    let traj = run(&spec, &SimConfig::days(365.0))?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("run took {elapsed:?}"))?;

    let vinasse = column(&traj, names::VINASSE)?;
    let peak = vinasse.iter().copied().fold(0.0, f64::max);
    ensure(vinasse.iter().all(|v| *v <= 18000.0), || format!("vinasse peaked at {peak}"))?;

    let pickups: Vec<_> = traj.events.iter().filter(|e| e.target == names::SLUDGE).collect();
    ensure(pickups.len() == 12, || format!("{} pickups", pickups.len()))?;
    for (i, e) in pickups.iter().enumerate() {
        ensure(e.t == 30.0 * (i + 1) as f64, || format!("pickup {i} at t={}", e.t))?;
        ensure(e.amount <= 3000.0, || format!("pickup {i} removed {}", e.amount))?;
    }
    let expected: Vec<f64> = simulate(&OraclePlant::default(), 365).pickups.iter().map(|p| p.removed).collect();
    let got: Vec<f64> = pickups.iter().map(|e| e.amount).collect();
    ensure(got == expected, || "pickup amounts differ from the day-loop oracle".into())?;

    ensure(spec.param_value("OpCostPerM3Day") == Some(0.0) && spec.param_value("Dose") == Some(0.0), || {
        "baseline has operating or coagulant cost enabled".into()
    })?;
    let cost = column(&traj, names::TOTAL_COST)?;
    ensure(cost.windows(2).all(|w| w[1] >= w[0]), || "TotalCost decreases".into())?;
    ensure(cost[..30].iter().all(|c| *c == cost[0]) && cost[30] > cost[0], || "TotalCost not flat until day 30".into())?;
    Ok(format!(
        "{elapsed:.1?}, peak vinasse {peak:.1} m3, 12 pickups (max {:.0} kg), cost flat until day 30",
        got.iter().copied().fold(0.0, f64::max)
    ))
}

fn mass_balance() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let spec = random_models::random_model(seed);
        for integrator in [Integrator::Euler, Integrator::Rk4] {
            let traj = run(&spec, &SimConfig { integrator, ..SimConfig::days(365.0) })?;
            for st in traj.stock_columns() {
                ensure(st.values.iter().all(|v| *v >= 0.0), || format!("seed {seed}: {} negative", st.name))?;
            }
            let r = random_models::worst_balance_residual(&spec, &traj);
            ensure(r <= 1e-6, || format!("seed {seed} {integrator:?}: residual {r:e}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("50 models x 2 integrators, worst relative residual {worst:.1e}"))
}

fn decay_error(integrator: Integrator, dt: f64) -> Result<f64, String> {
    let spec = parse_model("stock S { initial = 1 out = [decay] }\nflow decay = S").into_result().map_err(|d| format!("{d:?}"))?;
    let traj = run(&spec, &SimConfig { t_end: 1.0, dt, integrator, ..Default::default() })?;
    let s = column(&traj, "S")?;
    Ok((s[s.len() - 1] - (-1.0f64).exp()).abs())
}

fn integrator_orders() -> Outcome {
    let dts = [0.2, 0.1, 0.05, 0.025];
    let mut summary = Vec::new();
    for (integrator, target) in [(Integrator::Euler, 1.0), (Integrator::Rk4, 4.0)] {
        let errors: Vec<f64> = dts.iter().map(|dt| decay_error(integrator, *dt)).collect::<Result<_, _>>()?;
        let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        for p in &orders {
            ensure((p - target).abs() <= 0.3, || format!("{integrator:?} order {p:.3}"))?;
        }
        summary.push(format!(
            "{} {}",
            integrator.name(),
            orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>().join("/")
        ));
    }
    Ok(summary.join(", "))
}

fn scenario_properties() -> Outcome {
    let mut last: Option<(f64, f64)> = None;
    for dose in [0.0, 5.0, 10.0, 20.0, 40.0] {
        let p = OraclePlant { dose, ..Default::default() };
        let spec = build_baseline(&bridge::to_config(&p)).map_err(|e| e.to_string())?;
        let traj = run(&spec, &SimConfig::days(365.0))?;
        let produced = *traj.total(names::SLUDGE_PRODUCTION).ok_or("no totals")?.last().unwrap();
        let vinasse = *column(&traj, names::VINASSE)?.last().unwrap();
        let o = simulate(&p, 365);
        ensure(produced == o.cumulative_production && vinasse == o.final_vinasse(), || {
            format!("dose {dose}: engine and oracle disagree")
        })?;
        if let Some((lp, lv)) = last {
            ensure(produced >= lp, || format!("dose {dose}: sludge fell"))?;
            ensure(vinasse <= lv, || format!("dose {dose}: final vinasse rose"))?;
        }
        last = Some((produced, vinasse));
    }

    let base = OraclePlant::default();
    let doubled = OraclePlant { total_capacity: 2.0 * base.total_capacity, ..base.clone() };
    let mut sat = Vec::new();
    for p in [&base, &doubled] {
        let spec = build_baseline(&bridge::to_config(p)).map_err(|e| e.to_string())?;
        let s = saturation_time(&run(&spec, &SimConfig::days(365.0))?).map_err(|e| e.to_string())?;
        ensure(s == simulate(p, 365).saturation_time(), || "saturation differs from oracle".into())?;
        sat.push(s);
    }
    let later = match (sat[0], sat[1]) {
        (Some(a), Some(b)) => b >= a,
        (Some(_), None) => true,
        (None, other) => other.is_none(),
    };
    ensure(later, || format!("saturation {:?} -> {:?}", sat[0], sat[1]))?;
    Ok(format!(
        "dose grid monotone; saturation day {:?} -> {:?} with doubled capacity",
        sat[0], sat[1]
    ))
}

fn optimizer_exactness() -> Outcome {
    let intervals = [10.0, 15.0, 20.0, 30.0, 45.0];
    let trucks_kg = [1000.0, 2000.0, 3000.0, 4000.0];
    let trucks = [1.0, 2.0];
    let grid = PolicyGrid {
        intervals: intervals.to_vec(),
        truck_capacities: trucks_kg.to_vec(),
        trucks_per_pickup: trucks.to_vec(),
        sludge_limit_kg: PolicyGrid::DEFAULT_SLUDGE_LIMIT_KG,
    };
    let spec = load(&fixtures().join("baseline.sfd"))?;
    let started = Instant::now();
    let out = optimize_transport_policy(&spec, &grid, &SimConfig::days(365.0)).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    let expected = brute_force_policies(&OraclePlant::default(), &intervals, &trucks_kg, &trucks, grid.sludge_limit_kg, 365);
    ensure(out.ranked.len() == expected.len(), || "table sizes differ".into())?;
    for (k, (a, b)) in out.ranked.iter().zip(&expected).enumerate() {
        let same = (a.interval, a.truck_kg, a.trucks, a.feasible, a.total_cost, a.peak_sludge)
            == (b.interval, b.truck_kg, b.trucks, b.feasible, b.total_cost, b.peak_sludge);
        ensure(same, || format!("rank {k}: {a:?} vs {b:?}"))?;
    }
    let b = &out.best;
    Ok(format!(
        "40 policies ranked identically in {elapsed:.1?}; best every {} d, {} x {} kg",
        b.interval, b.trucks, b.truck_kg
    ))
}

fn calibration_recovery() -> Outcome {
    let truth = load(&fixtures().join("baseline.sfd"))?;
    let cfg = SimConfig::days(365.0);
    let traj = run(&truth, &cfg)?;
    let v = column(&traj, names::VINASSE)?;
    let idx: Vec<usize> = (0..traj.len()).step_by(5).collect();
    let observed = Observations {
        times: idx.iter().map(|&k| traj.times[k]).collect(),
        series: vec![Column { name: names::VINASSE.into(), values: idx.iter().map(|&k| v[k]).collect() }],
    };
    let mut worst: f64 = 0.0;
    for start_value in [0.0015, 0.007, 0.0095] {
        let mut start = truth.clone();
        start.param_mut("KEvap").ok_or("no KEvap")?.value = start_value;
        let prob = CalibrationProblem {
            observed: observed.clone(),
            free: vec![FreeParam { name: "KEvap".into(), lower: 0.001, upper: 0.01 }],
            max_iter: 500,
            tol: 1e-12,
        };
        let fit = calibrate(&start, &prob, &cfg).map_err(|e| e.to_string())?;
        let k = fit.values[0].1;
        let rel = ((k - 0.004) / 0.004).abs();
        ensure(rel <= 1e-3, || format!("start {start_value}: fitted {k}"))?;
        ensure(fit.sse <= fit.initial_sse, || format!("start {start_value}: SSE rose"))?;
        worst = worst.max(rel);
    }
    Ok(format!("KEvap recovered from 3 starts, worst relative error {worst:.1e}"))
}

fn parser_round_trip() -> Outcome {
    let list = |dir: &Path, ext: &str| -> Vec<std::path::PathBuf> {
        let mut v: Vec<_> = fs::read_dir(dir)
            .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect())
            .unwrap_or_default();
        v.retain(|p| p.extension().is_some_and(|e| e == ext));
        v.sort();
        v
    };
    let mut models = list(&fixtures(), "sfd");
    models.extend(list(&fixtures().join("lint"), "sfd"));
    for path in &models {
        let spec = load(path)?;
        let again = parse_model(&format_model(&spec)).into_result().map_err(|d| format!("{d:?}"))?;
        ensure(again == spec, || format!("{} does not round-trip", path.display()))?;
    }
    let scns = list(&fixtures(), "scn");
    for path in &scns {
        let src = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let scs = parse_scenarios(&src).map_err(|d| format!("{}: {d:?}", path.display()))?;
        let again = parse_scenarios(&format_scenarios(&scs)).map_err(|d| format!("{d:?}"))?;
        ensure(again == scs, || format!("{} does not round-trip", path.display()))?;
    }
    let mut seeded = 0;
    for path in list(&fixtures().join("lint"), "sfd") {
        let src = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let expected: BTreeSet<usize> = src
            .lines()
            .enumerate()
            .filter(|(_, l)| l.contains("# expect: naming"))
            .map(|(i, _)| i + 1)
            .collect();
        let out = parse_model(&src);
        let spec = out.spec.as_ref().ok_or("lint fixture does not parse")?;
        let warnings = lint_naming_at(spec, &out.positions);
        let got: Vec<usize> = warnings.iter().map(|w| w.line).collect();
        ensure(got.iter().copied().collect::<BTreeSet<_>>() == expected && got.len() == expected.len(), || {
            format!("{}: flagged {got:?}, seeded {expected:?}", path.display())
        })?;
        seeded += expected.len();
    }
    Ok(format!(
        "{} model and {} scenario fixtures round-trip; {seeded} seeded naming violations flagged exactly",
        models.len(),
        scns.len()
    ))
}

/// Runs a fixed command sequence in a fresh directory and returns every
/// output file with its bytes.
fn command_outputs(parallel_sweep: bool) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    fs::write(p.join("noisy.scn"), "scenario noisy { set TNoise = 1.5; set Dose = 10; }\n").map_err(|e| e.to_string())?;
    let base = fixture("baseline.sfd");
    let mut sweep = vec!["sweep", "--model", &base, "--t-end", "365", "--seed", "11", "--param", "Dose=0,5,10,15,20,25,30,40", "--out-dir", "sweep"];
    if !parallel_sweep {
        sweep.push("--sequential");
    }
    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--model", &base, "--scenario", "noisy.scn", "--t-end", "365", "--seed", "11", "--out", "run.csv"],
        vec!["plot", "--run", "run.csv", "--vars", "AccumulatedVinasse,AccumulatedSludge,TotalCost", "--svg", "fig.svg", "--model", &base],
        vec!["optimize", "--model", &base, "--t-end", "365", "--interval", "10:30:10", "--truck", "2000,3000", "--out", "rank.csv", "--best", "best.json"],
        sweep,
    ];
    for args in &commands {
        let out = sfdsim_in(p, args);
        if code(&out) != 0 {
            return Err(format!("{args:?} exited {}: {}", code(&out), stderr(&out)));
        }
    }
    let mut files = Vec::new();
    let mut stack = vec![p.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = e.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(p).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&path).map_err(|e| e.to_string())?));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let first = command_outputs(true)?;
    let second = command_outputs(true)?;
    ensure(first == second, || "repeated commands wrote different bytes".into())?;
    let sequential = command_outputs(false)?;
    let strip = |files: &[(String, Vec<u8>)]| -> Vec<(String, Vec<u8>)> {
        files.iter().filter(|(n, _)| !n.ends_with(".manifest.json") || !n.starts_with("sweep")).cloned().collect()
    };
    ensure(strip(&first) == strip(&sequential), || "sweep output depends on parallelism".into())?;
    let kinds: BTreeSet<&str> = first.iter().filter_map(|(n, _)| n.rsplit('.').next()).collect();
    ensure(["csv", "json", "svg"].iter().all(|k| kinds.contains(k)), || format!("outputs {kinds:?}"))?;
    Ok(format!("{} output files byte-identical across runs and sweep modes", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("baseline reproduction", baseline_reproduction),
        ("mass balance", mass_balance),
        ("integrator orders", integrator_orders),
        ("scenario properties", scenario_properties),
        ("optimizer exactness", optimizer_exactness),
        ("calibration self-recovery", calibration_recovery),
        ("parser round-trip and lint", parser_round_trip),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
