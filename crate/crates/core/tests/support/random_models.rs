//! Seeded generator of small valid stock-and-flow models, plus the
//! per-stock balance check used on them.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfdsim::{parse_model, ModelSpec, Trajectory};

/// Model text with 1-4 stocks, 1-6 flows and sometimes an event. Flows mix
/// constant, stock-proportional, deliberately oversized and sign-changing
/// rates, so the conserving clamp is exercised.
pub fn random_model_source(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_stocks = rng.random_range(1..=4usize);
    let n_flows = rng.random_range(1..=6usize);
    let mut inflows = vec![Vec::new(); n_stocks];
    let mut outflows = vec![Vec::new(); n_stocks];
    let mut text = String::new();
    text.push_str(&format!("param Scale = {:.3}\n", rng.random_range(0.5..2.0)));

    for j in 0..n_flows {
        let from = rng.random_bool(0.7).then(|| rng.random_range(0..n_stocks));
        let mut to = rng.random_bool(0.7).then(|| rng.random_range(0..n_stocks));
        if to == from {
            to = None;
        }
        let from = if from.is_none() && to.is_none() { Some(0) } else { from };
        let rhs = match rng.random_range(0..4) {
            0 => format!("{:.3} * Scale", rng.random_range(0.0..20.0)),
            1 => {
                let s = from.or(to).unwrap();
                format!("{:.3} * S{s}", rng.random_range(0.0..0.5))
            }
            2 => format!("{:.1}", rng.random_range(50.0..500.0)),
            _ => format!(
                "{:.3} * sin(t / {:.3})",
                rng.random_range(1.0..40.0),
                rng.random_range(2.0..30.0)
            ),
        };
        text.push_str(&format!("flow f{j} = {rhs}\n"));
        if let Some(s) = from {
            outflows[s].push(format!("f{j}"));
        }
        if let Some(s) = to {
            inflows[s].push(format!("f{j}"));
        }
    }
    for i in 0..n_stocks {
        text.push_str(&format!(
            "stock S{i} {{ initial = {:.2} in = [{}] out = [{}] }}\n",
            rng.random_range(0.0..100.0),
            inflows[i].join(", "),
            outflows[i].join(", ")
        ));
    }
    if rng.random_bool(0.5) {
        let every = rng.random_range(5..40);
        let target = rng.random_range(0..n_stocks);
        let op = if rng.random_bool(0.5) { "-=" } else { "+=" };
        text.push_str(&format!(
            "event e every {every} start {every} {{ S{target} {op} {:.2}; }}\n",
            rng.random_range(0.0..80.0)
        ));
    }
    text
}

pub fn random_model(seed: u64) -> ModelSpec {
    let src = random_model_source(seed);
    parse_model(&src)
        .into_result()
        .unwrap_or_else(|d| panic!("generated model does not parse: {d:?}\n{src}"))
}

/// Largest relative residual of `S(t) - S(0) = in - out + event changes`
/// over all stocks and recorded times.
pub fn worst_balance_residual(spec: &ModelSpec, traj: &Trajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for st in &spec.stocks {
        let s = traj.column(&st.name).unwrap();
        for (k, &t) in traj.times.iter().enumerate() {
            let mut net = 0.0;
            let mut scale = s[0].abs() + s[k].abs();
            for (names, sign) in [(&st.inflows, 1.0), (&st.outflows, -1.0)] {
                for f in names {
                    let moved = traj.total(f).unwrap()[k];
                    net += sign * moved;
                    scale += moved.abs();
                }
            }
            for e in traj.events.iter().filter(|e| e.target == st.name && e.t <= t + 1e-9) {
                net += e.delta;
                scale += e.delta.abs();
            }
            let residual = (s[k] - s[0] - net).abs() / scale.max(1.0);
            worst = worst.max(residual);
        }
    }
    worst
}
