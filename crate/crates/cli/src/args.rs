use clap::{Args, Parser, Subcommand};
use sfdsim::Integrator;

#[derive(Debug, Parser)]
#[command(name = "sfdsim", version, about = "Stock-and-flow simulation of the vinasse treatment plant and other models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one model and write its trajectory.
    Simulate(SimulateArgs),
    /// Run the model once per value of a parameter.
    Sweep(SweepArgs),
    /// Search a grid of sludge transport policies for the cheapest feasible one.
    Optimize(OptimizeArgs),
    /// Fit parameters to observed time series.
    Calibrate(CalibrateArgs),
    /// Check a model file and report naming-convention warnings.
    Lint(LintArgs),
    /// Draw selected columns of a run CSV as stacked SVG line charts.
    Plot(PlotArgs),
    /// Repeat the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file (.sfd).
    #[arg(long)]
    pub model: String,
    /// Scenario file (.scn); every scenario in it is applied in order. Repeatable.
    #[arg(long)]
    pub scenario: Vec<String>,
}

#[derive(Debug, Args)]
pub struct HorizonArgs {
    /// Simulation end time in days.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value = "euler")]
    pub integrator: Integrator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub horizon: HorizonArgs,
    /// Trajectory CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Event log CSV; defaults to `<out>_events.csv` when --out is given.
    #[arg(long)]
    pub events: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub horizon: HorizonArgs,
    /// `Name=v1,v2,...`
    #[arg(long)]
    pub param: String,
    /// Directory for per-value trajectories and summary.csv.
    #[arg(long)]
    pub out_dir: String,
    /// Run the values one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub horizon: HorizonArgs,
    /// Pickup intervals in days: `A:B:STEP` or a comma list.
    #[arg(long)]
    pub interval: String,
    /// Truck capacities in kg: `A:B:STEP` or a comma list.
    #[arg(long)]
    pub truck: String,
    /// Trucks per pickup: `A:B:STEP` or a comma list.
    #[arg(long, default_value = "1")]
    pub trucks: String,
    /// Largest admissible sludge stock in kg.
    #[arg(long, default_value_t = 6000.0)]
    pub sludge_limit: f64,
    /// Ranked table CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Best policy JSON.
    #[arg(long)]
    pub best: Option<String>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub horizon: HorizonArgs,
    /// Observed data CSV: `t,<var>,...`; empty cells are missing values.
    #[arg(long)]
    pub data: String,
    /// `Name=lo:hi[,Name=lo:hi...]`
    #[arg(long)]
    pub fit: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Fitted parameters JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct LintArgs {
    #[arg(long)]
    pub model: String,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trajectory CSV.
    #[arg(long)]
    pub run: String,
    /// Comma-separated column names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub vars: Vec<String>,
    #[arg(long)]
    pub svg: String,
    #[arg(long, default_value_t = 900)]
    pub width: u32,
    /// Height of each chart.
    #[arg(long, default_value_t = 300)]
    pub height: u32,
    /// Model file used to label axes with units.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: String,
}
