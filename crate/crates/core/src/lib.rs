//! Stock-and-flow simulation with a small model language, a vinasse
//! treatment plant model, and scenario tooling built on top.

pub mod expr;
pub mod lang;
pub mod model;
pub mod noise;
pub mod plant;
pub mod scenario;
pub mod sim;
pub mod trajectory;
pub mod validate;

pub use expr::{eval_expression, EvalError, Expr};
pub use lang::{format_expr, format_model, parse_expr, parse_model, ParseDiagnostic};
pub use model::{ActionOp, EventAction, EventDef, ModelSpec, ParamDef, StockDef, VarDef};
pub use sim::{run_simulation, step_euler, step_rk4, Integrator, SimConfig, SimError, GRID_TOL};
pub use trajectory::{fmt_value, Trajectory, TrajectoryError};
pub use validate::{validate_model, ModelError, ValidatedModel};
