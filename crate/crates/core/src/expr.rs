//! Expression trees and their evaluator.
//!
//! An [`Expr`] is generic over how variables are named. Source-level trees use
//! `String` names; validated models lower them to [`Slot`] indices so the
//! integrator never touches a hash map.

use std::fmt;

use thiserror::Error;

use crate::noise;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
        }
    }

    /// Binding strength; higher binds tighter. Unary minus sits at 4.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
            BinOp::Pow => 5,
        }
    }
}

/// Builtin functions callable from model equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Min,
    Max,
    Clamp,
    Abs,
    Sin,
    Cos,
    Exp,
    Ln,
    Ceil,
    Floor,
    If,
    /// `dailynoise(sd)`: zero-mean Gaussian with standard deviation `sd`,
    /// constant within each simulated day and fixed by the run seed.
    DailyNoise,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Min,
        Func::Max,
        Func::Clamp,
        Func::Abs,
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Ceil,
        Func::Floor,
        Func::If,
        Func::DailyNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Clamp => "clamp",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Ceil => "ceil",
            Func::Floor => "floor",
            Func::If => "if",
            Func::DailyNoise => "dailynoise",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Accepted argument counts as an inclusive range. `min`/`max` are variadic.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Func::Min | Func::Max => (1, usize::MAX),
            Func::Clamp | Func::If => (3, 3),
            _ => (1, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<V = String> {
    Num(f64),
    Var(V),
    /// The reserved symbol `t`, simulation time in days.
    Time,
    Neg(Box<Expr<V>>),
    Binary(BinOp, Box<Expr<V>>, Box<Expr<V>>),
    Call(Func, Vec<Expr<V>>),
}

impl<V> Expr<V> {
    pub fn binary(op: BinOp, lhs: Expr<V>, rhs: Expr<V>) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Visits every variable reference in left-to-right order.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Expr::Num(_) | Expr::Time => {}
            Expr::Var(v) => f(v),
            Expr::Neg(e) => e.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    /// Rewrites variable references, failing on the first unmapped one.
    pub fn try_map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Expr<W>, E> {
        Ok(match self {
            Expr::Num(n) => Expr::Num(*n),
            Expr::Time => Expr::Time,
            Expr::Var(v) => Expr::Var(f(v)?),
            Expr::Neg(e) => Expr::Neg(Box::new(e.try_map_vars(f)?)),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.try_map_vars(f)?),
                Box::new(b.try_map_vars(f)?),
            ),
            Expr::Call(func, args) => Expr::Call(
                *func,
                args.iter()
                    .map(|a| a.try_map_vars(f))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

impl Expr<String> {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    /// Names referenced by this expression, deduplicated, in first-use order.
    pub fn references(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_vars(&mut |v: &String| {
            if !out.contains(&v.as_str()) {
                out.push(v.as_str());
            }
        });
        out
    }
}

/// Index of a value in a model's flat evaluation environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot(pub usize);

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("non-finite result in {0}")]
    NonFiniteResult(String),
}

/// Time and seed visible to an evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalContext {
    pub t: f64,
    pub seed: u64,
}

impl EvalContext {
    pub fn at(t: f64) -> Self {
        EvalContext { t, seed: 0 }
    }
}

/// Evaluates `expr` with variables resolved by `lookup`.
///
/// `if` is lazy: only the taken branch is evaluated. Every intermediate value
/// must be finite; a division by zero or `ln` of a non-positive number in an
/// evaluated branch is an error rather than an infinity.
pub fn eval_with<V: fmt::Display>(
    expr: &Expr<V>,
    ctx: EvalContext,
    lookup: &impl Fn(&V) -> Option<f64>,
) -> Result<f64, EvalError> {
    let value = match expr {
        Expr::Num(n) => *n,
        Expr::Time => ctx.t,
        Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
        Expr::Neg(e) => -eval_with(e, ctx, lookup)?,
        Expr::Binary(op, a, b) => {
            let x = eval_with(a, ctx, lookup)?;
            let y = eval_with(b, ctx, lookup)?;
            let truth = |c: bool| if c { 1.0 } else { 0.0 };
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(EvalError::NonFiniteResult("division by zero".into()));
                    }
                    x / y
                }
                BinOp::Pow => x.powf(y),
                BinOp::Lt => truth(x < y),
                BinOp::Le => truth(x <= y),
                BinOp::Gt => truth(x > y),
                BinOp::Ge => truth(x >= y),
                BinOp::Eq => truth(x == y),
            }
        }
        Expr::Call(Func::If, args) => {
            let cond = eval_with(&args[0], ctx, lookup)?;
            if cond != 0.0 {
                eval_with(&args[1], ctx, lookup)?
            } else {
                eval_with(&args[2], ctx, lookup)?
            }
        }
        Expr::Call(func, args) => {
            let vals = args
                .iter()
                .map(|a| eval_with(a, ctx, lookup))
                .collect::<Result<Vec<_>, _>>()?;
            apply_func(*func, &vals, ctx)?
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFiniteResult(describe(expr)))
    }
}

fn apply_func(func: Func, vals: &[f64], ctx: EvalContext) -> Result<f64, EvalError> {
    Ok(match func {
        Func::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
        Func::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Func::Clamp => {
            let (x, lo, hi) = (vals[0], vals[1], vals[2]);
            x.max(lo).min(hi)
        }
        Func::Abs => vals[0].abs(),
        Func::Sin => vals[0].sin(),
        Func::Cos => vals[0].cos(),
        Func::Exp => vals[0].exp(),
        Func::Ln => {
            if vals[0] <= 0.0 {
                return Err(EvalError::NonFiniteResult(format!("ln({})", vals[0])));
            }
            vals[0].ln()
        }
        Func::Ceil => vals[0].ceil(),
        Func::Floor => vals[0].floor(),
        Func::DailyNoise => noise::daily_gaussian(ctx.seed, ctx.t) * vals[0],
        Func::If => unreachable!("if is evaluated lazily"),
    })
}

fn describe<V>(expr: &Expr<V>) -> String {
    match expr {
        Expr::Call(f, _) => format!("call to {}", f.name()),
        Expr::Binary(op, _, _) => format!("operator {}", op.symbol()),
        Expr::Neg(_) => "negation".into(),
        _ => "operand".into(),
    }
}

/// Evaluates a name-based expression against a name→value binding.
pub fn eval_expression<S: std::hash::BuildHasher>(
    expr: &Expr,
    env: &std::collections::HashMap<String, f64, S>,
    t: f64,
) -> Result<f64, EvalError> {
    eval_with(expr, EvalContext::at(t), &|name: &String| env.get(name).copied())
}
