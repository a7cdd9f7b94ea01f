//! Structural checks and evaluation ordering for a [`ModelSpec`].

use std::collections::HashMap;

use thiserror::Error;

use crate::expr::{Expr, Slot};
use crate::model::{ActionOp, Kind, ModelSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is reserved for simulation time")]
    ReservedName(String),
    #[error("undefined reference `{name}` in `{referenced_from}`")]
    UndefinedReference { name: String, referenced_from: String },
    #[error("algebraic loop: {}", .0.join(" -> "))]
    AlgebraicLoop(Vec<String>),
    #[error("unit mismatch: flow `{flow}` does not carry the unit of stock `{stock}`")]
    UnitMismatch { flow: String, stock: String },
    #[error("stock `{stock}` lists `{name}`, which is not a flow")]
    NotAFlow { name: String, stock: String },
    #[error("event `{event}` targets `{target}`, which is not a stock")]
    NotAStock { target: String, event: String },
    #[error("initial value of stock `{stock}` may only use parameters, found `{name}`")]
    InitialDependsOnState { stock: String, name: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("invalid event `{event}`: {reason}")]
    InvalidEvent { event: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledAction {
    pub target: usize,
    pub op: ActionOp,
    pub amount: Expr<Slot>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledEvent {
    pub name: String,
    pub start: f64,
    pub interval: f64,
    pub actions: Vec<CompiledAction>,
}

/// A model that passed [`validate_model`]: names are resolved to slots and
/// flows/auxiliaries carry a dependency-respecting evaluation order.
///
/// Immutable once built; share it freely across concurrent runs.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    spec: ModelSpec,
    /// Slot names: parameters, stocks, flows, auxiliaries.
    pub(crate) names: Vec<String>,
    pub(crate) n_params: usize,
    pub(crate) n_stocks: usize,
    pub(crate) n_flows: usize,
    pub(crate) initials: Vec<Expr<Slot>>,
    /// (slot, equation) in evaluation order.
    pub(crate) order: Vec<(usize, Expr<Slot>)>,
    /// Per stock: flow indices (0-based within flows).
    pub(crate) inflows: Vec<Vec<usize>>,
    pub(crate) outflows: Vec<Vec<usize>>,
    pub(crate) events: Vec<CompiledEvent>,
}

impl ValidatedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn into_spec(self) -> ModelSpec {
        self.spec
    }

    /// Names of flows and auxiliaries in evaluation order.
    pub fn evaluation_order(&self) -> Vec<&str> {
        self.order.iter().map(|(s, _)| self.names[*s].as_str()).collect()
    }

    pub(crate) fn stock_slot(&self, i: usize) -> usize {
        self.n_params + i
    }

    pub(crate) fn flow_slot(&self, i: usize) -> usize {
        self.n_params + self.n_stocks + i
    }

    pub(crate) fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn slot_name(&self, slot: usize) -> &str {
        &self.names[slot]
    }
}

pub fn validate_model(spec: &ModelSpec) -> Result<ValidatedModel, ModelError> {
    let mut kinds: HashMap<&str, Kind> = HashMap::new();
    for (name, kind) in spec.declarations() {
        if name == "t" {
            return Err(ModelError::ReservedName(name.to_string()));
        }
        if kinds.insert(name, kind).is_some() {
            return Err(ModelError::DuplicateName(name.to_string()));
        }
    }

    for p in &spec.params {
        if !p.value.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: p.name.clone(),
                reason: "value must be finite".into(),
            });
        }
    }

    let names: Vec<String> = spec
        .params
        .iter()
        .map(|p| p.name.clone())
        .chain(spec.stocks.iter().map(|s| s.name.clone()))
        .chain(spec.flows.iter().map(|f| f.name.clone()))
        .chain(spec.auxes.iter().map(|a| a.name.clone()))
        .collect();
    let slots: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let n_params = spec.params.len();
    let n_stocks = spec.stocks.len();
    let n_flows = spec.flows.len();

    let resolve = |from: &str, expr: &Expr| -> Result<Expr<Slot>, ModelError> {
        expr.try_map_vars(&mut |name: &String| {
            slots
                .get(name.as_str())
                .map(|&i| Slot(i))
                .ok_or_else(|| ModelError::UndefinedReference {
                    name: name.clone(),
                    referenced_from: from.to_string(),
                })
        })
    };

    let mut initials = Vec::with_capacity(n_stocks);
    let mut inflows = Vec::with_capacity(n_stocks);
    let mut outflows = Vec::with_capacity(n_stocks);
    for stock in &spec.stocks {
        let init = resolve(&stock.name, &stock.initial)?;
        let mut bad = None;
        init.visit_vars(&mut |s: &Slot| {
            if s.0 >= n_params && bad.is_none() {
                bad = Some(names[s.0].clone());
            }
        });
        if let Some(name) = bad {
            return Err(ModelError::InitialDependsOnState {
                stock: stock.name.clone(),
                name,
            });
        }
        initials.push(init);

        let wire = |list: &[String]| -> Result<Vec<usize>, ModelError> {
            list.iter()
                .map(|f| match kinds.get(f.as_str()) {
                    Some(Kind::Flow) => {
                        let idx = slots[f.as_str()] - n_params - n_stocks;
                        let flow = &spec.flows[idx];
                        if let (Some(fu), Some(su)) = (&flow.unit, &stock.unit) {
                            if fu != su {
                                return Err(ModelError::UnitMismatch {
                                    flow: f.clone(),
                                    stock: stock.name.clone(),
                                });
                            }
                        }
                        Ok(idx)
                    }
                    Some(_) => Err(ModelError::NotAFlow {
                        name: f.clone(),
                        stock: stock.name.clone(),
                    }),
                    None => Err(ModelError::UndefinedReference {
                        name: f.clone(),
                        referenced_from: stock.name.clone(),
                    }),
                })
                .collect()
        };
        inflows.push(wire(&stock.inflows)?);
        outflows.push(wire(&stock.outflows)?);
    }

    let vars: Vec<(&str, &Expr)> = spec
        .flows
        .iter()
        .chain(spec.auxes.iter())
        .map(|v| (v.name.as_str(), &v.rhs))
        .collect();
    let compiled: Vec<Expr<Slot>> = vars
        .iter()
        .map(|(name, rhs)| resolve(name, rhs))
        .collect::<Result<_, _>>()?;
    let first_var = n_params + n_stocks;
    let deps: Vec<Vec<usize>> = compiled
        .iter()
        .map(|e| {
            let mut d = Vec::new();
            e.visit_vars(&mut |s: &Slot| {
                if s.0 >= first_var && !d.contains(&(s.0 - first_var)) {
                    d.push(s.0 - first_var);
                }
            });
            d
        })
        .collect();
    let order = topo_order(&deps).map_err(|cycle| {
        ModelError::AlgebraicLoop(cycle.into_iter().map(|i| vars[i].0.to_string()).collect())
    })?;
    let order = order
        .into_iter()
        .map(|i| (first_var + i, compiled[i].clone()))
        .collect();

    let mut events = Vec::with_capacity(spec.events.len());
    for ev in &spec.events {
        if !(ev.interval.is_finite() && ev.interval > 0.0) {
            return Err(ModelError::InvalidEvent {
                event: ev.name.clone(),
                reason: "interval must be positive".into(),
            });
        }
        if !(ev.start.is_finite() && ev.start >= 0.0) {
            return Err(ModelError::InvalidEvent {
                event: ev.name.clone(),
                reason: "start must be non-negative".into(),
            });
        }
        let mut actions = Vec::with_capacity(ev.actions.len());
        for a in &ev.actions {
            let target = match kinds.get(a.target.as_str()) {
                Some(Kind::Stock) => slots[a.target.as_str()] - n_params,
                Some(_) => {
                    return Err(ModelError::NotAStock {
                        target: a.target.clone(),
                        event: ev.name.clone(),
                    })
                }
                None => {
                    return Err(ModelError::UndefinedReference {
                        name: a.target.clone(),
                        referenced_from: ev.name.clone(),
                    })
                }
            };
            actions.push(CompiledAction {
                target,
                op: a.op,
                amount: resolve(&ev.name, &a.amount)?,
            });
        }
        events.push(CompiledEvent {
            name: ev.name.clone(),
            start: ev.start,
            interval: ev.interval,
            actions,
        });
    }

    Ok(ValidatedModel {
        spec: spec.clone(),
        names,
        n_params,
        n_stocks,
        n_flows,
        initials,
        order,
        inflows,
        outflows,
        events,
    })
}

/// Depth-first topological sort. Nodes are visited in index order so the
/// result is deterministic. On a cycle, returns its members starting from the
/// first one entered.
fn topo_order(deps: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = deps.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut path: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        deps: &[Vec<usize>],
        mark: &mut [Mark],
        path: &mut Vec<usize>,
        order: &mut Vec<usize>,
    ) -> Result<(), Vec<usize>> {
        match mark[v] {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let at = path.iter().position(|&p| p == v).unwrap_or(0);
                return Err(path[at..].to_vec());
            }
            Mark::New => {}
        }
        mark[v] = Mark::Active;
        path.push(v);
        for &d in &deps[v] {
            visit(d, deps, mark, path, order)?;
        }
        path.pop();
        mark[v] = Mark::Done;
        order.push(v);
        Ok(())
    }

    for v in 0..n {
        visit(v, deps, &mut mark, &mut path, &mut order)?;
    }
    Ok(order)
}
