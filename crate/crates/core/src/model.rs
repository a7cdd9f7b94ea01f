//! Declarative model description: parameters, stocks, flows, auxiliaries and
//! scheduled events.

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDef {
    pub name: String,
    pub value: f64,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockDef {
    pub name: String,
    pub initial: Expr,
    pub unit: Option<String>,
    pub inflows: Vec<String>,
    pub outflows: Vec<String>,
}

/// A flow or auxiliary. Flow units are the unit of the stock they move,
/// per day.
#[derive(Debug, Clone, PartialEq)]
pub struct VarDef {
    pub name: String,
    pub rhs: Expr,
    pub unit: Option<String>,
}

pub type FlowDef = VarDef;
pub type AuxDef = VarDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionOp {
    Set,
    Add,
    /// Removes `min(stock, max(amount, 0))`.
    SubtractClampedAtZero,
}

impl ActionOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ActionOp::Set => "=",
            ActionOp::Add => "+=",
            ActionOp::SubtractClampedAtZero => "-=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventAction {
    pub target: String,
    pub op: ActionOp,
    pub amount: Expr,
}

/// Fires at `start + k * interval` for every `k >= 0` inside the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct EventDef {
    pub name: String,
    pub start: f64,
    pub interval: f64,
    pub actions: Vec<EventAction>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpec {
    pub name: Option<String>,
    pub currency: Option<String>,
    pub params: Vec<ParamDef>,
    pub stocks: Vec<StockDef>,
    pub flows: Vec<FlowDef>,
    pub auxes: Vec<AuxDef>,
    pub events: Vec<EventDef>,
}

/// Declaration category of a model name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Param,
    Stock,
    Flow,
    Aux,
    Event,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Param => "parameter",
            Kind::Stock => "stock",
            Kind::Flow => "flow",
            Kind::Aux => "auxiliary",
            Kind::Event => "event",
        }
    }
}

impl ModelSpec {
    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut ParamDef> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    pub fn param_value(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.value)
    }

    pub fn stock(&self, name: &str) -> Option<&StockDef> {
        self.stocks.iter().find(|s| s.name == name)
    }

    pub fn event(&self, name: &str) -> Option<&EventDef> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn event_mut(&mut self, name: &str) -> Option<&mut EventDef> {
        self.events.iter_mut().find(|e| e.name == name)
    }

    /// Every declared name with its category, in category then declaration order.
    pub fn declarations(&self) -> impl Iterator<Item = (&str, Kind)> {
        let p = self.params.iter().map(|d| (d.name.as_str(), Kind::Param));
        let s = self.stocks.iter().map(|d| (d.name.as_str(), Kind::Stock));
        let f = self.flows.iter().map(|d| (d.name.as_str(), Kind::Flow));
        let a = self.auxes.iter().map(|d| (d.name.as_str(), Kind::Aux));
        let e = self.events.iter().map(|d| (d.name.as_str(), Kind::Event));
        p.chain(s).chain(f).chain(a).chain(e)
    }

    pub fn kind_of(&self, name: &str) -> Option<Kind> {
        self.declarations().find(|(n, _)| *n == name).map(|(_, k)| k)
    }

    pub fn is_empty(&self) -> bool {
        self.name.is_none()
            && self.currency.is_none()
            && self.params.is_empty()
            && self.stocks.is_empty()
            && self.flows.is_empty()
            && self.auxes.is_empty()
            && self.events.is_empty()
    }
}
