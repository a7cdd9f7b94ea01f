use super::{sort_diagnostics, ParseDiagnostic, Positions};
use crate::model::{Kind, ModelSpec};

const RULE: &str = "parameters and stocks begin with a capital letter, flows and auxiliaries with a lowercase letter";

/// Naming-convention warnings without source positions (line/column 0).
pub fn lint_naming(spec: &ModelSpec) -> Vec<ParseDiagnostic> {
    lint_naming_at(spec, &Positions::new())
}

/// Naming-convention warnings, located through `positions` where known.
pub fn lint_naming_at(spec: &ModelSpec, positions: &Positions) -> Vec<ParseDiagnostic> {
    let mut out = Vec::new();
    for (name, kind) in spec.declarations() {
        let Some(first) = name.chars().next() else {
            continue;
        };
        let wants_upper = match kind {
            Kind::Param | Kind::Stock => true,
            Kind::Flow | Kind::Aux => false,
            Kind::Event => continue,
        };
        let violates = if wants_upper {
            first.is_lowercase()
        } else {
            first.is_uppercase()
        };
        if violates {
            let (line, column) = positions.get(name).copied().unwrap_or((0, 0));
            let case = if wants_upper { "an uppercase" } else { "a lowercase" };
            out.push(ParseDiagnostic::warning(
                "naming",
                format!("{} `{name}` should start with {case} letter ({RULE})", kind.label()),
                line,
                column,
            ));
        }
    }
    sort_diagnostics(&mut out);
    out
}
