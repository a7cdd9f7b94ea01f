use std::fmt::Write as _;

use crate::expr::{BinOp, Expr};
use crate::model::ModelSpec;

const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 6;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Neg(_) => PREC_UNARY,
        Expr::Num(n) if n.is_sign_negative() => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let wrap = precedence(e) < min_prec;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Time => out.push('t'),
        Expr::Neg(inner) => {
            out.push('-');
            write_expr(out, inner, PREC_UNARY);
        }
        Expr::Binary(BinOp::Pow, a, b) => {
            write_expr(out, a, PREC_ATOM);
            out.push('^');
            write_expr(out, b, PREC_UNARY);
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write_expr(out, a, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, p + 1);
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Prints an expression with the fewest parentheses that still parse back to
/// the same tree.
pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn unit_suffix(unit: &Option<String>) -> String {
    unit.as_ref().map(|u| format!(" [{u}]")).unwrap_or_default()
}

/// Canonical `.sfd` text: header, parameters, stocks, auxiliaries, flows,
/// events, separated by blank lines.
pub fn format_model(spec: &ModelSpec) -> String {
    let mut sections: Vec<String> = Vec::new();

    if let Some(name) = &spec.name {
        sections.push(format!("model {name}{}\n", unit_suffix(&spec.currency)));
    }

    if !spec.params.is_empty() {
        let mut s = String::new();
        for p in &spec.params {
            let _ = writeln!(s, "param {} = {}{}", p.name, p.value, unit_suffix(&p.unit));
        }
        sections.push(s);
    }

    for st in &spec.stocks {
        let mut s = format!("stock {} {{\n", st.name);
        let _ = writeln!(s, "  initial = {}", format_expr(&st.initial));
        if let Some(u) = &st.unit {
            let _ = writeln!(s, "  unit = {u}");
        }
        if !st.inflows.is_empty() {
            let _ = writeln!(s, "  in = [{}]", st.inflows.join(", "));
        }
        if !st.outflows.is_empty() {
            let _ = writeln!(s, "  out = [{}]", st.outflows.join(", "));
        }
        s.push_str("}\n");
        sections.push(s);
    }

    for (keyword, list) in [("aux", &spec.auxes), ("flow", &spec.flows)] {
        if list.is_empty() {
            continue;
        }
        let mut s = String::new();
        for v in list {
            let _ = writeln!(
                s,
                "{keyword} {} = {}{}",
                v.name,
                format_expr(&v.rhs),
                unit_suffix(&v.unit)
            );
        }
        sections.push(s);
    }

    for ev in &spec.events {
        let mut s = format!("event {} every {} start {} {{\n", ev.name, ev.interval, ev.start);
        for a in &ev.actions {
            let _ = writeln!(s, "  {} {} {};", a.target, a.op.symbol(), format_expr(&a.amount));
        }
        s.push_str("}\n");
        sections.push(s);
    }

    sections.join("\n")
}
