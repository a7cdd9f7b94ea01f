//! `.scn` files: named parameter and event-schedule overrides.
//!
//! ```text
//! scenario coagulant {
//!   description "Coagulant dosing at 30 mg/L";
//!   set Dose = 30;
//!   event pickup every 15 start 15;
//! }
//! ```

use std::fmt::Write as _;

use super::lexer::{tokenize, TokenKind};
use super::parser::{PResult, Parser};
use super::{sort_diagnostics, ParseDiagnostic};
use crate::scenario::{EventOverride, Scenario};

fn scenario(p: &mut Parser) -> PResult<Scenario> {
    p.expect_keyword("scenario")?;
    let name = p.expect_ident()?.lexeme;
    p.expect_symbol("{")?;
    let mut sc = Scenario::named(name);
    while !p.eat_symbol("}") {
        if p.eat_keyword("set") {
            let key = p.expect_ident()?.lexeme;
            p.expect_symbol("=")?;
            let value = p.expect_signed_number()?;
            sc.parameter_overrides.insert(key, value);
        } else if p.eat_keyword("event") {
            let key = p.expect_ident()?.lexeme;
            let entry = sc.event_overrides.entry(key).or_default();
            if p.eat_keyword("every") {
                entry.interval = Some(p.expect_number()?);
            }
            if p.eat_keyword("start") {
                entry.start = Some(p.expect_number()?);
            }
        } else if p.eat_keyword("description") {
            match p.peek().filter(|t| t.kind == TokenKind::String) {
                Some(t) => {
                    sc.description = t.string_value().unwrap_or_default();
                    p.advance();
                }
                None => return p.error("string"),
            }
        } else {
            return p.error("`set`, `event`, `description` or `}`");
        }
        p.eat_symbol(";");
    }
    Ok(sc)
}

/// Parses every `scenario` block in `source`.
pub fn parse_scenarios(source: &str) -> Result<Vec<Scenario>, Vec<ParseDiagnostic>> {
    let tokens = tokenize(source).map_err(|e| {
        let (line, column) = e.position();
        vec![ParseDiagnostic::error("lex", e.to_string(), line, column)]
    })?;
    let mut p = Parser::new(source, tokens);
    let mut out: Vec<Scenario> = Vec::new();
    let mut diags = Vec::new();
    while !p.at_end() {
        let (line, column) = p.here();
        let start = p.pos;
        match scenario(&mut p) {
            Ok(sc) => {
                if out.iter().any(|o| o.name == sc.name) {
                    diags.push(ParseDiagnostic::error(
                        "duplicate",
                        format!("duplicate scenario `{}`", sc.name),
                        line,
                        column,
                    ));
                } else {
                    out.push(sc);
                }
            }
            Err(d) => {
                diags.push(d);
                p.recover(start);
            }
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        sort_diagnostics(&mut diags);
        Err(diags)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn format_scenarios(scenarios: &[Scenario]) -> String {
    let blocks: Vec<String> = scenarios
        .iter()
        .map(|sc| {
            let mut s = format!("scenario {} {{\n", sc.name);
            if !sc.description.is_empty() {
                let _ = writeln!(s, "  description {};", quote(&sc.description));
            }
            for (k, v) in &sc.parameter_overrides {
                let _ = writeln!(s, "  set {k} = {v};");
            }
            for (k, EventOverride { interval, start }) in &sc.event_overrides {
                let _ = write!(s, "  event {k}");
                if let Some(i) = interval {
                    let _ = write!(s, " every {i}");
                }
                if let Some(st) = start {
                    let _ = write!(s, " start {st}");
                }
                s.push_str(";\n");
            }
            s.push_str("}\n");
            s
        })
        .collect();
    blocks.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_item_kinds() {
        let src = r#"
            scenario transport {
              description "Weekly pickups, two trucks"
              set TrucksPerPickup = 2;
              event pickup every 7 start 7;
            }
            scenario empty { }
        "#;
        let scs = parse_scenarios(src).unwrap();
        assert_eq!(scs.len(), 2);
        assert_eq!(scs[0].description, "Weekly pickups, two trucks");
        assert_eq!(scs[0].parameter_overrides["TrucksPerPickup"], 2.0);
        assert_eq!(
            scs[0].event_overrides["pickup"],
            EventOverride {
                interval: Some(7.0),
                start: Some(7.0)
            }
        );
        assert_eq!(scs[1], Scenario::named("empty"));
    }

    #[test]
    fn format_round_trip() {
        let src = "scenario a { set X = -1.5; event e every 3; description \"q\\\"uote\"; }";
        let scs = parse_scenarios(src).unwrap();
        assert_eq!(parse_scenarios(&format_scenarios(&scs)).unwrap(), scs);
    }

    #[test]
    fn errors_are_located() {
        let err = parse_scenarios("scenario a { set = 3; }").unwrap_err();
        assert_eq!((err[0].line, err[0].column), (1, 18));
    }
}
