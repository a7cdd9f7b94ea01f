use std::collections::HashMap;

use super::lexer::{tokenize, Token, TokenKind};
use super::{sort_diagnostics, ParseDiagnostic};
use crate::expr::{BinOp, Expr, Func};
use crate::model::{ActionOp, EventAction, EventDef, ModelSpec, ParamDef, StockDef, VarDef};

const STATEMENT_KEYWORDS: &[&str] = &["model", "param", "stock", "flow", "aux", "event", "scenario"];

/// Declaration name → (line, column) of its name token.
pub type Positions = HashMap<String, (usize, usize)>;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    /// Present iff there are no error diagnostics.
    pub spec: Option<ModelSpec>,
    pub diagnostics: Vec<ParseDiagnostic>,
    pub positions: Positions,
}

impl ParseOutcome {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    pub fn into_result(self) -> Result<ModelSpec, Vec<ParseDiagnostic>> {
        match self.spec {
            Some(spec) => Ok(spec),
            None => Err(self.diagnostics),
        }
    }
}

pub(super) type PResult<T> = Result<T, ParseDiagnostic>;

pub(super) struct Parser {
    tokens: Vec<Token>,
    pub(super) pos: usize,
    end: (usize, usize),
}

impl Parser {
    pub(super) fn new(source: &str, tokens: Vec<Token>) -> Self {
        let line = source.split('\n').count().max(1);
        let column = source.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Parser {
            tokens,
            pos: 0,
            end: (line, column),
        }
    }

    pub(super) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    pub(super) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(super) fn advance(&mut self) {
        self.pos = (self.pos + 1).min(self.tokens.len());
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    pub(super) fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.column))
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!("{} `{}`", t.kind.label(), t.lexeme),
            None => "end of input".to_string(),
        }
    }

    pub(super) fn error<T>(&self, what: &str) -> PResult<T> {
        let (line, column) = self.here();
        Err(ParseDiagnostic::error(
            "syntax",
            format!("expected {what}, found {}", self.found()),
            line,
            column,
        ))
    }

    pub(super) fn eat_symbol(&mut self, s: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_symbol(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(super) fn eat_keyword(&mut self, k: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_keyword(k)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(super) fn expect_symbol(&mut self, s: &str) -> PResult<()> {
        if self.eat_symbol(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    pub(super) fn expect_keyword(&mut self, k: &str) -> PResult<()> {
        if self.eat_keyword(k) {
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    pub(super) fn expect_ident(&mut self) -> PResult<Token> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump().unwrap()),
            _ => self.error("identifier"),
        }
    }

    pub(super) fn expect_number(&mut self) -> PResult<f64> {
        match self.peek().and_then(Token::number) {
            Some(v) => {
                self.pos += 1;
                Ok(v)
            }
            None => self.error("number"),
        }
    }

    /// A number literal with an optional leading minus.
    pub(super) fn expect_signed_number(&mut self) -> PResult<f64> {
        let negative = self.eat_symbol("-");
        let v = self.expect_number()?;
        Ok(if negative { -v } else { v })
    }

    fn unit(&mut self) -> PResult<Option<String>> {
        if self.eat_symbol("[") {
            let name = self.expect_ident()?.lexeme;
            self.expect_symbol("]")?;
            Ok(Some(name))
        } else {
            Ok(None)
        }
    }

    /// Skips to the next statement keyword, always making progress.
    /// Skips to the next statement keyword after a failed statement that
    /// began at token `start`, always making progress.
    pub(super) fn recover(&mut self, start: usize) {
        if self.pos <= start {
            self.pos = start + 1;
        }
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && STATEMENT_KEYWORDS.contains(&t.lexeme.as_str()) {
                break;
            }
            self.pos += 1;
        }
    }

    // expr := cmp
    pub(super) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.kind == TokenKind::Symbol => match t.lexeme.as_str() {
                    "<" => BinOp::Lt,
                    "<=" => BinOp::Le,
                    ">" => BinOp::Gt,
                    ">=" => BinOp::Ge,
                    "=" => BinOp::Eq,
                    _ => break,
                },
                _ => break,
            };
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_symbol("+") {
                BinOp::Add
            } else if self.eat_symbol("-") {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_symbol("*") {
                BinOp::Mul
            } else if self.eat_symbol("/") {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_symbol("-") {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    // right-associative; the exponent may carry its own unary minus
    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat_symbol("^") {
            let exp = self.unary()?;
            Ok(Expr::binary(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("expression");
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                Ok(Expr::Num(tok.number().expect("lexer only emits valid numbers")))
            }
            TokenKind::Identifier if self.peek_at(1).is_some_and(|t| t.is_symbol("(")) => {
                let Some(func) = Func::from_name(&tok.lexeme) else {
                    return Err(ParseDiagnostic::error(
                        "syntax",
                        format!("unknown function `{}`", tok.lexeme),
                        tok.line,
                        tok.column,
                    ));
                };
                self.pos += 2;
                let mut args = Vec::new();
                if !self.eat_symbol(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.eat_symbol(")") {
                            break;
                        }
                        self.expect_symbol(",")?;
                    }
                }
                let (lo, hi) = func.arity();
                if args.len() < lo || args.len() > hi {
                    return Err(ParseDiagnostic::error(
                        "syntax",
                        format!("`{}` takes {} argument(s), got {}", func.name(), arity_text(lo, hi), args.len()),
                        tok.line,
                        tok.column,
                    ));
                }
                Ok(Expr::Call(func, args))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                if tok.lexeme == "t" {
                    Ok(Expr::Time)
                } else {
                    Ok(Expr::Var(tok.lexeme))
                }
            }
            TokenKind::Symbol if tok.lexeme == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_symbol(")")?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }
}

fn arity_text(lo: usize, hi: usize) -> String {
    if lo == hi {
        lo.to_string()
    } else {
        format!("at least {lo}")
    }
}

/// Parses a standalone expression such as `min(a, 2) * t`.
pub fn parse_expr(source: &str) -> Result<Expr, ParseDiagnostic> {
    let tokens = tokenize(source).map_err(|e| {
        let (line, column) = e.position();
        ParseDiagnostic::error("lex", e.to_string(), line, column)
    })?;
    let mut p = Parser::new(source, tokens);
    let e = p.expr()?;
    if !p.at_end() {
        return p.error("end of expression");
    }
    Ok(e)
}

struct ModelParser {
    p: Parser,
    spec: ModelSpec,
    diags: Vec<ParseDiagnostic>,
    positions: Positions,
}

impl ModelParser {
    fn declare(&mut self, name: &Token) {
        if name.lexeme == "t" {
            self.diags.push(ParseDiagnostic::error(
                "reserved",
                "`t` is reserved for simulation time",
                name.line,
                name.column,
            ));
            return;
        }
        if let Some((l, c)) = self.positions.get(&name.lexeme) {
            let msg = format!("duplicate declaration of `{}` (first declared at {l}:{c})", name.lexeme);
            self.diags
                .push(ParseDiagnostic::error("duplicate", msg, name.line, name.column));
        } else {
            self.positions
                .insert(name.lexeme.clone(), (name.line, name.column));
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let p = &mut self.p;
        if p.eat_keyword("model") {
            let name = p.expect_ident()?.lexeme;
            let currency = p.unit()?;
            self.spec.name = Some(name);
            self.spec.currency = currency;
        } else if p.eat_keyword("param") {
            let name = p.expect_ident()?;
            p.expect_symbol("=")?;
            let value = p.expect_signed_number()?;
            let unit = p.unit()?;
            self.declare(&name);
            self.spec.params.push(ParamDef {
                name: name.lexeme,
                value,
                unit,
            });
        } else if p.eat_keyword("stock") {
            let name = p.expect_ident()?;
            p.expect_symbol("{")?;
            p.expect_keyword("initial")?;
            p.expect_symbol("=")?;
            let initial = p.expr()?;
            let mut unit = None;
            if p.eat_keyword("unit") {
                p.expect_symbol("=")?;
                unit = Some(p.expect_ident()?.lexeme);
            }
            let inflows = if p.eat_keyword("in") { ident_list(p)? } else { Vec::new() };
            let outflows = if p.eat_keyword("out") { ident_list(p)? } else { Vec::new() };
            p.expect_symbol("}")?;
            self.declare(&name);
            self.spec.stocks.push(StockDef {
                name: name.lexeme,
                initial,
                unit,
                inflows,
                outflows,
            });
        } else if p.peek().is_some_and(|t| t.is_keyword("flow") || t.is_keyword("aux")) {
            let is_flow = p.eat_keyword("flow");
            if !is_flow {
                p.expect_keyword("aux")?;
            }
            let name = p.expect_ident()?;
            p.expect_symbol("=")?;
            let rhs = p.expr()?;
            let unit = p.unit()?;
            self.declare(&name);
            let def = VarDef {
                name: name.lexeme,
                rhs,
                unit,
            };
            if is_flow {
                self.spec.flows.push(def);
            } else {
                self.spec.auxes.push(def);
            }
        } else if p.eat_keyword("event") {
            let name = p.expect_ident()?;
            p.expect_keyword("every")?;
            let interval = p.expect_number()?;
            p.expect_keyword("start")?;
            let start = p.expect_number()?;
            p.expect_symbol("{")?;
            let mut actions = Vec::new();
            while !p.eat_symbol("}") {
                let target = p.expect_ident()?.lexeme;
                let op = if p.eat_symbol("=") {
                    ActionOp::Set
                } else if p.eat_symbol("+=") {
                    ActionOp::Add
                } else if p.eat_symbol("-=") {
                    ActionOp::SubtractClampedAtZero
                } else {
                    return p.error("`=`, `+=` or `-=`");
                };
                let amount = p.expr()?;
                p.expect_symbol(";")?;
                actions.push(EventAction { target, op, amount });
            }
            self.declare(&name);
            self.spec.events.push(EventDef {
                name: name.lexeme,
                start,
                interval,
                actions,
            });
        } else {
            return p.error("declaration (`param`, `stock`, `flow`, `aux` or `event`)");
        }
        Ok(())
    }
}

fn ident_list(p: &mut Parser) -> PResult<Vec<String>> {
    p.expect_symbol("=")?;
    p.expect_symbol("[")?;
    let mut out = Vec::new();
    if p.eat_symbol("]") {
        return Ok(out);
    }
    loop {
        out.push(p.expect_ident()?.lexeme);
        if p.eat_symbol("]") {
            return Ok(out);
        }
        p.expect_symbol(",")?;
    }
}

/// Parses `.sfd` source. Errors leave `spec` empty; diagnostics are sorted by
/// position.
pub fn parse_model(source: &str) -> ParseOutcome {
    let tokens = match tokenize(source) {
        Ok(t) => t,
        Err(e) => {
            let (line, column) = e.position();
            return ParseOutcome {
                spec: None,
                diagnostics: vec![ParseDiagnostic::error("lex", e.to_string(), line, column)],
                positions: Positions::new(),
            };
        }
    };
    let mut mp = ModelParser {
        p: Parser::new(source, tokens),
        spec: ModelSpec::default(),
        diags: Vec::new(),
        positions: Positions::new(),
    };
    while !mp.p.at_end() {
        let start = mp.p.pos;
        if let Err(d) = mp.statement() {
            mp.diags.push(d);
            mp.p.recover(start);
        }
    }
    sort_diagnostics(&mut mp.diags);
    let ok = !mp.diags.iter().any(ParseDiagnostic::is_error);
    ParseOutcome {
        spec: ok.then_some(mp.spec),
        diagnostics: mp.diags,
        positions: mp.positions,
    }
}
