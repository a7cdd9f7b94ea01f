use thiserror::Error;

pub const KEYWORDS: &[&str] = &[
    "model",
    "param",
    "stock",
    "flow",
    "aux",
    "event",
    "every",
    "start",
    "initial",
    "unit",
    "in",
    "out",
    "scenario",
    "set",
    "description",
];

const SYMBOLS: &[&str] = &[
    "+=", "-=", "<=", ">=", "=", "+", "-", "*", "/", "^", "<", ">", "(", ")", "[", "]", "{", "}",
    ",", ";",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Symbol,
}

impl TokenKind {
    pub fn label(self) -> &'static str {
        match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::Number => "number",
            TokenKind::String => "string",
            TokenKind::Symbol => "symbol",
        }
    }
}

/// A lexeme exactly as it appears in the source, with its 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_symbol(&self, s: &str) -> bool {
        self.is(TokenKind::Symbol, s)
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.is(TokenKind::Keyword, k)
    }

    pub fn number(&self) -> Option<f64> {
        match self.kind {
            TokenKind::Number => self.lexeme.parse().ok(),
            _ => None,
        }
    }

    /// Unescaped contents of a string token.
    pub fn string_value(&self) -> Option<String> {
        if self.kind != TokenKind::String {
            return None;
        }
        let inner = &self.lexeme[1..self.lexeme.len() - 1];
        let mut out = String::with_capacity(inner.len());
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            } else {
                out.push(c);
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{line}:{column}: unexpected character `{ch}`")]
    UnexpectedCharacter { ch: char, line: usize, column: usize },
    #[error("{line}:{column}: unterminated string")]
    UnterminatedString { line: usize, column: usize },
}

impl LexError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            LexError::UnexpectedCharacter { line, column, .. } => (line, column),
            LexError::UnterminatedString { line, column } => (line, column),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

/// Splits source text into tokens, dropping whitespace and `#` comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            cur.eat_while(|c| c != '\n');
            continue;
        }
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            cur.eat_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') {
                cur.bump();
                cur.eat_while(|c| c.is_ascii_digit());
            }
            if matches!(cur.peek(), Some('e' | 'E')) {
                let digit_after = match cur.peek_at(1) {
                    Some('+' | '-') => cur.peek_at(2).is_some_and(|c| c.is_ascii_digit()),
                    Some(d) => d.is_ascii_digit(),
                    None => false,
                };
                if digit_after {
                    cur.bump();
                    if matches!(cur.peek(), Some('+' | '-')) {
                        cur.bump();
                    }
                    cur.eat_while(|c| c.is_ascii_digit());
                }
            }
            TokenKind::Number
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\\') => {
                        cur.bump();
                    }
                    Some('\n') | None => return Err(LexError::UnterminatedString { line, column }),
                    Some(_) => {}
                }
            }
            TokenKind::String
        } else if let Some(sym) = SYMBOLS.iter().find(|s| source[start..].starts_with(**s)) {
            for _ in 0..sym.len() {
                cur.bump();
            }
            TokenKind::Symbol
        } else {
            return Err(LexError::UnexpectedCharacter { ch: c, line, column });
        };
        tokens.push(Token {
            kind,
            lexeme: source[start..cur.pos].to_string(),
            line,
            column,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<(TokenKind, std::string::String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn param_declaration() {
        let toks = kinds("param TotalCapacity = 18000 [m3]");
        let expect = [
            (Keyword, "param"),
            (Identifier, "TotalCapacity"),
            (Symbol, "="),
            (Number, "18000"),
            (Symbol, "["),
            (Identifier, "m3"),
            (Symbol, "]"),
        ];
        assert_eq!(toks.len(), expect.len());
        for ((k, l), (ek, el)) in toks.iter().zip(expect) {
            assert_eq!((*k, l.as_str()), (ek, el));
        }
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn scientific_notation() {
        let toks = tokenize("flow x = 1e-3*y").unwrap();
        assert_eq!(toks[3].lexeme, "1e-3");
        assert_eq!(toks[3].number(), Some(0.001));
        assert_eq!(toks[4].lexeme, "*");
    }

    #[test]
    fn exponent_needs_digits() {
        let toks = kinds("2e");
        assert_eq!(toks, vec![(Number, "2".into()), (Identifier, "e".into())]);
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("a\n  bb = 1").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[1].line, toks[1].column), (2, 3));
        assert_eq!((toks[2].line, toks[2].column), (2, 6));
    }

    #[test]
    fn compound_symbols() {
        let toks = kinds("S -= 1; S += 2; a <= b");
        assert_eq!(toks[1].1, "-=");
        assert_eq!(toks[5].1, "+=");
        assert_eq!(toks[9].1, "<=");
    }

    #[test]
    fn strings_keep_quotes_in_lexeme() {
        let toks = tokenize(r#"description "a \"b\"""#).unwrap();
        assert_eq!(toks[1].lexeme, r#""a \"b\"""#);
        assert_eq!(toks[1].string_value().unwrap(), r#"a "b""#);
    }

    #[test]
    fn unexpected_character() {
        assert_eq!(
            tokenize("param A = 1\n  @").unwrap_err(),
            LexError::UnexpectedCharacter {
                ch: '@',
                line: 2,
                column: 3
            }
        );
    }

    #[test]
    fn lexemes_round_trip_to_source() {
        let src = "stock S { initial = 2.5e+3 unit = kg }";
        for tok in tokenize(src).unwrap() {
            let line = src.lines().nth(tok.line - 1).unwrap();
            assert!(line[tok.column - 1..].starts_with(&tok.lexeme));
        }
    }
}
