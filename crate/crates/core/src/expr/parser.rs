use super::{BinOp, Expression, Func, Node, NodeKind, ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::BadNumber {
                text: text.into(),
                offset: start,
            })?;
            if !v.is_finite() {
                return Err(ParseError::BadNumber {
                    text: text.into(),
                    offset: start,
                });
            }
            out.push(Token {
                tok: Tok::Num(v),
                span: Span { start, end: i },
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].into()),
                span: Span { start, end: i },
            });
        } else if b"+-*/^(),".contains(&c) {
            i += 1;
            out.push(Token {
                tok: Tok::Sym(c as char),
                span: Span { start, end: i },
            });
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                offset: start,
                expected: vec!["expression".into()],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: src.len(),
            end: src.len(),
        },
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    arity: usize,
}

const OPERAND: &[&str] = &["number", "variable", "`pi`", "function", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            offset: t.span.start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn expect_sym(&mut self, c: char, also: &[&str]) -> Result<Token, ParseError> {
        if self.at_sym(c) {
            Ok(self.bump())
        } else {
            let want = format!("`{c}`");
            let mut expected: Vec<&str> = vec![&want];
            expected.extend_from_slice(also);
            Err(self.error(&expected))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.at_sym('-') {
            let minus = self.bump();
            let inner = self.unary()?;
            let span = Span {
                start: minus.span.start,
                end: inner.span.end,
            };
            return Ok(Node::new(NodeKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.at_sym('^') {
            self.bump();
            let exp = self.unary()?;
            let span = Span {
                start: base.span.start,
                end: exp.span.end,
            };
            return Ok(Node::pow(base, exp, span));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::new(NodeKind::Const(*v), t.span))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                let close = self.expect_sym(')', &["operator"])?;
                Ok(Node::new(
                    inner.kind,
                    Span {
                        start: t.span.start,
                        end: close.span.end,
                    },
                ))
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(name, t.span)
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn identifier(&mut self, name: &str, span: Span) -> Result<Node, ParseError> {
        if name == "pi" {
            return Ok(Node::new(NodeKind::Pi, span));
        }
        if let Some(func) = Func::from_name(name) {
            self.expect_sym('(', &[])?;
            let mut args = vec![self.expr()?];
            while args.len() < func.arity() {
                self.expect_sym(',', &["operator"])?;
                args.push(self.expr()?);
            }
            let close = self.expect_sym(')', &["operator"])?;
            return Ok(Node::new(
                NodeKind::Call(func, args),
                Span {
                    start: span.start,
                    end: close.span.end,
                },
            ));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let out_of_range = || ParseError::VariableOutOfRange {
                    name: name.into(),
                    offset: span.start,
                    arity: self.arity,
                };
                let k: usize = digits.parse().map_err(|_| out_of_range())?;
                if k == 0 || k > self.arity {
                    return Err(out_of_range());
                }
                return Ok(Node::new(NodeKind::Var(k - 1), span));
            }
        }
        Err(ParseError::UnknownIdentifier {
            name: name.into(),
            offset: span.start,
        })
    }
}

/// Parses `src` as an expression in `arity` coordinates.
pub fn parse(src: &str, arity: usize) -> Result<Expression, ParseError> {
    let mut p = Parser {
        tokens: lex(src)?,
        pos: 0,
        arity,
    };
    let root = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(Expression::from_parts(root, arity, src.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_and_call_shape() {
        let e = parse("x1^2 + sin(x2)", 2).unwrap();
        match &e.root().kind {
            NodeKind::Binary(BinOp::Add, a, b) => {
                assert!(matches!(&a.kind, NodeKind::Pow { const_exp: Some(c), .. } if *c == 2.0));
                assert!(matches!(&b.kind, NodeKind::Call(Func::Sin, args) if args.len() == 1));
            }
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn disk_factor_parses() {
        let e = parse("4/(1 - x1^2 - x2^2)^2", 2).unwrap();
        assert!(matches!(e.root().kind, NodeKind::Binary(BinOp::Div, _, _)));
    }

    #[test]
    fn trailing_operator_offset() {
        let err = parse("x3 +", 3).unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn identifier_errors() {
        assert!(matches!(
            parse("y1", 2),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(parse("x0", 2), Err(ParseError::VariableOutOfRange { .. })));
        assert!(matches!(
            parse("1 + x3", 2),
            Err(ParseError::VariableOutOfRange { offset: 4, .. })
        ));
        assert!(matches!(parse("2x1", 1), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("1e999", 0), Err(ParseError::BadNumber { .. })));
        assert!(matches!(parse("sin x1", 1), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(parse("atan2(x1)", 1).is_err());
        assert!(parse("", 1).is_err());
        assert!(parse("x1 $ 2", 1).is_err());
    }

    #[test]
    fn literals() {
        for (s, v) in [("2.5e-3", 2.5e-3), (".5", 0.5), ("3.", 3.0), ("1E2", 100.0)] {
            let e = parse(s, 0).unwrap();
            assert_eq!(e.root().kind, NodeKind::Const(v), "{s}");
        }
    }
}
