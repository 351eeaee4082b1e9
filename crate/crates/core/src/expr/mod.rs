//! The expression language for metric components, map components and
//! scalar fields.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          right-associative
//! primary := number | "pi" | xN | func "(" expr ("," expr)* ")" | "(" expr ")"
//! func    := sin | cos | tan | exp | log | sqrt | abs | atan2
//! ```
//!
//! Unary minus binds looser than `^`, so `-x1^2` is `-(x1^2)`. Variables are
//! 1-based (`x1..xn`). There is no implicit multiplication.

mod eval;
mod parser;

use std::fmt;

use thiserror::Error;

pub use eval::EvalFlags;
pub use parser::parse;

/// Byte range `[start, end)` of a node in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan2,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Atan2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan2 => "atan2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// Non-negative literal.
    Const(f64),
    Pi,
    /// 0-based coordinate index.
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow {
        base: Box<Node>,
        exp: Box<Node>,
        /// Value of `exp` when it contains no variables.
        const_exp: Option<f64>,
    },
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl Node {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        Node { kind, span }
    }

    /// Builds a power node, folding a variable-free exponent.
    pub fn pow(base: Node, exp: Node, span: Span) -> Self {
        let const_exp = exp.constant_value();
        Node::new(
            NodeKind::Pow {
                base: Box::new(base),
                exp: Box::new(exp),
                const_exp,
            },
            span,
        )
    }

    /// Value of a variable-free subtree, if it evaluates to a finite real.
    pub fn constant_value(&self) -> Option<f64> {
        if self.max_var().is_some() {
            return None;
        }
        eval::eval_node::<f64>(self, &[], &mut EvalFlags::default())
            .ok()
            .filter(|v| v.is_finite())
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &self.kind {
            NodeKind::Const(_) | NodeKind::Pi => None,
            NodeKind::Var(i) => Some(*i),
            NodeKind::Neg(a) => a.max_var(),
            NodeKind::Binary(_, a, b) | NodeKind::Pow { base: a, exp: b, .. } => a.max_var().max(b.max_var()),
            NodeKind::Call(_, args) => args.iter().filter_map(Node::max_var).max(),
        }
    }

    /// Structural equality ignoring spans.
    pub fn same_structure(&self, other: &Node) -> bool {
        use NodeKind::*;
        match (&self.kind, &other.kind) {
            (Const(a), Const(b)) => a == b,
            (Pi, Pi) => true,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a.same_structure(b),
            (Binary(o1, a1, b1), Binary(o2, a2, b2)) => o1 == o2 && a1.same_structure(a2) && b1.same_structure(b2),
            (Pow { base: a1, exp: b1, .. }, Pow { base: a2, exp: b2, .. }) => {
                a1.same_structure(a2) && b1.same_structure(b2)
            }
            (Call(f1, x1), Call(f2, x2)) => {
                f1 == f2 && x1.len() == x2.len() && x1.iter().zip(x2).all(|(a, b)| a.same_structure(b))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Node {
    /// Fully parenthesized rendering that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Const(c) => write!(f, "{c:?}"),
            NodeKind::Pi => f.write_str("pi"),
            NodeKind::Var(i) => write!(f, "x{}", i + 1),
            NodeKind::Neg(a) => write!(f, "(-{a})"),
            NodeKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            NodeKind::Pow { base, exp, .. } => write!(f, "({base} ^ {exp})"),
            NodeKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed expression in the coordinates `x1..x_arity`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    arity: usize,
    source: String,
}

impl Expression {
    pub fn parse(src: &str, arity: usize) -> Result<Self, ParseError> {
        parse(src, arity)
    }

    pub(crate) fn from_parts(root: Node, arity: usize, source: String) -> Self {
        Expression { root, arity, source }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The text this expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` at offset {offset} is out of range for arity {arity}")]
    VariableOutOfRange { name: String, offset: usize, arity: usize },

    #[error("numeric literal `{text}` at offset {offset} is not a finite number")]
    BadNumber { text: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::VariableOutOfRange { offset, .. }
            | ParseError::BadNumber { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{func} is undefined at {value} (offset {offset})")]
    Domain { func: String, offset: usize, value: f64 },

    #[error("division by zero at offset {offset}")]
    DivisionByZero { offset: usize },

    #[error("non-finite result of {op} at offset {offset}")]
    NonFinite { op: String, offset: usize },

    #[error("expected {expected} coordinates, found {found}")]
    Arity { expected: usize, found: usize },
}
