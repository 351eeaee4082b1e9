use super::{BinOp, EvalError, Expression, Func, Node, NodeKind};
use crate::autodiff::CoordinateFn;
use crate::error::Result;
use crate::scalar::{Real, Scalar};

/// Conditions noticed during evaluation that do not abort it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalFlags {
    /// `abs` was evaluated exactly at 0, where its derivative is taken as 0.
    pub abs_kink: bool,
}

impl Expression {
    /// Evaluates at `x` over any scalar type.
    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> Result<S, EvalError> {
        self.evaluate_with_flags(x).map(|(v, _)| v)
    }

    pub fn evaluate_with_flags<S: Scalar>(&self, x: &[S]) -> Result<(S, EvalFlags), EvalError> {
        if x.len() != self.arity() {
            return Err(EvalError::Arity {
                expected: self.arity(),
                found: x.len(),
            });
        }
        let mut flags = EvalFlags::default();
        let v = eval_node(self.root(), x, &mut flags)?;
        Ok((v, flags))
    }
}

impl<T: Real> CoordinateFn<T> for Expression {
    fn input_dim(&self) -> usize {
        self.arity()
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn eval<S: Scalar<Real = T>>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![self.evaluate(x)?])
    }
}

fn finite<S: Scalar>(v: S, node: &Node, op: &str) -> Result<S, EvalError> {
    if v.all_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite {
            op: op.into(),
            offset: node.span.start,
        })
    }
}

fn domain<S: Scalar>(func: &str, node: &Node, at: S) -> EvalError {
    EvalError::Domain {
        func: func.into(),
        offset: node.span.start,
        value: at.re().to_f64_lossy(),
    }
}

pub(super) fn eval_node<S: Scalar>(node: &Node, x: &[S], flags: &mut EvalFlags) -> Result<S, EvalError> {
    let lit = |v: f64| S::constant(S::Real::lit(v));
    let zero = S::Real::lit(0.0);
    match &node.kind {
        NodeKind::Const(c) => Ok(lit(*c)),
        NodeKind::Pi => Ok(S::constant(S::Real::PI)),
        NodeKind::Var(i) => x.get(*i).copied().ok_or(EvalError::Arity {
            expected: i + 1,
            found: x.len(),
        }),
        NodeKind::Neg(a) => Ok(-eval_node(a, x, flags)?),
        NodeKind::Binary(op, a, b) => {
            let denom = b;
            let a = eval_node(a, x, flags)?;
            let b = eval_node(b, x, flags)?;
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.re() == zero {
                        return Err(EvalError::DivisionByZero {
                            offset: denom.span.start,
                        });
                    }
                    a / b
                }
            };
            finite(v, node, op.symbol())
        }
        NodeKind::Pow { base, exp, const_exp } => {
            let b = eval_node(base, x, flags)?;
            let v = match const_exp {
                Some(e) if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 => {
                    if *e < 0.0 && b.re() == zero {
                        return Err(EvalError::DivisionByZero {
                            offset: node.span.start,
                        });
                    }
                    b.powi(*e as i32)
                }
                Some(e) => {
                    if b.re() < zero {
                        return Err(domain("^", node, b));
                    }
                    b.powf(S::Real::lit(*e))
                }
                None => {
                    let e = eval_node(exp, x, flags)?;
                    if !(b.re() > zero) {
                        return Err(domain("^", node, b));
                    }
                    (e * b.ln()).exp()
                }
            };
            finite(v, node, "^")
        }
        NodeKind::Call(func, args) => {
            let a = eval_node(&args[0], x, flags)?;
            let v = match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if !(a.re() > zero) {
                        return Err(domain("log", node, a));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a.re() < zero {
                        return Err(domain("sqrt", node, a));
                    }
                    a.sqrt()
                }
                Func::Abs => {
                    if a.re() == zero {
                        flags.abs_kink = true;
                    }
                    a.abs()
                }
                Func::Atan2 => {
                    let b = eval_node(&args[1], x, flags)?;
                    a.atan2(b)
                }
            };
            finite(v, node, func.name())
        }
    }
}
