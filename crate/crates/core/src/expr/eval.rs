use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasher;

use super::{BinaryOp, Expr, UnaryOp};
use crate::value::{arith, compare, logical_not, negate, EvalError, ParamValue, Tag};

/// Name lookup for expression evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<&ParamValue>;
}

impl<S: BuildHasher> Bindings for HashMap<String, ParamValue, S> {
    fn lookup(&self, name: &str) -> Option<&ParamValue> {
        self.get(name)
    }
}

impl<S: BuildHasher> Bindings for HashMap<&str, ParamValue, S> {
    fn lookup(&self, name: &str) -> Option<&ParamValue> {
        self.get(name)
    }
}

impl Bindings for BTreeMap<String, ParamValue> {
    fn lookup(&self, name: &str) -> Option<&ParamValue> {
        self.get(name)
    }
}

impl Bindings for [(&str, ParamValue)] {
    fn lookup(&self, name: &str) -> Option<&ParamValue> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

impl<const N: usize> Bindings for [(&str, ParamValue); N] {
    fn lookup(&self, name: &str) -> Option<&ParamValue> {
        self.as_slice().lookup(name)
    }
}

fn expect_bool(op: &'static str, v: ParamValue) -> Result<bool, EvalError> {
    match v {
        ParamValue::Bool(b) => Ok(b),
        other => Err(EvalError::TypeMismatch {
            op,
            left: other.tag(),
            right: Some(Tag::Bool),
        }),
    }
}

/// Evaluates `expr` under `bindings`.
///
/// `and`/`or` short-circuit and require boolean operands; a chained comparison
/// is the conjunction of its adjacent pairs, stopping at the first false link.
pub fn evaluate<B: Bindings + ?Sized>(expr: &Expr, bindings: &B) -> Result<ParamValue, EvalError> {
    match expr {
        Expr::Literal(v) => Ok(v.clone()),
        Expr::Param(name) => bindings
            .lookup(name)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Unary { op, operand } => {
            let v = evaluate(operand, bindings)?;
            match op {
                UnaryOp::Neg => negate(&v),
                UnaryOp::Not => logical_not(&v),
            }
        }
        Expr::Binary { op, left, right } => match op {
            BinaryOp::And => {
                if !expect_bool("and", evaluate(left, bindings)?)? {
                    return Ok(ParamValue::Bool(false));
                }
                Ok(ParamValue::Bool(expect_bool("and", evaluate(right, bindings)?)?))
            }
            BinaryOp::Or => {
                if expect_bool("or", evaluate(left, bindings)?)? {
                    return Ok(ParamValue::Bool(true));
                }
                Ok(ParamValue::Bool(expect_bool("or", evaluate(right, bindings)?)?))
            }
            BinaryOp::Arith(a) => {
                let l = evaluate(left, bindings)?;
                let r = evaluate(right, bindings)?;
                arith(*a, &l, &r)
            }
        },
        Expr::Compare { operands, ops } => {
            let mut left = evaluate(&operands[0], bindings)?;
            for (op, operand) in ops.iter().zip(&operands[1..]) {
                let right = evaluate(operand, bindings)?;
                if !compare(*op, &left, &right)? {
                    return Ok(ParamValue::Bool(false));
                }
                left = right;
            }
            Ok(ParamValue::Bool(true))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn eval(src: &str, env: &[(&str, ParamValue)]) -> Result<ParamValue, EvalError> {
        evaluate(&parse_expression(src).unwrap(), env)
    }

    fn int(v: i64) -> ParamValue {
        ParamValue::Int(v)
    }

    #[test]
    fn worked_examples() {
        assert_eq!(eval("x*y >= 32", &[("x", int(8)), ("y", int(4))]), Ok(ParamValue::Bool(true)));
        assert_eq!(eval("x // y", &[("x", int(7)), ("y", int(2))]), Ok(int(3)));
        assert_eq!(eval("2 <= y <= 32", &[("y", int(1))]), Ok(ParamValue::Bool(false)));
    }

    #[test]
    fn short_circuit_skips_errors() {
        assert_eq!(eval("x > 1 and 1 // 0 == 0", &[("x", int(0))]), Ok(ParamValue::Bool(false)));
        assert_eq!(eval("x < 1 or 1 // 0 == 0", &[("x", int(0))]), Ok(ParamValue::Bool(true)));
        // A false link stops the chain before later operands are evaluated.
        assert_eq!(eval("2 < x < 1 // 0", &[("x", int(0))]), Ok(ParamValue::Bool(false)));
    }

    #[test]
    fn errors() {
        assert_eq!(eval("x + 1", &[]), Err(EvalError::Unbound("x".into())));
        assert_eq!(eval("x % 0", &[("x", int(3))]), Err(EvalError::DivisionByZero));
        assert!(matches!(eval("True + 1", &[]), Err(EvalError::TypeMismatch { .. })));
        assert!(matches!(eval("1 and True", &[]), Err(EvalError::TypeMismatch { .. })));
        assert!(matches!(eval("not 3", &[]), Err(EvalError::TypeMismatch { .. })));
        assert_eq!(eval("x * x", &[("x", int(1 << 40))]), Err(EvalError::Overflow("*")));
    }

    #[test]
    fn booleans_as_parameters() {
        let env = [("sh", ParamValue::Bool(true)), ("x", int(3))];
        assert_eq!(eval("sh and x > 2", &env), Ok(ParamValue::Bool(true)));
        assert_eq!(eval("sh == True", &env), Ok(ParamValue::Bool(true)));
        assert!(eval("sh * 4 <= 8", &env).is_err());
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        assert_eq!(eval("x * 0.5", &[("x", int(3))]), Ok(ParamValue::Real(1.5)));
        assert_eq!(eval("x / 2 == 1.5", &[("x", int(3))]), Ok(ParamValue::Bool(true)));
        assert_eq!(eval("x == 3.0", &[("x", int(3))]), Ok(ParamValue::Bool(true)));
    }
}
