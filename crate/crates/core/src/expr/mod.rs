//! The constraint expression dialect: a small Python-like language of
//! arithmetic, comparisons (including chains such as `2 <= y <= 32`) and
//! boolean connectives over named parameters.

mod eval;
mod format;
mod lexer;
mod parser;

pub use eval::{evaluate, Bindings};
pub use parser::{parse_expression, ParseError};

use crate::value::{ArithOp, CmpOp, ParamValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Arith(ArithOp),
    And,
    Or,
}

impl BinaryOp {
    pub const ADD: BinaryOp = BinaryOp::Arith(ArithOp::Add);
    pub const SUB: BinaryOp = BinaryOp::Arith(ArithOp::Sub);
    pub const MUL: BinaryOp = BinaryOp::Arith(ArithOp::Mul);

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Arith(op) => op.symbol(),
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }
}

/// Abstract syntax tree of a constraint expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(ParamValue),
    Param(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    /// A (possibly chained) comparison; `ops.len() == operands.len() - 1`.
    Compare {
        operands: Vec<Expr>,
        ops: Vec<CmpOp>,
    },
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Literal(ParamValue::Int(v))
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary {
            op,
            operand: Box::new(operand),
        }
    }

    /// A binary comparison `left op right`.
    pub fn compare(left: Expr, op: CmpOp, right: Expr) -> Expr {
        Expr::Compare {
            operands: vec![left, right],
            ops: vec![op],
        }
    }

    /// The parameters referenced by this expression, deduplicated, in order
    /// of first appearance.
    pub fn free_parameters(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit_params(&mut |name| {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_string());
            }
        });
        out
    }

    fn visit_params<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Literal(_) => {}
            Expr::Param(name) => f(name),
            Expr::Unary { operand, .. } => operand.visit_params(f),
            Expr::Binary { left, right, .. } => {
                left.visit_params(f);
                right.visit_params(f);
            }
            Expr::Compare { operands, .. } => operands.iter().for_each(|e| e.visit_params(f)),
        }
    }
}

/// Free-function form of [`Expr::free_parameters`].
pub fn free_parameters(expr: &Expr) -> Vec<String> {
    expr.free_parameters()
}

/// Canonical text for `expr`; parsing it yields a structurally equal tree.
pub fn format(expr: &Expr) -> String {
    expr.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_parameters_in_first_appearance_order() {
        let e = parse_expression("2 <= y <= 32 <= x*y <= 1024").unwrap();
        assert_eq!(e.free_parameters(), vec!["y", "x"]);
        let e = parse_expression("x * y <= 1024").unwrap();
        assert_eq!(free_parameters(&e), vec!["x", "y"]);
        assert!(Expr::Literal(ParamValue::Bool(true)).free_parameters().is_empty());
    }
}
