use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};
use crate::value::{ArithOp, ParamValue};

// Binding strength; a child is parenthesized when weaker than its slot needs.
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const NEG: u8 = 7;
const POW: u8 = 8;
const ATOM: u8 = 9;

fn is_negative_number(v: &ParamValue) -> bool {
    match v {
        ParamValue::Int(i) => *i < 0,
        ParamValue::Real(r) => r.is_sign_negative(),
        _ => false,
    }
}

fn strength(e: &Expr) -> u8 {
    match e {
        // A negative literal renders with a leading minus, so it sits where
        // unary minus does.
        Expr::Literal(v) if is_negative_number(v) => NEG,
        Expr::Literal(_) | Expr::Param(_) => ATOM,
        Expr::Unary { op: UnaryOp::Neg, .. } => NEG,
        Expr::Unary { op: UnaryOp::Not, .. } => NOT,
        Expr::Binary { op, .. } => match op {
            BinaryOp::Or => OR,
            BinaryOp::And => AND,
            BinaryOp::Arith(ArithOp::Add | ArithOp::Sub) => ADD,
            BinaryOp::Arith(ArithOp::Pow) => POW,
            BinaryOp::Arith(_) => MUL,
        },
        Expr::Compare { .. } => CMP,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, required: u8) -> fmt::Result {
    if strength(e) < required {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => write!(f, "{v}"),
            Expr::Param(name) => f.write_str(name),
            Expr::Unary { op: UnaryOp::Not, operand } => {
                f.write_str("not ")?;
                child(f, operand, NOT)
            }
            Expr::Unary { op: UnaryOp::Neg, operand } => {
                f.write_str("-")?;
                match operand.as_ref() {
                    // `-3` would parse back as a negative literal.
                    Expr::Literal(v) if v.is_numeric() => write!(f, "({v})"),
                    // `-3 ** 2` is fine: the folding stops at `**`, but a
                    // parenthesized negative literal must stay distinct.
                    other => child(f, other, NEG),
                }
            }
            Expr::Binary { op, left, right } => {
                let s = strength(self);
                let (lreq, rreq) = match op {
                    // Right associative: the base must bind tighter.
                    BinaryOp::Arith(ArithOp::Pow) => (ATOM, NEG),
                    _ => (s, s + 1),
                };
                child(f, left, lreq)?;
                write!(f, " {} ", op.symbol())?;
                child(f, right, rreq)
            }
            Expr::Compare { operands, ops } => {
                child(f, &operands[0], ADD)?;
                for (op, operand) in ops.iter().zip(&operands[1..]) {
                    write!(f, " {} ", op.symbol())?;
                    child(f, operand, ADD)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{format, parse_expression, BinaryOp, Expr, UnaryOp};
    use crate::value::{ArithOp, CmpOp, ParamValue};

    fn round_trip(e: &Expr) {
        let text = format(e);
        let back = parse_expression(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        assert_eq!(&back, e, "{text}");
    }

    #[test]
    fn direct_rendering() {
        let e = Expr::compare(
            Expr::int(32),
            CmpOp::Le,
            Expr::binary(BinaryOp::MUL, Expr::param("x"), Expr::param("y")),
        );
        assert_eq!(format(&e), "32 <= x * y");
        let e = Expr::binary(
            BinaryOp::MUL,
            Expr::binary(BinaryOp::ADD, Expr::param("a"), Expr::param("b")),
            Expr::param("c"),
        );
        assert_eq!(format(&e), "(a + b) * c");
    }

    #[test]
    fn fig2_input_round_trips() {
        let e = parse_expression("2 <= block_size_y <= 32 <= block_size_x * block_size_y <= 1024").unwrap();
        assert_eq!(format(&e), "2 <= block_size_y <= 32 <= block_size_x * block_size_y <= 1024");
        round_trip(&e);
    }

    #[test]
    fn tricky_negatives() {
        let pow = |a, b| Expr::binary(BinaryOp::Arith(ArithOp::Pow), a, b);
        let neg = |a| Expr::unary(UnaryOp::Neg, a);
        round_trip(&neg(Expr::int(3)));
        round_trip(&neg(Expr::int(-3)));
        round_trip(&pow(Expr::int(-3), Expr::int(2)));
        round_trip(&neg(pow(Expr::int(3), Expr::int(2))));
        round_trip(&pow(Expr::param("a"), Expr::int(-2)));
        round_trip(&pow(neg(Expr::param("a")), Expr::int(2)));
        round_trip(&pow(pow(Expr::param("a"), Expr::param("b")), Expr::param("c")));
        round_trip(&Expr::binary(BinaryOp::SUB, Expr::param("a"), Expr::int(-3)));
        round_trip(&Expr::Literal(ParamValue::Real(-0.5)));
        round_trip(&Expr::Literal(ParamValue::Real(1e300)));
        round_trip(&Expr::Literal(ParamValue::Int(i64::MIN)));
        round_trip(&neg(Expr::Literal(ParamValue::Real(2.5))));
    }

    #[test]
    fn nested_boolean_structure() {
        let a = Expr::param("a");
        let b = Expr::param("b");
        let cmp = Expr::compare(a.clone(), CmpOp::Lt, b.clone());
        round_trip(&Expr::unary(UnaryOp::Not, Expr::binary(BinaryOp::And, a.clone(), b.clone())));
        round_trip(&Expr::binary(BinaryOp::And, a.clone(), Expr::binary(BinaryOp::And, b.clone(), a.clone())));
        round_trip(&Expr::compare(cmp.clone(), CmpOp::Eq, Expr::Literal(ParamValue::Bool(true))));
        round_trip(&Expr::Compare {
            operands: vec![a.clone(), b.clone(), Expr::unary(UnaryOp::Not, a.clone())],
            ops: vec![CmpOp::Lt, CmpOp::Ne],
        });
        round_trip(&Expr::Literal(ParamValue::text("it's")));
    }
}
