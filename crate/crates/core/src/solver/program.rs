//! Flattened postfix form of an expression, built once per constraint and run
//! against a slot-indexed value array during search.

use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::value::{
    arith, compare, floor_div_int, floor_mod_int, logical_not, negate, ArithOp, CmpOp, EvalError, ParamValue, Tag,
};

#[derive(Debug, Clone)]
enum Op {
    Const(ParamValue),
    Load(usize),
    Neg,
    Not,
    Arith(ArithOp),
    Cmp(CmpOp),
    /// Top must be boolean. False: keep it and jump. True: pop it.
    JumpIfFalse(usize, &'static str),
    /// Top must be boolean. True: keep it and jump. False: pop it.
    JumpIfTrue(usize, &'static str),
    EnsureBool(&'static str),
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    ops: Vec<Op>,
}

fn not_bool(op: &'static str, v: &ParamValue) -> EvalError {
    EvalError::TypeMismatch {
        op,
        left: v.tag(),
        right: Some(Tag::Bool),
    }
}

impl Program {
    /// Compiles `expr`, resolving parameter names to slots with `slot_of`.
    pub(crate) fn compile(expr: &Expr, slot_of: &impl Fn(&str) -> Option<usize>) -> Result<Self, EvalError> {
        let mut ops = Vec::new();
        emit(expr, slot_of, &mut ops)?;
        Ok(Program { ops })
    }

    pub(crate) fn run(&self, slots: &[ParamValue], stack: &mut Vec<ParamValue>) -> Result<ParamValue, EvalError> {
        stack.clear();
        let mut pc = 0;
        while pc < self.ops.len() {
            match &self.ops[pc] {
                Op::Const(v) => stack.push(v.clone()),
                Op::Load(slot) => stack.push(slots[*slot].clone()),
                Op::Neg => {
                    let v = stack.pop().expect("operand");
                    stack.push(negate(&v)?);
                }
                Op::Not => {
                    let v = stack.pop().expect("operand");
                    stack.push(logical_not(&v)?);
                }
                Op::Arith(op) => {
                    let r = stack.pop().expect("rhs");
                    let l = stack.pop().expect("lhs");
                    stack.push(arith(*op, &l, &r)?);
                }
                Op::Cmp(op) => {
                    let r = stack.pop().expect("rhs");
                    let l = stack.pop().expect("lhs");
                    stack.push(ParamValue::Bool(compare(*op, &l, &r)?));
                }
                Op::JumpIfFalse(target, name) => match stack.last().expect("operand") {
                    ParamValue::Bool(false) => {
                        pc = *target;
                        continue;
                    }
                    ParamValue::Bool(true) => {
                        stack.pop();
                    }
                    other => return Err(not_bool(name, other)),
                },
                Op::JumpIfTrue(target, name) => match stack.last().expect("operand") {
                    ParamValue::Bool(true) => {
                        pc = *target;
                        continue;
                    }
                    ParamValue::Bool(false) => {
                        stack.pop();
                    }
                    other => return Err(not_bool(name, other)),
                },
                Op::EnsureBool(name) => {
                    let top = stack.last().expect("operand");
                    if !matches!(top, ParamValue::Bool(_)) {
                        return Err(not_bool(name, top));
                    }
                }
            }
            pc += 1;
        }
        Ok(stack.pop().expect("result"))
    }
}

fn emit(expr: &Expr, slot_of: &impl Fn(&str) -> Option<usize>, ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match expr {
        Expr::Literal(v) => ops.push(Op::Const(v.clone())),
        Expr::Param(name) => {
            let slot = slot_of(name).ok_or_else(|| EvalError::Unbound(name.clone()))?;
            ops.push(Op::Load(slot));
        }
        Expr::Unary { op, operand } => {
            emit(operand, slot_of, ops)?;
            ops.push(match op {
                UnaryOp::Neg => Op::Neg,
                UnaryOp::Not => Op::Not,
            });
        }
        Expr::Binary { op, left, right } => match op {
            BinaryOp::Arith(a) => {
                emit(left, slot_of, ops)?;
                emit(right, slot_of, ops)?;
                ops.push(Op::Arith(*a));
            }
            BinaryOp::And | BinaryOp::Or => {
                let name = op.symbol();
                emit(left, slot_of, ops)?;
                let jump_at = ops.len();
                ops.push(Op::EnsureBool(name));
                emit(right, slot_of, ops)?;
                ops.push(Op::EnsureBool(name));
                let end = ops.len();
                ops[jump_at] = if *op == BinaryOp::And {
                    Op::JumpIfFalse(end, name)
                } else {
                    Op::JumpIfTrue(end, name)
                };
            }
        },
        Expr::Compare { operands, ops: cmp_ops } => {
            // a < b < c compiles as (a < b) and (b < c); the middle operand is
            // recomputed, which is equivalent because evaluation is pure.
            let mut jumps = Vec::new();
            for (i, op) in cmp_ops.iter().enumerate() {
                emit(&operands[i], slot_of, ops)?;
                emit(&operands[i + 1], slot_of, ops)?;
                ops.push(Op::Cmp(*op));
                if i + 1 < cmp_ops.len() {
                    jumps.push(ops.len());
                    ops.push(Op::EnsureBool("chain"));
                }
            }
            let end = ops.len();
            for j in jumps {
                ops[j] = Op::JumpIfFalse(end, "chain");
            }
        }
    }
    Ok(())
}

/// A statically typed variant over integer slots, with booleans as 0/1.
///
/// Built only when every parameter read is integer-valued and every
/// operation is closed over integers and booleans. Running it yields `None`
/// whenever the general evaluator would produce an error or a real (overflow,
/// division by zero, negative exponent); callers then fall back to
/// [`Program`].
#[derive(Debug, Clone)]
pub(crate) struct IntProgram {
    ops: Vec<IntOp>,
}

#[derive(Debug, Clone, Copy)]
enum IntOp {
    Const(i64),
    Load(usize),
    Neg,
    Not,
    Arith(ArithOp),
    Cmp(CmpOp),
    /// Top is 0: keep it and jump. Otherwise pop it.
    JumpIfFalse(usize),
    JumpIfTrue(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
}

impl IntProgram {
    pub(crate) fn compile(expr: &Expr, int_slot: &impl Fn(&str) -> Option<usize>) -> Option<Self> {
        let mut ops = Vec::new();
        (emit_int(expr, int_slot, &mut ops)? == Ty::Bool).then_some(IntProgram { ops })
    }

    pub(crate) fn run(&self, slots: &[i64], stack: &mut Vec<i64>) -> Option<bool> {
        stack.clear();
        let mut pc = 0;
        while pc < self.ops.len() {
            match self.ops[pc] {
                IntOp::Const(v) => stack.push(v),
                IntOp::Load(slot) => stack.push(slots[slot]),
                IntOp::Neg => {
                    let v = stack.pop()?;
                    stack.push(v.checked_neg()?);
                }
                IntOp::Not => {
                    let v = stack.pop()?;
                    stack.push((v == 0) as i64);
                }
                IntOp::Arith(op) => {
                    let r = stack.pop()?;
                    let l = stack.pop()?;
                    stack.push(int_arith(op, l, r)?);
                }
                IntOp::Cmp(op) => {
                    let r = stack.pop()?;
                    let l = stack.pop()?;
                    stack.push(op.holds(l.cmp(&r)) as i64);
                }
                IntOp::JumpIfFalse(target) => {
                    if *stack.last()? == 0 {
                        pc = target;
                        continue;
                    }
                    stack.pop();
                }
                IntOp::JumpIfTrue(target) => {
                    if *stack.last()? != 0 {
                        pc = target;
                        continue;
                    }
                    stack.pop();
                }
            }
            pc += 1;
        }
        Some(stack.pop()? != 0)
    }
}

fn int_arith(op: ArithOp, l: i64, r: i64) -> Option<i64> {
    match op {
        ArithOp::Add => l.checked_add(r),
        ArithOp::Sub => l.checked_sub(r),
        ArithOp::Mul => l.checked_mul(r),
        ArithOp::FloorDiv => floor_div_int(l, r).ok(),
        ArithOp::Mod => floor_mod_int(l, r).ok(),
        ArithOp::Pow => match l {
            _ if r < 0 => None,
            0 | 1 => Some(if r == 0 { 1 } else { l }),
            -1 => Some(if r % 2 == 0 { 1 } else { -1 }),
            _ => l.checked_pow(u32::try_from(r).ok()?),
        },
        ArithOp::Div => None,
    }
}

fn emit_int(expr: &Expr, int_slot: &impl Fn(&str) -> Option<usize>, ops: &mut Vec<IntOp>) -> Option<Ty> {
    match expr {
        Expr::Literal(ParamValue::Int(v)) => {
            ops.push(IntOp::Const(*v));
            Some(Ty::Int)
        }
        Expr::Literal(ParamValue::Bool(b)) => {
            ops.push(IntOp::Const(*b as i64));
            Some(Ty::Bool)
        }
        Expr::Literal(_) => None,
        Expr::Param(name) => {
            ops.push(IntOp::Load(int_slot(name)?));
            Some(Ty::Int)
        }
        Expr::Unary { op, operand } => {
            let ty = emit_int(operand, int_slot, ops)?;
            match (op, ty) {
                (UnaryOp::Neg, Ty::Int) => ops.push(IntOp::Neg),
                (UnaryOp::Not, Ty::Bool) => ops.push(IntOp::Not),
                _ => return None,
            }
            Some(ty)
        }
        Expr::Binary { op, left, right } => match op {
            BinaryOp::Arith(ArithOp::Div) => None,
            BinaryOp::Arith(a) => {
                if emit_int(left, int_slot, ops)? != Ty::Int || emit_int(right, int_slot, ops)? != Ty::Int {
                    return None;
                }
                ops.push(IntOp::Arith(*a));
                Some(Ty::Int)
            }
            BinaryOp::And | BinaryOp::Or => {
                if emit_int(left, int_slot, ops)? != Ty::Bool {
                    return None;
                }
                let jump_at = ops.len();
                ops.push(IntOp::Const(0));
                if emit_int(right, int_slot, ops)? != Ty::Bool {
                    return None;
                }
                let end = ops.len();
                ops[jump_at] = if *op == BinaryOp::And {
                    IntOp::JumpIfFalse(end)
                } else {
                    IntOp::JumpIfTrue(end)
                };
                Some(Ty::Bool)
            }
        },
        Expr::Compare { operands, ops: cmp_ops } => {
            let mut jumps = Vec::new();
            for (i, op) in cmp_ops.iter().enumerate() {
                let l = emit_int(&operands[i], int_slot, ops)?;
                let r = emit_int(&operands[i + 1], int_slot, ops)?;
                let ordered = !matches!(op, CmpOp::Eq | CmpOp::Ne);
                if l != r || (l == Ty::Bool && ordered) {
                    return None;
                }
                ops.push(IntOp::Cmp(*op));
                if i + 1 < cmp_ops.len() {
                    jumps.push(ops.len());
                    ops.push(IntOp::Const(0));
                }
            }
            let end = ops.len();
            for j in jumps {
                ops[j] = IntOp::JumpIfFalse(end);
            }
            Some(Ty::Bool)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, parse_expression};

    fn check_agrees(src: &str, names: &[&str], values: &[ParamValue]) {
        let expr = parse_expression(src).unwrap();
        let program = Program::compile(&expr, &|n| names.iter().position(|x| *x == n)).unwrap();
        let env: Vec<(&str, ParamValue)> = names.iter().copied().zip(values.iter().cloned()).collect();
        let mut stack = Vec::new();
        assert_eq!(program.run(values, &mut stack), evaluate(&expr, env.as_slice()), "{src} {values:?}");
    }

    #[test]
    fn agrees_with_tree_evaluation() {
        let names = ["x", "y", "b"];
        let sources = [
            "x * y <= 1024",
            "2 <= y <= 32 <= x * y <= 1024",
            "x // y + x % y == 3",
            "not b or x > y",
            "b and x / y > 1",
            "x > 1 and 1 // 0 == 0",
            "x < 3 < 1 // 0",
            "x and b",
            "b or x",
            "-x ** 2 < y",
            "b == (x > y)",
        ];
        for src in sources {
            for x in [0i64, 1, 2, 5] {
                for y in [1i64, 3, 40] {
                    for b in [true, false] {
                        check_agrees(src, &names, &[ParamValue::Int(x), ParamValue::Int(y), ParamValue::Bool(b)]);
                    }
                }
            }
        }
    }

    #[test]
    fn integer_program_agrees_or_defers() {
        let names = ["x", "y", "z"];
        let sources = [
            "x * y <= 1024",
            "2 <= y <= 32 <= x * y <= 1024",
            "x // y + x % y == 3",
            "not x > y or x * x > z",
            "(x > y) == (y > z)",
            "x ** y >= z",
            "x ** 40 > 0",
            "-x // z < y and True",
            "x > 1 and 1 // 0 == 0",
            "x % z != 0 or x - y * z >= -3",
        ];
        let mut stack = Vec::new();
        let mut istack = Vec::new();
        let mut deferred = 0;
        for src in sources {
            let expr = parse_expression(src).unwrap();
            let slot = |n: &str| names.iter().position(|x| *x == n);
            let fast = IntProgram::compile(&expr, &slot).unwrap_or_else(|| panic!("{src} should compile"));
            let slow = Program::compile(&expr, &slot).unwrap();
            for x in -3i64..=5 {
                for y in -2i64..=4 {
                    for z in [-2i64, 0, 1, 7] {
                        let vals = [x, y, z];
                        let values: Vec<ParamValue> = vals.iter().map(|&v| ParamValue::Int(v)).collect();
                        let expected = slow.run(&values, &mut stack);
                        // Deferring is always allowed; answering must agree.
                        if let Some(b) = fast.run(&vals, &mut istack) {
                            assert_eq!(expected, Ok(ParamValue::Bool(b)), "{src} {vals:?}");
                        } else {
                            deferred += 1;
                        }
                    }
                }
            }
        }
        // Zero divisors, negative exponents and `x ** 40` overflow.
        assert_eq!(deferred, 458);
        for src in ["x / y > 1", "x and y", "x == True", "x > 0.5", "True < False", "x + 1"] {
            let expr = parse_expression(src).unwrap();
            assert!(IntProgram::compile(&expr, &|n| names.iter().position(|x| *x == n)).is_none(), "{src}");
        }
    }

    #[test]
    fn unknown_names_fail_at_compile_time() {
        let expr = parse_expression("z > 1").unwrap();
        assert_eq!(Program::compile(&expr, &|_| None).unwrap_err(), EvalError::Unbound("z".into()));
    }
}
