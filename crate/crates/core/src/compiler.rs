//! Rewrites user constraints into small-scope, specific constraint forms.
//!
//! The pipeline is parse, then split conjunctions and comparison chains into
//! binary comparisons, then classify each part. Sums and products of distinct
//! parameters compared against a constant become dedicated kinds that the
//! solver can prune with; single-parameter predicates are applied directly to
//! the parameter's domain.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{self, evaluate, BinaryOp, Expr, ParseError};
use crate::value::{CmpOp, EvalError, ParamValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aggregate {
    Sum,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    /// aggregate >= limit
    Min,
    /// aggregate <= limit
    Max,
    /// aggregate == limit
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    ExactSum(ParamValue),
    MinSum(ParamValue),
    MaxSum(ParamValue),
    ExactProduct(ParamValue),
    MinProduct(ParamValue),
    MaxProduct(ParamValue),
    /// A predicate over exactly one parameter.
    UnaryRestriction,
    /// Anything else, evaluated as a compiled expression.
    Generic,
}

impl ConstraintKind {
    fn specific(aggregate: Aggregate, bound: Bound, limit: ParamValue) -> Self {
        match (aggregate, bound) {
            (Aggregate::Sum, Bound::Exact) => ConstraintKind::ExactSum(limit),
            (Aggregate::Sum, Bound::Min) => ConstraintKind::MinSum(limit),
            (Aggregate::Sum, Bound::Max) => ConstraintKind::MaxSum(limit),
            (Aggregate::Product, Bound::Exact) => ConstraintKind::ExactProduct(limit),
            (Aggregate::Product, Bound::Min) => ConstraintKind::MinProduct(limit),
            (Aggregate::Product, Bound::Max) => ConstraintKind::MaxProduct(limit),
        }
    }

    /// The aggregate, bound direction and limit of a sum/product kind.
    pub fn as_specific(&self) -> Option<(Aggregate, Bound, &ParamValue)> {
        match self {
            ConstraintKind::ExactSum(l) => Some((Aggregate::Sum, Bound::Exact, l)),
            ConstraintKind::MinSum(l) => Some((Aggregate::Sum, Bound::Min, l)),
            ConstraintKind::MaxSum(l) => Some((Aggregate::Sum, Bound::Max, l)),
            ConstraintKind::ExactProduct(l) => Some((Aggregate::Product, Bound::Exact, l)),
            ConstraintKind::MinProduct(l) => Some((Aggregate::Product, Bound::Min, l)),
            ConstraintKind::MaxProduct(l) => Some((Aggregate::Product, Bound::Max, l)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::ExactSum(_) => "ExactSum",
            ConstraintKind::MinSum(_) => "MinSum",
            ConstraintKind::MaxSum(_) => "MaxSum",
            ConstraintKind::ExactProduct(_) => "ExactProduct",
            ConstraintKind::MinProduct(_) => "MinProduct",
            ConstraintKind::MaxProduct(_) => "MaxProduct",
            ConstraintKind::UnaryRestriction => "UnaryRestriction",
            ConstraintKind::Generic => "Generic",
        }
    }
}

/// A classified predicate over a parameter subset.
///
/// `expr` is the binary comparison (or other predicate) this constraint was
/// classified from; it stays the source of truth for full-scope evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledConstraint {
    pub kind: ConstraintKind,
    pub scope: Vec<String>,
    pub expr: Expr,
    /// Source text of the user constraint this part came from.
    pub origin: String,
}

impl CompiledConstraint {
    fn specific(aggregate: Aggregate, bound: Bound, limit: i64, scope: &[&str]) -> Self {
        let op = match aggregate {
            Aggregate::Sum => BinaryOp::ADD,
            Aggregate::Product => BinaryOp::MUL,
        };
        let lhs = scope
            .iter()
            .map(|s| Expr::param(*s))
            .reduce(|acc, e| Expr::binary(op, acc, e))
            .expect("non-empty scope");
        let cmp = match bound {
            Bound::Min => CmpOp::Ge,
            Bound::Max => CmpOp::Le,
            Bound::Exact => CmpOp::Eq,
        };
        let expr = Expr::compare(lhs, cmp, Expr::int(limit));
        CompiledConstraint {
            kind: ConstraintKind::specific(aggregate, bound, ParamValue::Int(limit)),
            scope: scope.iter().map(|s| s.to_string()).collect(),
            origin: expr.to_string(),
            expr,
        }
    }

    pub fn max_product(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Product, Bound::Max, limit, scope)
    }

    pub fn min_product(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Product, Bound::Min, limit, scope)
    }

    pub fn exact_product(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Product, Bound::Exact, limit, scope)
    }

    pub fn max_sum(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Sum, Bound::Max, limit, scope)
    }

    pub fn min_sum(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Sum, Bound::Min, limit, scope)
    }

    pub fn exact_sum(limit: i64, scope: &[&str]) -> Self {
        Self::specific(Aggregate::Sum, Bound::Exact, limit, scope)
    }

    /// A generic constraint from source text, bypassing classification.
    pub fn generic(source: &str) -> Result<Self, ParseError> {
        let expr = expr::parse_expression(source)?;
        Ok(CompiledConstraint {
            kind: ConstraintKind::Generic,
            scope: expr.free_parameters(),
            expr,
            origin: source.to_string(),
        })
    }
}

impl fmt::Display for CompiledConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.as_specific() {
            Some((_, _, limit)) => write!(f, "{}({}, [{}])", self.kind.name(), limit, self.scope.join(", ")),
            None => write!(f, "{}({})", self.kind.name(), self.expr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("constraint {index} (`{source_text}`): {error}")]
    Parse {
        index: usize,
        source_text: String,
        error: ParseError,
    },
    #[error("constraint {index} (`{source_text}`) references unknown parameter `{name}`")]
    UnknownParameter {
        index: usize,
        source_text: String,
        name: String,
    },
    #[error("constraint `{0}` is always false")]
    Unsatisfiable(String),
    #[error("constraint `{expr}` cannot be evaluated: {error}")]
    Eval { expr: String, error: EvalError },
}

/// Splits top-level conjunctions and comparison chains into binary parts.
/// Disjunctions are never split.
pub fn split_conjunctions(expr: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    split_into(expr, &mut out);
    out
}

fn split_into(expr: &Expr, out: &mut Vec<Expr>) {
    match expr {
        Expr::Binary {
            op: BinaryOp::And,
            left,
            right,
        } => {
            split_into(left, out);
            split_into(right, out);
        }
        Expr::Compare { operands, ops } if ops.len() > 1 => {
            for (i, op) in ops.iter().enumerate() {
                out.push(Expr::compare(operands[i].clone(), *op, operands[i + 1].clone()));
            }
        }
        other => out.push(other.clone()),
    }
}

/// Collects the leaves of a left/right-nested `op` tree if they are all
/// distinct parameter references.
fn distinct_param_leaves(expr: &Expr, op: BinaryOp) -> Option<Vec<String>> {
    fn walk(e: &Expr, op: BinaryOp, out: &mut Vec<String>) -> bool {
        match e {
            Expr::Binary { op: o, left, right } if *o == op => walk(left, op, out) && walk(right, op, out),
            Expr::Param(name) => {
                if out.contains(name) {
                    false
                } else {
                    out.push(name.clone());
                    true
                }
            }
            _ => false,
        }
    }
    let mut out = Vec::new();
    (walk(expr, op, &mut out) && out.len() >= 2).then_some(out)
}

fn constant_number(expr: &Expr) -> Option<ParamValue> {
    if !expr.free_parameters().is_empty() {
        return None;
    }
    let empty: [(&str, ParamValue); 0] = [];
    evaluate(expr, &empty).ok().filter(ParamValue::is_numeric)
}

fn classify_specific(expr: &Expr) -> Option<(ConstraintKind, Vec<String>)> {
    let Expr::Compare { operands, ops } = expr else {
        return None;
    };
    if ops.len() != 1 {
        return None;
    }
    let op = ops[0];
    if !matches!(op, CmpOp::Le | CmpOp::Ge | CmpOp::Eq) {
        return None;
    }
    let (lhs, rhs) = (&operands[0], &operands[1]);
    let (aggregate_side, limit, aggregate_on_left) = constant_number(rhs)
        .map(|limit| (lhs, limit, true))
        .or_else(|| constant_number(lhs).map(|limit| (rhs, limit, false)))?;
    let (aggregate, scope) = distinct_param_leaves(aggregate_side, BinaryOp::MUL)
        .map(|scope| (Aggregate::Product, scope))
        .or_else(|| distinct_param_leaves(aggregate_side, BinaryOp::ADD).map(|scope| (Aggregate::Sum, scope)))?;
    let bound = match (op, aggregate_on_left) {
        (CmpOp::Eq, _) => Bound::Exact,
        (CmpOp::Le, true) | (CmpOp::Ge, false) => Bound::Max,
        _ => Bound::Min,
    };
    Some((ConstraintKind::specific(aggregate, bound, limit), scope))
}

/// Classifies one boolean predicate. Returns `Ok(None)` for a constant-true
/// predicate, which compiles away.
pub fn classify(expr: &Expr, origin: &str) -> Result<Option<CompiledConstraint>, CompileError> {
    let scope = expr.free_parameters();
    if scope.is_empty() {
        let empty: [(&str, ParamValue); 0] = [];
        return match evaluate(expr, &empty) {
            Ok(ParamValue::Bool(true)) => Ok(None),
            Ok(ParamValue::Bool(false)) => Err(CompileError::Unsatisfiable(expr.to_string())),
            Ok(other) => Err(CompileError::Eval {
                expr: expr.to_string(),
                error: EvalError::TypeMismatch {
                    op: "constraint",
                    left: other.tag(),
                    right: None,
                },
            }),
            Err(error) => Err(CompileError::Eval {
                expr: expr.to_string(),
                error,
            }),
        };
    }
    let (kind, scope) = if scope.len() == 1 {
        (ConstraintKind::UnaryRestriction, scope)
    } else if let Some((kind, specific_scope)) = classify_specific(expr) {
        (kind, specific_scope)
    } else {
        (ConstraintKind::Generic, scope)
    };
    Ok(Some(CompiledConstraint {
        kind,
        scope,
        expr: expr.clone(),
        origin: origin.to_string(),
    }))
}

/// Result of [`compile_constraints`]: the remaining constraints and the
/// domains after single-parameter restrictions were applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub constraints: Vec<CompiledConstraint>,
    pub domains: Vec<(String, Domain)>,
}

/// Parses, splits and classifies every source, then applies unary
/// restrictions to the domains (node consistency).
pub fn compile_constraints<S: AsRef<str>>(
    sources: &[S],
    parameters: &[(String, Domain)],
) -> Result<Compiled, CompileError> {
    let known: HashSet<&str> = parameters.iter().map(|(n, _)| n.as_str()).collect();
    let mut domains: Vec<(String, Domain)> = parameters.to_vec();
    let mut constraints = Vec::new();
    for (index, source) in sources.iter().enumerate() {
        let source = source.as_ref();
        let parsed = expr::parse_expression(source).map_err(|error| CompileError::Parse {
            index,
            source_text: source.to_string(),
            error,
        })?;
        if let Some(name) = parsed.free_parameters().into_iter().find(|n| !known.contains(n.as_str())) {
            return Err(CompileError::UnknownParameter {
                index,
                source_text: source.to_string(),
                name,
            });
        }
        for part in split_conjunctions(&parsed) {
            let Some(constraint) = classify(&part, source)? else {
                continue;
            };
            if constraint.kind == ConstraintKind::UnaryRestriction {
                let name = &constraint.scope[0];
                let (_, domain) = domains.iter_mut().find(|(n, _)| n == name).expect("known parameter");
                *domain = restrict(domain, name, &constraint.expr)?;
            } else {
                constraints.push(constraint);
            }
        }
    }
    Ok(Compiled { constraints, domains })
}

fn restrict(domain: &Domain, name: &str, predicate: &Expr) -> Result<Domain, CompileError> {
    let mut error = None;
    let kept = domain.filter(|v| {
        if error.is_some() {
            return false;
        }
        match evaluate(predicate, &[(name, v.clone())]) {
            Ok(ParamValue::Bool(b)) => b,
            Ok(other) => {
                error = Some(EvalError::TypeMismatch {
                    op: "constraint",
                    left: other.tag(),
                    right: None,
                });
                false
            }
            Err(e) => {
                error = Some(e);
                false
            }
        }
    });
    match error {
        Some(error) => Err(CompileError::Eval {
            expr: predicate.to_string(),
            error,
        }),
        None => Ok(kept),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn ints(values: impl IntoIterator<Item = i64>) -> Domain {
        Domain::new(values.into_iter().map(ParamValue::Int).collect()).unwrap()
    }

    fn block_size_domains() -> Vec<(String, Domain)> {
        let x = [1, 2, 4, 8, 16].into_iter().chain((1..=32).map(|i| 32 * i));
        let y = (0..6).map(|i| 1i64 << i);
        vec![
            ("block_size_x".to_string(), ints(x)),
            ("block_size_y".to_string(), ints(y)),
        ]
    }

    fn split(src: &str) -> Vec<String> {
        split_conjunctions(&parse_expression(src).unwrap())
            .iter()
            .map(|e| e.to_string())
            .collect()
    }

    #[test]
    fn splitting() {
        assert_eq!(
            split("2 <= block_size_y <= 32 <= block_size_x * block_size_y <= 1024"),
            vec![
                "2 <= block_size_y",
                "block_size_y <= 32",
                "32 <= block_size_x * block_size_y",
                "block_size_x * block_size_y <= 1024"
            ]
        );
        assert_eq!(split("a > 1 and b > 2"), vec!["a > 1", "b > 2"]);
        assert_eq!(split("a + b > 2"), vec!["a + b > 2"]);
        assert_eq!(split("a > 1 or b > 2"), vec!["a > 1 or b > 2"]);
        assert_eq!(split("(a > 1 and b > 2) and c < a < b"), vec!["a > 1", "b > 2", "c < a", "a < b"]);
    }

    fn kind_of(src: &str) -> CompiledConstraint {
        classify(&parse_expression(src).unwrap(), src).unwrap().unwrap()
    }

    #[test]
    fn classification() {
        let c = kind_of("block_size_x * block_size_y <= 1024");
        assert_eq!(c.kind, ConstraintKind::MaxProduct(ParamValue::Int(1024)));
        assert_eq!(c.scope, vec!["block_size_x", "block_size_y"]);

        assert_eq!(kind_of("32 <= x * y").kind, ConstraintKind::MinProduct(ParamValue::Int(32)));
        assert_eq!(kind_of("x * y >= 32").kind, ConstraintKind::MinProduct(ParamValue::Int(32)));
        assert_eq!(kind_of("1024 >= x * y * z").kind, ConstraintKind::MaxProduct(ParamValue::Int(1024)));
        assert_eq!(kind_of("x * y == 64").kind, ConstraintKind::ExactProduct(ParamValue::Int(64)));
        assert_eq!(kind_of("x + y <= 10").kind, ConstraintKind::MaxSum(ParamValue::Int(10)));
        assert_eq!(kind_of("x + (y + z) >= 2 * 5").kind, ConstraintKind::MinSum(ParamValue::Int(10)));
        assert_eq!(kind_of("x + y == 2.5").kind, ConstraintKind::ExactSum(ParamValue::Real(2.5)));

        assert_eq!(kind_of("block_size_y >= 2").kind, ConstraintKind::UnaryRestriction);
        assert_eq!(kind_of("x * x <= 16").kind, ConstraintKind::UnaryRestriction);

        let generic = kind_of("x*2 + y <= 10");
        assert_eq!(generic.kind, ConstraintKind::Generic);
        assert_eq!(generic.scope, vec!["x", "y"]);
        for src in ["x * y < 1024", "x * y != 4", "x * y * x <= 4", "x + y * z <= 9", "x * y <= z", "x * y <= 1 // 0"] {
            assert_eq!(kind_of(src).kind, ConstraintKind::Generic, "{src}");
        }
    }

    #[test]
    fn weighted_generic_is_equivalent_to_direct_evaluation() {
        let c = kind_of("x*2 + y <= 10");
        for x in 1..=4 {
            for y in 1..=4 {
                let env = [("x", ParamValue::Int(x)), ("y", ParamValue::Int(y))];
                let got = evaluate(&c.expr, &env).unwrap();
                assert_eq!(got, ParamValue::Bool(x * 2 + y <= 10));
            }
        }
    }

    #[test]
    fn constants() {
        assert!(classify(&parse_expression("True").unwrap(), "True").unwrap().is_none());
        assert!(matches!(
            classify(&parse_expression("1 > 2").unwrap(), "1 > 2"),
            Err(CompileError::Unsatisfiable(_))
        ));
    }

    #[test]
    fn chained_block_size_bounds() {
        let blocks = block_size_domains();
        let compiled = compile_constraints(
            &["2 <= block_size_y <= 32 <= block_size_x * block_size_y <= 1024"],
            &blocks,
        )
        .unwrap();
        let summary: Vec<String> = compiled.constraints.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            summary,
            vec![
                "MinProduct(32, [block_size_x, block_size_y])",
                "MaxProduct(1024, [block_size_x, block_size_y])"
            ]
        );
        assert_eq!(compiled.domains[1].1, ints([2, 4, 8, 16, 32]));
        assert_eq!(compiled.domains[0].1, blocks[0].1);
    }

    #[test]
    fn tautologies_and_split_halves() {
        let blocks = block_size_domains();
        let compiled = compile_constraints(&["True"], &blocks).unwrap();
        assert!(compiled.constraints.is_empty());
        assert_eq!(compiled.domains, blocks);

        let doms = vec![("x".to_string(), ints(1..=4)), ("y".to_string(), ints(1..=4))];
        let compiled = compile_constraints(&["x*y >= 32", "x*y <= 1024"], &doms).unwrap();
        let kinds: Vec<_> = compiled.constraints.iter().map(|c| c.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                ConstraintKind::MinProduct(ParamValue::Int(32)),
                ConstraintKind::MaxProduct(ParamValue::Int(1024))
            ]
        );
    }

    #[test]
    fn compile_errors() {
        let doms = vec![("x".to_string(), ints(1..=4))];
        match compile_constraints(&["x > 1", "z > 1"], &doms) {
            Err(CompileError::UnknownParameter { index: 1, name, .. }) => assert_eq!(name, "z"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            compile_constraints(&["x >"], &doms),
            Err(CompileError::Parse { index: 0, .. })
        ));
        assert!(matches!(compile_constraints(&["x // 0 > 1"], &doms), Err(CompileError::Eval { .. })));
        assert!(matches!(compile_constraints(&["x + 1"], &doms), Err(CompileError::Eval { .. })));
    }

    #[test]
    fn unary_restriction_can_empty_a_domain() {
        let doms = vec![("x".to_string(), ints(1..=4)), ("y".to_string(), ints(1..=2))];
        let compiled = compile_constraints(&["x > 100"], &doms).unwrap();
        assert!(compiled.domains[0].1.is_empty());
    }
}
