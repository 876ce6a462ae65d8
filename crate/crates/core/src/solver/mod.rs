//! The constraint satisfaction problem and the all-solutions solver.
//!
//! [`solve_all`] enumerates every total assignment satisfying all
//! constraints: specific constraints first prune domains to a fixed point,
//! variables are ordered most-constrained first, and an iterative depth-first
//! search checks each constraint as soon as its scope is bound (or earlier,
//! through interval bounds, for sum and product kinds).

mod bounds;
mod program;
mod search;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::BuildHasher;

use thiserror::Error;

use crate::compiler::{compile_constraints, CompileError, CompiledConstraint, ConstraintKind};
use crate::domain::Domain;
use crate::expr::{evaluate, parse_expression, Expr};
use crate::value::{EvalError, ParamValue};

use bounds::{aggregate_span, eligible, violates, Limit, Span};
pub(crate) use program::{IntProgram, Program};
pub use search::{count_solutions, count_with, solve_all, solve_with};

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("constraint `{constraint}` references unknown parameter `{name}`")]
    UnknownParameter { constraint: String, name: String },
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// A configuration search problem: named parameters with finite domains and
/// constraints over them.
///
/// Besides the compiled constraints, the problem keeps the original user
/// expressions (for independent validation) and the live domains, which are
/// the declared domains minus values removed by node consistency or
/// preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    params: Vec<Parameter>,
    live: Vec<Vec<u32>>,
    constraints: Vec<CompiledConstraint>,
    sources: Vec<Expr>,
    source_text: Vec<String>,
}

fn check_unique(params: &[(String, Domain)]) -> Result<(), ProblemError> {
    let mut seen = HashSet::new();
    for (name, _) in params {
        if !seen.insert(name.as_str()) {
            return Err(ProblemError::DuplicateParameter(name.clone()));
        }
    }
    Ok(())
}

impl Problem {
    /// Builds a problem from user constraint strings, compiling them.
    pub fn new<S: AsRef<str>>(params: Vec<(String, Domain)>, sources: &[S]) -> Result<Self, ProblemError> {
        check_unique(&params)?;
        let compiled = compile_constraints(sources, &params)?;
        let live = params
            .iter()
            .zip(&compiled.domains)
            .map(|((_, declared), (_, pruned))| {
                pruned
                    .values()
                    .iter()
                    .map(|v| declared.position(v).expect("pruned subset") as u32)
                    .collect()
            })
            .collect();
        let mut sources_parsed = Vec::with_capacity(sources.len());
        for (index, s) in sources.iter().enumerate() {
            // Already parsed successfully during compilation.
            sources_parsed.push(parse_expression(s.as_ref()).map_err(|error| CompileError::Parse {
                index,
                source_text: s.as_ref().to_string(),
                error,
            })?);
        }
        Ok(Problem {
            params: params.into_iter().map(|(name, domain)| Parameter { name, domain }).collect(),
            live,
            constraints: compiled.constraints,
            sources: sources_parsed,
            source_text: sources.iter().map(|s| s.as_ref().to_string()).collect(),
        })
    }

    /// Builds a problem from already classified constraints. Their predicate
    /// expressions double as the original expressions.
    pub fn from_compiled(
        params: Vec<(String, Domain)>,
        constraints: Vec<CompiledConstraint>,
    ) -> Result<Self, ProblemError> {
        check_unique(&params)?;
        let names: HashSet<&str> = params.iter().map(|(n, _)| n.as_str()).collect();
        for c in &constraints {
            for name in c.scope.iter().chain(c.expr.free_parameters().iter()) {
                if !names.contains(name.as_str()) {
                    return Err(ProblemError::UnknownParameter {
                        constraint: c.origin.clone(),
                        name: name.clone(),
                    });
                }
            }
        }
        Ok(Problem {
            live: params.iter().map(|(_, d)| (0..d.len() as u32).collect()).collect(),
            params: params.into_iter().map(|(name, domain)| Parameter { name, domain }).collect(),
            sources: constraints.iter().map(|c| c.expr.clone()).collect(),
            source_text: constraints.iter().map(|c| c.expr.to_string()).collect(),
            constraints,
        })
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.params
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn constraints(&self) -> &[CompiledConstraint] {
        &self.constraints
    }

    /// The user's original constraint expressions, before compilation.
    pub fn source_exprs(&self) -> &[Expr] {
        &self.sources
    }

    pub fn source_text(&self) -> &[String] {
        &self.source_text
    }

    /// The values of parameter `index` still allowed after pruning.
    pub fn live_domain(&self, index: usize) -> Domain {
        let declared = &self.params[index].domain;
        let keep: HashSet<u32> = self.live[index].iter().copied().collect();
        let mut position = 0u32;
        declared.filter(|_| {
            let k = keep.contains(&position);
            position += 1;
            k
        })
    }

    pub(crate) fn live_indices(&self, index: usize) -> &[u32] {
        &self.live[index]
    }

    fn live_values(&self, index: usize) -> impl Iterator<Item = &ParamValue> {
        let values = self.params[index].domain.values();
        self.live[index].iter().map(move |&i| &values[i as usize])
    }

    /// Product of the declared domain sizes.
    pub fn cartesian_size(&self) -> u128 {
        self.params.iter().map(|p| p.domain.len() as u128).product()
    }
}

/// One total assignment, positionally aligned with the problem's parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(pub Vec<ParamValue>);

impl Configuration {
    pub fn values(&self) -> &[ParamValue] {
        &self.0
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl<const N: usize> From<[i64; N]> for Configuration {
    fn from(values: [i64; N]) -> Self {
        Configuration(values.into_iter().map(ParamValue::Int).collect())
    }
}

/// An ordered list of configurations, stored compactly as indices into the
/// declared domains.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    names: Vec<String>,
    domains: Vec<Domain>,
    rows: Vec<u32>,
    count: usize,
}

impl SolutionSet {
    pub(crate) fn from_rows(names: Vec<String>, domains: Vec<Domain>, rows: Vec<u32>, count: usize) -> Self {
        debug_assert_eq!(rows.len(), count * names.len());
        SolutionSet {
            names,
            domains,
            rows,
            count,
        }
    }

    /// Builds a set from explicit configurations. Each parameter's domain is
    /// taken to be its distinct values in order of appearance.
    pub fn from_configurations(names: Vec<String>, configs: &[Configuration]) -> Result<Self, String> {
        let width = names.len();
        let mut domains: Vec<Vec<ParamValue>> = vec![Vec::new(); width];
        let mut lookup: Vec<HashMap<ParamValue, u32>> = vec![HashMap::new(); width];
        let mut rows = Vec::with_capacity(configs.len() * width);
        let mut seen = HashSet::with_capacity(configs.len());
        for config in configs {
            if config.0.len() != width {
                return Err(format!("configuration {config} has {} values, expected {width}", config.0.len()));
            }
            if !seen.insert(config) {
                return Err(format!("duplicate configuration {config}"));
            }
            for (i, v) in config.0.iter().enumerate() {
                let next = domains[i].len() as u32;
                let idx = *lookup[i].entry(v.clone()).or_insert_with(|| {
                    domains[i].push(v.clone());
                    next
                });
                rows.push(idx);
            }
        }
        let domains = domains
            .into_iter()
            .map(|values| {
                if values.is_empty() {
                    Ok(Domain::ints([0]).expect("placeholder").filter(|_| false))
                } else {
                    Domain::new(values).map_err(|e| e.to_string())
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(SolutionSet {
            names,
            domains,
            rows,
            count: configs.len(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Domain indices of configuration `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        let w = self.width();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn value(&self, i: usize, param: usize) -> &ParamValue {
        &self.domains[param].values()[self.row(i)[param] as usize]
    }

    pub fn configuration(&self, i: usize) -> Configuration {
        Configuration(
            self.row(i)
                .iter()
                .zip(&self.domains)
                .map(|(&idx, d)| d.values()[idx as usize].clone())
                .collect(),
        )
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.count).map(|i| self.configuration(i))
    }

    /// Order-insensitive comparison.
    pub fn same_set(&self, other: &SolutionSet) -> bool {
        self.names == other.names && self.count == other.count && self.difference_sample(other, 1).is_empty()
    }

    /// Up to `limit` configurations present in exactly one of the two sets,
    /// each tagged with the side it appears on.
    pub fn difference_sample(&self, other: &SolutionSet, limit: usize) -> Vec<(Side, Configuration)> {
        let mine: HashSet<Configuration> = self.configurations().collect();
        let theirs: HashSet<Configuration> = other.configurations().collect();
        let mut out = Vec::new();
        for c in self.configurations() {
            if out.len() >= limit {
                return out;
            }
            if !theirs.contains(&c) {
                out.push((Side::Left, c));
            }
        }
        for c in other.configurations() {
            if out.len() >= limit {
                return out;
            }
            if !mine.contains(&c) {
                out.push((Side::Right, c));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Sequence equality: same parameter names and the same configurations in
/// the same order.
impl PartialEq for SolutionSet {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.count == other.count
            && (0..self.count).all(|i| (0..self.width()).all(|p| self.value(i, p) == other.value(i, p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Prune domains with sum/product bounds before searching.
    pub preprocess: bool,
    /// Reject partial assignments that cannot satisfy a sum/product bound.
    pub partial_checks: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            preprocess: true,
            partial_checks: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("evaluating `{expr}` (from `{origin}`) at {}: {error}", format_bindings(bindings))]
    Eval {
        origin: String,
        expr: String,
        bindings: Vec<(String, ParamValue)>,
        error: EvalError,
    },
    #[error("constraint `{expr}` did not evaluate to a boolean at {}", format_bindings(bindings))]
    NotBoolean {
        expr: String,
        bindings: Vec<(String, ParamValue)>,
    },
}

fn format_bindings(bindings: &[(String, ParamValue)]) -> String {
    let parts: Vec<String> = bindings.iter().map(|(n, v)| format!("{n}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Parameters sorted by descending constraint degree, then ascending live
/// domain size, then declaration order.
pub fn order_variables(problem: &Problem) -> Vec<String> {
    order_indices(problem)
        .into_iter()
        .map(|i| problem.params[i].name.clone())
        .collect()
}

pub(crate) fn order_indices(problem: &Problem) -> Vec<usize> {
    let mut degree = vec![0usize; problem.params.len()];
    for c in &problem.constraints {
        for name in &c.scope {
            if let Some(i) = problem.parameter_index(name) {
                degree[i] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..problem.params.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(degree[i]), problem.live[i].len(), i));
    order
}

/// Interval data for an eligible sum/product constraint.
pub(crate) struct SpecificBounds {
    pub aggregate: crate::compiler::Aggregate,
    pub bound: crate::compiler::Bound,
    pub limit: Limit,
    pub slots: Vec<usize>,
    pub spans: Vec<Span>,
}

pub(crate) fn specific_bounds(problem: &Problem, constraint: &CompiledConstraint) -> Option<SpecificBounds> {
    let (aggregate, bound, limit) = constraint.kind.as_specific()?;
    let limit = Limit::from_value(limit)?;
    let slots: Vec<usize> = constraint
        .scope
        .iter()
        .map(|n| problem.parameter_index(n))
        .collect::<Option<_>>()?;
    let spans: Vec<Span> = slots
        .iter()
        .map(|&i| Span::of(problem.live_values(i)))
        .collect::<Option<_>>()?;
    eligible(aggregate, &spans).then_some(SpecificBounds {
        aggregate,
        bound,
        limit,
        slots,
        spans,
    })
}

/// Prunes live domains with the sum/product bounds of every eligible
/// specific constraint, iterating to a fixed point. Never removes a value
/// that occurs in a solution.
pub fn preprocess(problem: &Problem) -> Problem {
    let mut out = problem.clone();
    loop {
        let mut changed = false;
        for c in &problem.constraints {
            if out.live.iter().any(Vec::is_empty) {
                return out;
            }
            let Some(b) = specific_bounds(&out, c) else {
                continue;
            };
            for (pos, &slot) in b.slots.iter().enumerate() {
                let rest = aggregate_span(
                    b.aggregate,
                    b.spans.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, s)| *s),
                );
                let values = out.params[slot].domain.values();
                let before = out.live[slot].len();
                out.live[slot].retain(|&i| {
                    let v = values[i as usize].as_int().expect("eligible domains are integer");
                    !violates(b.aggregate, b.bound, b.limit, v, rest)
                });
                if out.live[slot].len() != before {
                    changed = true;
                    // Spans of this constraint are stale now; recompute.
                    break;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Outcome of checking one constraint against a (partial) assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Satisfied,
    /// Violated; `diagnostic` is set when evaluation itself failed.
    Violated { diagnostic: Option<EvalError> },
    Undecided,
}

/// Checks `constraint` against `partial`, a binding of some scope variables.
///
/// With the whole scope bound this evaluates the predicate. With part of it
/// bound, sum/product kinds report a violation when no completion over the
/// problem's live domains can meet the bound; everything else is undecided.
pub fn check<S: BuildHasher>(
    constraint: &CompiledConstraint,
    partial: &HashMap<String, ParamValue, S>,
    problem: &Problem,
) -> Verdict {
    if constraint.scope.iter().all(|n| partial.contains_key(n)) {
        return match evaluate(&constraint.expr, partial) {
            Ok(ParamValue::Bool(true)) => Verdict::Satisfied,
            Ok(ParamValue::Bool(false)) => Verdict::Violated { diagnostic: None },
            Ok(other) => Verdict::Violated {
                diagnostic: Some(EvalError::TypeMismatch {
                    op: "constraint",
                    left: other.tag(),
                    right: None,
                }),
            },
            Err(e) => Verdict::Violated { diagnostic: Some(e) },
        };
    }
    if matches!(constraint.kind, ConstraintKind::Generic | ConstraintKind::UnaryRestriction) {
        return Verdict::Undecided;
    }
    let Some((aggregate, bound, limit)) = constraint.kind.as_specific() else {
        return Verdict::Undecided;
    };
    let Some(limit) = Limit::from_value(limit) else {
        return Verdict::Undecided;
    };
    let mut spans = Vec::with_capacity(constraint.scope.len());
    let mut bound_mask = Vec::with_capacity(constraint.scope.len());
    for name in &constraint.scope {
        let span = match partial.get(name) {
            Some(v) => v.as_int().map(Span::point),
            None => problem.parameter_index(name).and_then(|i| Span::of(problem.live_values(i))),
        };
        let Some(span) = span else {
            return Verdict::Undecided;
        };
        spans.push(span);
        bound_mask.push(partial.contains_key(name));
    }
    if !eligible(aggregate, &spans) {
        return Verdict::Undecided;
    }
    let part = aggregate_span(aggregate, spans.iter().zip(&bound_mask).filter(|(_, b)| **b).map(|(s, _)| *s)).lo;
    let rest = aggregate_span(aggregate, spans.iter().zip(&bound_mask).filter(|(_, b)| !**b).map(|(s, _)| *s));
    if violates(aggregate, bound, limit, part, rest) {
        Verdict::Violated { diagnostic: None }
    } else {
        Verdict::Undecided
    }
}
