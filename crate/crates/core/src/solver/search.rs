//! Iterative depth-first enumeration with an explicit (level, cursor) stack.

use super::bounds::{aggregate_span, combine, exceeds, falls_short, identity, Limit, Span};
use super::{
    order_indices, preprocess, specific_bounds, IntProgram, Problem, Program, SolutionSet, SolveError, SolverOptions,
};
use crate::compiler::{Aggregate, Bound};
use crate::value::{EvalError, ParamValue};

/// Sum/product bound restricting the values of one level, given the levels
/// bound before it and the spans of the scope variables bound after it.
struct RangeCheck {
    aggregate: Aggregate,
    bound: Bound,
    limit: Limit,
    bound_slots: Vec<usize>,
    rest: Span,
}

struct FullCheck {
    constraint: usize,
    program: Program,
    fast: Option<IntProgram>,
}

struct Level {
    slot: usize,
    /// Declared-domain indices in iteration order; ascending by value when
    /// `keys` is set.
    values: Vec<u32>,
    /// Integer values aligned with `values`, if the domain is integer.
    keys: Option<Vec<i64>>,
    ranges: Vec<RangeCheck>,
    full: Vec<FullCheck>,
}

struct Search<'p> {
    problem: &'p Problem,
    levels: Vec<Level>,
    /// Constraints with an empty scope, checked once up front.
    constant: Vec<FullCheck>,
    /// Some check lacks an integer program, so keep general values bound.
    eager_values: bool,
}

impl<'p> Search<'p> {
    fn new(problem: &'p Problem, options: SolverOptions) -> Result<Self, SolveError> {
        let pre = options.preprocess.then(|| preprocess(problem));
        let working = pre.as_ref().unwrap_or(problem);
        let order = order_indices(working);
        let mut level_of = vec![0usize; order.len()];
        for (level, &slot) in order.iter().enumerate() {
            level_of[slot] = level;
        }
        let params = problem.parameters();
        let int_domain: Vec<bool> = params
            .iter()
            .map(|p| p.domain.values().iter().all(|v| matches!(v, ParamValue::Int(_))))
            .collect();
        let mut levels: Vec<Level> = order
            .iter()
            .map(|&slot| Level {
                slot,
                values: working.live_indices(slot).to_vec(),
                keys: None,
                ranges: Vec::new(),
                full: Vec::new(),
            })
            .collect();
        let mut constant = Vec::new();
        let slot_of = |name: &str| problem.parameter_index(name);
        let int_slot = |name: &str| slot_of(name).filter(|&i| int_domain[i]);
        for (ci, c) in problem.constraints.iter().enumerate() {
            let program = Program::compile(&c.expr, &slot_of).map_err(|error| SolveError::Eval {
                origin: c.origin.clone(),
                expr: c.expr.to_string(),
                bindings: Vec::new(),
                error,
            })?;
            let check = FullCheck {
                constraint: ci,
                program,
                fast: IntProgram::compile(&c.expr, &int_slot),
            };
            let slots: Vec<usize> = c.expr.free_parameters().iter().filter_map(|n| slot_of(n)).collect();
            let Some(last) = slots.iter().map(|&s| level_of[s]).max() else {
                constant.push(check);
                continue;
            };
            let bounds = if options.partial_checks {
                specific_bounds(working, c)
            } else {
                None
            };
            let Some(b) = bounds else {
                levels[last].full.push(check);
                continue;
            };
            // Ranges at every scope level, the last one included, decide the
            // constraint exactly, so no full check is needed.
            let scope_levels: Vec<usize> = b.slots.iter().map(|&s| level_of[s]).collect();
            for (k, &level) in scope_levels.iter().enumerate() {
                let bound_slots = b
                    .slots
                    .iter()
                    .zip(&scope_levels)
                    .filter(|(_, &l)| l < level)
                    .map(|(&s, _)| s)
                    .collect();
                let rest = aggregate_span(
                    b.aggregate,
                    b.spans.iter().zip(&scope_levels).filter(|(_, &l)| l > level).map(|(s, _)| *s),
                );
                debug_assert_eq!(b.slots[k], levels[level].slot);
                levels[level].ranges.push(RangeCheck {
                    aggregate: b.aggregate,
                    bound: b.bound,
                    limit: b.limit,
                    bound_slots,
                    rest,
                });
            }
        }
        for level in &mut levels {
            if int_domain[level.slot] {
                let domain = params[level.slot].domain.values();
                let key = |i: u32| domain[i as usize].as_int().expect("integer domain");
                if !level.ranges.is_empty() {
                    level.values.sort_by_key(|&i| key(i));
                }
                level.keys = Some(level.values.iter().map(|&i| key(i)).collect());
            }
        }
        let eager_values = levels
            .iter()
            .flat_map(|l| &l.full)
            .chain(&constant)
            .any(|c| c.fast.is_none());
        Ok(Search {
            problem,
            levels,
            constant,
            eager_values,
        })
    }

    fn failure(&self, check: &FullCheck, slots: &[ParamValue], error: Option<EvalError>) -> SolveError {
        let c = &self.problem.constraints[check.constraint];
        let bindings = c
            .expr
            .free_parameters()
            .into_iter()
            .filter_map(|n| self.problem.parameter_index(&n).map(|i| (n, slots[i].clone())))
            .collect();
        match error {
            Some(error) => SolveError::Eval {
                origin: c.origin.clone(),
                expr: c.expr.to_string(),
                bindings,
                error,
            },
            None => SolveError::NotBoolean {
                expr: c.expr.to_string(),
                bindings,
            },
        }
    }

    fn run_general(&self, check: &FullCheck, slots: &[ParamValue], stack: &mut Vec<ParamValue>) -> Result<bool, SolveError> {
        match check.program.run(slots, stack) {
            Ok(ParamValue::Bool(b)) => Ok(b),
            Ok(_) => Err(self.failure(check, slots, None)),
            Err(e) => Err(self.failure(check, slots, Some(e))),
        }
    }

    /// Allowed position range of `level`'s values under its range checks.
    fn range(&self, level: &Level, ints: &[i64]) -> (usize, usize) {
        let mut lo = 0;
        let mut hi = level.values.len();
        let Some(keys) = &level.keys else {
            return (lo, hi);
        };
        for rc in &level.ranges {
            let part = rc
                .bound_slots
                .iter()
                .fold(identity(rc.aggregate), |acc, &s| combine(rc.aggregate, acc, ints[s]));
            let with = |v: i64| combine(rc.aggregate, part, v);
            if rc.bound != Bound::Max {
                lo = lo.max(keys.partition_point(|&v| falls_short(rc.aggregate, rc.limit, with(v), rc.rest)));
            }
            if rc.bound != Bound::Min {
                hi = hi.min(keys.partition_point(|&v| !exceeds(rc.aggregate, rc.limit, with(v), rc.rest)));
            }
            if lo >= hi {
                break;
            }
        }
        (lo, hi)
    }

    /// Runs the search, calling `emit` with declared-domain indices (in
    /// declaration order) for every solution.
    fn run(&self, mut emit: impl FnMut(&[u32])) -> Result<(), SolveError> {
        let params = self.problem.parameters();
        let n = self.levels.len();
        let mut slots: Vec<ParamValue> = params
            .iter()
            .map(|p| p.domain.values().first().cloned().unwrap_or(ParamValue::Bool(false)))
            .collect();
        let mut ints: Vec<i64> = vec![0; n];
        let mut current: Vec<u32> = vec![0; n];
        let mut stack = Vec::with_capacity(16);
        let mut int_stack = Vec::with_capacity(16);

        for check in &self.constant {
            if !self.run_general(check, &slots, &mut stack)? {
                return Ok(());
            }
        }
        if n == 0 {
            emit(&current);
            return Ok(());
        }

        let mut cursor = vec![0usize; n];
        let mut end = vec![0usize; n];
        let mut level = 0usize;
        (cursor[0], end[0]) = self.range(&self.levels[0], &ints);
        loop {
            if cursor[level] >= end[level] {
                if level == 0 {
                    return Ok(());
                }
                level -= 1;
                cursor[level] += 1;
                continue;
            }
            let lv = &self.levels[level];
            let pos = cursor[level];
            let idx = lv.values[pos];
            current[lv.slot] = idx;
            if let Some(keys) = &lv.keys {
                ints[lv.slot] = keys[pos];
            }
            if self.eager_values {
                slots[lv.slot] = params[lv.slot].domain.values()[idx as usize].clone();
            }

            let mut consistent = true;
            for check in &lv.full {
                let verdict = match check.fast.as_ref().and_then(|f| f.run(&ints, &mut int_stack)) {
                    Some(b) => b,
                    None => {
                        if !self.eager_values {
                            for (p, &i) in current.iter().enumerate() {
                                slots[p] = params[p].domain.values()[i as usize].clone();
                            }
                        }
                        self.run_general(check, &slots, &mut stack)?
                    }
                };
                if !verdict {
                    consistent = false;
                    break;
                }
            }

            if !consistent {
                cursor[level] += 1;
            } else if level + 1 == n {
                emit(&current);
                cursor[level] += 1;
            } else {
                level += 1;
                (cursor[level], end[level]) = self.range(&self.levels[level], &ints);
            }
        }
    }
}

/// Enumerates every configuration satisfying all constraints, with
/// preprocessing and partial checks enabled.
pub fn solve_all(problem: &Problem) -> Result<SolutionSet, SolveError> {
    solve_with(problem, SolverOptions::default())
}

pub fn solve_with(problem: &Problem, options: SolverOptions) -> Result<SolutionSet, SolveError> {
    let search = Search::new(problem, options)?;
    let width = problem.parameters().len();
    let mut rows = Vec::new();
    let mut count = 0usize;
    search.run(|row| {
        rows.extend_from_slice(row);
        count += 1;
    })?;
    Ok(SolutionSet::from_rows(
        problem.names(),
        problem.parameters().iter().map(|p| p.domain.clone()).collect(),
        {
            debug_assert_eq!(rows.len(), count * width);
            rows
        },
        count,
    ))
}

/// Number of solutions, without materializing them.
pub fn count_solutions(problem: &Problem) -> Result<u64, SolveError> {
    count_with(problem, SolverOptions::default())
}

pub fn count_with(problem: &Problem, options: SolverOptions) -> Result<u64, SolveError> {
    let search = Search::new(problem, options)?;
    let mut count = 0u64;
    search.run(|_| count += 1)?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::CompiledConstraint;
    use crate::domain::Domain;
    use crate::solver::Configuration;

    fn ints(values: impl IntoIterator<Item = i64>) -> Domain {
        Domain::ints(values).unwrap()
    }

    fn xy(x: &[i64], y: &[i64]) -> Vec<(String, Domain)> {
        vec![
            ("x".to_string(), ints(x.iter().copied())),
            ("y".to_string(), ints(y.iter().copied())),
        ]
    }

    fn configs(set: &SolutionSet) -> Vec<Configuration> {
        let mut v: Vec<Configuration> = set.configurations().collect();
        v.sort_by(|a, b| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        v
    }

    const ALL_OPTIONS: [SolverOptions; 4] = [
        SolverOptions { preprocess: true, partial_checks: true },
        SolverOptions { preprocess: true, partial_checks: false },
        SolverOptions { preprocess: false, partial_checks: true },
        SolverOptions { preprocess: false, partial_checks: false },
    ];

    #[test]
    fn generic_sum_example() {
        let p = Problem::from_compiled(xy(&[1, 2], &[1, 2]), vec![CompiledConstraint::generic("x+y <= 3").unwrap()]).unwrap();
        let s = solve_all(&p).unwrap();
        assert_eq!(configs(&s), vec![[1, 1].into(), [1, 2].into(), [2, 1].into()]);
    }

    #[test]
    fn max_product_example_under_all_toggles() {
        let p = Problem::from_compiled(
            xy(&[1, 2, 4], &[1, 2, 4]),
            vec![CompiledConstraint::max_product(4, &["x", "y"])],
        )
        .unwrap();
        for options in ALL_OPTIONS {
            let s = solve_with(&p, options).unwrap();
            assert_eq!(
                configs(&s),
                vec![[1, 1].into(), [1, 2].into(), [1, 4].into(), [2, 1].into(), [2, 2].into(), [4, 1].into()],
                "{options:?}"
            );
            assert_eq!(count_with(&p, options).unwrap(), 6);
        }
    }

    #[test]
    fn unconstrained_is_cartesian_product() {
        let p = Problem::new(xy(&[1, 2, 3], &[4, 5, 6]), &[] as &[&str]).unwrap();
        let s = solve_all(&p).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(count_solutions(&p).unwrap(), 9);
        // Declaration order, domain order.
        assert_eq!(s.configuration(0), [1, 4].into());
        assert_eq!(s.configuration(1), [1, 5].into());
    }

    #[test]
    fn empty_pruned_domain_has_no_solutions() {
        let p = Problem::new(xy(&[1, 2], &[1, 2]), &["x > 100"]).unwrap();
        assert_eq!(count_solutions(&p).unwrap(), 0);
        assert!(solve_all(&p).unwrap().is_empty());
    }

    #[test]
    fn evaluation_errors_carry_the_configuration() {
        let p = Problem::new(xy(&[0, 1], &[1, 2]), &["y // x >= 1"]).unwrap();
        match solve_all(&p) {
            Err(SolveError::Eval { error, bindings, .. }) => {
                assert_eq!(error, EvalError::DivisionByZero);
                assert!(bindings.contains(&("x".to_string(), ParamValue::Int(0))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_boolean_constraint_is_an_error() {
        let p = Problem::new(xy(&[0, 1], &[1, 2]), &["x + y"]).unwrap();
        assert!(matches!(solve_all(&p), Err(SolveError::NotBoolean { .. })));
    }

    #[test]
    fn zero_parameters() {
        let p = Problem::new(Vec::new(), &["True"]).unwrap();
        assert_eq!(count_solutions(&p).unwrap(), 1);
    }

    #[test]
    fn text_and_bool_parameters() {
        let p = Problem::new(
            vec![
                ("mode".to_string(), Domain::new(vec!["fast".into(), "slow".into()]).unwrap()),
                ("cache".to_string(), Domain::new(vec![true.into(), false.into()]).unwrap()),
                ("x".to_string(), ints([1, 2, 3])),
            ],
            &["mode == 'fast' or not cache", "cache or x > 1"],
        )
        .unwrap();
        let s = solve_all(&p).unwrap();
        // fast: cache=T x=1..3 (3) + cache=F x=2,3 (2); slow: cache=F x=2,3 (2)
        assert_eq!(s.len(), 7);
    }

    #[test]
    fn block_size_problem_count_matches_enumeration() {
        let x: Vec<i64> = [1, 2, 4, 8, 16].into_iter().chain((1..=32).map(|i| 32 * i)).collect();
        let y: Vec<i64> = (0..6).map(|i| 1 << i).collect();
        let mut expected = 0;
        for a in &x {
            for b in &y {
                if (32..=1024).contains(&(a * b)) {
                    expected += 1;
                }
            }
        }
        let p = Problem::new(xy(&x, &y), &["x*y >= 32", "x*y <= 1024"]).unwrap();
        for options in ALL_OPTIONS {
            assert_eq!(count_with(&p, options).unwrap(), expected);
        }
    }
}
