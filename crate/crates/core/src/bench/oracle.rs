//! Exhaustive reference solver. It walks the declared Cartesian product and
//! evaluates the user's parsed expressions directly, sharing nothing with the
//! compiler or the search beyond the expression tree and its evaluator.

use std::collections::HashMap;

use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{evaluate, parse_expression, Expr, ParseError};
use crate::solver::{Configuration, Problem, SolutionSet};
use crate::value::{EvalError, ParamValue};

/// Default refusal threshold for [`brute_force_solve`].
pub const ORACLE_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("cartesian size {size} exceeds the oracle limit of {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("constraint {index}: {error}")]
    Parse { index: usize, error: ParseError },
    #[error("evaluating `{constraint}` at {configuration}: {error}")]
    Eval {
        constraint: String,
        configuration: Configuration,
        error: EvalError,
    },
    #[error("`{constraint}` is not boolean at {configuration}")]
    NotBoolean {
        constraint: String,
        configuration: Configuration,
    },
}

/// All configurations satisfying the problem's original expressions, in
/// Cartesian order (last parameter varying fastest).
pub fn brute_force_solve(problem: &Problem) -> Result<SolutionSet, OracleError> {
    brute_force_with_limit(problem, ORACLE_LIMIT)
}

pub fn brute_force_with_limit(problem: &Problem, limit: u128) -> Result<SolutionSet, OracleError> {
    let params: Vec<(String, Domain)> = problem
        .parameters()
        .iter()
        .map(|p| (p.name.clone(), p.domain.clone()))
        .collect();
    enumerate(&params, problem.source_exprs(), limit)
}

/// Parses `sources` and enumerates; used when timing the oracle end to end.
pub fn brute_force_from_sources<S: AsRef<str>>(
    params: &[(String, Domain)],
    sources: &[S],
    limit: u128,
) -> Result<SolutionSet, OracleError> {
    let exprs = sources
        .iter()
        .enumerate()
        .map(|(index, s)| parse_expression(s.as_ref()).map_err(|error| OracleError::Parse { index, error }))
        .collect::<Result<Vec<_>, _>>()?;
    enumerate(params, &exprs, limit)
}

fn enumerate(params: &[(String, Domain)], exprs: &[Expr], limit: u128) -> Result<SolutionSet, OracleError> {
    let size: u128 = params.iter().map(|(_, d)| d.len() as u128).product();
    if size > limit {
        return Err(OracleError::TooLarge { size, limit });
    }
    let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
    let domains: Vec<Domain> = params.iter().map(|(_, d)| d.clone()).collect();
    let mut rows = Vec::new();
    let mut count = 0;
    if size == 0 {
        return Ok(SolutionSet::from_rows(names, domains, rows, count));
    }
    let width = params.len();
    let mut cursor = vec![0u32; width];
    let mut env: HashMap<&str, ParamValue> = params
        .iter()
        .map(|(n, d)| (n.as_str(), d.values()[0].clone()))
        .collect();
    let configuration = |env: &HashMap<&str, ParamValue>| {
        Configuration(params.iter().map(|(n, _)| env[n.as_str()].clone()).collect())
    };
    loop {
        let mut ok = true;
        for e in exprs {
            match evaluate(e, &env) {
                Ok(ParamValue::Bool(true)) => {}
                Ok(ParamValue::Bool(false)) => {
                    ok = false;
                    break;
                }
                Ok(_) => {
                    return Err(OracleError::NotBoolean {
                        constraint: e.to_string(),
                        configuration: configuration(&env),
                    })
                }
                Err(error) => {
                    return Err(OracleError::Eval {
                        constraint: e.to_string(),
                        configuration: configuration(&env),
                        error,
                    })
                }
            }
        }
        if ok {
            rows.extend_from_slice(&cursor);
            count += 1;
        }
        let mut p = width;
        loop {
            if p == 0 {
                return Ok(SolutionSet::from_rows(names, domains, rows, count));
            }
            p -= 1;
            cursor[p] += 1;
            let (name, domain) = &params[p];
            if (cursor[p] as usize) < domain.len() {
                env.insert(name.as_str(), domain.values()[cursor[p] as usize].clone());
                break;
            }
            cursor[p] = 0;
            env.insert(name.as_str(), domain.values()[0].clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(x: &[i64], y: &[i64], constraints: &[&str]) -> Problem {
        Problem::new(
            vec![
                ("x".into(), Domain::ints(x.iter().copied()).unwrap()),
                ("y".into(), Domain::ints(y.iter().copied()).unwrap()),
            ],
            constraints,
        )
        .unwrap()
    }

    #[test]
    fn examples() {
        let s = brute_force_solve(&problem(&[1, 2, 4], &[1, 2, 4], &["x*y <= 4"])).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.configuration(0), [1, 1].into());
        assert_eq!(s.configuration(5), [4, 1].into());
        assert_eq!(brute_force_solve(&problem(&[1, 2], &[1, 2], &[])).unwrap().len(), 4);
        assert_eq!(brute_force_solve(&problem(&[1, 2], &[1], &["x > 100"])).unwrap().len(), 0);
    }

    #[test]
    fn refuses_large_products() {
        let p = problem(&[1, 2, 3], &[1, 2, 3], &[]);
        assert_eq!(
            brute_force_with_limit(&p, 8).unwrap_err(),
            OracleError::TooLarge { size: 9, limit: 8 }
        );
    }

    #[test]
    fn reports_offending_configuration() {
        let err = brute_force_solve(&problem(&[1, 0], &[3], &["y // x > 0"])).unwrap_err();
        assert_eq!(
            err,
            OracleError::Eval {
                constraint: "y // x > 0".into(),
                configuration: [0, 3].into(),
                error: EvalError::DivisionByZero
            }
        );
    }

    #[test]
    fn from_sources() {
        let params = vec![("x".to_string(), Domain::ints([1, 2, 3]).unwrap())];
        assert_eq!(brute_force_from_sources(&params, &["x != 2"], ORACLE_LIMIT).unwrap().len(), 2);
        assert!(matches!(
            brute_force_from_sources(&params, &["x !="], ORACLE_LIMIT),
            Err(OracleError::Parse { index: 0, .. })
        ));
    }
}
