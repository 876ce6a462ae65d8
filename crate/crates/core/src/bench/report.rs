//! Timing harness and report format.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::oracle::{brute_force_from_sources, OracleError, ORACLE_LIMIT};
use super::problem_file::ProblemDoc;
use crate::solver::{solve_with, Configuration, ProblemError, Side, SolutionSet, SolveError, SolverOptions};
use crate::space::SearchSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "optimized")]
    Optimized,
    #[serde(rename = "bruteforce")]
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Optimized => "optimized",
            Method::BruteForce => "bruteforce",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimized" => Ok(Method::Optimized),
            "bruteforce" | "brute-force" => Ok(Method::BruteForce),
            other => Err(format!("unknown method `{other}` (expected optimized or bruteforce)")),
        }
    }
}

/// What the optimized timing covers. Parsing and compiling the constraints
/// is always included; file I/O never is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TimeBoundary {
    #[serde(rename = "solve")]
    Solve,
    #[default]
    #[serde(rename = "solve+index")]
    SolveIndex,
}

impl FromStr for TimeBoundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solve" => Ok(TimeBoundary::Solve),
            "solve+index" => Ok(TimeBoundary::SolveIndex),
            other => Err(format!("unknown time boundary `{other}` (expected solve or solve+index)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validation {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub space: String,
    pub method: Method,
    /// Minimum over repetitions.
    pub seconds: f64,
    pub valid_count: u64,
    pub cartesian_size: u128,
    pub validation: Validation,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub spaces: usize,
    pub repetitions: usize,
    pub time_boundary: TimeBoundary,
    pub optimized_seconds: Option<f64>,
    pub bruteforce_seconds: Option<f64>,
    /// Brute-force total over optimized total.
    pub speedup: Option<f64>,
    pub max_optimized_seconds: Option<f64>,
    /// Least-squares slope of log(optimized time) against log(valid count),
    /// over spaces with at least one valid configuration.
    pub loglog_slope: Option<f64>,
    pub validated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spaces: Vec<SpaceRecord>,
    pub aggregates: Aggregates,
}

impl BenchReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per (space, method).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "space",
            "method",
            "seconds",
            "valid_count",
            "cartesian_size",
            "validation",
            "repetitions",
        ])
        .expect("in-memory write");
        for r in &self.spaces {
            w.write_record([
                r.space.clone(),
                r.method.to_string(),
                format!("{:?}", r.seconds),
                r.valid_count.to_string(),
                r.cartesian_size.to_string(),
                serde_json::to_value(r.validation).expect("unit variant").as_str().expect("string").to_string(),
                r.repetitions.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn record(&self, space: &str, method: Method) -> Option<&SpaceRecord> {
        self.spaces.iter().find(|r| r.space == space && r.method == method)
    }
}

/// One benchmark input.
#[derive(Debug, Clone)]
pub struct SuiteSpace {
    pub id: String,
    pub doc: ProblemDoc,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub boundary: TimeBoundary,
    pub oracle_limit: u128,
    pub options: SolverOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec![Method::Optimized, Method::BruteForce],
            repetitions: 1,
            boundary: TimeBoundary::default(),
            oracle_limit: ORACLE_LIMIT,
            options: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("no methods selected")]
    NoMethods,
    #[error("space {space}: {source}")]
    Problem { space: String, source: ProblemError },
    #[error("space {space}: {source}")]
    Solve { space: String, source: Box<SolveError> },
    #[error("space {space}: {source}")]
    Oracle { space: String, source: Box<OracleError> },
    #[error("space {space}: optimized and brute-force solutions differ ({} shown)", diff.len())]
    ValidationFailed {
        space: String,
        diff: Vec<(Side, Configuration)>,
    },
}

enum Built {
    Solutions(SolutionSet),
    Space(SearchSpace),
}

impl Built {
    fn solutions(&self) -> &SolutionSet {
        match self {
            Built::Solutions(s) => s,
            Built::Space(s) => s.solutions(),
        }
    }
}

fn time_optimized(space: &SuiteSpace, config: &BenchConfig) -> Result<(f64, Built, u128), BenchError> {
    let start = Instant::now();
    let problem = space.doc.to_problem().map_err(|source| BenchError::Problem {
        space: space.id.clone(),
        source,
    })?;
    let solutions = solve_with(&problem, config.options).map_err(|source| BenchError::Solve {
        space: space.id.clone(),
        source: Box::new(source),
    })?;
    let cartesian = problem.cartesian_size();
    let built = match config.boundary {
        TimeBoundary::Solve => Built::Solutions(solutions),
        TimeBoundary::SolveIndex => {
            Built::Space(SearchSpace::from_solutions(solutions, cartesian).expect("solver output fits the index"))
        }
    };
    Ok((start.elapsed().as_secs_f64(), built, cartesian))
}

fn time_oracle(space: &SuiteSpace, config: &BenchConfig) -> Result<(f64, SolutionSet), BenchError> {
    let start = Instant::now();
    let solutions = brute_force_from_sources(&space.doc.parameters, &space.doc.constraints, config.oracle_limit)
        .map_err(|source| BenchError::Oracle {
            space: space.id.clone(),
            source: Box::new(source),
        })?;
    Ok((start.elapsed().as_secs_f64(), solutions))
}

/// Runs every selected method on every space, strictly sequentially, and
/// validates the optimized solver against the oracle when both run.
pub fn run_benchmark(spaces: &[SuiteSpace], config: &BenchConfig) -> Result<BenchReport, BenchError> {
    run_benchmark_with(spaces, config, |_| {})
}

/// As [`run_benchmark`], reporting each record as soon as it is measured.
pub fn run_benchmark_with(
    spaces: &[SuiteSpace],
    config: &BenchConfig,
    mut progress: impl FnMut(&SpaceRecord),
) -> Result<BenchReport, BenchError> {
    if config.repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    if config.methods.is_empty() {
        return Err(BenchError::NoMethods);
    }
    let run_optimized = config.methods.contains(&Method::Optimized);
    let run_oracle = config.methods.contains(&Method::BruteForce);
    let cartesian_of = |doc: &ProblemDoc| doc.parameters.iter().map(|(_, d)| d.len() as u128).product::<u128>();
    let mut records = Vec::new();
    let mut validated = 0;
    let mut skipped = 0;
    for space in spaces {
        let mut optimized = None;
        let mut oracle = None;
        if run_optimized {
            let mut best = f64::INFINITY;
            let mut last = None;
            for _ in 0..config.repetitions {
                let (t, built, cartesian) = time_optimized(space, config)?;
                best = best.min(t);
                last = Some((built, cartesian));
            }
            optimized = Some((best, last.expect("at least one repetition")));
        }
        if run_oracle {
            let mut best = f64::INFINITY;
            let mut last = None;
            for _ in 0..config.repetitions {
                let (t, solutions) = time_oracle(space, config)?;
                best = best.min(t);
                last = Some(solutions);
            }
            oracle = Some((best, last.expect("at least one repetition")));
        }
        let validation = match (&optimized, &oracle) {
            (Some((_, (built, _))), Some((_, reference))) => {
                if !built.solutions().same_set(reference) {
                    return Err(BenchError::ValidationFailed {
                        space: space.id.clone(),
                        diff: built.solutions().difference_sample(reference, 10),
                    });
                }
                validated += 1;
                Validation::Pass
            }
            _ => {
                skipped += 1;
                Validation::Skipped
            }
        };
        if let Some((seconds, (built, cartesian))) = &optimized {
            let r = SpaceRecord {
                space: space.id.clone(),
                method: Method::Optimized,
                seconds: *seconds,
                valid_count: built.solutions().len() as u64,
                cartesian_size: *cartesian,
                validation,
                repetitions: config.repetitions,
            };
            progress(&r);
            records.push(r);
        }
        if let Some((seconds, reference)) = &oracle {
            let r = SpaceRecord {
                space: space.id.clone(),
                method: Method::BruteForce,
                seconds: *seconds,
                valid_count: reference.len() as u64,
                cartesian_size: cartesian_of(&space.doc),
                validation,
                repetitions: config.repetitions,
            };
            progress(&r);
            records.push(r);
        }
    }
    let total = |m: Method| {
        let times: Vec<f64> = records.iter().filter(|r| r.method == m).map(|r| r.seconds).collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>())
    };
    let optimized_seconds = total(Method::Optimized);
    let bruteforce_seconds = total(Method::BruteForce);
    let speedup = match (optimized_seconds, bruteforce_seconds) {
        (Some(o), Some(b)) if o > 0.0 => Some(b / o),
        _ => None,
    };
    let optimized: Vec<&SpaceRecord> = records.iter().filter(|r| r.method == Method::Optimized).collect();
    let max_optimized_seconds = optimized.iter().map(|r| r.seconds).reduce(f64::max);
    let points: Vec<(f64, f64)> = optimized.iter().map(|r| (r.valid_count as f64, r.seconds)).collect();
    Ok(BenchReport {
        aggregates: Aggregates {
            spaces: spaces.len(),
            repetitions: config.repetitions,
            time_boundary: config.boundary,
            optimized_seconds,
            bruteforce_seconds,
            speedup,
            max_optimized_seconds,
            loglog_slope: loglog_slope(&points),
            validated,
            skipped,
        },
        spaces: records,
    })
}

/// Ordinary least-squares slope of `ln y` against `ln x`, ignoring points
/// with a non-positive coordinate. `None` with fewer than two usable points
/// or no spread in `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
