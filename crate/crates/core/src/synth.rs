//! Seeded synthetic search spaces for scalability benchmarks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{evaluate, parse_expression};
use crate::solver::{Problem, SolutionSet};
use crate::value::ParamValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("need at least one dimension")]
    NoDimensions,
    #[error("constraints need at least two dimensions, got {0}")]
    TooFewDimensions(usize),
    #[error("target size {size} is too small for {dims} dimensions of at least two values")]
    Infeasible { size: u64, dims: usize },
    #[error("solutions are over {found:?}, problem has {expected:?}")]
    Mismatch { expected: Vec<String>, found: Vec<String> },
    #[error("invalid counts: {0}")]
    Counts(String),
    #[error("invalid grid `{spec}`: {message}")]
    Grid { spec: String, message: String },
}

/// Per-dimension value counts whose product approximates `size`.
///
/// With `v = size^(1/dims)`, all but the last dimension take `v` rounded to
/// nearest (half away from zero) and the last takes `v` rounded the other
/// way. Exact integer roots give equal counts.
pub fn dims_for(size: u64, dims: usize) -> Result<Vec<u64>, SynthError> {
    if dims == 0 {
        return Err(SynthError::NoDimensions);
    }
    let infeasible = SynthError::Infeasible { size, dims };
    if dims >= 64 || size < 1u64 << dims {
        return Err(infeasible);
    }
    let v = (size as f64).powf(1.0 / dims as f64);
    let exact = (v.round() as u64).saturating_sub(1)..=v.round() as u64 + 1;
    for r in exact {
        if r.checked_pow(dims as u32) == Some(size) {
            return Ok(vec![r; dims]);
        }
    }
    let nearest = v.round();
    let contrary = if nearest > v { v.floor() } else { v.ceil() };
    let mut out = vec![nearest as u64; dims - 1];
    out.push(contrary as u64);
    if out.iter().any(|&c| c < 2) {
        return Err(infeasible);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Target Cartesian size.
    pub size: u64,
    pub dims: usize,
    pub constraints: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Stable identifier, e.g. `d3-s10000-m2`.
    pub fn id(&self) -> String {
        format!("d{}-s{}-m{}", self.dims, self.size, self.constraints)
    }
}

const SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy)]
enum Template {
    MaxProduct,
    MinProduct,
    MaxSum,
    MinSum,
    Weighted,
    ProductMinus,
    Quotient,
    ParityOr,
}

const TEMPLATES: [Template; 8] = [
    Template::MaxProduct,
    Template::MinProduct,
    Template::MaxSum,
    Template::MinSum,
    Template::Weighted,
    Template::ProductMinus,
    Template::Quotient,
    Template::ParityOr,
];

impl Template {
    /// The calibrated term, and whether the limit is an upper bound.
    fn term(self, vars: &[String]) -> (String, bool) {
        let rest = |from: usize| vars[from..].join(" + ");
        match self {
            Template::MaxProduct => (vars.join(" * "), true),
            Template::MinProduct => (vars.join(" * "), false),
            Template::MaxSum => (vars.join(" + "), true),
            Template::MinSum => (vars.join(" + "), false),
            Template::Weighted => (format!("2 * {} + {}", vars[0], rest(1)), true),
            Template::ProductMinus if vars.len() > 2 => (format!("{} * {} - ({})", vars[0], vars[1], rest(2)), false),
            Template::ProductMinus => (format!("{} * {} - {}", vars[0], vars[1], vars[1]), false),
            Template::Quotient if vars.len() > 2 => (format!("{} * {} // {}", vars[0], vars[1], rest(2)), true),
            Template::Quotient => (format!("{} * {} // ({} + {})", vars[0], vars[1], vars[0], vars[1]), true),
            Template::ParityOr => (vars.join(" * "), true),
        }
    }

    fn render(self, vars: &[String], term: &str, upper: bool, limit: i64) -> String {
        let op = if upper { "<=" } else { ">=" };
        match self {
            Template::ParityOr => format!("{} % 2 == 0 or {term} {op} {limit}", vars[vars.len() - 1]),
            _ => format!("{term} {op} {limit}"),
        }
    }
}

fn parameter_name(i: usize) -> String {
    format!("p{i}")
}

/// Generates a seeded synthetic problem: linear integer dimensions `1..=n`
/// and `spec.constraints` randomly drawn constraints over random subsets of
/// at least two dimensions. Each constraint's limit is a quantile of its
/// term over random points, chosen so that roughly 20% to 90% of the
/// Cartesian product satisfies it.
pub fn generate_space(spec: &SyntheticSpec) -> Result<Problem, SynthError> {
    if spec.constraints > 0 && spec.dims < 2 {
        return Err(SynthError::TooFewDimensions(spec.dims));
    }
    let counts = dims_for(spec.size, spec.dims)?;
    let names: Vec<String> = (0..spec.dims).map(parameter_name).collect();
    let params: Vec<(String, Domain)> = names
        .iter()
        .zip(&counts)
        .map(|(n, &c)| (n.clone(), Domain::ints(1..=c as i64).expect("at least two values")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sources = Vec::with_capacity(spec.constraints);
    for _ in 0..spec.constraints {
        let arity = rng.random_range(2..=spec.dims.min(3));
        let mut scope = sample(&mut rng, spec.dims, arity).into_vec();
        scope.sort_unstable();
        let vars: Vec<String> = scope.iter().map(|&i| names[i].clone()).collect();
        let template = TEMPLATES[rng.random_range(0..TEMPLATES.len())];
        let (term, upper) = template.term(&vars);
        let expr = parse_expression(&term).expect("templates parse");
        let mut values: Vec<i64> = Vec::with_capacity(SAMPLES);
        let mut env: HashMap<&str, ParamValue> = HashMap::with_capacity(arity);
        for _ in 0..SAMPLES {
            for &i in &scope {
                env.insert(&names[i], ParamValue::Int(rng.random_range(1..=counts[i] as i64)));
            }
            let v = evaluate(&expr, &env).expect("templates evaluate on positive integers");
            values.push(v.as_int().expect("integer term"));
        }
        values.sort_unstable();
        let survival: f64 = rng.random_range(0.2..=0.9);
        let q = if upper { survival } else { 1.0 - survival };
        let at = ((q * (SAMPLES - 1) as f64).round() as usize).min(SAMPLES - 1);
        sources.push(template.render(&vars, &term, upper, values[at]));
    }
    Ok(Problem::new(params, &sources).expect("generated constraints compile"))
}

/// Size characteristics of a resolved space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceStats {
    pub cartesian_size: u128,
    pub valid_count: u128,
    pub invalid_count: u128,
    pub num_constraints: usize,
    pub sparsity_fraction: f64,
}

impl SpaceStats {
    pub fn from_counts(cartesian: u128, valid: u128, num_constraints: usize) -> Result<Self, SynthError> {
        if valid > cartesian {
            return Err(SynthError::Counts(format!(
                "valid count {valid} exceeds cartesian size {cartesian}"
            )));
        }
        let invalid = cartesian - valid;
        Ok(SpaceStats {
            cartesian_size: cartesian,
            valid_count: valid,
            invalid_count: invalid,
            num_constraints,
            sparsity_fraction: if cartesian == 0 { 0.0 } else { invalid as f64 / cartesian as f64 },
        })
    }
}

impl fmt::Display for SpaceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cartesian_size: {}", self.cartesian_size)?;
        writeln!(f, "valid_count: {}", self.valid_count)?;
        writeln!(f, "invalid_count: {}", self.invalid_count)?;
        writeln!(f, "num_constraints: {}", self.num_constraints)?;
        write!(f, "sparsity_fraction: {:.6}", self.sparsity_fraction)
    }
}

/// Statistics of `problem` given its full solution set. The constraint count
/// is the number of user constraints, before decomposition.
pub fn characterize(problem: &Problem, solutions: &SolutionSet) -> Result<SpaceStats, SynthError> {
    let expected = problem.names();
    if solutions.names() != expected.as_slice() {
        return Err(SynthError::Mismatch {
            expected,
            found: solutions.names().to_vec(),
        });
    }
    SpaceStats::from_counts(
        problem.cartesian_size(),
        solutions.len() as u128,
        problem.source_text().len(),
    )
}

/// A factorial grid of synthetic specs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteGrid {
    pub dims: Vec<usize>,
    pub sizes: Vec<u64>,
    pub constraints: Vec<usize>,
}

impl Default for SuiteGrid {
    fn default() -> Self {
        SuiteGrid {
            dims: vec![2, 3, 4, 5],
            sizes: vec![10_000, 100_000, 1_000_000],
            constraints: vec![2, 4, 6],
        }
    }
}

impl SuiteGrid {
    /// Specs in `dims`, then `sizes`, then `constraints` order, each with a
    /// seed derived from `seed` and its position.
    pub fn specs(&self, seed: u64) -> Vec<SyntheticSpec> {
        let mut out = Vec::new();
        for &dims in &self.dims {
            for &size in &self.sizes {
                for &constraints in &self.constraints {
                    let position = out.len() as u64;
                    out.push(SyntheticSpec {
                        size,
                        dims,
                        constraints,
                        seed: seed ^ position.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    });
                }
            }
        }
        out
    }
}

/// Parses a count written as digits or `<mantissa>e<exponent>`, e.g. `1e6`.
pub fn parse_count(s: &str) -> Option<u64> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(n);
    }
    let (mantissa, exp) = s.split_once(['e', 'E'])?;
    let mantissa: u64 = mantissa.parse().ok()?;
    let exp: u32 = exp.parse().ok()?;
    mantissa.checked_mul(10u64.checked_pow(exp)?)
}

/// Parses `d=2,3;s=1e4,1e5;m=2,4`. Omitted keys keep their defaults.
impl FromStr for SuiteGrid {
    type Err = SynthError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let err = |message: String| SynthError::Grid {
            spec: spec.to_string(),
            message,
        };
        let mut grid = SuiteGrid::default();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, list) = part
                .split_once('=')
                .ok_or_else(|| err(format!("`{part}` is not key=values")))?;
            let values: Vec<u64> = list
                .split(',')
                .map(|v| parse_count(v.trim()).ok_or_else(|| err(format!("`{v}` is not a count"))))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(err(format!("no values for `{key}`")));
            }
            match key.trim() {
                "d" | "dims" => grid.dims = values.into_iter().map(|v| v as usize).collect(),
                "s" | "size" | "sizes" => grid.sizes = values,
                "m" | "constraints" => grid.constraints = values.into_iter().map(|v| v as usize).collect(),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(grid)
    }
}
