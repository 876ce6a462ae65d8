//! Benchmark plumbing: the problem file format, the brute-force oracle, the
//! constraint-evaluation estimate and the timing harness.

mod oracle;
mod problem_file;
mod report;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use oracle::{brute_force_from_sources, brute_force_solve, brute_force_with_limit, OracleError, ORACLE_LIMIT};
pub use problem_file::{load_problem, CountsDoc, LoadError, ProblemDoc};
pub use report::{
    loglog_slope, run_benchmark, Aggregates, BenchConfig, BenchError, BenchReport, Method, SpaceRecord, SuiteSpace,
    TimeBoundary, Validation,
};

/// A non-negative count that may be a half-integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfCount {
    twice: u128,
}

impl HalfCount {
    pub fn as_integer(self) -> Option<u128> {
        self.twice.is_multiple_of(2).then_some(self.twice / 2)
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for HalfCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}.5", self.twice / 2),
        }
    }
}

impl Serialize for HalfCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_integer() {
            Some(n) => s.serialize_u128(n),
            None => s.serialize_f64(self.as_f64()),
        }
    }
}

impl<'de> Deserialize<'de> for HalfCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Whole(u128),
            Fraction(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Whole(n) => n
                .checked_mul(2)
                .map(|twice| HalfCount { twice })
                .ok_or_else(|| serde::de::Error::custom("count overflow")),
            Raw::Fraction(f) if f >= 0.0 && (f * 2.0).fract() == 0.0 && f * 2.0 < 2f64.powi(53) => {
                Ok(HalfCount { twice: (f * 2.0) as u128 })
            }
            Raw::Fraction(f) => Err(serde::de::Error::custom(format!("{f} is not a half-integer count"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("valid count {valid} exceeds cartesian size {cartesian}")]
    ValidExceedsCartesian { cartesian: u128, valid: u128 },
    #[error("need at least one constraint")]
    NoConstraints,
    #[error("count overflow")]
    Overflow,
}

/// Average number of constraint evaluations for brute-force construction:
/// `(|S_i| + |S_i| * c) / 2 + |S_v|` where `|S_i|` is the invalid count.
pub fn avg_constraint_evaluations(cartesian: u128, valid: u128, constraints: u128) -> Result<HalfCount, CountError> {
    if valid > cartesian {
        return Err(CountError::ValidExceedsCartesian { cartesian, valid });
    }
    if constraints == 0 {
        return Err(CountError::NoConstraints);
    }
    let invalid = cartesian - valid;
    let twice = constraints
        .checked_add(1)
        .and_then(|c| invalid.checked_mul(c))
        .and_then(|s| valid.checked_mul(2).and_then(|v| s.checked_add(v)))
        .ok_or(CountError::Overflow)?;
    Ok(HalfCount { twice })
}
