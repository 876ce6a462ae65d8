//! Construction of constrained auto-tuning search spaces.
//!
//! Constraint strings are parsed ([`expr`]), decomposed and classified into
//! solver-friendly forms ([`compiler`]), and every valid configuration is
//! enumerated by a backtracking solver ([`solver`]). The result is wrapped in
//! an indexed [`space::SearchSpace`] for sampling and neighbor queries.
//! [`synth`] generates synthetic benchmark problems and [`bench`] holds the
//! brute-force oracle, problem file format and benchmark harness.

pub mod bench;
pub mod compiler;
pub mod domain;
pub mod expr;
pub mod solver;
pub mod space;
pub mod synth;
pub mod value;

pub use compiler::{CompiledConstraint, ConstraintKind};
pub use domain::Domain;
pub use expr::{evaluate, parse_expression, Expr};
pub use solver::{solve_all, Configuration, Problem, SolutionSet, SolverOptions};
pub use space::SearchSpace;
pub use value::{EvalError, ParamValue};
