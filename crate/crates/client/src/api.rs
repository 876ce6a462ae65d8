//! Request and response bodies exchanged with the service.
//!
//! Problems travel as the JSON problem document (`{"parameters": ..,
//! "constraints": ..}`) and are parsed server-side, so schema errors come
//! back with a JSON path.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

pub use tunespace::bench::{BenchReport, HalfCount, Method, TimeBoundary, Validation};
pub use tunespace::space::ExportFormat;
pub use tunespace::synth::{SpaceStats, SyntheticSpec};
pub use tunespace::ParamValue;

use tunespace::SolverOptions;

/// Solver toggles. Both default to on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub preprocess: bool,
    pub partial_checks: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            preprocess: true,
            partial_checks: true,
        }
    }
}

impl From<Options> for SolverOptions {
    fn from(o: Options) -> Self {
        SolverOptions {
            preprocess: o.preprocess,
            partial_checks: o.partial_checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub problem: Value,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub format: ExportFormat,
    /// Skip the exported space and return counts only.
    #[serde(default)]
    pub count_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub valid_count: u64,
    pub cartesian_size: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSpace {
    pub problem: Value,
    #[serde(default)]
    pub options: Options,
}

/// A resolved space held by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceInfo {
    pub id: Uuid,
    pub parameters: Vec<String>,
    pub valid_count: u64,
    pub cartesian_size: u128,
    pub num_constraints: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NeighborMethod {
    Hamming { distance: usize },
    AdjacentIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborsRequest {
    pub configuration: Vec<ParamValue>,
    #[serde(flatten)]
    pub method: NeighborMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub n: usize,
    pub seed: u64,
}

/// Configurations with their positions in the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configurations {
    pub indices: Vec<usize>,
    pub configurations: Vec<Vec<ParamValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRequest {
    pub configuration: Vec<ParamValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexResponse {
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRequest {
    pub parameter: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub parameter: String,
    pub min: ParamValue,
    pub max: ParamValue,
}

/// `input` is either a problem document or a counts document
/// (`cartesian_size`, `valid_count`, `num_constraints`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRequest {
    pub input: Value,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsResponse {
    pub stats: SpaceStats,
    /// Absent when there are no constraints.
    pub avg_constraint_evaluations: Option<HalfCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRequest {
    pub problem: Value,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Optimized,
    Bruteforce,
}

/// A configuration produced by only one of the two methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Difference {
    pub only_in: Origin,
    pub configuration: Vec<ParamValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub parameters: usize,
    pub constraints: usize,
    pub cartesian_size: u128,
    pub valid_count: u64,
    /// Oracle cross-check; skipped above the oracle's size limit.
    pub oracle: Validation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differences: Vec<Difference>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub problem: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Problems(Vec<SuiteEntry>),
    /// Grid spec such as `d=2,3;s=1e4;m=2`, generated with the request seed.
    Grid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub suite: Suite,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub time_boundary: TimeBoundary,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_limit: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub spaces: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// The document does not match the expected JSON shape.
    Schema,
    /// Well-formed but not a valid problem: bad expression, unknown name.
    Problem,
    /// A constraint failed to evaluate during solving.
    Evaluation,
    /// Optimized and brute-force results disagree.
    Validation,
    NotFound,
    BadRequest,
    Capacity,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differences: Vec<Difference>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}
