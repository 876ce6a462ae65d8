//! The JSON problem format:
//!
//! ```json
//! {"parameters": {"x": [1, 2, 4], "y": [1, 2, 4]}, "constraints": ["x*y <= 4"]}
//! ```
//!
//! Parameter order is significant. Domains are non-empty arrays of distinct
//! scalars of a single type (integer, real, boolean or string).

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::domain::Domain;
use crate::solver::{Problem, ProblemError};
use crate::value::ParamValue;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// A problem as written in a file: declared domains and raw constraint
/// strings, not yet compiled.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDoc {
    pub parameters: Vec<(String, Domain)>,
    pub constraints: Vec<String>,
}

struct Scalar(ParamValue);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        ParamValue::from_json(&v).map(Scalar).map_err(de::Error::custom)
    }
}

struct DomainDoc(Domain);

impl<'de> Deserialize<'de> for DomainDoc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<Scalar>::deserialize(deserializer)?;
        Domain::new(values.into_iter().map(|s| s.0).collect())
            .map(DomainDoc)
            .map_err(de::Error::custom)
    }
}

struct Parameters(Vec<(String, Domain)>);

impl<'de> Deserialize<'de> for Parameters {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Parameters;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping parameter names to value arrays")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Parameters, A::Error> {
                let mut out: Vec<(String, Domain)> = Vec::new();
                while let Some(name) = map.next_key::<String>()? {
                    if out.iter().any(|(n, _)| *n == name) {
                        return Err(de::Error::custom(format!("duplicate parameter `{name}`")));
                    }
                    let domain: DomainDoc = map.next_value()?;
                    out.push((name, domain.0));
                }
                Ok(Parameters(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    parameters: Parameters,
    constraints: Vec<String>,
}

impl ProblemDoc {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LoadError::Schema {
                path: if path == "." { "$".into() } else { format!("$.{path}") },
                message: e.into_inner().to_string(),
            }
        })?;
        Ok(ProblemDoc {
            parameters: raw.parameters.0,
            constraints: raw.constraints,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ProblemDoc::parse(&text)
    }

    /// The document of an existing problem, using its declared domains and
    /// original constraint text.
    pub fn from_problem(problem: &Problem) -> Self {
        ProblemDoc {
            parameters: problem
                .parameters()
                .iter()
                .map(|p| (p.name.clone(), p.domain.clone()))
                .collect(),
            constraints: problem.source_text().to_vec(),
        }
    }

    /// Parses and compiles the constraints.
    pub fn to_problem(&self) -> Result<Problem, ProblemError> {
        Problem::new(self.parameters.clone(), &self.constraints)
    }

    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(n, d)| (n.clone(), Value::Array(d.values().iter().map(ParamValue::to_json).collect())))
            .collect();
        serde_json::json!({"parameters": params, "constraints": self.constraints})
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }
}

/// Reads and compiles a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem, LoadError> {
    Ok(ProblemDoc::load(path)?.to_problem()?)
}

/// Alternative `stats` input: counts only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsDoc {
    pub cartesian_size: u128,
    pub valid_count: u128,
    pub num_constraints: usize,
}

impl CountsDoc {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LoadError::Schema {
                path: if path == "." { "$".into() } else { format!("$.{path}") },
                message: e.into_inner().to_string(),
            }
        })
    }
}
