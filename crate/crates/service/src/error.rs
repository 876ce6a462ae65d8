use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use tunespace::bench::{BenchError, LoadError, OracleError};
use tunespace::solver::{ProblemError, Side, SolveError};
use tunespace::space::SpaceError;
use tunespace::synth::SynthError;
use tunespace::Configuration;
use tunespace_client::api::{Difference, ErrorBody, ErrorEnvelope, ErrorKind, Origin};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: ErrorKind, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                kind,
                message: message.into(),
                path: None,
                differences: Vec::new(),
            },
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, ErrorKind::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, ErrorKind::NotFound, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorKind::Internal, message)
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        let mut e = ApiError::new(StatusCode::BAD_REQUEST, ErrorKind::Schema, message);
        e.body.path = Some(path.into());
        e
    }

    pub fn mismatch(message: impl Into<String>, differences: Vec<Difference>) -> Self {
        let mut e = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Validation, message);
        e.body.differences = differences;
        e
    }

    /// Prefixes the message, e.g. with the suite entry that failed.
    pub fn context(mut self, prefix: &str) -> Self {
        self.body.message = format!("{prefix}: {}", self.body.message);
        self
    }

    fn with_message(mut self, message: String) -> Self {
        self.body.message = message;
        self
    }

    pub fn kind(&self) -> ErrorKind {
        self.body.kind
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorEnvelope { error: self.body })).into_response()
    }
}

pub fn differences(diff: Vec<(Side, Configuration)>) -> Vec<Difference> {
    diff.into_iter()
        .map(|(side, c)| Difference {
            only_in: match side {
                Side::Left => Origin::Optimized,
                Side::Right => Origin::Bruteforce,
            },
            configuration: c.0,
        })
        .collect()
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), ErrorKind::Schema, r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Schema { path, message } => ApiError::schema(path, message),
            LoadError::Problem(p) => p.into(),
            io @ LoadError::Io { .. } => ApiError::internal(io.to_string()),
        }
    }
}

impl From<ProblemError> for ApiError {
    fn from(e: ProblemError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Problem, e.to_string())
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Evaluation, e.to_string())
    }
}

impl From<OracleError> for ApiError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => ApiError::bad_request(e.to_string()),
            OracleError::Parse { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Problem, e.to_string())
            }
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Evaluation, e.to_string()),
        }
    }
}

impl From<SpaceError> for ApiError {
    fn from(e: SpaceError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<SynthError> for ApiError {
    fn from(e: SynthError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<BenchError> for ApiError {
    fn from(e: BenchError) -> Self {
        let message = e.to_string();
        match e {
            BenchError::NoRepetitions | BenchError::NoMethods => ApiError::bad_request(message),
            BenchError::Problem { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Problem, message),
            BenchError::Solve { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorKind::Evaluation, message),
            BenchError::Oracle { source, .. } => ApiError::from(*source).with_message(message),
            BenchError::ValidationFailed { diff, .. } => ApiError::mismatch(message, differences(diff)),
        }
    }
}
