use std::collections::HashSet;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use serde::Deserialize;
use serde_json::Value;
use tunespace::bench::{
    avg_constraint_evaluations, brute_force_with_limit, run_benchmark, BenchConfig, BenchReport, CountsDoc, ProblemDoc,
    SuiteSpace, Validation,
};
use tunespace::solver::{count_with, solve_with};
use tunespace::space::{build_with, export as export_space, ExportFormat, Neighborhood};
use tunespace::synth::{generate_space, SpaceStats, SuiteGrid, SyntheticSpec};
use tunespace::{Configuration, Problem, SearchSpace};
use tunespace_client::api::*;
use uuid::Uuid;

use crate::error::differences;
use crate::store::Session;
use crate::{ApiError, AppState};

type Body<T> = Result<Json<T>, JsonRejection>;
type Reply<T> = Result<Json<T>, ApiError>;

async fn blocking<T: Send + 'static>(
    work: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn parse_problem(doc: &Value) -> Result<(ProblemDoc, Problem), ApiError> {
    let doc = ProblemDoc::parse(&doc.to_string())?;
    let problem = doc.to_problem()?;
    Ok((doc, problem))
}

fn space_id(id: Result<Path<Uuid>, PathRejection>) -> Result<Uuid, ApiError> {
    id.map(|Path(id)| id).map_err(|r| ApiError::not_found(r.body_text()))
}

fn listed(space: &SearchSpace, indices: Vec<usize>) -> Configurations {
    let configurations = indices
        .iter()
        .map(|&i| space.get(i).expect("index from the space").0)
        .collect();
    Configurations {
        indices,
        configurations,
    }
}

pub async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spaces: state.store.len(),
    })
}

pub async fn solve(body: Body<SolveRequest>) -> Reply<SolveResponse> {
    let Json(req) = body?;
    blocking(move || {
        let (_, problem) = parse_problem(&req.problem)?;
        let options = req.options.into();
        if req.count_only {
            return Ok(SolveResponse {
                valid_count: count_with(&problem, options)?,
                cartesian_size: problem.cartesian_size(),
                space: None,
            });
        }
        let space = build_with(&problem, options)?;
        Ok(SolveResponse {
            valid_count: space.len() as u64,
            cartesian_size: space.cartesian_size(),
            space: Some(export_space(&space, req.format)),
        })
    })
    .await
    .map(Json)
}

pub async fn validate(State(state): State<AppState>, body: Body<ValidateRequest>) -> Reply<ValidateResponse> {
    let Json(req) = body?;
    let limit = state.config.oracle_limit;
    blocking(move || {
        let (doc, problem) = parse_problem(&req.problem)?;
        let solutions = solve_with(&problem, req.options.into())?;
        let cartesian = problem.cartesian_size();
        let (oracle, diff) = if cartesian <= limit {
            let reference = brute_force_with_limit(&problem, limit)?;
            if solutions.same_set(&reference) {
                (Validation::Pass, Vec::new())
            } else {
                (Validation::Fail, differences(solutions.difference_sample(&reference, 10)))
            }
        } else {
            (Validation::Skipped, Vec::new())
        };
        Ok(ValidateResponse {
            parameters: doc.parameters.len(),
            constraints: doc.constraints.len(),
            cartesian_size: cartesian,
            valid_count: solutions.len() as u64,
            oracle,
            differences: diff,
        })
    })
    .await
    .map(Json)
}

pub async fn stats(body: Body<StatsRequest>) -> Reply<StatsResponse> {
    let Json(req) = body?;
    blocking(move || {
        let (cartesian, valid, constraints) = if req.input.get("parameters").is_some() {
            let (doc, problem) = parse_problem(&req.input)?;
            let valid = count_with(&problem, req.options.into())?;
            (problem.cartesian_size(), valid as u128, doc.constraints.len())
        } else {
            let counts = CountsDoc::parse(&req.input.to_string())?;
            (counts.cartesian_size, counts.valid_count, counts.num_constraints)
        };
        let stats = SpaceStats::from_counts(cartesian, valid, constraints)?;
        let avg = match constraints {
            0 => None,
            m => Some(
                avg_constraint_evaluations(cartesian, valid, m as u128)
                    .map_err(|e| ApiError::bad_request(e.to_string()))?,
            ),
        };
        Ok(StatsResponse {
            stats,
            avg_constraint_evaluations: avg,
        })
    })
    .await
    .map(Json)
}

pub async fn generate(body: Body<SyntheticSpec>) -> Reply<Value> {
    let Json(spec) = body?;
    blocking(move || Ok(ProblemDoc::from_problem(&generate_space(&spec)?).to_json()))
        .await
        .map(Json)
}

fn suite_spaces(suite: Suite, seed: u64) -> Result<Vec<SuiteSpace>, ApiError> {
    let spaces = match suite {
        Suite::Problems(entries) => entries
            .into_iter()
            .map(|e| {
                let doc = ProblemDoc::parse(&e.problem.to_string()).map_err(|x| ApiError::from(x).context(&e.id))?;
                Ok(SuiteSpace { id: e.id, doc })
            })
            .collect::<Result<Vec<_>, ApiError>>()?,
        Suite::Grid(spec) => {
            let grid: SuiteGrid = spec.parse()?;
            grid.specs(seed)
                .iter()
                .map(|s| {
                    Ok(SuiteSpace {
                        id: s.id(),
                        doc: ProblemDoc::from_problem(&generate_space(s)?),
                    })
                })
                .collect::<Result<Vec<_>, ApiError>>()?
        }
    };
    let mut seen = HashSet::new();
    if let Some(dup) = spaces.iter().find(|s| !seen.insert(s.id.as_str())) {
        return Err(ApiError::bad_request(format!("duplicate space id `{}`", dup.id)));
    }
    Ok(spaces)
}

pub async fn bench(State(state): State<AppState>, body: Body<BenchRequest>) -> Reply<BenchReport> {
    let Json(req) = body?;
    let _running = state.bench_lock.lock().await;
    let oracle_limit = req.oracle_limit.unwrap_or(state.config.oracle_limit);
    blocking(move || {
        let suite = suite_spaces(req.suite, req.seed)?;
        tracing::info!(spaces = suite.len(), repetitions = req.repetitions, "benchmark started");
        let config = BenchConfig {
            methods: req.methods,
            repetitions: req.repetitions,
            boundary: req.time_boundary,
            oracle_limit,
            options: req.options.into(),
        };
        Ok(run_benchmark(&suite, &config)?)
    })
    .await
    .map(Json)
}

fn info(id: Uuid, session: &Session) -> SpaceInfo {
    SpaceInfo {
        id,
        parameters: session.space.names().to_vec(),
        valid_count: session.space.len() as u64,
        cartesian_size: session.space.cartesian_size(),
        num_constraints: session.num_constraints,
    }
}

pub async fn create_space(State(state): State<AppState>, body: Body<CreateSpace>) -> Result<(StatusCode, Json<SpaceInfo>), ApiError> {
    let Json(req) = body?;
    let session = blocking(move || {
        let (doc, problem) = parse_problem(&req.problem)?;
        Ok(Session {
            space: build_with(&problem, req.options.into())?,
            num_constraints: doc.constraints.len(),
        })
    })
    .await?;
    let id = state.store.insert(session)?;
    let session = state.store.get(id)?;
    tracing::info!(%id, valid = session.space.len(), "space created");
    Ok((StatusCode::CREATED, Json(info(id, &session))))
}

pub async fn space_info(State(state): State<AppState>, id: Result<Path<Uuid>, PathRejection>) -> Reply<SpaceInfo> {
    let id = space_id(id)?;
    Ok(Json(info(id, &*state.store.get(id)?)))
}

pub async fn delete_space(State(state): State<AppState>, id: Result<Path<Uuid>, PathRejection>) -> Result<StatusCode, ApiError> {
    state.store.remove(space_id(id)?)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
pub struct ExportQuery {
    #[serde(default)]
    format: ExportFormat,
}

pub async fn export(
    State(state): State<AppState>,
    id: Result<Path<Uuid>, PathRejection>,
    query: Result<Query<ExportQuery>, QueryRejection>,
) -> Reply<Value> {
    let session = state.store.get(space_id(id)?)?;
    let Query(query) = query?;
    blocking(move || Ok(export_space(&session.space, query.format))).await.map(Json)
}

pub async fn neighbors(
    State(state): State<AppState>,
    id: Result<Path<Uuid>, PathRejection>,
    body: Body<NeighborsRequest>,
) -> Reply<Configurations> {
    let session = state.store.get(space_id(id)?)?;
    let Json(req) = body?;
    let method = match req.method {
        NeighborMethod::Hamming { distance } => Neighborhood::Hamming(distance),
        NeighborMethod::AdjacentIndex => Neighborhood::AdjacentIndex,
    };
    blocking(move || {
        let indices = session.space.neighbor_indices(&Configuration(req.configuration), method)?;
        Ok(listed(&session.space, indices))
    })
    .await
    .map(Json)
}

pub async fn sample(
    State(state): State<AppState>,
    id: Result<Path<Uuid>, PathRejection>,
    body: Body<SampleRequest>,
) -> Reply<Configurations> {
    let session = state.store.get(space_id(id)?)?;
    let Json(req) = body?;
    blocking(move || {
        let indices = session.space.sample_indices(req.n, req.seed)?;
        Ok(listed(&session.space, indices))
    })
    .await
    .map(Json)
}

pub async fn index_of(
    State(state): State<AppState>,
    id: Result<Path<Uuid>, PathRejection>,
    body: Body<IndexRequest>,
) -> Reply<IndexResponse> {
    let session = state.store.get(space_id(id)?)?;
    let Json(req) = body?;
    let index = session.space.index_of(&Configuration(req.configuration))?;
    Ok(Json(IndexResponse { index }))
}

pub async fn bounds(
    State(state): State<AppState>,
    id: Result<Path<Uuid>, PathRejection>,
    body: Body<BoundsRequest>,
) -> Reply<Bounds> {
    let session = state.store.get(space_id(id)?)?;
    let Json(req) = body?;
    let (min, max) = session.space.bounds(&req.parameter)?;
    Ok(Json(Bounds {
        parameter: req.parameter,
        min,
        max,
    }))
}
