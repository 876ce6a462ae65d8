use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use uuid::Uuid;

use crate::api::*;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request to {url} failed: {source}")]
    Transport { url: String, source: reqwest::Error },
    #[error("{}{}", body.message, body.path.as_ref().map(|p| format!(" (at {p})")).unwrap_or_default())]
    Api { status: u16, body: ErrorBody },
    #[error("unexpected response from {url} ({status}): {message}")]
    Decode { url: String, status: u16, message: String },
}

impl ClientError {
    /// The service's error classification, if the service answered.
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            ClientError::Api { body, .. } => Some(body.kind),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client::with_http(reqwest::Client::new(), base)
    }

    pub fn with_http(http: reqwest::Client, base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        Client { http, base }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn call<B, R>(&self, method: Method, path: &str, body: Option<&B>) -> Result<R, ClientError>
    where
        B: Serialize + ?Sized,
        R: DeserializeOwned,
    {
        let url = format!("{}{path}", self.base);
        let mut request = self.http.request(method, &url);
        if let Some(body) = body {
            request = request.json(body);
        }
        let transport = |source| ClientError::Transport {
            url: url.clone(),
            source,
        };
        let response = request.send().await.map_err(transport)?;
        let status = response.status();
        let bytes = response.bytes().await.map_err(transport)?;
        let decode = |message: String| ClientError::Decode {
            url: url.clone(),
            status: status.as_u16(),
            message,
        };
        if !status.is_success() {
            return match serde_json::from_slice::<ErrorEnvelope>(&bytes) {
                Ok(envelope) => Err(ClientError::Api {
                    status: status.as_u16(),
                    body: envelope.error,
                }),
                Err(_) => Err(decode(String::from_utf8_lossy(&bytes).into_owned())),
            };
        }
        let bytes = if status == StatusCode::NO_CONTENT { &b"null"[..] } else { &bytes[..] };
        serde_json::from_slice(bytes).map_err(|e| decode(e.to_string()))
    }

    async fn get<R: DeserializeOwned>(&self, path: &str) -> Result<R, ClientError> {
        self.call::<(), R>(Method::GET, path, None).await
    }

    async fn post<B: Serialize + ?Sized, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, ClientError> {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        self.get("/health").await
    }

    pub async fn solve(&self, request: &SolveRequest) -> Result<SolveResponse, ClientError> {
        self.post("/solve", request).await
    }

    pub async fn validate(&self, request: &ValidateRequest) -> Result<ValidateResponse, ClientError> {
        self.post("/validate", request).await
    }

    pub async fn stats(&self, request: &StatsRequest) -> Result<StatsResponse, ClientError> {
        self.post("/stats", request).await
    }

    /// Returns the generated problem document.
    pub async fn generate(&self, spec: &SyntheticSpec) -> Result<Value, ClientError> {
        self.post("/generate", spec).await
    }

    pub async fn bench(&self, request: &BenchRequest) -> Result<BenchReport, ClientError> {
        self.post("/bench", request).await
    }

    pub async fn create_space(&self, request: &CreateSpace) -> Result<SpaceInfo, ClientError> {
        self.post("/spaces", request).await
    }

    pub async fn space(&self, id: Uuid) -> Result<SpaceInfo, ClientError> {
        self.get(&format!("/spaces/{id}")).await
    }

    pub async fn delete_space(&self, id: Uuid) -> Result<(), ClientError> {
        self.call::<(), ()>(Method::DELETE, &format!("/spaces/{id}"), None).await
    }

    pub async fn export(&self, id: Uuid, format: ExportFormat) -> Result<Value, ClientError> {
        self.get(&format!("/spaces/{id}/export?format={}", format.name())).await
    }

    pub async fn neighbors(&self, id: Uuid, request: &NeighborsRequest) -> Result<Configurations, ClientError> {
        self.post(&format!("/spaces/{id}/neighbors"), request).await
    }

    pub async fn sample(&self, id: Uuid, request: &SampleRequest) -> Result<Configurations, ClientError> {
        self.post(&format!("/spaces/{id}/sample"), request).await
    }

    pub async fn index_of(&self, id: Uuid, configuration: Vec<ParamValue>) -> Result<Option<usize>, ClientError> {
        let r: IndexResponse = self.post(&format!("/spaces/{id}/index"), &IndexRequest { configuration }).await?;
        Ok(r.index)
    }

    pub async fn bounds(&self, id: Uuid, parameter: &str) -> Result<Bounds, ClientError> {
        let request = BoundsRequest {
            parameter: parameter.to_string(),
        };
        self.post(&format!("/spaces/{id}/bounds"), &request).await
    }
}
