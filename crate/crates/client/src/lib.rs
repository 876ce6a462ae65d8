//! Thin async client for the tunespace HTTP service.
//!
//! ```no_run
//! # async fn run() -> Result<(), tunespace_client::ClientError> {
//! use tunespace_client::{api::SolveRequest, Client};
//!
//! let client = Client::new("http://127.0.0.1:8080");
//! let problem = serde_json::json!({"parameters": {"x": [1, 2, 4]}, "constraints": ["x > 1"]});
//! let solved = client
//!     .solve(&SolveRequest { problem, options: Default::default(), format: Default::default(), count_only: true })
//!     .await?;
//! assert_eq!(solved.valid_count, 2);
//! # Ok(())
//! # }
//! ```

pub mod api;

#[cfg(feature = "http")]
mod http;

#[cfg(feature = "http")]
pub use http::{Client, ClientError};
