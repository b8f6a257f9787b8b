//! Configuration, the immutable serving snapshot and the HTTP façade over
//! the sleep-quality library.

pub mod api;
pub mod config;
pub mod http;
pub mod snapshot;

pub use api::{ApiError, HealthResponse, PredictRequest, PredictResponse, WhatIfRequest};
pub use config::{AppConfig, ConfigError, ServerConfig, TrainSettings};
pub use http::router;
pub use snapshot::{patterns_digest, sha256_hex, Snapshot, SnapshotError, Versions};
