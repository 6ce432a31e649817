//! The chat-completion seam every prompt goes through.
//!
//! Backends, caching and transport live in the std crate; the pipeline
//! steps in this crate only see the [`Judge`] trait.

use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature requested for a single call.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureOverride {
    /// Use the judge configuration's temperature.
    #[default]
    Inherit,
    Fixed(f64),
    /// Send no temperature and let the provider pick its default.
    BackendDefault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub system_text: String,
    pub user_text: String,
    #[serde(default)]
    pub temperature: TemperatureOverride,
}

impl JudgeRequest {
    pub fn new(system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        Self { system_text: system_text.into(), user_text: user_text.into(), temperature: TemperatureOverride::Inherit }
    }

    pub fn with_temperature(mut self, temperature: TemperatureOverride) -> Self {
        self.temperature = temperature;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResponse {
    pub text: String,
    pub cached: bool,
    pub backend_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JudgeError {
    #[error("transport failed after {attempts} attempts: {last_error}")]
    TransportExhausted { attempts: u32, last_error: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("judge returned an empty completion")]
    EmptyCompletion,
    #[error("mock script has no entry for request {key}")]
    MockScriptMiss { key: String },
    #[error("cache error: {0}")]
    Cache(String),
}

/// A chat-completion judge.
pub trait Judge {
    /// Completes one request. Implementations must never return an empty
    /// text on success.
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeResponse, JudgeError>;

    /// Model identifier recorded next to every score.
    fn model_id(&self) -> &str;
}

impl<J: Judge + ?Sized> Judge for &J {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeResponse, JudgeError> {
        (**self).complete(request)
    }

    fn model_id(&self) -> &str {
        (**self).model_id()
    }
}
