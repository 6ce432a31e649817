//! Judge backends behind a transparent on-disk cache.

mod cache;
mod live;
mod mock;

pub use cache::{cache_key, CacheEntry, CachedJudge, JudgeStats};
pub use live::LiveBackend;
pub use mock::{MockBackend, MockRule, MockScript};

use std::path::PathBuf;
use std::time::Duration;

use lit_eval_core::judge::JudgeError;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A completion transport. `temperature` of `None` leaves the provider's
/// default in effect.
pub trait Backend: Send + Sync {
    fn call(&self, model_id: &str, temperature: Option<f64>, system: &str, user: &str) -> Result<String, JudgeError>;
    fn backend_id(&self) -> &str;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    Live { endpoint: String, api_key_env: String },
    Mock { script: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeConfig {
    pub backend: BackendConfig,
    pub model_id: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: u64,
    /// Base delay of the exponential backoff.
    pub retry_base_ms: u64,
    pub cache_dir: Option<PathBuf>,
    pub concurrency_limit: usize,
}

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_LIVE_MODEL: &str = "gpt-4o";

impl JudgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(CliError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.concurrency_limit == 0 {
            return Err(CliError::Config("concurrency limit must be at least 1".into()));
        }
        Ok(())
    }

    /// Configuration as written into summaries, without the worker count.
    pub fn recorded(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(map) = v.as_object_mut() {
            map.remove("concurrency_limit");
        }
        v
    }

    pub fn build(&self) -> Result<CachedJudge> {
        self.validate()?;
        let backend: Box<dyn Backend> = match &self.backend {
            BackendConfig::Mock { script } => Box::new(MockBackend::load(script)?),
            BackendConfig::Live { endpoint, api_key_env } => {
                let key = std::env::var(api_key_env)
                    .map_err(|_| CliError::Config(format!("environment variable {api_key_env} is not set")))?;
                Box::new(LiveBackend::new(
                    endpoint.clone(),
                    key,
                    Duration::from_secs(self.timeout_secs),
                    self.max_retries,
                    Duration::from_millis(self.retry_base_ms),
                )?)
            }
        };
        Ok(CachedJudge::new(backend, self.model_id.clone(), self.temperature, self.cache_dir.clone()))
    }
}
