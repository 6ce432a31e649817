use std::thread::sleep;
use std::time::Duration;

use lit_eval_core::judge::JudgeError;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::Backend;
use crate::error::{CliError, Result};

/// Chat-completions client over HTTP.
pub struct LiveBackend {
    client: Client,
    endpoint: String,
    api_key: String,
    max_retries: u32,
    retry_base: Duration,
}

enum Failure {
    Retryable(String),
    Fatal(JudgeError),
}

impl LiveBackend {
    pub fn new(
        endpoint: String,
        api_key: String,
        timeout: Duration,
        max_retries: u32,
        retry_base: Duration,
    ) -> Result<Self> {
        let client =
            Client::builder().timeout(timeout).build().map_err(|e| CliError::Config(format!("http client: {e}")))?;
        Ok(Self { client, endpoint, api_key, max_retries, retry_base })
    }

    pub fn request_body(model_id: &str, temperature: Option<f64>, system: &str, user: &str) -> Value {
        let mut body = json!({
            "model": model_id,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        if let Some(t) = temperature {
            body["temperature"] = json!(t);
        }
        body
    }

    fn attempt(&self, body: &Value) -> Result<String, Failure> {
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Err(Failure::Retryable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(Failure::Fatal(JudgeError::Transport(format!("HTTP {status}: {text}"))));
        }
        let value: Value = resp.json().map_err(|e| Failure::Retryable(e.to_string()))?;
        let content = value["choices"][0]["message"]["content"].as_str().unwrap_or_default();
        if content.trim().is_empty() {
            return Err(Failure::Fatal(JudgeError::EmptyCompletion));
        }
        Ok(content.to_string())
    }
}

impl Backend for LiveBackend {
    fn call(&self, model_id: &str, temperature: Option<f64>, system: &str, user: &str) -> Result<String, JudgeError> {
        let body = Self::request_body(model_id, temperature, system, user);
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                sleep(self.retry_base * 2u32.saturating_pow(attempt - 1));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) => last = e,
            }
        }
        Err(JudgeError::TransportExhausted { attempts: self.max_retries + 1, last_error: last })
    }

    fn backend_id(&self) -> &str {
        &self.endpoint
    }
}
