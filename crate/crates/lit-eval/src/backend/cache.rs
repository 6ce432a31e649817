use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use lit_eval_core::fingerprint::sha256_hex;
use lit_eval_core::judge::{Judge, JudgeError, JudgeRequest, JudgeResponse, TemperatureOverride};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Backend;
use crate::io::temp_sibling;

/// Hash of everything that determines a completion.
pub fn cache_key(model_id: &str, temperature: Option<f64>, system: &str, user: &str) -> String {
    let t = match temperature {
        Some(t) => json!(t),
        None => json!("default"),
    };
    sha256_hex(json!([model_id, t, system, user]).to_string().as_bytes())
}

/// One cached completion; the request is stored for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model_id: String,
    pub temperature: Option<f64>,
    pub system_text: String,
    pub user_text: String,
    pub text: String,
    pub backend_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeStats {
    pub backend_calls: u64,
    pub cache_hits: u64,
}

/// A [`Judge`] that consults `cache_dir` before its backend.
pub struct CachedJudge {
    backend: Box<dyn Backend>,
    model_id: String,
    temperature: f64,
    cache_dir: Option<PathBuf>,
    calls: AtomicU64,
    hits: AtomicU64,
}

impl CachedJudge {
    pub fn new(backend: Box<dyn Backend>, model_id: String, temperature: f64, cache_dir: Option<PathBuf>) -> Self {
        Self { backend, model_id, temperature, cache_dir, calls: AtomicU64::new(0), hits: AtomicU64::new(0) }
    }

    pub fn stats(&self) -> JudgeStats {
        JudgeStats { backend_calls: self.calls.load(Ordering::Relaxed), cache_hits: self.hits.load(Ordering::Relaxed) }
    }

    fn resolve(&self, t: TemperatureOverride) -> Option<f64> {
        match t {
            TemperatureOverride::Inherit => Some(self.temperature),
            TemperatureOverride::Fixed(v) => Some(v),
            TemperatureOverride::BackendDefault => None,
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn lookup(&self, key: &str) -> Option<CacheEntry> {
        let bytes = fs::read(self.path(key)?).ok()?;
        serde_json::from_slice::<CacheEntry>(&bytes).ok().filter(|e| e.key == key)
    }

    fn store(&self, entry: &CacheEntry) -> Result<(), JudgeError> {
        let Some(path) = self.path(&entry.key) else { return Ok(()) };
        let err = |e: std::io::Error| JudgeError::Cache(format!("{}: {e}", path.display()));
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(err)?;
        }
        let tmp = temp_sibling(&path);
        let bytes = serde_json::to_vec_pretty(entry).expect("serializable");
        fs::write(&tmp, bytes).map_err(err)?;
        fs::rename(&tmp, &path).map_err(err)
    }
}

impl Judge for CachedJudge {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeResponse, JudgeError> {
        let temperature = self.resolve(request.temperature);
        let key = cache_key(&self.model_id, temperature, &request.system_text, &request.user_text);
        if let Some(hit) = self.lookup(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(JudgeResponse { text: hit.text, cached: true, backend_id: hit.backend_id, latency_ms: 0 });
        }
        let started = Instant::now();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let text = self.backend.call(&self.model_id, temperature, &request.system_text, &request.user_text)?;
        if text.trim().is_empty() {
            return Err(JudgeError::EmptyCompletion);
        }
        let entry = CacheEntry {
            key,
            model_id: self.model_id.clone(),
            temperature,
            system_text: request.system_text.clone(),
            user_text: request.user_text.clone(),
            text,
            backend_id: self.backend.backend_id().to_string(),
        };
        self.store(&entry)?;
        Ok(JudgeResponse {
            text: entry.text,
            cached: false,
            backend_id: entry.backend_id,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}
