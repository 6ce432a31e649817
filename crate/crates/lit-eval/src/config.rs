//! Run settings: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::Args;
use lit_eval_core::fingerprint::short_hash;
use lit_eval_core::metrics::AlphaLevel;
use lit_eval_core::prompt::PromptOptions;
use lit_eval_core::report::PercentMapping;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::backend::{
    BackendConfig, JudgeConfig, MockScript, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT, DEFAULT_LIVE_MODEL,
};
use crate::error::{CliError, Result};
use crate::io::digest_file;

pub const DEFAULT_OUT: &str = "runs";
pub const DEFAULT_RUN_ID: &str = "run";
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_TIMEOUT_SECS: u64 = 120;
pub const DEFAULT_RETRY_BASE_MS: u64 = 1000;
/// Radial origin of radar charts, in percent.
pub const DEFAULT_AXIS_MIN: f64 = 40.0;

fn parse_serde<T: for<'de> Deserialize<'de>>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_mapping(s: &str) -> std::result::Result<PercentMapping, String> {
    parse_serde(s)
}

fn parse_level(s: &str) -> std::result::Result<AlphaLevel, String> {
    parse_serde(s)
}

fn parse_k_shot(s: &str) -> std::result::Result<u8, String> {
    let k: u8 = s.parse().map_err(|e| format!("{e}"))?;
    lit_eval_core::prompt::K_SHOT_CHOICES
        .contains(&k)
        .then_some(k)
        .ok_or_else(|| "must be one of 0, 5, 10, 15, 20".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GranularityArg {
    Paragraph,
    Sentence,
}

/// Every flag. A JSON config file uses the same names with underscores.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON file with default values for any flag
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Story metadata; defaults to stories.jsonl beside the corpus
    #[arg(long)]
    pub stories: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Vec<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Model scores for `agree`: annotation records, scorecards or grades
    #[arg(long)]
    pub model_scores: Vec<PathBuf>,
    #[arg(long)]
    pub rubric: Option<PathBuf>,
    /// Few-shot example bank for judging
    #[arg(long)]
    pub shots: Option<PathBuf>,
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long)]
    pub scorecards: Vec<PathBuf>,
    #[arg(long)]
    pub grades: Vec<PathBuf>,
    /// Sample manifest restricting the evaluated items
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    #[arg(long)]
    pub model: Option<String>,
    /// Judge temperature (evaluation default 0.0)
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,

    #[arg(long, value_parser = parse_k_shot)]
    pub k_shot: Option<u8>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub cot: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub no_rubric: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub no_reference: Option<bool>,
    /// Show the reference translation when grading questions
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub verse_reference: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub no_summary: Option<bool>,
    /// Which reference translation prompts show (0-based)
    #[arg(long)]
    pub reference_index: Option<usize>,
    /// Target number of questions generated per paragraph
    #[arg(long)]
    pub n_questions: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_per_story: Option<usize>,
    #[arg(long)]
    pub q_per_item: Option<usize>,
    /// Comma-separated story ids (default: all)
    #[arg(long)]
    pub story_ids: Option<String>,
    /// Comma-separated system ids to assign to sampled items
    #[arg(long)]
    pub systems: Option<String>,

    #[arg(long)]
    pub n_shots: Option<usize>,
    #[arg(long, value_enum)]
    pub granularity: Option<GranularityArg>,
    /// Translation example bank
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Allow translation examples without a dialogue/narrative mix
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub no_mixed: Option<bool>,
    /// System id for generated translations (default: model id)
    #[arg(long)]
    pub system_id: Option<String>,

    #[arg(long, value_parser = parse_mapping)]
    pub percent_mapping: Option<PercentMapping>,
    #[arg(long)]
    pub axis_min: Option<f64>,
    /// CSV of externally computed metrics with a system_id column
    #[arg(long)]
    pub baseline: Vec<PathBuf>,
    #[arg(long, value_parser = parse_level)]
    pub alpha_level: Option<AlphaLevel>,

    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub run_id: Option<String>,
}

fn overlay(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        let given = match &v {
            Value::Null => false,
            Value::Array(a) => !a.is_empty(),
            _ => true,
        };
        if given {
            base.insert(k, v);
        }
    }
}

impl Settings {
    /// Applies the config file named by `--config` beneath the flags.
    pub fn resolve(self) -> Result<Settings> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = crate::io::read_text(&path)?;
        let file: Settings = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let Value::Object(mut base) = serde_json::to_value(&file).expect("serializable") else { unreachable!() };
        let Value::Object(top) = serde_json::to_value(&self).expect("serializable") else { unreachable!() };
        overlay(&mut base, top);
        let mut merged: Settings =
            serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Config(e.to_string()))?;
        merged.config = Some(path);
        Ok(merged)
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        value.as_deref().ok_or_else(|| CliError::Config(format!("--{flag} is required")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn run_id(&self) -> &str {
        self.run_id.as_deref().unwrap_or(DEFAULT_RUN_ID)
    }

    pub fn output(&self, suffix: &str) -> PathBuf {
        self.out_dir().join(format!("{}_{suffix}", self.run_id()))
    }

    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or(1).max(1)
    }

    pub fn flag(v: Option<bool>) -> bool {
        v.unwrap_or(false)
    }

    pub fn prompt_options(&self) -> PromptOptions {
        PromptOptions {
            use_cot: Self::flag(self.cot),
            k_shot: self.k_shot.unwrap_or(0),
            include_reference: !Self::flag(self.no_reference),
            include_rubric: !Self::flag(self.no_rubric),
            reference_index: self.reference_index.unwrap_or(0),
            include_summary: !Self::flag(self.no_summary),
            ..PromptOptions::default()
        }
    }

    /// Grading runs reference-free unless `--verse-reference` is set.
    pub fn verse_options(&self) -> PromptOptions {
        PromptOptions {
            include_reference: Self::flag(self.verse_reference) && !Self::flag(self.no_reference),
            ..self.prompt_options()
        }
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.unwrap_or(if self.mock_script.is_some() { BackendKind::Mock } else { BackendKind::Live })
    }

    pub fn judge_config(&self) -> Result<JudgeConfig> {
        let (backend, default_model) = match self.backend_kind() {
            BackendKind::Mock => {
                let script = self.require(&self.mock_script, "mock-script")?.to_path_buf();
                let parsed: MockScript = serde_json::from_str(&crate::io::read_text(&script)?)
                    .map_err(|e| CliError::Parse { path: script.clone(), line: e.line(), message: e.to_string() })?;
                (BackendConfig::Mock { script }, parsed.model_id)
            }
            BackendKind::Live => (
                BackendConfig::Live {
                    endpoint: self.endpoint.clone().unwrap_or_else(|| DEFAULT_ENDPOINT.into()),
                    api_key_env: self.api_key_env.clone().unwrap_or_else(|| DEFAULT_API_KEY_ENV.into()),
                },
                DEFAULT_LIVE_MODEL.to_string(),
            ),
        };
        let config = JudgeConfig {
            backend,
            model_id: self.model.clone().unwrap_or(default_model),
            temperature: self.temperature.unwrap_or(0.0),
            max_retries: self.max_retries.unwrap_or(DEFAULT_MAX_RETRIES),
            timeout_secs: self.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS),
            retry_base_ms: DEFAULT_RETRY_BASE_MS,
            cache_dir: Some(self.cache_dir.clone().unwrap_or_else(|| self.out_dir().join("cache"))),
            concurrency_limit: self.jobs(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Settings as recorded in output bundles.
    /// Settings as written into summaries. The worker count is left out so
    /// outputs do not depend on parallelism.
    pub fn recorded(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(map) = v.as_object_mut() {
            map.remove("jobs");
        }
        v
    }
}

/// Part of the judge configuration that can change a completion.
pub fn judge_identity(config: &JudgeConfig) -> Result<Value> {
    let backend = match &config.backend {
        BackendConfig::Live { endpoint, .. } => json!({ "live": endpoint }),
        BackendConfig::Mock { script } => json!({ "mock": digest_file(script)? }),
    };
    Ok(json!({ "backend": backend, "model": config.model_id, "temperature": config.temperature }))
}

/// Stable hash of a command's semantic configuration and the digests of its
/// inputs (by role). Output locations, run id and worker count are excluded.
pub fn fingerprint(kind: &str, semantic: Value, inputs: &[(&str, Option<&Path>)]) -> Result<String> {
    let mut digests = Map::new();
    for (role, path) in inputs {
        let v = match path {
            Some(p) => Value::String(digest_file(p)?),
            None => Value::Null,
        };
        digests.insert((*role).to_string(), v);
    }
    let canonical = json!({ "kind": kind, "semantic": semantic, "inputs": digests });
    Ok(short_hash(canonical.to_string().as_bytes()))
}
