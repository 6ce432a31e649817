//! Subcommand implementations.

pub mod agree;
pub mod report;
pub mod ruler;
pub mod sample;
pub mod translate;
pub mod validate;
pub mod verse;

use std::collections::BTreeMap;
use std::path::Path;

use lit_eval_core::corpus::ItemKey;
use lit_eval_core::sample::SampleManifest;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::CachedJudge;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::io::{read_text, to_json_pretty, write_atomic, Header};

/// A JSON output document: header plus body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bundle<T> {
    pub header: Header,
    #[serde(flatten)]
    pub body: T,
}

pub fn header(settings: &Settings, kind: &str, fingerprint: &str, provenance: Value) -> Header {
    Header { kind: kind.into(), run_id: settings.run_id().into(), config_fingerprint: fingerprint.into(), provenance }
}

pub fn write_bundle<T: Serialize>(path: &Path, header: Header, body: T) -> Result<()> {
    write_atomic(path, to_json_pretty(&Bundle { header, body }).as_bytes())
}

/// Judge call counters go to stderr so outputs stay byte-stable.
pub fn report_stats(judge: &CachedJudge) {
    eprintln!("{}", json!({ "judge_stats": judge.stats() }));
}

/// Items (and optionally systems and questions) selected by a manifest.
pub struct ManifestFilter {
    items: BTreeMap<ItemKey, (Option<String>, Vec<String>)>,
}

impl ManifestFilter {
    pub fn load(path: Option<&Path>) -> Result<Option<Self>> {
        let Some(path) = path else { return Ok(None) };
        let text = read_text(path)?;
        let parse =
            |e: serde_json::Error| CliError::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() };
        let value: Value = serde_json::from_str(&text).map_err(parse)?;
        let manifest: SampleManifest = match value.get("manifest") {
            Some(m) => serde_json::from_value(m.clone()).map_err(parse)?,
            None => serde_json::from_value(value).map_err(parse)?,
        };
        let items = manifest
            .items
            .into_iter()
            .map(|i| (ItemKey::new(i.story_id, i.index), (i.system_id, i.question_ids)))
            .collect();
        Ok(Some(Self { items }))
    }

    pub fn allows(&self, key: &ItemKey, system_id: Option<&str>) -> bool {
        match self.items.get(key) {
            None => false,
            Some((Some(s), _)) => system_id.is_none_or(|x| x == s),
            Some((None, _)) => true,
        }
    }

    pub fn allows_question(&self, key: &ItemKey, question_id: &str, system_id: &str) -> bool {
        self.allows(key, Some(system_id))
            && self.items.get(key).is_some_and(|(_, qs)| qs.is_empty() || qs.iter().any(|q| q == question_id))
    }
}

pub fn allowed(filter: &Option<ManifestFilter>, key: &ItemKey, system_id: Option<&str>) -> bool {
    filter.as_ref().is_none_or(|f| f.allows(key, system_id))
}
