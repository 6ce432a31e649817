use std::collections::BTreeMap;
use std::path::Path;

use lit_eval_core::fingerprint::sha256_hex;
use lit_eval_core::judge::JudgeError;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Backend;
use crate::error::{CliError, Result};

/// A rule matches when every listed condition holds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub system_contains: Vec<String>,
    #[serde(default)]
    pub user_contains: Vec<String>,
    #[serde(default)]
    pub user_excludes: Vec<String>,
    /// Regex applied to the user text.
    #[serde(default)]
    pub user_matches: Option<String>,
    #[serde(default)]
    pub respond: Option<String>,
    /// Picked by request hash when `respond` is absent.
    #[serde(default)]
    pub respond_any: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default = "default_id")]
    pub model_id: String,
    /// Responses keyed by [`MockBackend::prompt_hash`].
    #[serde(default)]
    pub entries: BTreeMap<String, String>,
    /// Tried in order after `entries`; first match wins.
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub fallback: Option<String>,
}

fn default_id() -> String {
    "mock".into()
}

struct CompiledRule {
    rule: MockRule,
    pattern: Option<Regex>,
}

/// Scripted backend; its output is a pure function of the request.
pub struct MockBackend {
    script: MockScript,
    rules: Vec<CompiledRule>,
    id: String,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Result<Self> {
        let mut rules = Vec::with_capacity(script.rules.len());
        for (i, rule) in script.rules.iter().enumerate() {
            if rule.respond.is_none() && rule.respond_any.is_empty() {
                return Err(CliError::Config(format!("mock rule #{i} has no response")));
            }
            let pattern = match &rule.user_matches {
                Some(p) => Some(Regex::new(p).map_err(|e| CliError::Config(format!("mock rule #{i}: {e}")))?),
                None => None,
            };
            rules.push(CompiledRule { rule: rule.clone(), pattern });
        }
        let id = format!("mock:{}", script.model_id);
        Ok(Self { script, rules, id })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        let script: MockScript = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::new(script)
    }

    /// Key of an exact-match entry.
    pub fn prompt_hash(system: &str, user: &str) -> String {
        sha256_hex(json!([system, user]).to_string().as_bytes())
    }

    pub fn respond(&self, system: &str, user: &str) -> Result<String, JudgeError> {
        let hash = Self::prompt_hash(system, user);
        if let Some(text) = self.script.entries.get(&hash) {
            return Ok(text.clone());
        }
        for c in &self.rules {
            let r = &c.rule;
            let hit = r.system_contains.iter().all(|s| system.contains(s.as_str()))
                && r.user_contains.iter().all(|s| user.contains(s.as_str()))
                && !r.user_excludes.iter().any(|s| user.contains(s.as_str()))
                && c.pattern.as_ref().is_none_or(|p| p.is_match(user));
            if hit {
                return Ok(match &r.respond {
                    Some(text) => text.clone(),
                    None => {
                        let pick = u64::from_str_radix(&hash[..12], 16).unwrap_or(0) as usize % r.respond_any.len();
                        r.respond_any[pick].clone()
                    }
                });
            }
        }
        self.script.fallback.clone().ok_or(JudgeError::MockScriptMiss { key: hash })
    }
}

impl Backend for MockBackend {
    fn call(&self, _model_id: &str, _temperature: Option<f64>, system: &str, user: &str) -> Result<String, JudgeError> {
        self.respond(system, user)
    }

    fn backend_id(&self) -> &str {
        &self.id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script() -> MockScript {
        MockScript {
            model_id: "m".into(),
            entries: [(MockBackend::prompt_hash("s", "exact"), "Score: 4".to_string())].into(),
            rules: vec![
                MockRule {
                    user_contains: vec!["Honorifics".into()],
                    respond: Some("Score: 5".into()),
                    ..Default::default()
                },
                MockRule {
                    user_matches: Some("^pick".into()),
                    respond_any: vec!["a".into(), "b".into()],
                    ..Default::default()
                },
            ],
            fallback: None,
        }
    }

    #[test]
    fn entries_then_rules_then_miss() {
        let m = MockBackend::new(script()).unwrap();
        assert_eq!(m.respond("s", "exact").unwrap(), "Score: 4");
        assert_eq!(m.respond("s", "about Honorifics").unwrap(), "Score: 5");
        let picked = m.respond("s", "pick one").unwrap();
        assert_eq!(picked, m.respond("s", "pick one").unwrap());
        assert!(matches!(m.respond("s", "nothing"), Err(JudgeError::MockScriptMiss { .. })));
        let with_fallback = MockBackend::new(MockScript { fallback: Some("x".into()), ..script() }).unwrap();
        assert_eq!(with_fallback.respond("s", "nothing").unwrap(), "x");
    }

    #[test]
    fn rule_without_response_is_rejected() {
        let s = MockScript { rules: vec![MockRule::default()], ..Default::default() };
        assert!(MockBackend::new(s).is_err());
    }
}
