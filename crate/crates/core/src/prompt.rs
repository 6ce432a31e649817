//! Prompt options shared by rubric scoring and question grading, and the
//! few-shot example bank.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Channel;
use crate::fingerprint::short_hash;

/// Allowed few-shot counts.
pub const K_SHOT_CHOICES: [u8; 5] = [0, 5, 10, 15, 20];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl Default for LanguagePair {
    fn default() -> Self {
        Self { source: "English".into(), target: "Korean".into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("k_shot must be one of 0, 5, 10, 15, 20 (got {0})")]
    InvalidKShot(u8),
    #[error("example bank has {available} usable examples for {channel}, {needed} needed")]
    InsufficientShots { channel: Channel, needed: usize, available: usize },
    #[error("candidate translation is empty")]
    EmptyCandidate,
    #[error("paragraph {key} has no reference #{index}")]
    MissingReference { key: String, index: usize },
}

/// Toggles for the ablations: reasoning, few-shot count, reference and
/// rubric presence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptOptions {
    pub use_cot: bool,
    pub k_shot: u8,
    pub include_reference: bool,
    pub include_rubric: bool,
    pub reference_index: usize,
    pub include_summary: bool,
    #[serde(default)]
    pub languages: LanguagePair,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self {
            use_cot: false,
            k_shot: 0,
            include_reference: true,
            include_rubric: true,
            reference_index: 0,
            include_summary: true,
            languages: LanguagePair::default(),
        }
    }
}

impl PromptOptions {
    /// Defaults for question grading, which runs reference-free.
    pub fn verse_default() -> Self {
        Self { include_reference: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if !K_SHOT_CHOICES.contains(&self.k_shot) {
            return Err(PromptError::InvalidKShot(self.k_shot));
        }
        Ok(())
    }

    /// Stable short hash of every option that can change a prompt.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "cot={};k={};ref={};rubric={};refidx={};summary={};src={};tgt={}",
            self.use_cot as u8,
            self.k_shot,
            self.include_reference as u8,
            self.include_rubric as u8,
            self.reference_index,
            self.include_summary as u8,
            self.languages.source,
            self.languages.target,
        );
        short_hash(canonical.as_bytes())
    }
}

/// A worked example shown to the judge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotExample {
    pub story_id: String,
    pub channel: Channel,
    pub source_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub candidate: String,
    /// Verification question, for verse-channel examples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub score: u8,
}

/// Worked examples drawn from stories reserved for few-shot prompting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBank {
    pub examples: Vec<ShotExample>,
}

impl ShotBank {
    pub fn new(examples: Vec<ShotExample>) -> Self {
        Self { examples }
    }

    pub fn story_ids(&self) -> BTreeSet<&str> {
        self.examples.iter().map(|e| e.story_id.as_str()).collect()
    }

    /// The first `k` examples for `channel` in bank order, never taken from
    /// `exclude_story`.
    pub fn select(&self, channel: Channel, exclude_story: &str, k: usize) -> Result<Vec<&ShotExample>, PromptError> {
        let eligible: Vec<&ShotExample> =
            self.examples.iter().filter(|e| e.channel == channel && e.story_id != exclude_story).collect();
        if eligible.len() < k {
            return Err(PromptError::InsufficientShots { channel, needed: k, available: eligible.len() });
        }
        Ok(eligible.into_iter().take(k).collect())
    }
}

/// Appends a `## heading` section followed by `body`.
pub(crate) fn push_section(out: &mut String, heading: &str, body: &str) {
    if !out.is_empty() {
        out.push_str("\n\n");
    }
    out.push_str("## ");
    out.push_str(heading);
    out.push('\n');
    out.push_str(body.trim_end());
}
