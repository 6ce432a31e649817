//! Few-shot candidate translation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CandidateSet, Corpus, ItemKey, ParagraphPair};
use crate::fingerprint::short_hash;
use crate::judge::{Judge, JudgeError, JudgeRequest, TemperatureOverride};
use crate::prompt::{push_section, LanguagePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Paragraph,
    /// One call per sentence, split on terminal punctuation.
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationPromptSpec {
    pub n_shots: usize,
    pub include_summary: bool,
    pub granularity: Granularity,
    /// Stories examples may come from; empty allows the whole bank.
    #[serde(default)]
    pub bank_story_ids: Vec<String>,
    /// Demand at least one dialogue and one narrative example.
    pub require_mixed: bool,
    #[serde(default)]
    pub languages: LanguagePair,
}

impl Default for TranslationPromptSpec {
    fn default() -> Self {
        Self {
            n_shots: 5,
            include_summary: true,
            granularity: Granularity::Paragraph,
            bank_story_ids: Vec::new(),
            require_mixed: true,
            languages: LanguagePair::default(),
        }
    }
}

impl TranslationPromptSpec {
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "shots={};summary={};gran={:?};bank={};mixed={};src={};tgt={}",
            self.n_shots,
            self.include_summary as u8,
            self.granularity,
            self.bank_story_ids.join(","),
            self.require_mixed as u8,
            self.languages.source,
            self.languages.target,
        );
        short_hash(canonical.as_bytes())
    }
}

/// An aligned source/reference pair shown as an example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationExample {
    pub story_id: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub has_dialogue: Option<bool>,
}

impl TranslationExample {
    pub fn from_pair(pair: &ParagraphPair) -> Self {
        Self {
            story_id: pair.story_id.clone(),
            source: pair.source_text.clone(),
            target: pair.references[0].clone(),
            has_dialogue: pair.has_dialogue,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranslateError {
    #[error("example bank cannot supply {needed} examples ({reason})")]
    InsufficientBank { needed: usize, reason: &'static str },
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("empty translation returned")]
    EmptyOutput,
    #[error("paragraph has no sentences")]
    EmptySource,
}

/// Examples for a paragraph of `exclude_story`, in bank order. With
/// `require_mixed`, the first dialogue and first narrative example are
/// always included.
pub fn select_examples<'a>(
    bank: &'a [TranslationExample],
    spec: &TranslationPromptSpec,
    exclude_story: &str,
) -> Result<Vec<&'a TranslationExample>, TranslateError> {
    let n = spec.n_shots;
    let eligible: Vec<usize> = bank
        .iter()
        .enumerate()
        .filter(|(_, e)| e.story_id != exclude_story)
        .filter(|(_, e)| spec.bank_story_ids.is_empty() || spec.bank_story_ids.contains(&e.story_id))
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < n {
        return Err(TranslateError::InsufficientBank { needed: n, reason: "too few eligible examples" });
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    if spec.require_mixed && n > 0 {
        let first = |want: bool| eligible.iter().copied().find(|&i| bank[i].has_dialogue == Some(want));
        let dialogue =
            first(true).ok_or(TranslateError::InsufficientBank { needed: n, reason: "no dialogue example" })?;
        let narrative =
            first(false).ok_or(TranslateError::InsufficientBank { needed: n, reason: "no narrative example" })?;
        if n < 2 {
            return Err(TranslateError::InsufficientBank { needed: 2, reason: "mixing needs two examples" });
        }
        chosen.push(dialogue);
        chosen.push(narrative);
    }
    for &i in &eligible {
        if chosen.len() >= n {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| &bank[i]).collect())
}

pub fn build_translation_prompt(
    source: &str,
    summary: &str,
    examples: &[&TranslationExample],
    spec: &TranslationPromptSpec,
) -> JudgeRequest {
    let langs = &spec.languages;
    let system = format!("You are a professional literary translator from {} to {}.", langs.source, langs.target);
    let mut user = String::new();
    push_section(
        &mut user,
        "Task",
        &format!(
            "Translate the {} passage into {}, keeping its voice, register and dialogue conventions. \
             Reply with the translation only.",
            langs.source, langs.target
        ),
    );
    if spec.include_summary {
        let body = if summary.trim().is_empty() { "(no summary available)" } else { summary };
        push_section(&mut user, "Story summary", body);
    }
    for (i, e) in examples.iter().enumerate() {
        push_section(
            &mut user,
            &format!("Example {}", i + 1),
            &format!("{}:\n{}\n\n{}:\n{}", langs.source, e.source, langs.target, e.target),
        );
    }
    push_section(&mut user, &format!("Passage ({})", langs.source), source);
    JudgeRequest::new(system, user).with_temperature(TemperatureOverride::BackendDefault)
}

/// Splits after `.`, `!`, `?` (and closing quotes that follow them).
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let mut end = i + c.len_utf8();
            while let Some(&(j, n)) = chars.peek() {
                if matches!(n, '"' | '\'' | '\u{201d}' | '\u{2019}' | '.' | '!' | '?') {
                    end = j + n.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                out.push(piece);
            }
            start = end;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn call<J: Judge + ?Sized>(judge: &J, request: &JudgeRequest) -> Result<String, TranslateError> {
    let text = judge.complete(request)?.text;
    if text.trim().is_empty() {
        return Err(TranslateError::EmptyOutput);
    }
    Ok(text)
}

/// Translates one paragraph. Output is returned verbatim.
pub fn translate_paragraph<J: Judge + ?Sized>(
    judge: &J,
    pair: &ParagraphPair,
    summary: &str,
    bank: &[TranslationExample],
    spec: &TranslationPromptSpec,
) -> Result<String, TranslateError> {
    let examples = select_examples(bank, spec, &pair.story_id)?;
    match spec.granularity {
        Granularity::Paragraph => call(judge, &build_translation_prompt(&pair.source_text, summary, &examples, spec)),
        Granularity::Sentence => {
            let sentences = split_sentences(&pair.source_text);
            if sentences.is_empty() {
                return Err(TranslateError::EmptySource);
            }
            let mut parts = Vec::with_capacity(sentences.len());
            for s in sentences {
                parts.push(String::from(call(judge, &build_translation_prompt(s, summary, &examples, spec))?.trim()));
            }
            Ok(parts.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRun {
    pub candidates: CandidateSet,
    pub failures: Vec<(ItemKey, TranslateError)>,
}

/// Sequential translation of every paragraph; failures are collected per item.
pub fn translate_corpus<J: Judge + ?Sized>(
    judge: &J,
    corpus: &Corpus,
    bank: &[TranslationExample],
    spec: &TranslationPromptSpec,
    system_id: &str,
) -> TranslationRun {
    let mut candidates = CandidateSet::new(system_id);
    let mut failures = Vec::new();
    for pair in corpus.pairs() {
        match translate_paragraph(judge, pair, corpus.summary(&pair.story_id), bank, spec) {
            Ok(text) => {
                candidates.translations.insert(pair.key(), text);
            }
            Err(e) => failures.push((pair.key(), e)),
        }
    }
    TranslationRun { candidates, failures }
}
