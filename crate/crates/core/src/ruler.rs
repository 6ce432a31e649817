//! Rubric-based Likert scoring (1–5) of candidate paragraphs on four
//! criteria, one judge call per criterion.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Channel, Corpus, ParagraphPair};
use crate::judge::{Judge, JudgeError, JudgeRequest};
use crate::prompt::{push_section, PromptError, PromptOptions, ShotBank};
use crate::response::{parse_score, ScoreParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "honorifics")]
    Honorifics,
    #[serde(rename = "lexical")]
    LexicalChoice,
    #[serde(rename = "syntax")]
    SyntaxGrammar,
    #[serde(rename = "content")]
    ContentAccuracy,
}

impl Criterion {
    pub const ALL: [Criterion; 4] =
        [Criterion::Honorifics, Criterion::LexicalChoice, Criterion::SyntaxGrammar, Criterion::ContentAccuracy];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Honorifics => "Honorifics in Dialogue",
            Criterion::LexicalChoice => "Lexical Choice",
            Criterion::SyntaxGrammar => "Syntax and Grammar",
            Criterion::ContentAccuracy => "Content Accuracy",
        }
    }

    fn focus(self) -> &'static str {
        match self {
            Criterion::Honorifics => {
                "Judge whether speech levels and verb endings reflect the status of, and relationships \
                 between, the people speaking and being addressed."
            }
            Criterion::LexicalChoice => {
                "Judge whether words and idioms are the ones a fluent writer of the target language \
                 would choose, including figurative language."
            }
            Criterion::SyntaxGrammar => {
                "Judge grammatical correctness: embedded clauses, connectors, the internal logic of \
                 each sentence and punctuation."
            }
            Criterion::ContentAccuracy => {
                "Judge whether the meaning of the source is preserved, with weight on literary \
                 expressions; clarifying additions are fine, dropped or altered substance is not."
            }
        }
    }

    pub fn channel(self) -> Channel {
        match self {
            Criterion::Honorifics => Channel::Honorifics,
            Criterion::LexicalChoice => Channel::Lexical,
            Criterion::SyntaxGrammar => Channel::Syntax,
            Criterion::ContentAccuracy => Channel::Content,
        }
    }

    pub fn key(self) -> &'static str {
        self.channel().as_str()
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One value per criterion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerCriterion<T> {
    pub honorifics: T,
    pub lexical: T,
    pub syntax: T,
    pub content: T,
}

impl<T> PerCriterion<T> {
    pub fn get(&self, c: Criterion) -> &T {
        match c {
            Criterion::Honorifics => &self.honorifics,
            Criterion::LexicalChoice => &self.lexical,
            Criterion::SyntaxGrammar => &self.syntax,
            Criterion::ContentAccuracy => &self.content,
        }
    }

    pub fn get_mut(&mut self, c: Criterion) -> &mut T {
        match c {
            Criterion::Honorifics => &mut self.honorifics,
            Criterion::LexicalChoice => &mut self.lexical,
            Criterion::SyntaxGrammar => &mut self.syntax,
            Criterion::ContentAccuracy => &mut self.content,
        }
    }
}

/// One rubric file entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricEntry {
    pub criterion: Criterion,
    pub preamble: String,
    /// Descriptor per score, keyed "1".."5".
    pub levels: BTreeMap<String, String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RubricError {
    #[error("rubric has no entry for {0}")]
    MissingCriterion(Criterion),
    #[error("rubric has two entries for {0}")]
    DuplicateCriterion(Criterion),
    #[error("rubric for {criterion} is missing level {level}")]
    MissingLevel { criterion: Criterion, level: u8 },
    #[error("rubric for {criterion} has unexpected level key {key:?}")]
    UnexpectedLevel { criterion: Criterion, key: String },
}

/// Validated rubric: every criterion with all five level descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RubricSet {
    entries: PerCriterion<RubricEntry>,
}

impl RubricSet {
    pub fn new(entries: Vec<RubricEntry>) -> Result<Self, RubricError> {
        let mut slots: PerCriterion<Option<RubricEntry>> = PerCriterion::default();
        for entry in entries {
            let c = entry.criterion;
            for key in entry.levels.keys() {
                if !matches!(key.as_str(), "1" | "2" | "3" | "4" | "5") {
                    return Err(RubricError::UnexpectedLevel { criterion: c, key: key.clone() });
                }
            }
            for level in 1..=5u8 {
                let present = entry.levels.get(level.to_string().as_str()).is_some_and(|t| !t.trim().is_empty());
                if !present {
                    return Err(RubricError::MissingLevel { criterion: c, level });
                }
            }
            let slot = slots.get_mut(c);
            if slot.is_some() {
                return Err(RubricError::DuplicateCriterion(c));
            }
            *slot = Some(entry);
        }
        let take = |o: Option<RubricEntry>, c| o.ok_or(RubricError::MissingCriterion(c));
        Ok(Self {
            entries: PerCriterion {
                honorifics: take(slots.honorifics, Criterion::Honorifics)?,
                lexical: take(slots.lexical, Criterion::LexicalChoice)?,
                syntax: take(slots.syntax, Criterion::SyntaxGrammar)?,
                content: take(slots.content, Criterion::ContentAccuracy)?,
            },
        })
    }

    pub fn entry(&self, criterion: Criterion) -> &RubricEntry {
        self.entries.get(criterion)
    }

    pub fn entries(&self) -> Vec<RubricEntry> {
        Criterion::ALL.iter().map(|&c| self.entry(c).clone()).collect()
    }

    /// Preamble followed by the five descriptors, highest first.
    pub fn render(&self, criterion: Criterion) -> String {
        let entry = self.entry(criterion);
        let mut out = String::from(entry.preamble.trim());
        for level in (1..=5u8).rev() {
            let text = &entry.levels[level.to_string().as_str()];
            out.push_str(&format!("\nScore {level}: {}", text.trim()));
        }
        out
    }
}

/// Instruction telling the judge how to treat paragraphs without dialogue.
pub const HONORIFICS_DEFAULT_RULE: &str = "This criterion applies only to dialogue and other expressions of register. \
     If the paragraph contains no dialogue or register marking, output 5.";

/// Builds the judge request for one criterion.
///
/// User text sections, in order: task, rubric, story summary, worked
/// examples, source, reference, candidate, output format.
#[allow(clippy::too_many_arguments)]
pub fn build_ruler_prompt(
    criterion: Criterion,
    pair: &ParagraphPair,
    candidate_text: &str,
    rubric: &RubricSet,
    summary: &str,
    options: &PromptOptions,
    shots: &ShotBank,
) -> Result<JudgeRequest, PromptError> {
    options.validate()?;
    if candidate_text.trim().is_empty() {
        return Err(PromptError::EmptyCandidate);
    }
    let reference = if options.include_reference {
        Some(pair.reference(options.reference_index).ok_or_else(|| PromptError::MissingReference {
            key: pair.key().to_string(),
            index: options.reference_index,
        })?)
    } else {
        None
    };
    let examples = shots.select(criterion.channel(), &pair.story_id, options.k_shot as usize)?;
    let langs = &options.languages;

    let system =
        format!("You are an expert evaluator of literary translation from {} into {}.", langs.source, langs.target);

    let mut user = String::new();
    let mut task = format!(
        "Evaluate the candidate {} translation of the {} passage on one criterion: {}.\n{}",
        langs.target,
        langs.source,
        criterion.name(),
        criterion.focus()
    );
    if criterion == Criterion::Honorifics {
        task.push('\n');
        task.push_str(HONORIFICS_DEFAULT_RULE);
    }
    push_section(&mut user, "Task", &task);
    if options.include_rubric {
        push_section(&mut user, &format!("Rubric: {}", criterion.name()), &rubric.render(criterion));
    }
    if options.include_summary {
        let body = if summary.trim().is_empty() { "(no summary available)" } else { summary };
        push_section(&mut user, "Story summary", body);
    }
    for (i, ex) in examples.iter().enumerate() {
        let mut body = format!("Source:\n{}", ex.source_text.trim());
        if let Some(r) = &ex.reference {
            body.push_str(&format!("\nReference translation:\n{}", r.trim()));
        }
        body.push_str(&format!("\nCandidate translation:\n{}\nScore: {}", ex.candidate.trim(), ex.score));
        push_section(&mut user, &format!("Example {}", i + 1), &body);
    }
    push_section(&mut user, &format!("Source text ({})", langs.source), &pair.source_text);
    if let Some(r) = reference {
        push_section(&mut user, &format!("Reference translation ({})", langs.target), r);
    }
    push_section(&mut user, &format!("Candidate translation ({})", langs.target), candidate_text);
    push_section(&mut user, "Output format", &output_instruction(options.use_cot, 5));

    Ok(JudgeRequest::new(system, user))
}

pub(crate) fn output_instruction(use_cot: bool, max: u8) -> String {
    if use_cot {
        format!(
            "Think step by step: first explain your reasoning, then give the score on the final line \
             in the form \"Score: N\" where N is an integer from 1 to {max}."
        )
    } else {
        format!(
            "Respond with the score only, on a single line, in the form \"Score: N\" where N is an \
             integer from 1 to {max}."
        )
    }
}

/// Extracts the 1–5 score from a judge response.
pub fn parse_likert_score(response_text: &str, use_cot: bool) -> Result<u8, ScoreParseError> {
    parse_score(response_text, 1, 5, use_cot).map(|p| p.score as u8)
}

/// Scores for one candidate paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricScorecard {
    pub system_id: String,
    pub story_id: String,
    pub index: u32,
    pub scores: PerCriterion<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationales: Option<PerCriterion<String>>,
    pub raw_responses: PerCriterion<String>,
    pub options_fingerprint: String,
    pub model_id: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("unusable response: {0}")]
    Parse(#[from] ScoreParseError),
}

/// A paragraph that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub system_id: String,
    pub story_id: String,
    pub index: u32,
    /// Step or criterion that failed.
    pub stage: String,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_response: Option<String>,
}

/// Everything needed to score paragraphs of one candidate system.
pub struct RulerContext<'a> {
    pub corpus: &'a Corpus,
    pub rubric: &'a RubricSet,
    pub options: &'a PromptOptions,
    pub shots: &'a ShotBank,
}

/// Scores one candidate paragraph on all four criteria.
/// A failure is returned as the record persisted for it.
#[allow(clippy::result_large_err)]
pub fn score_paragraph<J: Judge + ?Sized>(
    judge: &J,
    ctx: &RulerContext<'_>,
    pair: &ParagraphPair,
    system_id: &str,
    candidate_text: &str,
) -> Result<RubricScorecard, ItemFailure> {
    let summary = ctx.corpus.summary(&pair.story_id);
    let mut scores = PerCriterion::<u8>::default();
    let mut rationales = PerCriterion::<String>::default();
    let mut raw = PerCriterion::<String>::default();
    for criterion in Criterion::ALL {
        let fail = |error: String, raw_response: Option<String>| ItemFailure {
            system_id: system_id.to_string(),
            story_id: pair.story_id.clone(),
            index: pair.index,
            stage: criterion.key().to_string(),
            error,
            raw_response,
        };
        let request = build_ruler_prompt(criterion, pair, candidate_text, ctx.rubric, summary, ctx.options, ctx.shots)
            .map_err(|e| fail(e.to_string(), None))?;
        let response = judge.complete(&request).map_err(|e| fail(e.to_string(), None))?;
        let parsed = parse_score(&response.text, 1, 5, ctx.options.use_cot)
            .map_err(|e| fail(e.to_string(), Some(response.text.clone())))?;
        *scores.get_mut(criterion) = parsed.score as u8;
        *rationales.get_mut(criterion) = parsed.rationale.unwrap_or_default();
        *raw.get_mut(criterion) = response.text;
    }
    Ok(RubricScorecard {
        system_id: system_id.to_string(),
        story_id: pair.story_id.clone(),
        index: pair.index,
        scores,
        rationales: ctx.options.use_cot.then_some(rationales),
        raw_responses: raw,
        options_fingerprint: ctx.options.fingerprint(),
        model_id: judge.model_id().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFlag {
    pub system_id: String,
    pub story_id: String,
    pub index: u32,
    pub honorifics: u8,
}

/// Judge compliance with the honorifics default on paragraphs tagged as
/// having no dialogue.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HonorificsAudit {
    /// Scorecards of narrative-only paragraphs.
    pub checked: usize,
    pub compliant: usize,
    pub flagged: Vec<AuditFlag>,
    /// Scorecards whose paragraph carries no dialogue metadata.
    pub untagged: usize,
}

pub fn audit_honorifics(corpus: &Corpus, scorecards: &[RubricScorecard]) -> HonorificsAudit {
    let mut audit = HonorificsAudit::default();
    for card in scorecards {
        let key = crate::corpus::ItemKey::new(card.story_id.clone(), card.index);
        match corpus.pair(&key).and_then(|p| p.has_dialogue) {
            None => audit.untagged += 1,
            Some(true) => {}
            Some(false) => {
                audit.checked += 1;
                if card.scores.honorifics == 5 {
                    audit.compliant += 1;
                } else {
                    audit.flagged.push(AuditFlag {
                        system_id: card.system_id.clone(),
                        story_id: card.story_id.clone(),
                        index: card.index,
                        honorifics: card.scores.honorifics,
                    });
                }
            }
        }
    }
    audit
}
