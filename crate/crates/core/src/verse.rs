//! Story-specific verification questions: generation, zero-shot
//! classification into nine fixed categories, 1–3 grading of candidates and
//! per-category aggregation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Channel, ParagraphPair};
use crate::judge::{Judge, JudgeError, JudgeRequest};
use crate::prompt::{push_section, PromptError, PromptOptions, ShotBank};
use crate::report::{to_percentage, PercentMapping, ScoreScale};
use crate::response::{parse_score, ScoreParseError};
use crate::ruler::output_instruction;

/// Default number of questions requested per paragraph.
pub const DEFAULT_QUESTION_TARGET: usize = 10;

/// Extra questions tolerated beyond the requested number before truncation.
pub const QUESTION_OVERSHOOT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "Historical and Cultural Context")]
    HistoricalCultural,
    #[serde(rename = "Imagery and Descriptive Quality")]
    Imagery,
    #[serde(rename = "Character Voice, Tone, and Individuality")]
    CharacterVoice,
    #[serde(rename = "Interpersonal Communication and Hierarchy")]
    Interpersonal,
    #[serde(rename = "Linguistic and Idiomatic Naturalness")]
    IdiomaticNaturalness,
    #[serde(rename = "Nuanced Interpretation including Subtle Implications")]
    NuancedInterpretation,
    #[serde(rename = "Narrative Pacing and Rhythm")]
    PacingRhythm,
    #[serde(rename = "Affective and Stylistic Resonance")]
    AffectiveStylistic,
    #[serde(rename = "Overall Consistency and Cohesion")]
    ConsistencyCohesion,
}

impl Category {
    /// Closed label set in reporting order.
    pub const ALL: [Category; 9] = [
        Category::HistoricalCultural,
        Category::Imagery,
        Category::CharacterVoice,
        Category::Interpersonal,
        Category::IdiomaticNaturalness,
        Category::NuancedInterpretation,
        Category::PacingRhythm,
        Category::AffectiveStylistic,
        Category::ConsistencyCohesion,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::HistoricalCultural => "Historical and Cultural Context",
            Category::Imagery => "Imagery and Descriptive Quality",
            Category::CharacterVoice => "Character Voice, Tone, and Individuality",
            Category::Interpersonal => "Interpersonal Communication and Hierarchy",
            Category::IdiomaticNaturalness => "Linguistic and Idiomatic Naturalness",
            Category::NuancedInterpretation => "Nuanced Interpretation including Subtle Implications",
            Category::PacingRhythm => "Narrative Pacing and Rhythm",
            Category::AffectiveStylistic => "Affective and Stylistic Resonance",
            Category::ConsistencyCohesion => "Overall Consistency and Cohesion",
        }
    }

    /// Abbreviated label for chart axes.
    pub fn short_label(self) -> &'static str {
        match self {
            Category::HistoricalCultural => "Cultural Context",
            Category::Imagery => "Imagery",
            Category::CharacterVoice => "Character Voice",
            Category::Interpersonal => "Hierarchy",
            Category::IdiomaticNaturalness => "Naturalness",
            Category::NuancedInterpretation => "Nuance",
            Category::PacingRhythm => "Pacing",
            Category::AffectiveStylistic => "Style",
            Category::ConsistencyCohesion => "Cohesion",
        }
    }

    pub fn position(self) -> usize {
        Category::ALL.iter().position(|&c| c == self).unwrap_or(0)
    }

    /// Case-insensitive exact match against the full label.
    pub fn from_label(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.label().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerseQuestion {
    pub question_id: String,
    pub story_id: String,
    pub index: u32,
    pub text: String,
    pub category: Option<Category>,
}

/// Deterministic id of the `ordinal`-th (1-based) question of a paragraph.
pub fn question_id(story_id: &str, index: u32, ordinal: usize) -> String {
    format!("{story_id}:{index}:q{ordinal:02}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerseGrade {
    pub question_id: String,
    pub system_id: String,
    /// 1 = not satisfied, 2 = partially, 3 = fully.
    pub score: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    pub raw_response: String,
    pub model_id: String,
    pub options_fingerprint: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerseError {
    #[error("no questions could be parsed from the response")]
    NoQuestionsParsed,
    #[error("response {first:?} and reprompt response {second:?} match no category")]
    UnmappableCategory { first: String, second: String },
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("question {0} has no category")]
    UnclassifiedQuestion(String),
    #[error("grade refers to unknown question {0}")]
    UnknownQuestion(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("unusable grade: {0}")]
    Parse(#[from] ScoreParseError),
}

pub fn build_generation_prompt(
    pair: &ParagraphPair,
    summary: &str,
    n_target: usize,
    options: &PromptOptions,
) -> JudgeRequest {
    let langs = &options.languages;
    let system =
        format!("You are a literary scholar and translator working between {} and {}.", langs.source, langs.target);
    let mut user = String::new();
    push_section(
        &mut user,
        "Task",
        &format!(
            "Read the {src} passage below and write about {n_target} verification questions that a good \
             {tgt} translation of it must satisfy. Focus on the literary aspects of the passage: imagery, \
             voice, tone, implication, rhythm, cultural references and relationships between characters. \
             Each question must be answerable by reading the passage and a translation of it.",
            src = langs.source,
            tgt = langs.target,
        ),
    );
    let body = if summary.trim().is_empty() { "(no summary available)" } else { summary };
    push_section(&mut user, "Story summary", body);
    push_section(&mut user, &format!("Passage ({})", langs.source), &pair.source_text);
    push_section(
        &mut user,
        "Output format",
        "Return the questions as a numbered list, one question per line (\"1. ...\").",
    );
    JudgeRequest::new(system, user)
}

/// Items of a numbered list (`1.`, `2)`, `(3)`), in order. Items that are
/// empty after removing the marker are dropped; other lines are ignored.
pub fn parse_question_list(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|line| {
            let line = line.trim().trim_start_matches(['*', '#', '-', ' ']);
            let line = line.strip_prefix('(').unwrap_or(line);
            let digits = line.bytes().take_while(u8::is_ascii_digit).count();
            if digits == 0 || digits > 3 {
                return None;
            }
            let rest = &line[digits..];
            let rest = rest.strip_prefix(['.', ')', ':'])?;
            let item = rest.trim().trim_matches('*').trim();
            (!item.is_empty()).then(|| item.to_string())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedQuestions {
    pub questions: Vec<VerseQuestion>,
    /// Questions parsed beyond the cap and discarded.
    pub discarded: usize,
    pub raw_response: String,
}

/// Asks the judge for roughly `n_target` questions about one paragraph.
/// At most `n_target + QUESTION_OVERSHOOT` are kept.
pub fn generate_questions<J: Judge + ?Sized>(
    judge: &J,
    pair: &ParagraphPair,
    summary: &str,
    n_target: usize,
    options: &PromptOptions,
) -> Result<GeneratedQuestions, VerseError> {
    let n_target = n_target.max(1);
    let request = build_generation_prompt(pair, summary, n_target, options);
    let response = judge.complete(&request)?;
    let mut items = parse_question_list(&response.text);
    if items.is_empty() {
        return Err(VerseError::NoQuestionsParsed);
    }
    let cap = n_target + QUESTION_OVERSHOOT;
    let discarded = items.len().saturating_sub(cap);
    items.truncate(cap);
    let questions = items
        .into_iter()
        .enumerate()
        .map(|(i, text)| VerseQuestion {
            question_id: question_id(&pair.story_id, pair.index, i + 1),
            story_id: pair.story_id.clone(),
            index: pair.index,
            text,
            category: None,
        })
        .collect();
    Ok(GeneratedQuestions { questions, discarded, raw_response: response.text })
}

fn category_list() -> String {
    let mut out = String::new();
    for (i, c) in Category::ALL.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}. {}", i + 1, c.label()));
    }
    out
}

pub fn build_classification_prompt(question: &VerseQuestion) -> JudgeRequest {
    let mut user = String::new();
    push_section(
        &mut user,
        "Task",
        "Classify the translation-evaluation question below into exactly one of the categories listed.",
    );
    push_section(&mut user, "Categories", &category_list());
    push_section(&mut user, "Question", &question.text);
    push_section(&mut user, "Output format", "Answer with the category name only.");
    JudgeRequest::new("You classify questions about literary translation.", user)
}

pub fn build_reclassification_prompt(question: &VerseQuestion, previous: &str) -> JudgeRequest {
    let mut request = build_classification_prompt(question);
    push_section(
        &mut request.user_text,
        "Correction",
        &format!(
            "Your previous answer \"{}\" is not one of the valid categories. Reply with exactly one \
             of these labels, copied verbatim:\n{}",
            previous.trim(),
            category_list()
        ),
    );
    request
}

/// Maps a judge response onto a category: an exact case-insensitive match
/// after stripping list markers and quotes, or a response containing
/// exactly one full label.
pub fn match_category(response: &str) -> Option<Category> {
    let line = response.trim().lines().next().unwrap_or("").trim();
    let cleaned = line
        .trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ')' || c == ' ')
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '*' | '`' | '.' | ' '));
    let cleaned = strip_prefix_ci(cleaned, "category:").unwrap_or(cleaned).trim();
    if let Some(c) = Category::from_label(cleaned) {
        return Some(c);
    }
    let lower = response.to_lowercase();
    let mut hits = Category::ALL.into_iter().filter(|c| lower.contains(&c.label().to_lowercase()));
    match (hits.next(), hits.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

/// Zero-shot top-1 classification with a single corrective reprompt.
pub fn classify_question<J: Judge + ?Sized>(judge: &J, question: &VerseQuestion) -> Result<Category, VerseError> {
    if question.text.trim().is_empty() {
        return Err(VerseError::EmptyQuestion);
    }
    let first = judge.complete(&build_classification_prompt(question))?;
    if let Some(c) = match_category(&first.text) {
        return Ok(c);
    }
    let second = judge.complete(&build_reclassification_prompt(question, &first.text))?;
    match_category(&second.text).ok_or(VerseError::UnmappableCategory { first: first.text, second: second.text })
}

const GRADE_SCALE: &str = "Score 3: the translation fully satisfies the question.\n\
Score 2: the translation partially satisfies the question.\n\
Score 1: the translation does not satisfy the question at all.";

/// Builds the grading request for one question and one candidate.
///
/// User text sections, in order: task, grading scale, story summary, worked
/// examples, source, reference, candidate, question, output format.
pub fn build_grade_prompt(
    question: &VerseQuestion,
    pair: &ParagraphPair,
    candidate_text: &str,
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
    let examples = shots.select(Channel::Verse, &pair.story_id, options.k_shot as usize)?;
    let langs = &options.languages;
    let system =
        format!("You are an expert reader of {} literature checking a {} translation.", langs.source, langs.target);
    let mut user = String::new();
    push_section(
        &mut user,
        "Task",
        &format!("Decide how well the candidate {} translation satisfies the verification question.", langs.target),
    );
    if options.include_rubric {
        push_section(&mut user, "Grading scale", GRADE_SCALE);
    }
    if options.include_summary {
        let body = if summary.trim().is_empty() { "(no summary available)" } else { summary };
        push_section(&mut user, "Story summary", body);
    }
    for (i, ex) in examples.iter().enumerate() {
        let mut body = format!("Source:\n{}", ex.source_text.trim());
        body.push_str(&format!("\nCandidate translation:\n{}", ex.candidate.trim()));
        if let Some(q) = &ex.question {
            body.push_str(&format!("\nQuestion: {}", q.trim()));
        }
        body.push_str(&format!("\nScore: {}", ex.score));
        push_section(&mut user, &format!("Example {}", i + 1), &body);
    }
    push_section(&mut user, &format!("Source text ({})", langs.source), &pair.source_text);
    if let Some(r) = reference {
        push_section(&mut user, &format!("Reference translation ({})", langs.target), r);
    }
    push_section(&mut user, &format!("Candidate translation ({})", langs.target), candidate_text);
    push_section(&mut user, "Question", &question.text);
    push_section(&mut user, "Output format", &output_instruction(options.use_cot, 3));
    Ok(JudgeRequest::new(system, user))
}

#[allow(clippy::too_many_arguments)]
pub fn grade_question<J: Judge + ?Sized>(
    judge: &J,
    question: &VerseQuestion,
    pair: &ParagraphPair,
    system_id: &str,
    candidate_text: &str,
    summary: &str,
    options: &PromptOptions,
    shots: &ShotBank,
) -> Result<VerseGrade, VerseError> {
    let request = build_grade_prompt(question, pair, candidate_text, summary, options, shots)?;
    let response = judge.complete(&request)?;
    let parsed = parse_score(&response.text, 1, 3, options.use_cot)?;
    Ok(VerseGrade {
        question_id: question.question_id.clone(),
        system_id: system_id.to_string(),
        score: parsed.score as u8,
        rationale: parsed.rationale,
        raw_response: response.text,
        model_id: judge.model_id().to_string(),
        options_fingerprint: options.fingerprint(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAggregate {
    pub category: Category,
    /// Percent of all questions that fall in this category.
    pub question_share: f64,
    /// Mean grade as a percentage; `None` when the category has no grades.
    pub mean_score_percent: Option<f64>,
    /// Questions in this category.
    pub n: usize,
    pub n_grades: usize,
}

/// Per-category question share and mean grade, in [`Category::ALL`] order.
pub fn aggregate_categories(
    questions: &[VerseQuestion],
    grades: &[VerseGrade],
    mapping: PercentMapping,
) -> Result<Vec<CategoryAggregate>, VerseError> {
    let mut by_id: BTreeMap<&str, Category> = BTreeMap::new();
    let mut counts = [0usize; 9];
    for q in questions {
        if let Some(c) = q.category {
            by_id.insert(q.question_id.as_str(), c);
            counts[c.position()] += 1;
        }
    }
    let mut sums = [0f64; 9];
    let mut graded = [0usize; 9];
    for g in grades {
        let Some(&c) = by_id.get(g.question_id.as_str()) else {
            return Err(if questions.iter().any(|q| q.question_id == g.question_id) {
                VerseError::UnclassifiedQuestion(g.question_id.clone())
            } else {
                VerseError::UnknownQuestion(g.question_id.clone())
            });
        };
        let pct = to_percentage(g.score as i64, ScoreScale::VERSE, mapping)
            .map_err(|_| VerseError::Parse(ScoreParseError::OutOfRange(g.score as i64)))?;
        sums[c.position()] += pct;
        graded[c.position()] += 1;
    }
    let total: usize = counts.iter().sum();
    Ok(Category::ALL
        .iter()
        .enumerate()
        .map(|(i, &category)| CategoryAggregate {
            category,
            question_share: if total == 0 { 0.0 } else { 100.0 * counts[i] as f64 / total as f64 },
            mean_score_percent: (graded[i] > 0).then(|| sums[i] / graded[i] as f64),
            n: counts[i],
            n_grades: graded[i],
        })
        .collect())
}
