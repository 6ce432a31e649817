//! Loaders for every input file format, plus the bundled defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use lit_eval_core::corpus::{AnnotationRecord, CandidateRecord, CandidateSet, Corpus, ParagraphPair, StoryMeta};
use lit_eval_core::prompt::{ShotBank, ShotExample};
use lit_eval_core::ruler::{RubricEntry, RubricSet};
use lit_eval_core::translate::TranslationExample;
use lit_eval_core::verse::VerseQuestion;

use crate::error::{CliError, Result};
use crate::io::{read_jsonl, Header};

pub const BUNDLED_RUBRIC: &str = include_str!("../data/rubric.json");
pub const BUNDLED_SHOTS: &str = include_str!("../data/shots.jsonl");
pub const BUNDLED_TRANSLATION_BANK: &str = include_str!("../data/translation_bank.jsonl");

/// Metadata file used when none is given: `stories.jsonl` next to the corpus.
pub fn default_stories_path(corpus: &Path) -> Option<PathBuf> {
    let candidate = corpus.with_file_name("stories.jsonl");
    candidate.exists().then_some(candidate)
}

pub fn load_corpus(path: &Path, stories: Option<&Path>) -> Result<Corpus> {
    let pairs = read_jsonl::<ParagraphPair>(path)?;
    let stories_path = stories.map(Path::to_path_buf).or_else(|| default_stories_path(path));
    let metas = match &stories_path {
        Some(p) => read_jsonl::<StoryMeta>(p)?.records,
        None => Vec::new(),
    };
    Corpus::from_records(pairs.records, metas).map_err(|source| CliError::Corpus { path: path.to_path_buf(), source })
}

pub fn load_candidates(path: &Path, corpus: &Corpus) -> Result<(CandidateSet, Option<Header>)> {
    let file = read_jsonl::<CandidateRecord>(path)?;
    let set = CandidateSet::from_records(file.records, corpus)
        .map_err(|source| CliError::Corpus { path: path.to_path_buf(), source })?;
    Ok((set, file.header))
}

/// Loads candidate files and rejects two files naming the same system.
pub fn load_candidate_sets(paths: &[PathBuf], corpus: &Corpus) -> Result<Vec<CandidateSet>> {
    let mut sets: Vec<CandidateSet> = Vec::new();
    for p in paths {
        let (set, _) = load_candidates(p, corpus)?;
        if sets.iter().any(|s| s.system_id == set.system_id) {
            return Err(CliError::Config(format!("system {} appears in more than one candidate file", set.system_id)));
        }
        sets.push(set);
    }
    Ok(sets)
}

pub fn load_annotations(path: &Path) -> Result<Vec<(usize, AnnotationRecord)>> {
    let file = read_jsonl::<AnnotationRecord>(path)?;
    for (line, rec) in &file.records {
        rec.check(*line).map_err(|source| CliError::Corpus { path: path.to_path_buf(), source })?;
    }
    Ok(file.records)
}

/// Checks annotations against the corpus, systems and question bank.
pub fn check_annotations(
    path: &Path,
    records: &[(usize, AnnotationRecord)],
    corpus: Option<&Corpus>,
    systems: Option<&BTreeSet<String>>,
    question_ids: Option<&BTreeSet<String>>,
) -> Result<()> {
    lit_eval_core::corpus::validate_annotations(records.iter().map(|(l, r)| (*l, r)), corpus, systems, question_ids)
        .map_err(|source| CliError::Corpus { path: path.to_path_buf(), source })
}

pub fn parse_rubric(text: &str, origin: &Path) -> Result<RubricSet> {
    let entries: Vec<RubricEntry> = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(RubricSet::new(entries)?)
}

pub fn load_rubric(path: Option<&Path>) -> Result<RubricSet> {
    match path {
        Some(p) => parse_rubric(&crate::io::read_text(p)?, p),
        None => parse_rubric(BUNDLED_RUBRIC, Path::new("<bundled rubric>")),
    }
}

fn parse_lines<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_shots(path: Option<&Path>) -> Result<ShotBank> {
    let examples: Vec<ShotExample> = match path {
        Some(p) => read_jsonl(p)?.records.into_iter().map(|(_, r)| r).collect(),
        None => parse_lines(BUNDLED_SHOTS, Path::new("<bundled shots>"))?,
    };
    Ok(ShotBank::new(examples))
}

pub fn load_translation_bank(path: Option<&Path>) -> Result<Vec<TranslationExample>> {
    match path {
        Some(p) => Ok(read_jsonl(p)?.records.into_iter().map(|(_, r)| r).collect()),
        None => parse_lines(BUNDLED_TRANSLATION_BANK, Path::new("<bundled translation bank>")),
    }
}

pub fn load_questions(path: &Path) -> Result<(Option<Header>, Vec<VerseQuestion>)> {
    let file = read_jsonl::<VerseQuestion>(path)?;
    let mut seen = BTreeSet::new();
    for (line, q) in &file.records {
        if !seen.insert(q.question_id.clone()) {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!("duplicate question id {}", q.question_id),
            });
        }
    }
    Ok((file.header, file.records.into_iter().map(|(_, q)| q).collect()))
}
