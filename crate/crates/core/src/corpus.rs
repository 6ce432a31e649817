//! Paragraph-aligned parallel stories, candidate translations and human
//! annotation records.
//!
//! Everything here is validated on construction; a [`Corpus`] that exists is
//! a corpus whose invariants hold. File parsing lives in the std companion
//! crate, which feeds line-numbered records into the constructors below.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifies one aligned paragraph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemKey {
    pub story_id: String,
    pub index: u32,
}

impl ItemKey {
    pub fn new(story_id: impl Into<String>, index: u32) -> Self {
        Self { story_id: story_id.into(), index }
    }
}

impl fmt::Display for ItemKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.story_id, self.index)
    }
}

/// One aligned source paragraph with its reference translations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphPair {
    pub story_id: String,
    pub index: u32,
    pub source_text: String,
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_dialogue: Option<bool>,
}

impl ParagraphPair {
    pub fn key(&self) -> ItemKey {
        ItemKey::new(self.story_id.clone(), self.index)
    }

    /// Reference at `index`, if the pair carries that many.
    pub fn reference(&self, index: usize) -> Option<&str> {
        self.references.get(index).map(String::as_str)
    }
}

/// Story-level metadata record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryMeta {
    pub story_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub author: String,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub story_id: String,
    pub title: String,
    pub author: String,
    pub summary: String,
    pub paragraphs: Vec<ParagraphPair>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate paragraph {key}")]
    DuplicateItem { line: usize, key: ItemKey },
    #[error("story {story_id}: non-contiguous paragraph index, expected {expected} but found {found}")]
    NonContiguousIndex { story_id: String, expected: u32, found: u32 },
    #[error("line {line}: empty source text for {key}")]
    EmptySource { line: usize, key: ItemKey },
    #[error("line {line}: {key} has no reference translation")]
    NoReferences { line: usize, key: ItemKey },
    #[error("line {line}: empty reference #{reference} for {key}")]
    EmptyReference { line: usize, key: ItemKey, reference: usize },
    #[error("line {line}: duplicate story metadata for {story_id}")]
    DuplicateStory { line: usize, story_id: String },
    #[error("line {line}: metadata for unknown story {story_id}")]
    UnknownStory { line: usize, story_id: String },
    #[error("line {line}: candidate refers to unknown item {key}")]
    UnknownItem { line: usize, key: ItemKey },
    #[error("line {line}: empty translation for {key}")]
    EmptyTranslation { line: usize, key: ItemKey },
    #[error("line {line}: second translation for {key} in system {system_id}")]
    DuplicateCandidate { line: usize, key: ItemKey, system_id: String },
    #[error("line {line}: candidate file mixes systems {expected} and {found}")]
    MixedSystems { line: usize, expected: String, found: String },
    #[error("candidate file contains no translations")]
    EmptyCandidates,
    #[error("line {line}: score {score} out of range for channel {channel}")]
    ScoreOutOfRange { line: usize, channel: Channel, score: i64 },
    #[error("line {line}: verse annotation without question_id")]
    MissingQuestionId { line: usize },
    #[error("line {line}: annotation refers to unknown {what} {id}")]
    DanglingAnnotation { line: usize, what: &'static str, id: String },
}

/// A validated collection of stories.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    stories: Vec<Story>,
}

impl Corpus {
    /// Builds a corpus from line-numbered paragraph and metadata records.
    ///
    /// Stories keep the order in which they first appear among the
    /// paragraph records; paragraphs are ordered by index.
    pub fn from_records<P, M>(paragraphs: P, metadata: M) -> Result<Self, CorpusError>
    where
        P: IntoIterator<Item = (usize, ParagraphPair)>,
        M: IntoIterator<Item = (usize, StoryMeta)>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut grouped: BTreeMap<String, BTreeMap<u32, ParagraphPair>> = BTreeMap::new();

        for (line, pair) in paragraphs {
            let key = pair.key();
            if pair.source_text.trim().is_empty() {
                return Err(CorpusError::EmptySource { line, key });
            }
            if pair.references.is_empty() {
                return Err(CorpusError::NoReferences { line, key });
            }
            if let Some(reference) = pair.references.iter().position(|r| r.trim().is_empty()) {
                return Err(CorpusError::EmptyReference { line, key, reference });
            }
            let story = grouped.entry(pair.story_id.clone()).or_insert_with(|| {
                order.push(pair.story_id.clone());
                BTreeMap::new()
            });
            if story.contains_key(&pair.index) {
                return Err(CorpusError::DuplicateItem { line, key });
            }
            story.insert(pair.index, pair);
        }

        let mut meta_by_id: BTreeMap<String, StoryMeta> = BTreeMap::new();
        for (line, meta) in metadata {
            if !grouped.contains_key(&meta.story_id) {
                return Err(CorpusError::UnknownStory { line, story_id: meta.story_id });
            }
            if meta_by_id.contains_key(&meta.story_id) {
                return Err(CorpusError::DuplicateStory { line, story_id: meta.story_id });
            }
            meta_by_id.insert(meta.story_id.clone(), meta);
        }

        let mut stories = Vec::with_capacity(order.len());
        for story_id in order {
            let paragraphs = grouped.remove(&story_id).unwrap_or_default();
            for (expected, &found) in paragraphs.keys().enumerate() {
                let expected = expected as u32;
                if found != expected {
                    return Err(CorpusError::NonContiguousIndex { story_id, expected, found });
                }
            }
            let meta = meta_by_id.remove(&story_id);
            let (title, author, summary) = match meta {
                Some(m) => (m.title, m.author, m.summary),
                None => (String::new(), String::new(), String::new()),
            };
            stories.push(Story { story_id, title, author, summary, paragraphs: paragraphs.into_values().collect() });
        }
        Ok(Self { stories })
    }

    pub fn stories(&self) -> &[Story] {
        &self.stories
    }

    pub fn story(&self, story_id: &str) -> Option<&Story> {
        self.stories.iter().find(|s| s.story_id == story_id)
    }

    pub fn story_count(&self) -> usize {
        self.stories.len()
    }

    pub fn paragraph_count(&self) -> usize {
        self.stories.iter().map(|s| s.paragraphs.len()).sum()
    }

    pub fn pair(&self, key: &ItemKey) -> Option<&ParagraphPair> {
        self.story(&key.story_id)?.paragraphs.get(key.index as usize)
    }

    pub fn summary(&self, story_id: &str) -> &str {
        self.story(story_id).map(|s| s.summary.as_str()).unwrap_or("")
    }

    /// All pairs in corpus order.
    pub fn pairs(&self) -> impl Iterator<Item = &ParagraphPair> {
        self.stories.iter().flat_map(|s| s.paragraphs.iter())
    }

    /// Paragraph records and metadata records, the inverse of
    /// [`Corpus::from_records`].
    pub fn to_records(&self) -> (Vec<ParagraphPair>, Vec<StoryMeta>) {
        let pairs = self.pairs().cloned().collect();
        let meta = self
            .stories
            .iter()
            .map(|s| StoryMeta {
                story_id: s.story_id.clone(),
                title: s.title.clone(),
                author: s.author.clone(),
                summary: s.summary.clone(),
            })
            .collect();
        (pairs, meta)
    }
}

/// One line of a candidate translation file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub system_id: String,
    pub story_id: String,
    pub index: u32,
    pub text: String,
}

/// Translations produced by one system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub system_id: String,
    pub translations: BTreeMap<ItemKey, String>,
}

impl CandidateSet {
    pub fn new(system_id: impl Into<String>) -> Self {
        Self { system_id: system_id.into(), translations: BTreeMap::new() }
    }

    /// Validates candidate records against `corpus`. All records must name
    /// the same system.
    pub fn from_records<I>(records: I, corpus: &Corpus) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (usize, CandidateRecord)>,
    {
        let mut set: Option<CandidateSet> = None;
        for (line, rec) in records {
            let key = ItemKey::new(rec.story_id, rec.index);
            let set = set.get_or_insert_with(|| CandidateSet::new(rec.system_id.clone()));
            if set.system_id != rec.system_id {
                return Err(CorpusError::MixedSystems { line, expected: set.system_id.clone(), found: rec.system_id });
            }
            if corpus.pair(&key).is_none() {
                return Err(CorpusError::UnknownItem { line, key });
            }
            if rec.text.trim().is_empty() {
                return Err(CorpusError::EmptyTranslation { line, key });
            }
            if set.translations.contains_key(&key) {
                return Err(CorpusError::DuplicateCandidate { line, key, system_id: rec.system_id });
            }
            set.translations.insert(key, rec.text);
        }
        set.ok_or(CorpusError::EmptyCandidates)
    }

    pub fn get(&self, key: &ItemKey) -> Option<&str> {
        self.translations.get(key).map(String::as_str)
    }

    /// Fraction of corpus paragraphs that have a translation.
    pub fn coverage(&self, corpus: &Corpus) -> f64 {
        let total = corpus.paragraph_count();
        if total == 0 {
            return 0.0;
        }
        let covered = corpus.pairs().filter(|p| self.translations.contains_key(&p.key())).count();
        covered as f64 / total as f64
    }

    pub fn to_records(&self) -> Vec<CandidateRecord> {
        self.translations
            .iter()
            .map(|(k, text)| CandidateRecord {
                system_id: self.system_id.clone(),
                story_id: k.story_id.clone(),
                index: k.index,
                text: text.clone(),
            })
            .collect()
    }
}

/// Score channel of an annotation: the four rubric criteria plus the
/// question-grading step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Honorifics,
    Lexical,
    Syntax,
    Content,
    Verse,
}

impl Channel {
    pub const ALL: [Channel; 5] =
        [Channel::Honorifics, Channel::Lexical, Channel::Syntax, Channel::Content, Channel::Verse];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Honorifics => "honorifics",
            Channel::Lexical => "lexical",
            Channel::Syntax => "syntax",
            Channel::Content => "content",
            Channel::Verse => "verse",
        }
    }

    /// Inclusive score range for this channel.
    pub fn score_range(self) -> (i64, i64) {
        match self {
            Channel::Verse => (1, 3),
            _ => (1, 5),
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One rater's score for one item on one channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub rater_id: String,
    pub channel: Channel,
    pub story_id: String,
    pub index: u32,
    pub system_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    pub score: i64,
}

impl AnnotationRecord {
    /// Key identifying the rated item: `story#index/system` for rubric
    /// channels, `question/system` for the verse channel.
    pub fn item_key(&self) -> String {
        match (&self.channel, &self.question_id) {
            (Channel::Verse, Some(q)) => alloc::format!("{}/{}", q, self.system_id),
            _ => alloc::format!("{}#{}/{}", self.story_id, self.index, self.system_id),
        }
    }

    /// Checks the score range and the presence of a question id.
    pub fn check(&self, line: usize) -> Result<(), CorpusError> {
        let (lo, hi) = self.channel.score_range();
        if self.score < lo || self.score > hi {
            return Err(CorpusError::ScoreOutOfRange { line, channel: self.channel, score: self.score });
        }
        if self.channel == Channel::Verse && self.question_id.is_none() {
            return Err(CorpusError::MissingQuestionId { line });
        }
        Ok(())
    }
}

/// Rejects annotations that point at items absent from the corpus, the
/// known systems or the question bank. Any of the reference sets may be
/// omitted, in which case that dimension is not checked.
pub fn validate_annotations<'a, I>(
    records: I,
    corpus: Option<&Corpus>,
    systems: Option<&BTreeSet<String>>,
    question_ids: Option<&BTreeSet<String>>,
) -> Result<(), CorpusError>
where
    I: IntoIterator<Item = (usize, &'a AnnotationRecord)>,
{
    for (line, rec) in records {
        rec.check(line)?;
        if let Some(corpus) = corpus {
            let key = ItemKey::new(rec.story_id.clone(), rec.index);
            if corpus.pair(&key).is_none() {
                return Err(CorpusError::DanglingAnnotation { line, what: "paragraph", id: alloc::format!("{key}") });
            }
        }
        if let Some(systems) = systems {
            if !systems.contains(&rec.system_id) {
                return Err(CorpusError::DanglingAnnotation { line, what: "system", id: rec.system_id.clone() });
            }
        }
        if let (Some(ids), Some(q)) = (question_ids, &rec.question_id) {
            if !ids.contains(q) {
                return Err(CorpusError::DanglingAnnotation { line, what: "question", id: q.clone() });
            }
        }
    }
    Ok(())
}
