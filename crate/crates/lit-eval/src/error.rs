use std::path::PathBuf;

use lit_eval_core::corpus::CorpusError;
use lit_eval_core::judge::JudgeError;
use lit_eval_core::metrics::MetricError;
use lit_eval_core::radar::RadarError;
use lit_eval_core::report::ReportError;
use lit_eval_core::ruler::RubricError;
use lit_eval_core::sample::SampleError;
use lit_eval_core::translate::TranslateError;
use lit_eval_core::verse::VerseError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Corpus { path: PathBuf, source: CorpusError },
    #[error(transparent)]
    Rubric(#[from] RubricError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Radar(#[from] RadarError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Verse(#[from] VerseError),
    #[error("{0}")]
    Config(String),
    #[error("inputs were produced under different configurations: {0:?}")]
    MixedFingerprints(Vec<String>),
    #[error("{path}: expected a {expected} file, found {found}")]
    WrongKind { path: PathBuf, expected: String, found: String },
    #[error("{0}")]
    Csv(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Stable error code for machine consumers.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "Io",
            CliError::Parse { .. } => "Parse",
            CliError::Corpus { source, .. } => corpus_kind(source),
            CliError::Rubric(_) => "Rubric",
            CliError::Judge(e) => match e {
                JudgeError::TransportExhausted { .. } => "TransportExhausted",
                JudgeError::Transport(_) => "Transport",
                JudgeError::EmptyCompletion => "EmptyCompletion",
                JudgeError::MockScriptMiss { .. } => "MockScriptMiss",
                JudgeError::Cache(_) => "Cache",
            },
            CliError::Metric(_) => "Metric",
            CliError::Report(ReportError::EmptyRun) => "EmptyRun",
            CliError::Report(_) => "Report",
            CliError::Radar(_) => "Radar",
            CliError::Sample(e) => match e {
                SampleError::UnknownStory(_) => "UnknownStory",
                SampleError::TooFewParagraphs { .. } => "TooFewParagraphs",
                SampleError::TooFewQuestions { .. } => "TooFewQuestions",
                SampleError::DuplicateStory(_) => "DuplicateStory",
            },
            CliError::Translate(TranslateError::InsufficientBank { .. }) => "InsufficientBank",
            CliError::Translate(_) => "Translate",
            CliError::Verse(_) => "Verse",
            CliError::Config(_) => "Config",
            CliError::MixedFingerprints(_) => "MixedFingerprints",
            CliError::WrongKind { .. } => "WrongKind",
            CliError::Csv(_) => "Csv",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

fn corpus_kind(e: &CorpusError) -> &'static str {
    match e {
        CorpusError::Malformed { .. } => "Malformed",
        CorpusError::DuplicateItem { .. } => "DuplicateItem",
        CorpusError::NonContiguousIndex { .. } => "NonContiguousIndex",
        CorpusError::EmptySource { .. } => "EmptySource",
        CorpusError::NoReferences { .. } => "NoReferences",
        CorpusError::EmptyReference { .. } => "EmptyReference",
        CorpusError::DuplicateStory { .. } => "DuplicateStory",
        CorpusError::UnknownStory { .. } => "UnknownStory",
        CorpusError::UnknownItem { .. } => "UnknownItem",
        CorpusError::EmptyTranslation { .. } => "EmptyTranslation",
        CorpusError::DuplicateCandidate { .. } => "DuplicateCandidate",
        CorpusError::MixedSystems { .. } => "MixedSystems",
        CorpusError::EmptyCandidates => "EmptyCandidates",
        CorpusError::ScoreOutOfRange { .. } => "ScoreOutOfRange",
        CorpusError::MissingQuestionId { .. } => "MissingQuestionId",
        CorpusError::DanglingAnnotation { .. } => "DanglingAnnotation",
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
