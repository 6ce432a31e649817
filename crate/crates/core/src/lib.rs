//! Rubric scoring, question-based verification and agreement statistics for
//! literary translation evaluation with language-model judges.
//!
//! Everything here is `no_std` + `alloc`; IO and transports live in the
//! companion `lit-eval` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod fingerprint;
pub mod judge;
pub mod metrics;
pub mod prompt;
pub mod radar;
pub mod report;
pub mod response;
pub mod ruler;
pub mod sample;
pub mod translate;
pub mod verse;

pub use corpus::{Channel, Corpus, CorpusError, ItemKey, ParagraphPair};
pub use judge::{Judge, JudgeError, JudgeRequest, JudgeResponse, TemperatureOverride};
pub use prompt::PromptOptions;
