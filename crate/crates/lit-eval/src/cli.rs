//! Command-line definition and dispatch.

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::Settings;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "lit-eval", version, about = "Rubric and question-based evaluation of literary translations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check corpus, candidate, question and annotation files
    Validate(Args),
    /// Generate candidate translations with few-shot prompting
    Translate(Args),
    /// Score candidates on the four rubric criteria
    Ruler(Args),
    /// Question generation, classification and grading
    Verse {
        #[command(subcommand)]
        step: VerseStep,
    },
    /// Agreement statistics between annotators and models
    Agree(Args),
    /// Percentage tables and radar charts
    Report(Args),
    /// Seeded selection of items and questions
    Sample(Args),
}

#[derive(Debug, Subcommand)]
pub enum VerseStep {
    /// Generate verification questions per paragraph
    Gen(Args),
    /// Assign each question one of the nine categories
    Classify(Args),
    /// Grade candidates against each question (1-3)
    Grade(Args),
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub settings: Settings,
}

pub fn run(cli: Cli) -> Result<()> {
    let (f, args): (fn(&Settings) -> Result<()>, Args) = match cli.command {
        Command::Validate(a) => (commands::validate::run, a),
        Command::Translate(a) => (commands::translate::run, a),
        Command::Ruler(a) => (commands::ruler::run, a),
        Command::Verse { step: VerseStep::Gen(a) } => (commands::verse::generate, a),
        Command::Verse { step: VerseStep::Classify(a) } => (commands::verse::classify, a),
        Command::Verse { step: VerseStep::Grade(a) } => (commands::verse::grade, a),
        Command::Agree(a) => (commands::agree::run, a),
        Command::Report(a) => (commands::report::run, a),
        Command::Sample(a) => (commands::sample::run, a),
    };
    f(&args.settings.resolve()?)
}
