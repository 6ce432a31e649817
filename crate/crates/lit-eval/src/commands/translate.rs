use lit_eval_core::corpus::{CandidateRecord, ParagraphPair};
use lit_eval_core::translate::{
    select_examples, translate_paragraph, Granularity, TranslateError, TranslationPromptSpec,
};
use serde_json::{json, Value};

use super::{allowed, header, report_stats, write_bundle, ManifestFilter};
use crate::config::{fingerprint, judge_identity, GranularityArg, Settings};
use crate::data::{default_stories_path, load_corpus, load_translation_bank};
use crate::error::{CliError, Result};
use crate::io::JsonlOutput;
use crate::pipeline::run_ordered;

pub fn run(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    let bank = load_translation_bank(s.bank.as_deref())?;
    let spec = TranslationPromptSpec {
        n_shots: s.n_shots.unwrap_or(5),
        include_summary: !Settings::flag(s.no_summary),
        granularity: match s.granularity {
            Some(GranularityArg::Sentence) => Granularity::Sentence,
            _ => Granularity::Paragraph,
        },
        require_mixed: !Settings::flag(s.no_mixed),
        ..TranslationPromptSpec::default()
    };
    // fail before any call when the bank cannot serve some story
    for story in corpus.stories() {
        select_examples(&bank, &spec, &story.story_id)?;
    }
    let filter = ManifestFilter::load(s.manifest.as_deref())?;
    let jc = s.judge_config()?;
    let system_id = s.system_id.clone().unwrap_or_else(|| jc.model_id.clone());
    let fp = fingerprint(
        "candidates",
        json!({ "judge": judge_identity(&jc)?, "spec": spec, "system_id": system_id }),
        &[
            ("corpus", Some(corpus_path)),
            ("stories", stories.as_deref()),
            ("bank", s.bank.as_deref()),
            ("manifest", s.manifest.as_deref()),
        ],
    )?;
    let judge = jc.build()?;
    let items: Vec<&ParagraphPair> = corpus.pairs().filter(|p| allowed(&filter, &p.key(), None)).collect();

    let provenance = json!({
        "model_id": jc.model_id,
        "backend": jc.backend,
        "temperature": "backend-default",
        "spec_fingerprint": spec.fingerprint(),
        "spec": spec,
    });
    let mut out = JsonlOutput::create(s.output("candidates.jsonl"), &header(s, "candidates", &fp, provenance.clone()))?;
    let mut fails =
        JsonlOutput::create(s.output("translate_failures.jsonl"), &header(s, "translate_failures", &fp, provenance))?;
    let mut failed = 0usize;
    let outcome = run_ordered(
        s.jobs(),
        &items,
        |pair| translate_paragraph(&judge, pair, corpus.summary(&pair.story_id), &bank, &spec),
        |pair, r: std::result::Result<String, TranslateError>| {
            match r {
                Ok(text) => out.push(&CandidateRecord {
                    system_id: system_id.clone(),
                    story_id: pair.story_id.clone(),
                    index: pair.index,
                    text,
                })?,
                Err(e) => {
                    failed += 1;
                    fails.push(&json!({ "story_id": pair.story_id, "index": pair.index, "system_id": system_id, "error": e.to_string() }))?;
                }
            }
            Ok::<_, CliError>(())
        },
    );
    report_stats(&judge);
    if outcome.is_ok() {
        out.finish()?;
        fails.finish()?;
    }
    write_bundle(
        &s.output("translate_summary.json"),
        header(s, "translate_summary", &fp, Value::Null),
        json!({
            "status": if outcome.is_ok() { "complete" } else { "aborted" },
            "error": outcome.as_ref().err().map(|e| e.to_string()),
            "config": s.recorded(),
            "paragraphs": items.len(),
            "translated": items.len() - failed,
            "failed": failed,
            "partial": failed > 0,
        }),
    )?;
    outcome
}
