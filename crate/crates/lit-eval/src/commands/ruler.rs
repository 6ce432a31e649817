use std::collections::BTreeMap;

use lit_eval_core::corpus::ParagraphPair;
use lit_eval_core::ruler::{audit_honorifics, score_paragraph, ItemFailure, RubricScorecard, RulerContext};
use serde_json::json;

use super::{allowed, header, report_stats, write_bundle, ManifestFilter};
use crate::config::{fingerprint, judge_identity, Settings};
use crate::data::{default_stories_path, load_candidate_sets, load_corpus, load_rubric, load_shots};
use crate::error::{CliError, Result};
use crate::io::JsonlOutput;
use crate::pipeline::run_ordered;

#[allow(clippy::result_large_err)]
pub fn run(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    if s.candidates.is_empty() {
        return Err(CliError::Config("--candidates is required".into()));
    }
    let sets = load_candidate_sets(&s.candidates, &corpus)?;
    let rubric = load_rubric(s.rubric.as_deref())?;
    let shots = load_shots(s.shots.as_deref())?;
    let options = s.prompt_options();
    options.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let filter = ManifestFilter::load(s.manifest.as_deref())?;
    let jc = s.judge_config()?;
    let fp = fingerprint(
        "scorecards",
        json!({ "judge": judge_identity(&jc)?, "options": options }),
        &[
            ("corpus", Some(corpus_path)),
            ("stories", stories.as_deref()),
            ("rubric", s.rubric.as_deref()),
            ("shots", s.shots.as_deref()),
            ("manifest", s.manifest.as_deref()),
        ],
    )?;
    let judge = jc.build()?;

    let mut items: Vec<(usize, &ParagraphPair)> = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for pair in corpus.pairs() {
            if set.get(&pair.key()).is_some() && allowed(&filter, &pair.key(), Some(&set.system_id)) {
                items.push((i, pair));
            }
        }
    }

    let provenance = json!({ "model_id": jc.model_id, "options_fingerprint": options.fingerprint() });
    let mut cards_out =
        JsonlOutput::create(s.output("scorecards.jsonl"), &header(s, "scorecards", &fp, provenance.clone()))?;
    let mut fail_out =
        JsonlOutput::create(s.output("ruler_failures.jsonl"), &header(s, "ruler_failures", &fp, provenance))?;
    let ctx = RulerContext { corpus: &corpus, rubric: &rubric, options: &options, shots: &shots };
    let mut cards: Vec<RubricScorecard> = Vec::new();
    let mut failures: Vec<ItemFailure> = Vec::new();
    let outcome = run_ordered(
        s.jobs(),
        &items,
        |&(i, pair)| {
            let set = &sets[i];
            score_paragraph(&judge, &ctx, pair, &set.system_id, set.get(&pair.key()).unwrap_or_default())
        },
        |_, r| match r {
            Ok(card) => {
                cards_out.push(&card)?;
                cards.push(card);
                Ok(())
            }
            Err(f) => {
                fail_out.push(&f)?;
                failures.push(f);
                Ok::<_, CliError>(())
            }
        },
    );
    report_stats(&judge);

    let coverage: BTreeMap<&str, f64> = sets.iter().map(|c| (c.system_id.as_str(), c.coverage(&corpus))).collect();
    let audit = audit_honorifics(&corpus, &cards);
    let mut failed_by_system: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &failures {
        *failed_by_system.entry(f.system_id.as_str()).or_default() += 1;
    }
    let status = match &outcome {
        Ok(()) => "complete",
        Err(_) => "aborted",
    };
    if outcome.is_ok() {
        cards_out.finish()?;
        fail_out.finish()?;
    }
    write_bundle(
        &s.output("honorifics_audit.json"),
        header(s, "honorifics_audit", &fp, serde_json::Value::Null),
        &audit,
    )?;
    write_bundle(
        &s.output("ruler_summary.json"),
        header(s, "ruler_summary", &fp, serde_json::Value::Null),
        json!({
            "status": status,
            "error": outcome.as_ref().err().map(|e| e.to_string()),
            "config": s.recorded(),
            "judge": jc.recorded(),
            "options": options,
            "items": items.len(),
            "scored": cards.len(),
            "failed": failures.len(),
            "failed_by_system": failed_by_system,
            "partial": !failures.is_empty(),
            "coverage": coverage,
            "honorifics_audit": { "checked": audit.checked, "compliant": audit.compliant, "flagged": audit.flagged.len(), "untagged": audit.untagged },
        }),
    )?;
    outcome
}
