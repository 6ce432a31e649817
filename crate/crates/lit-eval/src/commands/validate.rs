use std::collections::BTreeSet;

use serde_json::{json, Value};

use super::{header, write_bundle};
use crate::config::{fingerprint, Settings};
use crate::data::{
    check_annotations, default_stories_path, load_annotations, load_candidate_sets, load_corpus, load_questions,
};
use crate::error::Result;

/// Loads every given input, enforcing all invariants, and reports counts.
pub fn run(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    let sets = load_candidate_sets(&s.candidates, &corpus)?;
    let coverage: Vec<Value> = sets
        .iter()
        .map(|c| json!({ "system_id": c.system_id, "translations": c.translations.len(), "coverage": c.coverage(&corpus) }))
        .collect();
    let questions = match &s.questions {
        Some(p) => Some(load_questions(p)?.1),
        None => None,
    };
    let annotations = match &s.annotations {
        Some(p) => {
            let recs = load_annotations(p)?;
            let systems: BTreeSet<String> = sets.iter().map(|c| c.system_id.clone()).collect();
            let qids: Option<BTreeSet<String>> =
                questions.as_ref().map(|qs| qs.iter().map(|q| q.question_id.clone()).collect());
            check_annotations(p, &recs, Some(&corpus), (!systems.is_empty()).then_some(&systems), qids.as_ref())?;
            Some(recs.len())
        }
        None => None,
    };
    let with_summary = corpus.stories().iter().filter(|st| !st.summary.trim().is_empty()).count();
    let report = json!({
        "stories": corpus.story_count(),
        "paragraphs": corpus.paragraph_count(),
        "stories_with_summary": with_summary,
        "candidates": coverage,
        "questions": questions.as_ref().map(Vec::len),
        "annotations": annotations,
    });
    println!("{report}");
    let fp = fingerprint(
        "validation",
        Value::Null,
        &[("corpus", Some(corpus_path)), ("stories", stories.as_deref()), ("annotations", s.annotations.as_deref())],
    )?;
    write_bundle(&s.output("validate.json"), header(s, "validation", &fp, Value::Null), report)
}
