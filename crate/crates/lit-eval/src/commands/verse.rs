use std::collections::BTreeMap;
use std::path::PathBuf;

use lit_eval_core::corpus::{CandidateSet, ItemKey, ParagraphPair};
use lit_eval_core::report::PercentMapping;
use lit_eval_core::verse::{
    aggregate_categories, classify_question, generate_questions, grade_question, VerseError, VerseGrade, VerseQuestion,
    DEFAULT_QUESTION_TARGET,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{allowed, header, report_stats, write_bundle, ManifestFilter};
use crate::config::{fingerprint, judge_identity, Settings};
use crate::data::{default_stories_path, load_candidate_sets, load_corpus, load_questions, load_shots};
use crate::error::{CliError, Result};
use crate::io::JsonlOutput;
use crate::pipeline::run_ordered;

/// A step that did not produce output for one unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub stage: String,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_id: Option<String>,
    pub error: String,
}

fn failure(stage: &str, id: String, system_id: Option<&str>, e: &VerseError) -> StepFailure {
    StepFailure { stage: stage.into(), id, system_id: system_id.map(str::to_string), error: e.to_string() }
}

fn summary(s: &Settings, kind: &str, fp: &str, status: &Result<()>, body: Value) -> Result<()> {
    let mut body = body;
    body["status"] = json!(if status.is_ok() { "complete" } else { "aborted" });
    body["error"] = json!(status.as_ref().err().map(|e| e.to_string()));
    body["config"] = s.recorded();
    write_bundle(
        &s.output(&format!("{kind}_summary.json")),
        header(s, &format!("{kind}_summary"), fp, Value::Null),
        body,
    )
}

pub fn generate(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    let filter = ManifestFilter::load(s.manifest.as_deref())?;
    let options = s.verse_options();
    let n_target = s.n_questions.unwrap_or(DEFAULT_QUESTION_TARGET);
    let jc = s.judge_config()?;
    let fp = fingerprint(
        "questions",
        json!({ "judge": judge_identity(&jc)?, "n_target": n_target, "summary": options.include_summary, "languages": options.languages }),
        &[("corpus", Some(corpus_path)), ("stories", stories.as_deref()), ("manifest", s.manifest.as_deref())],
    )?;
    let judge = jc.build()?;
    let items: Vec<&ParagraphPair> = corpus.pairs().filter(|p| allowed(&filter, &p.key(), None)).collect();

    let prov = json!({ "model_id": jc.model_id, "n_target": n_target });
    let mut out = JsonlOutput::create(s.output("questions.jsonl"), &header(s, "questions", &fp, prov.clone()))?;
    let mut fails = JsonlOutput::create(s.output("gen_failures.jsonl"), &header(s, "gen_failures", &fp, prov))?;
    let (mut n_questions, mut discarded, mut failed) = (0usize, 0usize, 0usize);
    let outcome = run_ordered(
        s.jobs(),
        &items,
        |pair| generate_questions(&judge, pair, corpus.summary(&pair.story_id), n_target, &options),
        |pair, r| {
            match r {
                Ok(g) => {
                    discarded += g.discarded;
                    for q in &g.questions {
                        out.push(q)?;
                        n_questions += 1;
                    }
                }
                Err(e) => {
                    failed += 1;
                    fails.push(&failure("generate", pair.key().to_string(), None, &e))?;
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
    summary(
        s,
        "gen",
        &fp,
        &outcome,
        json!({
            "paragraphs": items.len(), "questions": n_questions, "discarded_over_cap": discarded, "failed": failed, "partial": failed > 0,
        }),
    )?;
    outcome
}

fn questions_path(s: &Settings, default_suffix: &str) -> PathBuf {
    s.questions.clone().unwrap_or_else(|| s.output(default_suffix))
}

pub fn classify(s: &Settings) -> Result<()> {
    let path = questions_path(s, "questions.jsonl");
    let (_, questions) = load_questions(&path)?;
    let jc = s.judge_config()?;
    let fp =
        fingerprint("classified_questions", json!({ "judge": judge_identity(&jc)? }), &[("questions", Some(&path))])?;
    let judge = jc.build()?;
    let prov = json!({ "model_id": jc.model_id });
    let mut out = JsonlOutput::create(
        s.output("questions_classified.jsonl"),
        &header(s, "classified_questions", &fp, prov.clone()),
    )?;
    let mut fails =
        JsonlOutput::create(s.output("classify_failures.jsonl"), &header(s, "classify_failures", &fp, prov))?;
    let mut kept: Vec<VerseQuestion> = Vec::new();
    let mut failed = 0usize;
    let outcome = run_ordered(
        s.jobs(),
        &questions,
        |q| match q.category {
            Some(c) => Ok(c),
            None => classify_question(&judge, q),
        },
        |q, r| {
            match r {
                Ok(c) => {
                    let q = VerseQuestion { category: Some(c), ..q.clone() };
                    out.push(&q)?;
                    kept.push(q);
                }
                Err(e) => {
                    failed += 1;
                    fails.push(&failure("classify", q.question_id.clone(), None, &e))?;
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
    let shares = aggregate_categories(&kept, &[], PercentMapping::MinMax)?;
    let shares: Vec<Value> =
        shares.iter().map(|a| json!({ "category": a.category, "n": a.n, "share_percent": a.question_share })).collect();
    summary(
        s,
        "classify",
        &fp,
        &outcome,
        json!({
            "questions": questions.len(), "classified": kept.len(), "failed": failed, "partial": failed > 0, "categories": shares,
        }),
    )?;
    outcome
}

pub fn grade(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    if s.candidates.is_empty() {
        return Err(CliError::Config("--candidates is required".into()));
    }
    let sets: Vec<CandidateSet> = load_candidate_sets(&s.candidates, &corpus)?;
    let path = questions_path(s, "questions_classified.jsonl");
    let (_, questions) = load_questions(&path)?;
    if let Some(q) = questions.iter().find(|q| q.category.is_none()) {
        return Err(VerseError::UnclassifiedQuestion(q.question_id.clone()).into());
    }
    let shots = load_shots(s.shots.as_deref())?;
    let options = s.verse_options();
    options.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let filter = ManifestFilter::load(s.manifest.as_deref())?;
    let jc = s.judge_config()?;
    let fp = fingerprint(
        "grades",
        json!({ "judge": judge_identity(&jc)?, "options": options }),
        &[
            ("corpus", Some(corpus_path)),
            ("stories", stories.as_deref()),
            ("questions", Some(&path)),
            ("shots", s.shots.as_deref()),
            ("manifest", s.manifest.as_deref()),
        ],
    )?;
    let judge = jc.build()?;

    let mut items: Vec<(usize, &VerseQuestion, &ParagraphPair)> = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for q in &questions {
            let key = ItemKey::new(q.story_id.clone(), q.index);
            let Some(pair) = corpus.pair(&key) else {
                return Err(VerseError::UnknownQuestion(q.question_id.clone()).into());
            };
            let selected = filter.as_ref().is_none_or(|f| f.allows_question(&key, &q.question_id, &set.system_id));
            if set.get(&key).is_some() && selected {
                items.push((i, q, pair));
            }
        }
    }

    let prov = json!({ "model_id": jc.model_id, "options_fingerprint": options.fingerprint() });
    let mut out = JsonlOutput::create(s.output("grades.jsonl"), &header(s, "grades", &fp, prov.clone()))?;
    let mut fails = JsonlOutput::create(s.output("grade_failures.jsonl"), &header(s, "grade_failures", &fp, prov))?;
    let mut graded = 0usize;
    let mut failed_by_system: BTreeMap<String, usize> = BTreeMap::new();
    let outcome = run_ordered(
        s.jobs(),
        &items,
        |&(i, q, pair)| {
            let set = &sets[i];
            let text = set.get(&pair.key()).unwrap_or_default();
            grade_question(&judge, q, pair, &set.system_id, text, corpus.summary(&pair.story_id), &options, &shots)
        },
        |&(i, q, _), r: std::result::Result<VerseGrade, VerseError>| {
            match r {
                Ok(g) => {
                    out.push(&g)?;
                    graded += 1;
                }
                Err(e) => {
                    let system = &sets[i].system_id;
                    *failed_by_system.entry(system.clone()).or_default() += 1;
                    fails.push(&failure("grade", q.question_id.clone(), Some(system), &e))?;
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
    let failed: usize = failed_by_system.values().sum();
    summary(
        s,
        "grade",
        &fp,
        &outcome,
        json!({
            "items": items.len(), "graded": graded, "failed": failed, "failed_by_system": failed_by_system, "partial": failed > 0,
            "options": options,
        }),
    )?;
    outcome
}
