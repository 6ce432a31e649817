use std::collections::BTreeMap;

use lit_eval_core::corpus::ItemKey;
use lit_eval_core::sample::{sample_items, SampleRequest};
use serde_json::{json, Value};

use super::{header, write_bundle};
use crate::config::{fingerprint, Settings};
use crate::data::{default_stories_path, load_corpus, load_questions};
use crate::error::{CliError, Result};

fn list(s: &Option<String>) -> Vec<String> {
    s.as_deref()
        .map(|v| v.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect())
        .unwrap_or_default()
}

pub fn run(s: &Settings) -> Result<()> {
    let corpus_path = s.require(&s.corpus, "corpus")?;
    let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
    let corpus = load_corpus(corpus_path, stories.as_deref())?;
    let seed = s.seed.ok_or_else(|| CliError::Config("--seed is required".into()))?;
    let mut story_ids = list(&s.story_ids);
    if story_ids.is_empty() {
        story_ids = corpus.stories().iter().map(|st| st.story_id.clone()).collect();
    }
    let request = SampleRequest {
        story_ids,
        n_per_story: s.n_per_story.ok_or_else(|| CliError::Config("--n-per-story is required".into()))?,
        q_per_item: s.q_per_item.unwrap_or(0),
        seed,
        systems: list(&s.systems),
    };
    let pool = match &s.questions {
        Some(p) => {
            let mut pool: BTreeMap<ItemKey, Vec<String>> = BTreeMap::new();
            for q in load_questions(p)?.1 {
                pool.entry(ItemKey::new(q.story_id, q.index)).or_default().push(q.question_id);
            }
            Some(pool)
        }
        None => None,
    };
    let manifest = sample_items(&corpus, &request, pool.as_ref())?;
    let fp = fingerprint(
        "manifest",
        json!({ "request": request }),
        &[("corpus", Some(corpus_path)), ("stories", stories.as_deref()), ("questions", s.questions.as_deref())],
    )?;
    eprintln!("{}", json!({ "items": manifest.items.len(), "questions": manifest.question_count() }));
    write_bundle(&s.output("manifest.json"), header(s, "manifest", &fp, Value::Null), json!({ "manifest": manifest }))
}
