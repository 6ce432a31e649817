//! Seeded selection of evaluation items and verification questions.
//!
//! Algorithm (fixed, version `chacha8-fy-v1`): a ChaCha8 stream seeded with
//! `seed_from_u64(seed)`; bounded draws by rejection sampling on `next_u64`;
//! selection by partial Fisher-Yates over the candidate list in its input
//! order. Stories are visited in request order; within a story the chosen
//! indices are sorted, then each item draws its system and its questions.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, ItemKey};
use crate::verse::question_id;

pub const SAMPLER_ALGORITHM: &str = "chacha8-fy-v1";

/// Question slots per paragraph when no generated pool is supplied.
pub const DEFAULT_QUESTION_SLOTS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("story {0} is not in the corpus")]
    UnknownStory(String),
    #[error("story {story_id} has {available} paragraphs, {needed} requested")]
    TooFewParagraphs { story_id: String, needed: usize, available: usize },
    #[error("item {key} has {available} questions, {needed} requested")]
    TooFewQuestions { key: String, needed: usize, available: usize },
    #[error("story {0} requested twice")]
    DuplicateStory(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub story_ids: Vec<String>,
    pub n_per_story: usize,
    pub q_per_item: usize,
    pub seed: u64,
    /// Systems to assign to items; empty leaves items unassigned.
    #[serde(default)]
    pub systems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledItem {
    pub story_id: String,
    pub index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_id: Option<String>,
    #[serde(default)]
    pub question_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub algorithm: String,
    pub request: SampleRequest,
    pub items: Vec<SampledItem>,
}

impl SampleManifest {
    pub fn question_count(&self) -> usize {
        self.items.iter().map(|i| i.question_ids.len()).sum()
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    /// Uniform in `0..bound`, `bound > 0`.
    fn below(&mut self, bound: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.0.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// `k` distinct positions of `0..n`, in draw order.
    fn choose(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Draws the manifest. `question_pool` maps items to their persisted
/// question ids; without it, slot ids `1..=DEFAULT_QUESTION_SLOTS` are used.
pub fn sample_items(
    corpus: &Corpus,
    request: &SampleRequest,
    question_pool: Option<&BTreeMap<ItemKey, Vec<String>>>,
) -> Result<SampleManifest, SampleError> {
    let mut rng = Draw(ChaCha8Rng::seed_from_u64(request.seed));
    let mut items = Vec::new();
    for (n, story_id) in request.story_ids.iter().enumerate() {
        if request.story_ids[..n].contains(story_id) {
            return Err(SampleError::DuplicateStory(story_id.clone()));
        }
        let story = corpus.story(story_id).ok_or_else(|| SampleError::UnknownStory(story_id.clone()))?;
        let available = story.paragraphs.len();
        if available < request.n_per_story {
            return Err(SampleError::TooFewParagraphs {
                story_id: story_id.clone(),
                needed: request.n_per_story,
                available,
            });
        }
        let mut picked: Vec<u32> =
            rng.choose(available, request.n_per_story).into_iter().map(|p| story.paragraphs[p].index).collect();
        picked.sort_unstable();

        for index in picked {
            let system_id = (!request.systems.is_empty())
                .then(|| request.systems[rng.below(request.systems.len() as u64) as usize].clone());
            let question_ids = if request.q_per_item == 0 {
                Vec::new()
            } else {
                let key = ItemKey::new(story_id.clone(), index);
                let ids: Vec<String> = match question_pool {
                    Some(pool) => pool.get(&key).cloned().unwrap_or_default(),
                    None => (1..=DEFAULT_QUESTION_SLOTS).map(|k| question_id(story_id, index, k)).collect(),
                };
                if ids.len() < request.q_per_item {
                    return Err(SampleError::TooFewQuestions {
                        key: key.to_string(),
                        needed: request.q_per_item,
                        available: ids.len(),
                    });
                }
                let mut chosen = rng.choose(ids.len(), request.q_per_item);
                chosen.sort_unstable();
                chosen.into_iter().map(|p| ids[p].clone()).collect()
            };
            items.push(SampledItem { story_id: story_id.clone(), index, system_id, question_ids });
        }
    }
    Ok(SampleManifest { algorithm: SAMPLER_ALGORITHM.into(), request: request.clone(), items })
}
