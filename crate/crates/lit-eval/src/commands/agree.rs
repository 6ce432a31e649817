use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lit_eval_core::corpus::{AnnotationRecord, Channel};
use lit_eval_core::metrics::{
    average_reports, cross_pairwise, kendall_tau_b, krippendorff_alpha, mse, pairwise_agreement, per_label_prf,
    spearman_rho, AlphaLevel, AveragedReport, ClassificationReport, MetricError, PairwiseSummary, RatingVector,
};
use lit_eval_core::ruler::{Criterion, RubricScorecard};
use lit_eval_core::verse::VerseGrade;
use serde::Serialize;
use serde_json::{json, Value};

use super::{header, write_bundle};
use crate::config::{fingerprint, Settings};
use crate::data::{
    check_annotations, default_stories_path, load_annotations, load_candidate_sets, load_corpus, load_questions,
};
use crate::error::{CliError, Result};
use crate::io::{read_jsonl, write_atomic};

type PairMetric = fn(&[f64], &[f64]) -> std::result::Result<Option<f64>, MetricError>;

fn mse_metric(x: &[f64], y: &[f64]) -> std::result::Result<Option<f64>, MetricError> {
    mse(x, y).map(Some)
}

const PAIR_METRICS: [(&str, PairMetric); 3] = [("tau", kendall_tau_b), ("rho", spearman_rho), ("mse", mse_metric)];

#[derive(Debug, Clone, Serialize)]
pub struct Correlations {
    pub tau: PairwiseSummary,
    pub rho: PairwiseSummary,
    pub mse: PairwiseSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelComparison {
    pub model_id: String,
    pub correlations: Correlations,
    pub classification: AveragedReport<i64>,
    /// Summed over human-model pairs, `[gold][pred]`.
    pub confusion: Vec<Vec<usize>>,
    pub confusion_row_normalized: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelAgreement {
    pub channel: Channel,
    pub n_items: usize,
    pub n_raters: usize,
    pub raters: Vec<String>,
    pub correlations: Correlations,
    /// `None` when expected disagreement is zero.
    pub alpha: Option<f64>,
    pub human_f1: AveragedReport<i64>,
    pub models: Vec<ModelComparison>,
}

fn vectors(records: &[&AnnotationRecord]) -> Result<Vec<RatingVector>> {
    let mut raters: Vec<&str> = Vec::new();
    for r in records {
        if !raters.contains(&r.rater_id.as_str()) {
            raters.push(&r.rater_id);
        }
    }
    raters
        .iter()
        .map(|id| {
            let items = records.iter().filter(|r| r.rater_id == *id).map(|r| (r.item_key(), r.score as f64));
            Ok(RatingVector::new(*id, items)?)
        })
        .collect()
}

fn correlations(run: impl Fn(PairMetric) -> std::result::Result<PairwiseSummary, MetricError>) -> Result<Correlations> {
    let [tau, rho, mse] = PAIR_METRICS.map(|(_, m)| run(m));
    Ok(Correlations { tau: tau?, rho: rho?, mse: mse? })
}

fn report(a: &RatingVector, b: &RatingVector, labels: &[i64]) -> Result<ClassificationReport<i64>> {
    let (x, y) = a.align(b);
    let gold: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let pred: Vec<i64> = y.iter().map(|&v| v as i64).collect();
    Ok(per_label_prf(&gold, &pred, labels)?)
}

pub fn channel_agreement(
    channel: Channel,
    humans: &[&AnnotationRecord],
    models: &[&AnnotationRecord],
    level: AlphaLevel,
) -> Result<ChannelAgreement> {
    let (lo, hi) = channel.score_range();
    let labels: Vec<i64> = (lo..=hi).collect();
    let human = vectors(humans)?;
    let items: BTreeSet<&String> = human.iter().flat_map(|r| r.scores.keys()).collect();
    let matrix: Vec<Vec<Option<f64>>> =
        human.iter().map(|r| items.iter().map(|i| r.scores.get(*i).copied()).collect()).collect();
    let alpha = krippendorff_alpha(&matrix, level)?;
    let corr = correlations(|m| pairwise_agreement(&human, m))?;
    let mut pair_reports = Vec::new();
    for i in 0..human.len() {
        for j in i + 1..human.len() {
            pair_reports.push(report(&human[i], &human[j], &labels)?);
        }
    }
    let human_f1 = average_reports(&pair_reports)?;

    let mut comparisons = Vec::new();
    for model in vectors(models)? {
        let single = std::slice::from_ref(&model);
        let correlations = correlations(|m| cross_pairwise(&human, single, m))?;
        let reports: Vec<ClassificationReport<i64>> =
            human.iter().map(|h| report(h, &model, &labels)).collect::<Result<_>>()?;
        let k = labels.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for r in &reports {
            for (g, row) in r.confusion.iter().enumerate() {
                for (p, c) in row.iter().enumerate() {
                    confusion[g][p] += c;
                }
            }
        }
        let confusion_row_normalized = confusion
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
            })
            .collect();
        comparisons.push(ModelComparison {
            model_id: model.rater_id.clone(),
            correlations,
            classification: average_reports(&reports)?,
            confusion,
            confusion_row_normalized,
        });
    }
    Ok(ChannelAgreement {
        channel,
        n_items: items.len(),
        n_raters: human.len(),
        raters: human.iter().map(|r| r.rater_id.clone()).collect(),
        correlations: corr,
        alpha,
        human_f1,
        models: comparisons,
    })
}

/// Reads model scores from annotation records, scorecards or grades.
pub fn load_model_scores(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = read_jsonl::<Value>(path)?;
    let kind = file.header.as_ref().map(|h| h.kind.as_str());
    let mut out = Vec::new();
    for (line, v) in file.records {
        let bad = |e: serde_json::Error| CliError::Parse { path: path.to_path_buf(), line, message: e.to_string() };
        match kind {
            Some("scorecards") => {
                let card: RubricScorecard = serde_json::from_value(v).map_err(bad)?;
                for c in Criterion::ALL {
                    out.push(AnnotationRecord {
                        rater_id: card.model_id.clone(),
                        channel: c.channel(),
                        story_id: card.story_id.clone(),
                        index: card.index,
                        system_id: card.system_id.clone(),
                        question_id: None,
                        score: *card.scores.get(c) as i64,
                    });
                }
            }
            Some("grades") => {
                let g: VerseGrade = serde_json::from_value(v).map_err(bad)?;
                let mut parts = g.question_id.rsplitn(3, ':');
                let (_, index, story) = (parts.next(), parts.next(), parts.next());
                out.push(AnnotationRecord {
                    rater_id: g.model_id.clone(),
                    channel: Channel::Verse,
                    story_id: story.unwrap_or_default().to_string(),
                    index: index.and_then(|i| i.parse().ok()).unwrap_or(0),
                    system_id: g.system_id.clone(),
                    question_id: Some(g.question_id.clone()),
                    score: g.score as i64,
                });
            }
            _ => {
                let rec: AnnotationRecord = serde_json::from_value(v).map_err(bad)?;
                rec.check(line).map_err(|source| CliError::Corpus { path: path.to_path_buf(), source })?;
                out.push(rec);
            }
        }
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn run(s: &Settings) -> Result<()> {
    let ann_path = s.require(&s.annotations, "annotations")?;
    let level = s.alpha_level.unwrap_or_default();
    let humans = load_annotations(ann_path)?;

    if let Some(corpus_path) = s.corpus.as_deref() {
        let stories = s.stories.clone().or_else(|| default_stories_path(corpus_path));
        let corpus = load_corpus(corpus_path, stories.as_deref())?;
        let systems: Option<BTreeSet<String>> = if s.candidates.is_empty() {
            None
        } else {
            Some(load_candidate_sets(&s.candidates, &corpus)?.into_iter().map(|c| c.system_id).collect())
        };
        let qids: Option<BTreeSet<String>> = match &s.questions {
            Some(p) => Some(load_questions(p)?.1.into_iter().map(|q| q.question_id).collect()),
            None => None,
        };
        check_annotations(ann_path, &humans, Some(&corpus), systems.as_ref(), qids.as_ref())?;
    }

    let mut models: Vec<AnnotationRecord> = Vec::new();
    for p in &s.model_scores {
        models.extend(load_model_scores(p)?);
    }

    let mut inputs: Vec<(String, Option<PathBuf>)> = vec![("annotations".into(), Some(ann_path.to_path_buf()))];
    for (i, p) in s.model_scores.iter().enumerate() {
        inputs.push((format!("model_scores{i}"), Some(p.clone())));
    }
    let refs: Vec<(&str, Option<&Path>)> = inputs.iter().map(|(n, p)| (n.as_str(), p.as_deref())).collect();
    let fp = fingerprint("agreement", json!({ "alpha_level": level, "tau_variant": "b" }), &refs)?;

    let mut channels = Vec::new();
    for channel in Channel::ALL {
        let h: Vec<&AnnotationRecord> = humans.iter().map(|(_, r)| r).filter(|r| r.channel == channel).collect();
        if h.is_empty() {
            continue;
        }
        let m: Vec<&AnnotationRecord> = models.iter().filter(|r| r.channel == channel).collect();
        channels.push(channel_agreement(channel, &h, &m, level)?);
    }
    if channels.is_empty() {
        return Err(CliError::Config(format!("{}: no annotations", ann_path.display())));
    }

    let mut summary = format!("# config_fingerprint={fp}\nchannel,comparison,tau,rho,mse,alpha,n_items,n_raters\n");
    let mut classes = format!("# config_fingerprint={fp}\nchannel,comparison,label,precision,recall,f1,support\n");
    for c in &channels {
        let k = &c.correlations;
        writeln!(
            summary,
            "{},human,{},{},{},{},{},{}",
            c.channel,
            fmt_opt(k.tau.mean),
            fmt_opt(k.rho.mean),
            fmt_opt(k.mse.mean),
            fmt_opt(c.alpha),
            c.n_items,
            c.n_raters
        )
        .unwrap();
        let mut class_rows = |comparison: &str, r: &AveragedReport<i64>| {
            for l in &r.labels {
                writeln!(
                    classes,
                    "{},{comparison},{},{:.6},{:.6},{:.6},{:.2}",
                    c.channel, l.label, l.precision, l.recall, l.f1, l.support
                )
                .unwrap();
            }
            writeln!(classes, "{},{comparison},accuracy,,,{:.6},", c.channel, r.accuracy).unwrap();
        };
        class_rows("human", &c.human_f1);
        for m in &c.models {
            let k = &m.correlations;
            let name = format!("human-vs-{}", m.model_id);
            writeln!(
                summary,
                "{},{name},{},{},{},,{},{}",
                c.channel,
                fmt_opt(k.tau.mean),
                fmt_opt(k.rho.mean),
                fmt_opt(k.mse.mean),
                c.n_items,
                c.n_raters
            )
            .unwrap();
            class_rows(&name, &m.classification);
            let (lo, hi) = c.channel.score_range();
            let mut conf = format!("# config_fingerprint={fp}\ngold\\pred");
            for l in lo..=hi {
                write!(conf, ",{l}").unwrap();
            }
            conf.push('\n');
            for (g, row) in m.confusion.iter().enumerate() {
                write!(conf, "{}", lo + g as i64).unwrap();
                for v in row {
                    write!(conf, ",{v}").unwrap();
                }
                conf.push('\n');
            }
            let safe: String = m
                .model_id
                .chars()
                .map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' || ch == '.' { ch } else { '_' })
                .collect();
            write_atomic(&s.output(&format!("confusion_{}_{safe}.csv", c.channel)), conf.as_bytes())?;
        }
    }
    write_atomic(&s.output("agreement.csv"), summary.as_bytes())?;
    write_atomic(&s.output("classification.csv"), classes.as_bytes())?;
    write_bundle(
        &s.output("agreement.json"),
        header(s, "agreement", &fp, Value::Null),
        json!({
            "config": s.recorded(),
            "settings": { "tau_variant": "b", "alpha_level": level },
            "channels": channels,
        }),
    )
}
