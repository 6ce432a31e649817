//! Acceptance criteria AC1-AC9, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero when any gating criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use common::{constant_score_script, fixture, full_pipeline, lit_eval, outputs, read_csv, read_records};
use lit_eval_core::corpus::{Corpus, ParagraphPair, StoryMeta};
use lit_eval_core::metrics::{kendall_tau_b, krippendorff_alpha, per_label_prf, spearman_rho, AlphaLevel};
use lit_eval_core::report::{to_percentage, PercentMapping, ScoreScale};
use lit_eval_core::sample::{sample_items, SampleRequest};
use lit_eval_core::verse::Category;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

const AC1_TOL: f64 = 1e-9;
const AC1_MAX_LEN: usize = 5;
const AC1_BUDGET: Duration = Duration::from_secs(60);
const AC2_TOL: f64 = 1e-9;
const AC3_TOL: f64 = 1e-4;
const AC3_RANDOM_FIXTURES: u32 = 100;
const AC6_TOL: f64 = 0.005;
const AC7_SHARE_TOL: f64 = 0.01;
const AC8_STORIES: usize = 10;
const AC8_N_PER_STORY: usize = 20;
const AC8_Q_PER_ITEM: usize = 3;
const AC8_ITEMS: usize = 200;
const AC8_QUESTIONS: usize = 600;
const AC9_TOL: f64 = 0.02;
const AC9_ENV: &str = "LIT_EVAL_PUBLIC_ANNOTATIONS";

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        (None, None) => true,
        _ => false,
    }
}

// ---- AC1 ----

fn tau_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut conc, mut disc, mut tied_x, mut tied_y) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].partial_cmp(&x[j]).unwrap();
            let dy = y[i].partial_cmp(&y[j]).unwrap();
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {}
                (Equal, _) => tied_x += 1.0,
                (_, Equal) => tied_y += 1.0,
                _ if dx == dy => conc += 1.0,
                _ => disc += 1.0,
            }
        }
    }
    // pairs untied in x, times pairs untied in y
    let den = ((conc + disc + tied_y) * (conc + disc + tied_x)).sqrt();
    (den > 0.0).then(|| (conc - disc) / den)
}

fn midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let tied = v.iter().filter(|b| *b == a).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

fn rho_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let (rx, ry) = (midranks(x), midranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn vectors_of_len(n: usize) -> Vec<Vec<f64>> {
    let mut all = vec![Vec::new()];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v: Vec<f64>| (1..=3).map(move |x| [v.clone(), vec![x as f64]].concat()))
            .collect();
    }
    all
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0usize;
    for n in 2..=AC1_MAX_LEN {
        let vs = vectors_of_len(n);
        for x in &vs {
            for y in &vs {
                pairs += 1;
                let tau = kendall_tau_b(x, y).map_err(|e| e.to_string())?;
                ensure(close(tau, tau_oracle(x, y), AC1_TOL), || format!("tau {x:?} {y:?}: {tau:?}"))?;
                let rho = spearman_rho(x, y).map_err(|e| e.to_string())?;
                ensure(close(rho, rho_oracle(x, y), AC1_TOL), || format!("rho {x:?} {y:?}: {rho:?}"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < AC1_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{pairs} vector pairs, {:.2}s", elapsed.as_secs_f64()))
}

// ---- AC2 ----

/// Nominal alpha from an explicit value-by-value coincidence matrix.
fn coincidence_oracle(m: &[Vec<Option<f64>>]) -> Option<f64> {
    let values: Vec<i64> =
        m.iter().flatten().flatten().map(|v| *v as i64).collect::<BTreeSet<_>>().into_iter().collect();
    let pos = |v: f64| values.iter().position(|&x| x == v as i64).unwrap();
    let k = values.len();
    let mut o = vec![vec![0f64; k]; k];
    for unit in 0..m[0].len() {
        let vals: Vec<f64> = m.iter().filter_map(|r| r[unit]).collect();
        let mu = vals.len() as f64;
        if mu < 2.0 {
            continue;
        }
        for (i, a) in vals.iter().enumerate() {
            for (j, b) in vals.iter().enumerate() {
                if i != j {
                    o[pos(*a)][pos(*b)] += 1.0 / (mu - 1.0);
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let disagree_o: f64 =
        (0..k).flat_map(|c| (0..k).map(move |j| (c, j))).filter(|(c, j)| c != j).map(|(c, j)| o[c][j]).sum();
    let disagree_e: f64 = (0..k)
        .flat_map(|c| (0..k).map(move |j| (c, j)))
        .filter(|(c, j)| c != j)
        .map(|(c, j)| n_c[c] * n_c[j])
        .sum::<f64>()
        / (n - 1.0);
    (disagree_e > 0.0).then(|| 1.0 - disagree_o / disagree_e)
}

fn alpha_fixture() -> BTreeMap<String, Vec<Vec<Option<f64>>>> {
    let text = std::fs::read_to_string(fixture("alpha_two_raters.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn ac2() -> Outcome {
    let perfect = vec![vec![Some(1.0), Some(2.0), Some(3.0), Some(5.0)]; 3];
    for level in [AlphaLevel::Nominal, AlphaLevel::Ordinal, AlphaLevel::Interval] {
        let a = krippendorff_alpha(&perfect, level).map_err(|e| e.to_string())?;
        ensure(a == Some(1.0), || format!("perfect agreement {level:?} gave {a:?}"))?;
    }
    let fx = alpha_fixture();
    let complete = &fx["complete"];
    ensure(complete.len() == 2 && complete[0].len() == 9, || "fixture is not 2 raters x 9 items".into())?;
    let got = krippendorff_alpha(complete, AlphaLevel::Nominal).map_err(|e| e.to_string())?;
    let oracle = coincidence_oracle(complete);
    ensure(close(got, oracle, AC2_TOL), || format!("complete: {got:?} vs oracle {oracle:?}"))?;
    // frozen from an independent implementation: 83/117 and 43/69
    ensure(close(got, Some(83.0 / 117.0), AC2_TOL), || format!("complete: {got:?}"))?;
    let missing = &fx["missing"];
    ensure(missing[1].iter().any(Option::is_none), || "missing fixture has no gaps".into())?;
    let got_m = krippendorff_alpha(missing, AlphaLevel::Nominal).map_err(|e| e.to_string())?;
    let oracle_m = coincidence_oracle(missing);
    ensure(close(got_m, oracle_m, AC2_TOL), || format!("missing: {got_m:?} vs oracle {oracle_m:?}"))?;
    ensure(close(got_m, Some(43.0 / 69.0), AC2_TOL), || format!("missing: {got_m:?}"))?;
    Ok(format!("complete {:.6}, with gaps {:.6}", got.unwrap(), got_m.unwrap()))
}

// ---- AC3 ----

fn ac3() -> Outcome {
    let r = per_label_prf(&[1, 1, 2], &[1, 2, 2], &[1, 2]).map_err(|e| e.to_string())?;
    let want = [(1.0, 0.5, 0.6667), (0.5, 1.0, 0.6667)];
    for (m, (p, rc, f)) in r.labels.iter().zip(want) {
        ensure(
            (m.precision - p).abs() < AC3_TOL && (m.recall - rc).abs() < AC3_TOL && (m.f1 - f).abs() < AC3_TOL,
            || format!("label {}: {} {} {}", m.label, m.precision, m.recall, m.f1),
        )?;
    }
    ensure((r.accuracy - 0.6667).abs() < AC3_TOL, || format!("accuracy {}", r.accuracy))?;

    let mut runner =
        TestRunner::new(Config { cases: AC3_RANDOM_FIXTURES, failure_persistence: None, ..Config::default() });
    let strategy =
        (1usize..60).prop_flat_map(|n| (prop::collection::vec(1i64..=5, n), prop::collection::vec(1i64..=5, n)));
    runner
        .run(&strategy, |(gold, pred)| {
            let labels = [1i64, 2, 3, 4, 5];
            let r = per_label_prf(&gold, &pred, &labels).unwrap();
            for (i, l) in labels.iter().enumerate() {
                let row: usize = r.confusion[i].iter().sum();
                let col: usize = r.confusion.iter().map(|row| row[i]).sum();
                prop_assert_eq!(row, gold.iter().filter(|g| *g == l).count());
                prop_assert_eq!(col, pred.iter().filter(|p| *p == l).count());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("hand-counted fixture matches; marginals hold on {AC3_RANDOM_FIXTURES} random fixtures"))
}

// ---- AC4 ----

fn ac4() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let script = fixture("mock_script.json");
    let first = full_pipeline(&out, &script, 4);
    for r in &first {
        ensure(r.ok(), || format!("first run failed: {}", r.stderr))?;
    }
    let (calls_1, _) = first.iter().fold((0, 0), |a, r| (a.0 + r.judge_stats().0, a.1 + r.judge_stats().1));
    let snapshot = outputs(&out);
    let second = full_pipeline(&out, &script, 2);
    for r in &second {
        ensure(r.ok(), || format!("second run failed: {}", r.stderr))?;
    }
    let (calls_2, hits_2) = second.iter().fold((0, 0), |a, r| (a.0 + r.judge_stats().0, a.1 + r.judge_stats().1));
    let again = outputs(&out);
    ensure(snapshot.len() == again.len(), || "different output file sets".into())?;
    for ((name, a), (_, b)) in snapshot.iter().zip(&again) {
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    ensure(calls_1 > 0, || "first run made no backend calls".into())?;
    ensure(calls_2 == 0, || format!("second run made {calls_2} backend calls"))?;
    Ok(format!(
        "{} files byte-identical; first run {calls_1} calls, second run 0 calls / {hits_2} cache hits (100%)",
        snapshot.len()
    ))
}

// ---- AC5 ----

fn narrative_keys() -> BTreeSet<(String, u64)> {
    read_records(&fixture("corpus.jsonl"))
        .into_iter()
        .filter(|p| p["has_dialogue"] == Value::Bool(false))
        .map(|p| (p["story_id"].as_str().unwrap().to_string(), p["index"].as_u64().unwrap()))
        .collect()
}

fn run_ruler(out: &Path, script: &Path) -> Result<(), String> {
    let r = lit_eval(&[
        "ruler".as_ref(),
        "--corpus".as_ref(),
        fixture("corpus.jsonl").as_os_str(),
        "--candidates".as_ref(),
        fixture("candidates_a.jsonl").as_os_str(),
        "--candidates".as_ref(),
        fixture("candidates_b.jsonl").as_os_str(),
        "--mock-script".as_ref(),
        script.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    ensure(r.ok(), || format!("ruler failed: {}", r.stderr))
}

fn ac5() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let narrative = narrative_keys();
    let good = dir.path().join("good");
    run_ruler(&good, &fixture("mock_script.json"))?;
    let cards = read_records(&good.join("run_scorecards.jsonl"));
    let mut checked = 0;
    for c in &cards {
        let key = (c["story_id"].as_str().unwrap().to_string(), c["index"].as_u64().unwrap());
        if narrative.contains(&key) {
            checked += 1;
            ensure(c["scores"]["honorifics"] == 5, || format!("{key:?} scored {}", c["scores"]["honorifics"]))?;
        }
    }
    ensure(checked > 0, || "no narrative paragraphs scored".into())?;
    let audit: Value =
        serde_json::from_str(&std::fs::read_to_string(good.join("run_honorifics_audit.json")).unwrap()).unwrap();
    ensure(audit["flagged"].as_array().is_some_and(Vec::is_empty), || format!("compliant run flagged: {audit}"))?;

    // one narrative paragraph answered against the rule
    let mut script: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("mock_script.json")).unwrap()).unwrap();
    let rogue = serde_json::json!({
        "name": "non-compliant",
        "user_contains": ["Honorifics in Dialogue", "By midnight the water"],
        "respond": "Score: 2"
    });
    script["rules"].as_array_mut().unwrap().insert(0, rogue);
    let rogue_path = dir.path().join("rogue.json");
    std::fs::write(&rogue_path, script.to_string()).unwrap();
    let bad = dir.path().join("bad");
    run_ruler(&bad, &rogue_path)?;
    let audit: Value =
        serde_json::from_str(&std::fs::read_to_string(bad.join("run_honorifics_audit.json")).unwrap()).unwrap();
    let flagged = audit["flagged"].as_array().cloned().unwrap_or_default();
    ensure(flagged.len() == 2, || format!("expected one flag per system, got {flagged:?}"))?;
    ensure(flagged.iter().all(|f| f["story_id"] == "river" && f["index"] == 3 && f["honorifics"] == 2), || {
        format!("wrong item flagged: {flagged:?}")
    })?;
    Ok(format!("{checked} narrative scorecards at 5; audit flags river#3 for both systems"))
}

// ---- AC6 ----

fn ac6() -> Outcome {
    for scale in [ScoreScale::RULER, ScoreScale::VERSE] {
        for s in scale.min..=scale.max {
            let want = 100.0 * (s - scale.min) as f64 / (scale.max - scale.min) as f64;
            let got = to_percentage(s, scale, PercentMapping::MinMax).map_err(|e| e.to_string())?;
            ensure((got - want).abs() < 1e-12, || format!("{s} on {scale:?}: {got}"))?;
            for t in scale.min..=scale.max {
                let mean_then_map = to_percentage(s, scale, PercentMapping::MinMax).unwrap() / 2.0
                    + to_percentage(t, scale, PercentMapping::MinMax).unwrap() / 2.0;
                let lo = scale.min as f64;
                let map_of_mean = 100.0 * ((s + t) as f64 / 2.0 - lo) / (scale.max as f64 - lo);
                ensure((mean_then_map - map_of_mean).abs() < 1e-9, || format!("linearity at {s},{t}"))?;
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (reply, want) in [("Score: 5", 100.0), ("Score: 1", 0.0)] {
        let script = constant_score_script(dir.path(), "c.json", reply);
        let out = dir.path().join(reply.replace([':', ' '], ""));
        run_ruler(&out, &script)?;
        let r = lit_eval(&[
            "report".as_ref(),
            "--scorecards".as_ref(),
            out.join("run_scorecards.jsonl").as_os_str(),
            "--out".as_ref(),
            out.as_os_str(),
        ]);
        ensure(r.ok(), || format!("report failed: {}", r.stderr))?;
        for row in read_csv(&out.join("run_table.csv")) {
            for c in ["honorifics", "lexical", "syntax", "content"] {
                let v: f64 = row[c].parse().map_err(|_| format!("{c} cell {:?}", row[c]))?;
                ensure((v - want).abs() < AC6_TOL, || format!("{reply}: {c} = {v}"))?;
            }
        }
    }
    let script = constant_score_script(dir.path(), "three.json", "Score: 3");
    let out = dir.path().join("verse3");
    let runs = full_pipeline(&out, &script, 2);
    for r in &runs {
        ensure(r.ok(), || format!("pipeline failed: {}", r.stderr))?;
    }
    for row in read_csv(&out.join("run_table.csv")) {
        let v: f64 = row["verse_mean"].parse().map_err(|_| format!("verse_mean {:?}", row["verse_mean"]))?;
        ensure((v - 100.0).abs() < AC6_TOL, || format!("verse mean {v}"))?;
    }
    Ok("all-5 -> 100.00%, all-1 -> 0.00%, all-3 grades -> 100.00%; linear on every scale point".into())
}

// ---- AC7 ----

fn ac7() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    for r in full_pipeline(&out, &fixture("mock_script.json"), 3) {
        ensure(r.ok(), || format!("pipeline failed: {}", r.stderr))?;
    }
    let labels: BTreeSet<&str> = Category::ALL.iter().map(|c| c.label()).collect();
    let questions = read_records(&out.join("run_questions_classified.jsonl"));
    ensure(!questions.is_empty(), || "no questions persisted".into())?;
    for q in &questions {
        let cat = q["category"].as_str().unwrap_or("");
        ensure(labels.contains(cat), || format!("question {} has category {cat:?}", q["question_id"]))?;
    }
    let shares: f64 = read_csv(&out.join("run_verse_categories.csv"))
        .iter()
        .map(|r| r["share_percent"].parse::<f64>().unwrap())
        .sum();
    ensure((shares - 100.0).abs() <= AC7_SHARE_TOL, || format!("shares sum to {shares}"))?;
    Ok(format!("{} questions, all labelled; shares sum to {shares:.2}", questions.len()))
}

// ---- AC8 ----

fn ten_story_corpus() -> Corpus {
    let mut pairs = Vec::new();
    let mut metas = Vec::new();
    for s in 0..AC8_STORIES {
        let id = format!("story{s:02}");
        metas.push((
            s + 1,
            StoryMeta { story_id: id.clone(), title: String::new(), author: String::new(), summary: "s".into() },
        ));
        for i in 0..(AC8_N_PER_STORY + 5 + s) as u32 {
            pairs.push((
                pairs.len() + 1,
                ParagraphPair {
                    story_id: id.clone(),
                    index: i,
                    source_text: format!("p{i}"),
                    references: vec![format!("r{i}")],
                    has_dialogue: None,
                },
            ));
        }
    }
    Corpus::from_records(pairs, metas).unwrap()
}

fn ac8() -> Outcome {
    let corpus = ten_story_corpus();
    let request = |seed| SampleRequest {
        story_ids: (0..AC8_STORIES).map(|s| format!("story{s:02}")).collect(),
        n_per_story: AC8_N_PER_STORY,
        q_per_item: AC8_Q_PER_ITEM,
        seed,
        systems: vec![],
    };
    let m = sample_items(&corpus, &request(42), None).map_err(|e| e.to_string())?;
    ensure(m.items.len() == AC8_ITEMS, || format!("{} items", m.items.len()))?;
    ensure(m.question_count() == AC8_QUESTIONS, || format!("{} questions", m.question_count()))?;
    let again = sample_items(&corpus, &request(42), None).map_err(|e| e.to_string())?;
    ensure(m == again, || "same seed gave a different manifest".into())?;
    let other = sample_items(&corpus, &request(43), None).map_err(|e| e.to_string())?;
    ensure(m != other, || "different seeds gave identical manifests".into())?;
    Ok(format!("{} items, {} questions, stable under seed 42", m.items.len(), m.question_count()))
}

// ---- AC9 ----

/// Reference values per channel: tau, rho, mse, alpha.
const AC9_TARGETS: [(&str, [f64; 4]); 5] = [
    ("honorifics", [0.70, 0.74, 0.86, 0.74]),
    ("lexical", [0.73, 0.81, 0.69, 0.80]),
    ("syntax", [0.66, 0.76, 0.86, 0.75]),
    ("content", [0.73, 0.81, 0.75, 0.80]),
    ("verse", [0.65, 0.71, 0.41, 0.70]),
];

fn ac9() -> Option<Outcome> {
    let path = std::env::var_os(AC9_ENV)?;
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Some(Err(e.to_string())),
    };
    let mut misses = Vec::new();
    for level in ["nominal", "ordinal", "interval"] {
        let out = dir.path().join(level);
        let r = lit_eval(&[
            "agree".as_ref(),
            "--annotations".as_ref(),
            path.as_os_str(),
            "--alpha-level".as_ref(),
            level.as_ref(),
            "--out".as_ref(),
            out.as_os_str(),
        ]);
        if !r.ok() {
            return Some(Err(format!("agree failed: {}", r.stderr)));
        }
        let rows = read_csv(&out.join("run_agreement.csv"));
        let mut worst: Vec<String> = Vec::new();
        for (channel, want) in AC9_TARGETS {
            let Some(row) = rows.iter().find(|r| r["channel"] == channel && r["comparison"] == "human") else {
                continue;
            };
            for (col, w) in ["tau", "rho", "mse", "alpha"].iter().zip(want) {
                let got: f64 = row[*col].parse().unwrap_or(f64::NAN);
                if got.is_nan() || (got - w).abs() > AC9_TOL {
                    worst.push(format!("{channel}.{col}={got:.3} (want {w:.2})"));
                }
            }
        }
        if worst.is_empty() {
            return Some(Ok(format!(
                "matched with tau-b, alpha level {level}; bundle {}",
                out.join("run_agreement.json").display()
            )));
        }
        misses.push(format!("{level}: {}", worst.join(", ")));
    }
    Some(Err(misses.join("; ")))
}

fn main() {
    let gating: [(&str, Check); 8] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
    ];
    let mut failed = 0;
    for (name, check) in gating {
        match check() {
            Ok(detail) => println!("{name} PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("{name} FAIL  {why}");
            }
        }
    }
    match ac9() {
        None => println!("AC9 SKIP  optional; set {AC9_ENV} to an annotation file to run"),
        Some(Ok(detail)) => println!("AC9 PASS  {detail}"),
        Some(Err(why)) => println!("AC9 FAIL  (not gating) {why}"),
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
