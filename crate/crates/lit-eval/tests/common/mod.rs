#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn ok(&self) -> bool {
        self.code == 0
    }

    /// `(backend_calls, cache_hits)` summed over every stats line on stderr.
    pub fn judge_stats(&self) -> (u64, u64) {
        let mut totals = (0, 0);
        for line in self.stderr.lines() {
            if let Ok(v) = serde_json::from_str::<Value>(line) {
                if let Some(s) = v.get("judge_stats") {
                    totals.0 += s["backend_calls"].as_u64().unwrap_or(0);
                    totals.1 += s["cache_hits"].as_u64().unwrap_or(0);
                }
            }
        }
        totals
    }

    pub fn error_kind(&self) -> Option<String> {
        self.stderr
            .lines()
            .rev()
            .find_map(|l| serde_json::from_str::<Value>(l).ok()?.get("error")?.get("kind")?.as_str().map(String::from))
    }
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn lit_eval<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lit-eval")).args(args).output().expect("spawn lit-eval");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// ruler, verse gen/classify/grade and report over the two-story fixture.
pub fn full_pipeline(out: &Path, script: &Path, jobs: usize) -> Vec<Run> {
    let corpus = s(&fixture("corpus.jsonl"));
    let a = s(&fixture("candidates_a.jsonl"));
    let b = s(&fixture("candidates_b.jsonl"));
    let script = s(script);
    let out_s = s(out);
    let jobs = jobs.to_string();
    let common = ["--corpus", &corpus, "--mock-script", &script, "--out", &out_s, "--jobs", &jobs];
    let with = |head: &[&str], extra: &[&str]| -> Vec<String> {
        head.iter().chain(common.iter()).chain(extra.iter()).map(|x| x.to_string()).collect()
    };
    let mut runs = Vec::new();
    for args in [
        with(&["ruler"], &["--candidates", &a, "--candidates", &b]),
        with(&["verse", "gen"], &[]),
        with(&["verse", "classify"], &[]),
        with(&["verse", "grade"], &["--candidates", &a, "--candidates", &b]),
    ] {
        let r = lit_eval(&args);
        let failed = !r.ok();
        runs.push(r);
        if failed {
            return runs;
        }
    }
    let cards = s(&out.join("run_scorecards.jsonl"));
    let grades = s(&out.join("run_grades.jsonl"));
    runs.push(lit_eval(&["report", "--scorecards", &cards, "--grades", &grades, "--out", &out_s]));
    runs
}

/// Output files of a run directory, excluding the cache.
pub fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

/// Data rows of a CSV written with a leading fingerprint comment.
pub fn read_csv(path: &Path) -> Vec<std::collections::BTreeMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

/// Records of a JSONL artifact, header line skipped.
pub fn read_records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v.get("header").is_none())
        .collect()
}

/// Base mock script with its scoring rules replaced by a constant reply.
pub fn constant_score_script(dir: &Path, name: &str, reply: &str) -> PathBuf {
    let mut script: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("mock_script.json")).unwrap()).unwrap();
    let rules = script["rules"].as_array_mut().unwrap();
    rules.retain(|r| {
        let n = r["name"].as_str().unwrap_or("");
        n == "generate" || n == "classify" || n == "reclassify"
    });
    script["fallback"] = Value::String(reply.into());
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&script).unwrap()).unwrap();
    path
}
