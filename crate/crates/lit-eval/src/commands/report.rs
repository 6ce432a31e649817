use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lit_eval_core::radar::{Radar, RadarSeries};
use lit_eval_core::report::{aggregate_table, AggregateTable, Cell, PercentMapping, RULER_COLUMNS};
use lit_eval_core::ruler::RubricScorecard;
use lit_eval_core::verse::{aggregate_categories, Category, VerseGrade, VerseQuestion};
use serde_json::{json, Value};

use super::{header, write_bundle};
use crate::config::{fingerprint, Settings, DEFAULT_AXIS_MIN};
use crate::data::load_questions;
use crate::error::{CliError, Result};
use crate::io::{read_artifact, read_jsonl, write_atomic, Header};

/// Loads artifacts of one kind and insists they share a fingerprint.
fn load_uniform<T: serde::de::DeserializeOwned>(paths: &[PathBuf], kind: &str) -> Result<(Option<String>, Vec<T>)> {
    let mut fingerprints = BTreeSet::new();
    let mut records = Vec::new();
    for p in paths {
        let (h, mut recs): (Header, Vec<T>) = read_artifact(p, kind)?;
        fingerprints.insert(h.config_fingerprint);
        records.append(&mut recs);
    }
    if fingerprints.len() > 1 {
        return Err(CliError::MixedFingerprints(fingerprints.into_iter().collect()));
    }
    Ok((fingerprints.into_iter().next(), records))
}

/// Existing file written next to an artifact by the same run, e.g.
/// `x_grades.jsonl` -> `x_grade_failures.jsonl`.
fn sibling(path: &Path, suffix: &str, failures: &str) -> Option<PathBuf> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix(suffix)?;
    let p = path.with_file_name(format!("{stem}{failures}"));
    p.exists().then_some(p)
}

fn count_failures(paths: &[PathBuf], suffix: &str, failures: &str, into: &mut BTreeMap<String, usize>) -> Result<()> {
    for p in paths {
        if let Some(f) = sibling(p, suffix, failures) {
            for (_, rec) in read_jsonl::<Value>(&f)?.records {
                if let Some(system) = rec.get("system_id").and_then(Value::as_str) {
                    *into.entry(system.to_string()).or_default() += 1;
                }
            }
        }
    }
    Ok(())
}

fn load_baselines(paths: &[PathBuf], table: &mut AggregateTable) -> Result<Vec<String>> {
    let mut columns: Vec<String> = Vec::new();
    for path in paths {
        let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?;
        let headers = reader.headers().map_err(|e| CliError::Csv(e.to_string()))?.clone();
        let id_col = headers
            .iter()
            .position(|h| h == "system_id" || h == "system")
            .ok_or_else(|| CliError::Csv(format!("{}: no system_id column", path.display())))?;
        for (i, h) in headers.iter().enumerate() {
            if i != id_col && !columns.iter().any(|c| c == h) {
                columns.push(h.to_string());
            }
        }
        for rec in reader.records() {
            let rec = rec.map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?;
            let Some(row) = table.rows.iter_mut().find(|r| r.system_id == rec[id_col]) else { continue };
            for (i, h) in headers.iter().enumerate() {
                if i == id_col || rec[i].trim().is_empty() {
                    continue;
                }
                let v: f64 = rec[i]
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Csv(format!("{}: {h} is not numeric", path.display())))?;
                row.baselines.insert(h.to_string(), v);
            }
        }
    }
    Ok(columns)
}

fn pct(c: &Cell) -> String {
    c.percent.map(|p| format!("{p:.2}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table_csv(table: &AggregateTable, baselines: &[String], fp: &str) -> String {
    let mut out = format!("# config_fingerprint={fp}\nsystem_id");
    for c in RULER_COLUMNS {
        write!(out, ",{0},{0}_n", c.key()).unwrap();
    }
    for c in Category::ALL {
        write!(out, ",{},{}", csv_field(c.label()), csv_field(&format!("{}_n", c.label()))).unwrap();
    }
    out.push_str(",verse_mean,verse_mean_n,failures");
    for b in baselines {
        write!(out, ",{}", csv_field(b)).unwrap();
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_field(&row.system_id));
        for c in RULER_COLUMNS {
            let cell = row.criterion(c);
            write!(out, ",{},{}", pct(&cell), cell.n).unwrap();
        }
        for cell in &row.verse_categories {
            write!(out, ",{},{}", pct(cell), cell.n).unwrap();
        }
        write!(out, ",{},{}", pct(&row.verse_mean), row.verse_mean.n).unwrap();
        write!(out, ",{}", table.failures.get(&row.system_id).copied().unwrap_or(0)).unwrap();
        for b in baselines {
            out.push(',');
            if let Some(v) = row.baselines.get(b) {
                write!(out, "{v}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn run(s: &Settings) -> Result<()> {
    let mapping = s.percent_mapping.unwrap_or(PercentMapping::MinMax);
    let axis_min = s.axis_min.unwrap_or(DEFAULT_AXIS_MIN);
    let (cards_fp, cards): (_, Vec<RubricScorecard>) = load_uniform(&s.scorecards, "scorecards")?;
    let (grades_fp, grades): (_, Vec<VerseGrade>) = load_uniform(&s.grades, "grades")?;
    // classified questions default to the file written beside the first grades file
    let questions_path = s
        .questions
        .clone()
        .or_else(|| s.grades.first().and_then(|g| sibling(g, "_grades.jsonl", "_questions_classified.jsonl")));
    let questions: Vec<VerseQuestion> = match (&questions_path, grades.is_empty()) {
        (Some(p), _) => load_questions(p)?.1,
        (None, true) => Vec::new(),
        (None, false) => return Err(CliError::Config("--questions is required to report grades".into())),
    };

    let mut table = aggregate_table(&cards, &grades, &questions, mapping)?;
    count_failures(&s.scorecards, "_scorecards.jsonl", "_ruler_failures.jsonl", &mut table.failures)?;
    count_failures(&s.grades, "_grades.jsonl", "_grade_failures.jsonl", &mut table.failures)?;
    let baseline_cols = load_baselines(&s.baseline, &mut table)?;

    let mut inputs: Vec<(&str, Option<&Path>)> = vec![("questions", questions_path.as_deref())];
    let names: Vec<String> = (0..s.baseline.len()).map(|i| format!("baseline{i}")).collect();
    for (n, p) in names.iter().zip(&s.baseline) {
        inputs.push((n, Some(p)));
    }
    let fp = fingerprint(
        "report",
        json!({ "mapping": mapping, "axis_min": axis_min, "scorecards": cards_fp, "grades": grades_fp }),
        &inputs,
    )?;

    let categories = aggregate_categories(&questions, &grades, mapping)?;
    let mut shares = format!("# config_fingerprint={fp}\ncategory,questions,share_percent,grades,mean_percent\n");
    for a in &categories {
        let mean = a.mean_score_percent.map(|m| format!("{m:.2}")).unwrap_or_default();
        writeln!(shares, "{},{},{:.2},{},{mean}", csv_field(a.category.label()), a.n, a.question_share, a.n_grades)
            .unwrap();
    }

    let comment = format!("config_fingerprint={fp}");
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();
    let mut charts: Vec<(&str, String)> = Vec::new();

    let verse_axes: Vec<&str> = Category::ALL.iter().map(|c| c.short_label()).collect();
    let ruler_axes: Vec<&str> = RULER_COLUMNS.iter().map(|c| c.key()).collect();
    for (name, axes) in [("radar_verse.svg", &verse_axes), ("radar_ruler.svg", &ruler_axes)] {
        let mut series = Vec::new();
        for row in &table.rows {
            let cells: Vec<Cell> = if axes.len() == RULER_COLUMNS.len() {
                RULER_COLUMNS.iter().map(|&c| row.criterion(c)).collect()
            } else {
                row.verse_categories.clone()
            };
            match cells.iter().map(|c| c.percent).collect::<Option<Vec<f64>>>() {
                Some(values) => series.push(RadarSeries { name: row.system_id.clone(), values }),
                None => skipped.push(json!({ "chart": name, "system_id": row.system_id })),
            }
        }
        if series.is_empty() {
            continue;
        }
        let chart = Radar::new(axes, axis_min).comment(&comment).render(&series)?;
        for w in &chart.warnings {
            eprintln!("{}", json!({ "warning": "clamped", "chart": name, "detail": w }));
        }
        warnings.extend(chart.warnings.into_iter().map(|w| json!({ "chart": name, "detail": w })));
        charts.push((name, chart.svg));
    }

    write_atomic(&s.output("table.csv"), table_csv(&table, &baseline_cols, &fp).as_bytes())?;
    write_atomic(&s.output("verse_categories.csv"), shares.as_bytes())?;
    for (name, svg) in &charts {
        write_atomic(&s.output(name), svg.as_bytes())?;
    }
    write_bundle(
        &s.output("report.json"),
        header(s, "report", &fp, Value::Null),
        json!({
            "config": s.recorded(),
            "inputs": { "scorecards_fingerprint": cards_fp, "grades_fingerprint": grades_fp },
            "table": table,
            "categories": categories,
            "radar_warnings": warnings,
            "radar_skipped": skipped,
        }),
    )
}
