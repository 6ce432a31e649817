//! Score-to-percentage conversion and the per-system aggregate table.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ruler::{Criterion, RubricScorecard};
use crate::verse::{aggregate_categories, Category, VerseError, VerseGrade, VerseQuestion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreScale {
    pub min: i64,
    pub max: i64,
}

impl ScoreScale {
    pub const RULER: ScoreScale = ScoreScale { min: 1, max: 5 };
    pub const VERSE: ScoreScale = ScoreScale { min: 1, max: 3 };

    pub fn new(min: i64, max: i64) -> Result<Self, ReportError> {
        if max <= min {
            return Err(ReportError::InvalidScale { min, max });
        }
        Ok(Self { min, max })
    }
}

/// How a scale point becomes a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentMapping {
    /// `100 * (s - min) / (max - min)`; both scales span 0..100.
    #[default]
    MinMax,
    /// `100 * s / max`.
    OverMax,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("score {score} outside scale {min}..={max}")]
    ScoreOutsideScale { score: i64, min: i64, max: i64 },
    #[error("invalid scale {min}..={max}")]
    InvalidScale { min: i64, max: i64 },
    #[error("no completed scores to report")]
    EmptyRun,
    #[error(transparent)]
    Verse(#[from] VerseError),
}

pub fn to_percentage(score: i64, scale: ScoreScale, mapping: PercentMapping) -> Result<f64, ReportError> {
    if score < scale.min || score > scale.max {
        return Err(ReportError::ScoreOutsideScale { score, min: scale.min, max: scale.max });
    }
    Ok(match mapping {
        PercentMapping::MinMax => 100.0 * (score - scale.min) as f64 / (scale.max - scale.min) as f64,
        PercentMapping::OverMax => 100.0 * score as f64 / scale.max as f64,
    })
}

/// A percentage with the number of evaluations behind it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub percent: Option<f64>,
    pub n: usize,
}

impl Cell {
    fn from_sum(sum: f64, n: usize) -> Self {
        Self { percent: (n > 0).then(|| sum / n as f64), n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRow {
    pub system_id: String,
    pub honorifics: Cell,
    pub syntax: Cell,
    pub lexical: Cell,
    pub content: Cell,
    /// Mean of the defined category cells.
    pub verse_mean: Cell,
    /// One cell per category, in [`Category::ALL`] order.
    pub verse_categories: Vec<Cell>,
    /// Imported baseline metrics, by column name.
    #[serde(default)]
    pub baselines: BTreeMap<String, f64>,
}

impl SystemRow {
    pub fn criterion(&self, c: Criterion) -> Cell {
        match c {
            Criterion::Honorifics => self.honorifics,
            Criterion::LexicalChoice => self.lexical,
            Criterion::SyntaxGrammar => self.syntax,
            Criterion::ContentAccuracy => self.content,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub mapping: PercentMapping,
    pub rows: Vec<SystemRow>,
    /// Failed evaluations per system, excluded from the cells.
    pub failures: BTreeMap<String, usize>,
}

/// Column order of the rubric block.
pub const RULER_COLUMNS: [Criterion; 4] =
    [Criterion::Honorifics, Criterion::SyntaxGrammar, Criterion::LexicalChoice, Criterion::ContentAccuracy];

/// Builds one row per system (first-appearance order across scorecards then
/// grades).
pub fn aggregate_table(
    scorecards: &[RubricScorecard],
    grades: &[VerseGrade],
    questions: &[VerseQuestion],
    mapping: PercentMapping,
) -> Result<AggregateTable, ReportError> {
    if scorecards.is_empty() && grades.is_empty() {
        return Err(ReportError::EmptyRun);
    }
    let mut systems: Vec<&str> = Vec::new();
    for s in scorecards.iter().map(|c| c.system_id.as_str()).chain(grades.iter().map(|g| g.system_id.as_str())) {
        if !systems.contains(&s) {
            systems.push(s);
        }
    }

    let mut rows = Vec::with_capacity(systems.len());
    for system in systems {
        let mut sums = [0f64; 4];
        let mut n = 0usize;
        for card in scorecards.iter().filter(|c| c.system_id == system) {
            for (i, c) in RULER_COLUMNS.iter().enumerate() {
                sums[i] += to_percentage(*card.scores.get(*c) as i64, ScoreScale::RULER, mapping)?;
            }
            n += 1;
        }
        let own: Vec<VerseGrade> = grades.iter().filter(|g| g.system_id == system).cloned().collect();
        let cats = aggregate_categories(questions, &own, mapping)?;
        let verse_categories: Vec<Cell> =
            cats.iter().map(|a| Cell { percent: a.mean_score_percent, n: a.n_grades }).collect();
        let defined: Vec<f64> = verse_categories.iter().filter_map(|c| c.percent).collect();
        let verse_mean = Cell {
            percent: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
            n: own.len(),
        };
        rows.push(SystemRow {
            system_id: system.to_string(),
            honorifics: Cell::from_sum(sums[0], n),
            syntax: Cell::from_sum(sums[1], n),
            lexical: Cell::from_sum(sums[2], n),
            content: Cell::from_sum(sums[3], n),
            verse_mean,
            verse_categories,
            baselines: BTreeMap::new(),
        });
    }
    Ok(AggregateTable { mapping, rows, failures: BTreeMap::new() })
}

/// Category labels in column order, for headers.
pub fn category_headers() -> Vec<&'static str> {
    Category::ALL.iter().map(|c| c.label()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruler::PerCriterion;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn endpoints_and_midpoint() {
        let m = PercentMapping::MinMax;
        assert_eq!(to_percentage(5, ScoreScale::RULER, m), Ok(100.0));
        assert_eq!(to_percentage(1, ScoreScale::RULER, m), Ok(0.0));
        assert_eq!(to_percentage(2, ScoreScale::VERSE, m), Ok(50.0));
        assert_eq!(to_percentage(3, ScoreScale::RULER, PercentMapping::OverMax), Ok(60.0));
        assert!(matches!(to_percentage(6, ScoreScale::RULER, m), Err(ReportError::ScoreOutsideScale { .. })));
        assert!(ScoreScale::new(3, 3).is_err());
    }

    #[test]
    fn scale_points_are_evenly_spaced() {
        for scale in [ScoreScale::RULER, ScoreScale::VERSE] {
            let pts: Vec<f64> =
                (scale.min..=scale.max).map(|s| to_percentage(s, scale, PercentMapping::MinMax).unwrap()).collect();
            let step = 100.0 / (scale.max - scale.min) as f64;
            for w in pts.windows(2) {
                assert!((w[1] - w[0] - step).abs() < 1e-12);
            }
        }
    }

    fn card(system: &str, index: u32, s: u8) -> RubricScorecard {
        RubricScorecard {
            system_id: system.into(),
            story_id: "st".into(),
            index,
            scores: PerCriterion { honorifics: s, lexical: s, syntax: s, content: s },
            rationales: None,
            raw_responses: PerCriterion::default(),
            options_fingerprint: String::new(),
            model_id: String::new(),
        }
    }

    fn grade(system: &str, q: &str, score: u8) -> VerseGrade {
        VerseGrade {
            question_id: q.into(),
            system_id: system.into(),
            score,
            rationale: None,
            raw_response: String::new(),
            model_id: String::new(),
            options_fingerprint: String::new(),
        }
    }

    fn questions() -> Vec<VerseQuestion> {
        Category::ALL
            .iter()
            .enumerate()
            .map(|(i, &c)| VerseQuestion {
                question_id: format!("q{i}"),
                story_id: "st".into(),
                index: 0,
                text: "?".into(),
                category: Some(c),
            })
            .collect()
    }

    #[test]
    fn two_systems_at_the_endpoints() {
        let cards = vec![card("good", 0, 5), card("good", 1, 5), card("bad", 0, 1)];
        let mut grades = Vec::new();
        for i in 0..9 {
            grades.push(grade("good", &format!("q{i}"), 3));
            grades.push(grade("bad", &format!("q{i}"), 1));
        }
        let table = aggregate_table(&cards, &grades, &questions(), PercentMapping::MinMax).unwrap();
        let good = &table.rows[0];
        assert_eq!(good.system_id, "good");
        for c in RULER_COLUMNS {
            assert_eq!(good.criterion(c), Cell { percent: Some(100.0), n: 2 });
        }
        assert_eq!(good.verse_mean.percent, Some(100.0));
        assert_eq!(good.verse_mean.n, 9);
        let bad = &table.rows[1];
        for c in RULER_COLUMNS {
            assert_eq!(bad.criterion(c).percent, Some(0.0));
        }
        assert_eq!(bad.verse_mean.percent, Some(0.0));
    }

    #[test]
    fn verse_mean_averages_category_cells() {
        // category 0 has two grades (3, 3), category 1 one grade (1)
        let mut qs = questions();
        qs.push(VerseQuestion { question_id: "extra".into(), category: Some(Category::ALL[0]), ..qs[0].clone() });
        let grades = vec![grade("A", "q0", 3), grade("A", "extra", 3), grade("A", "q1", 1)];
        let table = aggregate_table(&[], &grades, &qs, PercentMapping::MinMax).unwrap();
        assert_eq!(table.rows[0].verse_mean.percent, Some(50.0));
        assert_eq!(table.rows[0].verse_categories[0], Cell { percent: Some(100.0), n: 2 });
        assert_eq!(table.rows[0].verse_categories[2], Cell { percent: None, n: 0 });
        assert_eq!(table.rows[0].honorifics, Cell { percent: None, n: 0 });
    }

    #[test]
    fn empty_run_is_an_error() {
        assert_eq!(aggregate_table(&[], &[], &[], PercentMapping::MinMax), Err(ReportError::EmptyRun));
    }
}
