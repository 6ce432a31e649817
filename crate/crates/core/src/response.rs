//! Extraction of the `Score: N` line judges are instructed to end with.

use alloc::string::{String, ToString};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreParseError {
    #[error("empty response")]
    Empty,
    #[error("no score line in response")]
    Unparsable,
    #[error("score {0} is out of range")]
    OutOfRange(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedScore {
    pub score: i64,
    /// Text preceding the score line, when reasoning was requested.
    pub rationale: Option<String>,
}

/// Parses the last conforming `Score: N` line of `text` and checks it lies
/// in `lo..=hi`.
///
/// With `reasoning` set, everything above the score line is returned as the
/// rationale. Without it, a response consisting of a bare integer is also
/// accepted.
pub fn parse_score(text: &str, lo: i64, hi: i64, reasoning: bool) -> Result<ParsedScore, ScoreParseError> {
    if text.trim().is_empty() {
        return Err(ScoreParseError::Empty);
    }
    // `lines()` yields subslices of `text`, so pointer distance is the byte offset.
    let found = text
        .lines()
        .rev()
        .find_map(|line| score_line(line).map(|n| (line.as_ptr() as usize - text.as_ptr() as usize, n)));
    let (start, score) = match found {
        Some(hit) => hit,
        None if !reasoning => match bare_integer(text) {
            Some(n) => (0, n),
            None => return Err(ScoreParseError::Unparsable),
        },
        None => return Err(ScoreParseError::Unparsable),
    };
    if score < lo || score > hi {
        return Err(ScoreParseError::OutOfRange(score));
    }
    let rationale = if reasoning {
        let before = text[..start].trim();
        (!before.is_empty()).then(|| before.to_string())
    } else {
        None
    };
    Ok(ParsedScore { score, rationale })
}

/// Recognises `Score: 4`, `**Score:** 4`, `score : 4/5`, `Score：4.`
fn score_line(line: &str) -> Option<i64> {
    let line = strip_decoration(line.trim());
    let head = line.get(..5)?;
    if !head.eq_ignore_ascii_case("score") {
        return None;
    }
    let rest = strip_decoration(line[5..].trim_start());
    let rest = rest.strip_prefix(':').or_else(|| rest.strip_prefix('：'))?;
    let rest = strip_decoration(rest.trim_start());
    let (n, tail) = leading_integer(rest)?;
    let tail = strip_decoration(tail.trim());
    let tail = match tail.strip_prefix('/') {
        Some(t) => {
            let t = t.trim_start();
            let digits = t.bytes().take_while(u8::is_ascii_digit).count();
            if digits == 0 {
                return None;
            }
            &t[digits..]
        }
        None => tail,
    };
    let tail = tail.trim().trim_end_matches(['.', '*', '`']);
    tail.is_empty().then_some(n)
}

fn strip_decoration(s: &str) -> &str {
    s.trim_matches(|c: char| c == '*' || c == '#' || c == '`' || c == '_' || c.is_whitespace())
}

fn leading_integer(s: &str) -> Option<(i64, &str)> {
    let bytes = s.as_bytes();
    let mut end = 0;
    if matches!(bytes.first(), Some(b'-') | Some(b'+')) {
        end = 1;
    }
    let digits_start = end;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end == digits_start || end - digits_start > 9 {
        return None;
    }
    let n = s[..end].parse().ok()?;
    Some((n, &s[end..]))
}

fn bare_integer(text: &str) -> Option<i64> {
    let t = strip_decoration(text.trim()).trim_end_matches('.');
    match leading_integer(t) {
        Some((n, "")) => Some(n),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_score_line() {
        assert_eq!(parse_score("Score: 4", 1, 5, false).unwrap().score, 4);
    }

    #[test]
    fn reasoning_then_score() {
        let parsed = parse_score("The honorifics are consistent...\nScore: 5", 1, 5, true).unwrap();
        assert_eq!(parsed.score, 5);
        assert_eq!(parsed.rationale.as_deref(), Some("The honorifics are consistent..."));
    }

    #[test]
    fn last_conforming_line_wins() {
        let text = "Score: 2 would be harsh.\nScore: 3\nDone.";
        assert_eq!(parse_score(text, 1, 5, true).unwrap().score, 3);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(parse_score("Score: 7", 1, 5, false), Err(ScoreParseError::OutOfRange(7)));
        assert_eq!(parse_score("Score: 0", 1, 3, false), Err(ScoreParseError::OutOfRange(0)));
    }

    #[test]
    fn decorated_variants() {
        for text in ["**Score:** 4", "score : 4/5", "Score：4.", "SCORE: 4", "`Score: 4`"] {
            assert_eq!(parse_score(text, 1, 5, false).unwrap().score, 4, "{text}");
        }
    }

    #[test]
    fn bare_integer_only_without_reasoning() {
        assert_eq!(parse_score("4", 1, 5, false).unwrap().score, 4);
        assert_eq!(parse_score("4", 1, 5, true), Err(ScoreParseError::Unparsable));
    }

    #[test]
    fn unparsable_and_empty() {
        assert_eq!(parse_score("I think it is good", 1, 5, false), Err(ScoreParseError::Unparsable));
        assert_eq!(parse_score("Score: four", 1, 5, false), Err(ScoreParseError::Unparsable));
        assert_eq!(parse_score("  ", 1, 5, false), Err(ScoreParseError::Empty));
    }
}
