//! Space file formats.
//!
//! Text: `points N` on the first record, then one `line i j k ...` record
//! per nontrivial line; `#` starts a comment. JSON: `{"points": N,
//! "lines": [[...], ...]}`. DOT output renders the point-line incidence
//! graph.

use std::fmt::Write as _;

use linspace::space::NormalizationNote;
use linspace::{validate, LinearSpace, ValidationError};
use serde::Serialize;
use thiserror::Error;

/// Version tag carried by every JSON report.
pub const REPORT_SCHEMA: &str = "linspace-report/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid space")]
    Invalid(#[from] ValidationError),
    #[error("invalid JSON")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct JsonSpace {
    points: usize,
    lines: Vec<Vec<usize>>,
}

/// Parses either format, detected by the first non-blank character.
pub fn parse_space(input: &str) -> Result<(LinearSpace, Vec<NormalizationNote>), FormatError> {
    if input.trim_start().starts_with('{') {
        let raw: JsonSpace = serde_json::from_str(input)?;
        let v = validate(raw.points, &raw.lines)?;
        return Ok((v.space, v.notes));
    }
    let mut points = None;
    let mut lines = Vec::new();
    for (i, record) in input.lines().enumerate() {
        let record = record.split('#').next().unwrap_or("").trim();
        if record.is_empty() {
            continue;
        }
        let syntax = |message: String| FormatError::Syntax {
            line: i + 1,
            message,
        };
        let mut words = record.split_whitespace();
        let head = words.next().unwrap_or_default();
        let nums: Vec<usize> = words
            .map(|w| {
                w.parse()
                    .map_err(|_| syntax(format!("not a point index: {w:?}")))
            })
            .collect::<Result<_, _>>()?;
        match (head, points) {
            ("points", None) if nums.len() == 1 => points = Some(nums[0]),
            ("points", None) => return Err(syntax("expected `points N`".into())),
            ("points", Some(_)) => return Err(syntax("repeated header".into())),
            ("line", Some(_)) => lines.push(nums),
            ("line", None) => return Err(syntax("`line` before `points` header".into())),
            (other, _) => return Err(syntax(format!("unknown record {other:?}"))),
        }
    }
    let n = points.ok_or(FormatError::Syntax {
        line: 1,
        message: "missing `points N` header".into(),
    })?;
    let v = validate(n, &lines)?;
    Ok((v.space, v.notes))
}

pub fn to_text(s: &LinearSpace) -> String {
    let mut out = format!("points {}\n", s.n_points());
    for l in s.lines() {
        out.push_str("line");
        for p in l {
            let _ = write!(out, " {p}");
        }
        out.push('\n');
    }
    out
}

pub fn to_json(s: &LinearSpace) -> String {
    serde_json::to_string(&JsonSpace {
        points: s.n_points(),
        lines: s.lines().to_vec(),
    })
    .expect("plain data serializes")
}

/// Bipartite incidence graph over all lines, trivial ones included.
pub fn to_dot(s: &LinearSpace) -> String {
    let mut out = String::from("graph incidence {\n");
    for p in 0..s.n_points() {
        let _ = writeln!(out, "  p{p} [shape=circle, label=\"{p}\"];");
    }
    for (i, l) in s.all_lines().iter().enumerate() {
        let label: Vec<String> = l.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "  l{i} [shape=square, label=\"{}\"];", label.join(" "));
        for p in l {
            let _ = writeln!(out, "  p{p} -- l{i};");
        }
    }
    out.push_str("}\n");
    out
}

pub fn render(s: &LinearSpace, f: Format) -> String {
    match f {
        Format::Text => to_text(s),
        Format::Json => to_json(s) + "\n",
        Format::Dot => to_dot(s),
    }
}

/// Wraps a command result in the versioned report envelope.
pub fn report<T: Serialize>(command: &str, result: &T) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "schema": REPORT_SCHEMA,
        "command": command,
        "result": result,
    }))
    .expect("reports serialize")
        + "\n"
}
