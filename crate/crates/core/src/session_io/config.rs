//! Plain-text treatment tables.
//!
//! One treatment per line, eleven whitespace-separated numbers:
//!
//! ```text
//! id groups rounds  a11 b11  a12 b12  a21 b21  a22 b22
//! ```
//!
//! `#` starts a comment; blank lines are skipped.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::SessionIoError;
use crate::game_model::{PayoffMatrix, Treatment};

pub fn parse_treatment_config(text: &str) -> Result<Vec<Treatment>, SessionIoError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 11 {
            return Err(SessionIoError::parse(
                line,
                format!(
                    "expected 11 fields (id groups rounds + 8 payoffs), found {}",
                    fields.len()
                ),
            ));
        }
        let int = |k: usize, what: &str| -> Result<u32, SessionIoError> {
            match fields[k].parse::<u32>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(SessionIoError::parse(
                    line,
                    format!("{what} must be a positive integer, got {:?}", fields[k]),
                )),
            }
        };
        let id = int(0, "id")?;
        let groups = int(1, "groups")?;
        let rounds_per_group = int(2, "rounds")?;
        let mut cells = [0.0; 8];
        for (c, field) in cells.iter_mut().zip(&fields[3..]) {
            *c = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SessionIoError::parse(line, format!("bad payoff {field:?}")))?;
        }
        if !seen.insert(id) {
            return Err(SessionIoError::DuplicateId { line, id });
        }
        let payoffs = PayoffMatrix::from_cells(cells).expect("payoffs checked finite");
        out.push(Treatment {
            id,
            payoffs,
            groups,
            rounds_per_group,
        });
    }
    Ok(out)
}

pub fn read_treatment_config(path: impl AsRef<Path>) -> Result<Vec<Treatment>, SessionIoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SessionIoError::io(path, e))?;
    parse_treatment_config(&text)
}

/// Formats treatments in the table layout [`parse_treatment_config`] reads.
pub fn write_treatment_config(treatments: &[Treatment]) -> String {
    let mut s = String::from("# id groups rounds  a11 b11  a12 b12  a21 b21  a22 b22\n");
    for t in treatments {
        let _ = write!(s, "{} {} {}", t.id, t.groups, t.rounds_per_group);
        for c in t.payoffs.cells() {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
    }
    s
}
