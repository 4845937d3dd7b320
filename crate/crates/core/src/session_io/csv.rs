//! Session CSV.
//!
//! ```text
//! # n=4
//! # treatment=3 seed=7 policy=nash
//! round,x1_count,y1_count
//! 1,2,3
//! 2,1,4
//! ```
//!
//! Metadata lines start with `#` and carry whitespace-separated `key=value`
//! pairs; `n` and `treatment` are required, `seed` and `policy` optional,
//! other keys ignored. Rounds are numbered from 1 without gaps.
//!
//! The extended schema replaces the two count columns with one 0/1 column
//! per agent, `round,x_1,..,x_N,y_1,..,y_N` (1 = first strategy); it is
//! collapsed to counts on read, and `n` may then be omitted.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::SessionIoError;
use crate::lattice::SocialState;
use crate::simulator::SessionRecord;

enum Columns {
    Counts { x: usize, y: usize },
    Actions { x: Vec<usize>, y: Vec<usize> },
}

fn parse_header(header: &str) -> Result<(usize, Columns), SessionIoError> {
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| names.iter().position(|n| *n == name);
    let round =
        find("round").ok_or_else(|| SessionIoError::Schema("missing column `round`".into()))?;
    if let (Some(x), Some(y)) = (find("x1_count"), find("y1_count")) {
        return Ok((round, Columns::Counts { x, y }));
    }
    let agents = |prefix: &str| -> Vec<usize> {
        (1..)
            .map_while(|k| find(&format!("{prefix}_{k}")))
            .collect()
    };
    let (x, y) = (agents("x"), agents("y"));
    if !x.is_empty() && x.len() == y.len() {
        return Ok((round, Columns::Actions { x, y }));
    }
    Err(SessionIoError::Schema(
        "expected columns `x1_count,y1_count` or per-agent `x_1..x_N,y_1..y_N`".into(),
    ))
}

/// Parses session CSV text.
pub fn parse_session_csv(text: &str) -> Result<SessionRecord, SessionIoError> {
    let mut n: Option<u32> = None;
    let mut treatment: Option<u32> = None;
    let mut seed: Option<u64> = None;
    let mut policy: Option<String> = None;
    let mut header: Option<(usize, Columns)> = None;
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if let Some(meta) = raw.strip_prefix('#') {
            for pair in meta.split_whitespace() {
                let Some((key, value)) = pair.split_once('=') else {
                    continue;
                };
                let bad = || SessionIoError::parse(line, format!("bad metadata value {pair:?}"));
                match key {
                    "n" => n = Some(value.parse().map_err(|_| bad())?),
                    "treatment" => treatment = Some(value.parse().map_err(|_| bad())?),
                    "seed" => seed = Some(value.parse().map_err(|_| bad())?),
                    "policy" => policy = Some(value.to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header(raw)?);
        } else {
            rows.push((line, raw.split(',').map(str::trim).collect()));
        }
    }

    let (round_col, columns) =
        header.ok_or_else(|| SessionIoError::Schema("missing header line".into()))?;
    let treatment_id = treatment
        .ok_or_else(|| SessionIoError::Schema("missing `# treatment=` metadata".into()))?;
    let n = match (&columns, n) {
        (_, Some(n)) => n,
        (Columns::Actions { x, .. }, None) => x.len() as u32,
        (Columns::Counts { .. }, None) => {
            return Err(SessionIoError::Schema("missing `# n=` metadata".into()))
        }
    };
    if n == 0 {
        return Err(SessionIoError::Schema(
            "population size n must be positive".into(),
        ));
    }
    if let Columns::Actions { x, .. } = &columns {
        if x.len() as u32 != n {
            return Err(SessionIoError::Schema(format!(
                "{} action columns per population but n={n}",
                x.len()
            )));
        }
    }

    let mut states = Vec::with_capacity(rows.len());
    for (expected_round, (line, fields)) in (1u64..).zip(rows) {
        let field = |k: usize| -> Result<u64, SessionIoError> {
            let raw = fields
                .get(k)
                .ok_or_else(|| SessionIoError::parse(line, "too few fields"))?;
            raw.parse::<u64>()
                .map_err(|_| SessionIoError::parse(line, format!("not a count: {raw:?}")))
        };
        let round = field(round_col)?;
        if round != expected_round {
            return Err(SessionIoError::parse(
                line,
                format!("expected round {expected_round}, found {round}"),
            ));
        }
        let (i, j) = match &columns {
            Columns::Counts { x, y } => (field(*x)?, field(*y)?),
            Columns::Actions { x, y } => {
                let sum = |cols: &[usize]| -> Result<u64, SessionIoError> {
                    let mut total = 0;
                    for &c in cols {
                        match field(c)? {
                            v @ (0 | 1) => total += v,
                            v => {
                                return Err(SessionIoError::parse(
                                    line,
                                    format!("action must be 0 or 1, found {v}"),
                                ))
                            }
                        }
                    }
                    Ok(total)
                };
                (sum(x)?, sum(y)?)
            }
        };
        for v in [i, j] {
            if v > n as u64 {
                return Err(SessionIoError::Range { line, value: v, n });
            }
        }
        states.push(SocialState::new(n, i as u32, j as u32).expect("range checked"));
    }
    if states.is_empty() {
        return Err(SessionIoError::Schema("session has no rounds".into()));
    }
    Ok(SessionRecord {
        treatment_id,
        seed,
        n,
        rounds: states,
        policy_id: policy,
    })
}

pub fn read_session_csv(path: impl AsRef<Path>) -> Result<SessionRecord, SessionIoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SessionIoError::io(path, e))?;
    parse_session_csv(&text)
}

/// Canonical CSV text of a record.
///
/// # Panics
///
/// If the record has no rounds or its policy label contains whitespace.
pub fn session_csv_string(record: &SessionRecord) -> String {
    assert!(
        !record.rounds.is_empty(),
        "session records hold at least one round"
    );
    let mut s = String::with_capacity(16 * record.rounds.len() + 64);
    let _ = writeln!(s, "# n={}", record.n);
    let _ = write!(s, "# treatment={}", record.treatment_id);
    if let Some(seed) = record.seed {
        let _ = write!(s, " seed={seed}");
    }
    if let Some(policy) = &record.policy_id {
        assert!(
            !policy.contains(char::is_whitespace),
            "policy labels must not contain whitespace"
        );
        let _ = write!(s, " policy={policy}");
    }
    s.push('\n');
    s.push_str("round,x1_count,y1_count\n");
    for (k, state) in record.rounds.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", k + 1, state.i(), state.j());
    }
    s
}

pub fn write_session_csv(
    record: &SessionRecord,
    path: impl AsRef<Path>,
) -> Result<(), SessionIoError> {
    let path = path.as_ref();
    std::fs::write(path, session_csv_string(record)).map_err(|e| SessionIoError::io(path, e))
}

/// SHA-256 (hex) of the record's canonical CSV text.
pub fn session_digest(record: &SessionRecord) -> String {
    hex::encode(Sha256::digest(session_csv_string(record).as_bytes()))
}
