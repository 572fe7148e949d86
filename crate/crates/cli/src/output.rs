use std::io::Write;
use std::path::Path;

use anyhow::Context;
use coarse_core::verdict::Status;
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "coarse";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Document {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub command: String,
    pub group: String,
    pub status: Status,
    pub result: Value,
}

/// Exit codes: verified or evidence found, refuted, budget exhausted.
pub fn exit_code(s: Status) -> u8 {
    match s {
        Status::Verified | Status::ConsistentUpTo => 0,
        Status::RefutedUpTo => 1,
        Status::NoWitnessWithinBudget => 2,
    }
}

/// Least favourable status of several checks.
pub fn worst(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses
        .into_iter()
        .max_by_key(|s| match s {
            Status::Verified => 0,
            Status::ConsistentUpTo => 1,
            Status::NoWitnessWithinBudget => 2,
            Status::RefutedUpTo => 3,
        })
        .unwrap_or(Status::Verified)
}

pub fn render_json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn render_text(doc: &Document) -> String {
    let mut out = format!(
        "{} {} [{}]\nstatus: {:?}\n",
        doc.command, doc.group, doc.version, doc.status
    );
    if let Value::Object(m) = &doc.result {
        for (k, v) in m {
            out.push_str(&format!("{k}: {v}\n"));
        }
    } else {
        out.push_str(&format!("result: {}\n", doc.result));
    }
    out
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
