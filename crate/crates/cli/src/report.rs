//! Run reports: replay metadata plus the command's result.

use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "prefcomm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command and get byte-identical JSON:
/// `prefcomm <argv...>` with the same version reproduces `result`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub seed: u64,
    pub command: String,
    pub result: Value,
}

impl Report {
    pub fn new(argv: Vec<String>, seed: u64, command: &str, result: Value) -> Self {
        Report { tool: TOOL, version: VERSION, argv, seed, command: command.to_string(), result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Header lines for the text rendering.
    pub fn header(&self) -> String {
        format!("# {} {} {}\n# seed {}\n", self.tool, self.version, self.argv.join(" "), self.seed)
    }
}

/// Left-aligned table with a header row.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<w$}", w = width[i])).collect();
        let mut l = parts.join("  ").trim_end().to_string();
        l.push('\n');
        l
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for row in rows {
        out.push_str(&line(row.iter().take(cols).map(String::as_str).collect()));
    }
    out
}
