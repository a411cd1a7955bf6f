use std::fmt::Write as _;

use coaction::estimation::{AssumptionChecklist, AssumptionStatus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

pub mod codes {
    pub const LOW_COUNT: &str = "W001";
    pub const DROPPED_ROWS: &str = "W002";
    pub const BOUNDARY: &str = "W003";
    pub const ODDS_SCALE: &str = "W004";
    pub const UNCHECKED: &str = "W005";
    pub const BOOTSTRAP_FAILURES: &str = "W006";
    pub const CONDITION_FAILS: &str = "W007";
    pub const NOT_MONOTONE: &str = "W008";
    pub const SKIPPED_TRIALS: &str = "W009";
    pub const COUNTEREXAMPLE: &str = "W010";
    pub const NOT_ORDERED: &str = "W011";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub assumption: String,
    pub status: AssumptionStatus,
}

/// Everything a command prints. The JSON form carries no timestamp, so equal
/// inputs give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: Vec<String>,
    /// SHA-256 over the arguments and the bytes of every input file.
    pub inputs_digest: String,
    pub result: serde_json::Value,
    pub assumptions: Vec<AssumptionEntry>,
    pub warnings: Vec<Warning>,
}

pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn new(args: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in args {
            hasher.update(a.as_bytes());
            hasher.update([0u8]);
        }
        Inputs { hasher }
    }

    pub fn add(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn digest(self) -> String {
        self.hasher.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

pub fn checklist_entries(c: &AssumptionChecklist) -> Vec<AssumptionEntry> {
    c.entries().iter().map(|(name, status)| AssumptionEntry { assumption: name.to_string(), status: *status }).collect()
}

impl Report {
    pub fn warn(&mut self, code: &str, message: impl Into<String>) {
        self.warnings.push(Warning { code: code.into(), message: message.into() });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Text rendering: `summary` lines, then the checklist and warnings.
    pub fn to_text(&self, summary: &[String]) -> String {
        let mut out = String::new();
        for line in summary {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("\nassumptions:\n");
        for e in &self.assumptions {
            let _ = writeln!(out, "  [{:<9}] {}", e.status.label(), e.assumption);
        }
        if !self.warnings.is_empty() {
            out.push_str("\nwarnings:\n");
            for w in &self.warnings {
                let _ = writeln!(out, "  {} {}", w.code, w.message);
            }
        }
        let _ = writeln!(out, "\ninputs digest: {}", self.inputs_digest);
        out
    }
}
