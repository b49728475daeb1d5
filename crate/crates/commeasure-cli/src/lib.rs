//! Engine behind the `commeasure` binary.
//!
//! The binary itself only parses flags and maps errors to exit codes;
//! everything it does — verification suites, probe-set generation,
//! reconstruction and extremal runs over files — lives here so tests
//! can drive it directly.
//!
//! Reports are plain data with a stable field order: two runs with the
//! same configuration and seed serialize identically except for the
//! wall-clock duration field.

pub mod gen;
pub mod suites;

use serde::{Deserialize, Serialize};

/// Outcome class of one verification check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not run to completion; the witness carries the
    /// error text.
    Error,
}

/// One named check: the worst deviation it measured, the tolerance it
/// was held to, and a reference to the worst-case witness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    /// Worst measured deviation; absent when the check errored before
    /// producing one.
    pub worst: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Machine-readable verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub norm_grid: Vec<String>,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Check records in name order.
    pub checks: Vec<CheckRecord>,
    /// "pass" exactly when every record passes.
    pub verdict: String,
    pub duration_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> commeasure::Result<String> {
        commeasure::json::to_json(self)
    }
}
