//! Uniform check reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be carried out (e.g. a root search did not converge).
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub max_residual: f64,
    pub details: Value,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, pass: bool, max_residual: f64, details: Value) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, max_residual, details }
    }

    /// Report for an exact check (residual 0 when it passes).
    pub fn exact(name: impl Into<String>, pass: bool, details: Value) -> Self {
        Self::new(name, pass, if pass { 0.0 } else { 1.0 }, details)
    }

    pub fn failed(name: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Self::new(name, false, f64::INFINITY, serde_json::json!({ "error": message.to_string() }))
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        format!("[{status}] {} (max residual {:.3e})", self.name, self.max_residual)
    }
}
