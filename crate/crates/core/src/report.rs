//! Machine-readable verification reports.

use serde::Serialize;

/// Outcome of one named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported value without a pass/fail claim; never fails a suite.
    Measured,
}

/// One check record: what was measured, what was expected, how much slack
/// remained.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub measured_value: f64,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    /// Positive margin means the check held with room to spare (the exact
    /// normalization is check-specific and stated in `detail`).
    pub margin: f64,
    pub detail: String,
}

impl CheckRecord {
    pub fn pass(name: &str, measured: f64, expected: Option<f64>, tol: Option<f64>, margin: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Pass,
            measured_value: measured,
            expected,
            tolerance: tol,
            margin,
            detail: detail.into(),
        }
    }

    pub fn fail(name: &str, measured: f64, expected: Option<f64>, tol: Option<f64>, margin: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            measured_value: measured,
            expected,
            tolerance: tol,
            margin,
            detail: detail.into(),
        }
    }

    pub fn measured(name: &str, measured: f64, expected: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Measured,
            measured_value: measured,
            expected,
            tolerance: None,
            margin: 0.0,
            detail: detail.into(),
        }
    }

    pub fn graded(name: &str, ok: bool, measured: f64, expected: Option<f64>, tol: Option<f64>, margin: f64, detail: impl Into<String>) -> Self {
        if ok {
            Self::pass(name, measured, expected, tol, margin, detail)
        } else {
            Self::fail(name, measured, expected, tol, margin, detail)
        }
    }
}

/// Fitted exponential rates of the two high-frequency error components:
/// `omega` for the solution part, `kappa` for the profile part.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailRates {
    pub omega: f64,
    pub kappa: f64,
}

/// Scenario echo embedded in the report.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub params: crate::catalog::ModelParams,
    pub u0: crate::catalog::Datum,
    pub u1: crate::catalog::Datum,
    pub t_min: f64,
    pub t_max: f64,
    pub checks: Vec<String>,
}

/// The full verification ledger for one run. Serialization is stable:
/// field order is fixed and no timestamps are recorded, so identical
/// configs and seeds produce byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub seed: u64,
    pub scenario: ScenarioEcho,
    pub records: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_rates: Option<TailRates>,
}

impl VerificationReport {
    pub fn all_non_measured_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
