//! Machine-readable experiment reports.
//!
//! A report is the experiment name, the echoed inputs (seed, budgets,
//! tolerances, and a digest of every instance file or descriptor), a flat
//! list of claim rows, and optional structured details. Serialisation is
//! deterministic: maps are ordered, reals are written as fixed 17-significant
//! -digit tokens, and nothing environment-dependent (thread count, paths,
//! timestamps) enters the output, so identical inputs give identical bytes.
//!
//! The CSV projection keeps the fixed column order
//! `experiment,claim,anchor,value,tolerance,status` for line diffing.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

/// Verdict of a single report row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    /// The claim met its tolerance.
    #[serde(rename = "pass")]
    Pass,
    /// The claim missed its tolerance; the run exits with code 3.
    #[serde(rename = "fail")]
    Fail,
    /// The claim missed its tolerance and was designed to — counterexample
    /// behaviour. Does not affect the exit code.
    #[serde(rename = "expected-fail")]
    ExpectedFail,
    /// A measured value with no pass/fail judgement attached.
    #[serde(rename = "info")]
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ExpectedFail => "expected-fail",
            Status::Info => "info",
        }
    }
}

/// One checked or measured claim.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    /// What was measured, as a stable slug (no commas; CSV-safe).
    pub claim: String,
    /// Stable identifier of the underlying claim family, for cross-report
    /// grouping. Also a slug, never prose.
    pub anchor: String,
    /// The measured value.
    #[serde(with = "isomlab::real")]
    pub value: f64,
    /// The tolerance or bound the value was compared against (0 for info
    /// rows with no comparison).
    #[serde(with = "isomlab::real")]
    pub tolerance: f64,
    pub status: Status,
}

impl Row {
    /// An informational row: value recorded, nothing judged.
    pub fn info(claim: impl Into<String>, anchor: impl Into<String>, value: f64) -> Row {
        Row {
            claim: claim.into(),
            anchor: anchor.into(),
            value,
            tolerance: 0.0,
            status: Status::Info,
        }
    }

    /// A judged row: `ok` decides pass/fail.
    pub fn judged(
        claim: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        tolerance: f64,
        ok: bool,
    ) -> Row {
        Row {
            claim: claim.into(),
            anchor: anchor.into(),
            value,
            tolerance,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    /// A judged row whose failure is the documented expected outcome.
    pub fn expected_to_fail(
        claim: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        tolerance: f64,
        ok: bool,
    ) -> Row {
        Row {
            claim: claim.into(),
            anchor: anchor.into(),
            value,
            tolerance,
            status: if ok { Status::Pass } else { Status::ExpectedFail },
        }
    }
}

/// Real number wrapper so tolerance maps keep full-precision tokens.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Real(#[serde(with = "isomlab::real")] pub f64);

/// Echoed configuration; identical inputs must echo identically.
#[derive(Clone, Debug, Serialize)]
pub struct Inputs {
    pub seed: u64,
    pub budget_nodes: u64,
    pub tolerances: BTreeMap<String, Real>,
    /// `name -> sha256:<hex>` digest of each instance, keyed by role.
    pub instances: BTreeMap<String, String>,
}

/// A full experiment report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub inputs: Inputs,
    pub results: Vec<Row>,
    /// Structured payloads (witnesses, placements, matrices), serialised
    /// with the same full-precision real tokens as the rows.
    pub details: BTreeMap<String, Box<RawValue>>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, inputs: Inputs) -> Report {
        Report {
            experiment: experiment.into(),
            inputs,
            results: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.results.push(row);
    }

    /// Attaches a structured payload under `key`, preserving real tokens.
    pub fn attach<T: Serialize>(&mut self, key: &str, payload: &T) {
        let raw = serde_json::value::to_raw_value(payload)
            .expect("report payloads serialise to JSON");
        self.details.insert(key.to_owned(), raw);
    }

    /// True when any row failed for real (expected failures excluded).
    pub fn has_failure(&self) -> bool {
        self.results.iter().any(|r| r.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialises");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,claim,anchor,value,tolerance,status\n");
        for row in &self.results {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.experiment,
                row.claim,
                row.anchor,
                csv_token(row.value),
                csv_token(row.tolerance),
                row.status.as_str()
            ));
        }
        out
    }
}

/// Full-precision CSV cell for a real (JSON token with quoting stripped,
/// so non-finite values read `inf` / `-inf` / `nan`).
pub fn csv_token(x: f64) -> String {
    isomlab::real::json_token(x).trim_matches('"').to_owned()
}

/// Stable content digest used to echo instances into reports.
pub fn digest(content: &str) -> String {
    format!("sha256:{:x}", Sha256::digest(content.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_inputs() -> Inputs {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("agreement".to_owned(), Real(1e-12));
        let mut instances = BTreeMap::new();
        instances.insert("x".to_owned(), digest("{}"));
        Inputs {
            seed: 7,
            budget_nodes: 1000,
            tolerances,
            instances,
        }
    }

    #[test]
    fn csv_has_fixed_columns_and_tokens() {
        let mut report = Report::new("gh", sample_inputs());
        report.push(Row::judged("solver-spread", "three-route-agreement", 0.0, 1e-12, true));
        report.push(Row::info("bracket-width", "search-bracket", f64::INFINITY));
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("experiment,claim,anchor,value,tolerance,status")
        );
        assert_eq!(
            lines.next(),
            Some(
                "gh,solver-spread,three-route-agreement,0.0000000000000000e0,9.9999999999999998e-13,pass"
            )
        );
        assert_eq!(
            lines.next(),
            Some("gh,bracket-width,search-bracket,inf,0.0000000000000000e0,info")
        );
    }

    #[test]
    fn json_reports_are_deterministic_and_full_precision() {
        let mut a = Report::new("demo", sample_inputs());
        a.push(Row::info("value", "anchor", 0.1));
        a.attach("vector", &vec![0.1f64, 0.2]);
        let b = {
            let mut b = Report::new("demo", sample_inputs());
            b.push(Row::info("value", "anchor", 0.1));
            b.attach("vector", &vec![0.1f64, 0.2]);
            b
        };
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.to_json().contains("1.0000000000000001e-1"), "17 digits survive");
    }

    #[test]
    fn only_real_failures_flip_the_exit_signal() {
        let mut report = Report::new("demo", sample_inputs());
        report.push(Row::expected_to_fail("escape", "counterexample", 0.2, 0.1, false));
        report.push(Row::info("note", "anchor", 1.0));
        assert!(!report.has_failure());
        report.push(Row::judged("claim", "anchor", 2.0, 1.0, false));
        assert!(report.has_failure());
    }
}
