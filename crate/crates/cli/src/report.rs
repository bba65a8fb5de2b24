use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub test_id: String,
    pub paper_anchor: String,
    pub metric: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(test_id: &str, paper_anchor: &str, metric: f64, tolerance: f64, pass: bool) -> Self {
        ReportRow {
            test_id: test_id.into(),
            paper_anchor: paper_anchor.into(),
            metric,
            tolerance,
            pass,
        }
    }

    /// Passes when `metric < tolerance`.
    pub fn below(test_id: &str, anchor: &str, metric: f64, tolerance: f64) -> Self {
        Self::new(test_id, anchor, metric, tolerance, metric < tolerance)
    }

    /// Passes when `metric ≥ −tolerance` (a slack that may not go negative).
    pub fn slack(test_id: &str, anchor: &str, metric: f64, tolerance: f64) -> Self {
        Self::new(test_id, anchor, metric, tolerance, metric >= -tolerance)
    }

    /// Passes when `metric > tolerance`.
    pub fn above(test_id: &str, anchor: &str, metric: f64, tolerance: f64) -> Self {
        Self::new(test_id, anchor, metric, tolerance, metric > tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config_echo: BTreeMap<String, String>,
    pub results: Vec<ReportRow>,
}

impl Report {
    pub fn new(config_echo: BTreeMap<String, String>, results: Vec<ReportRow>) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo,
            results,
        }
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
