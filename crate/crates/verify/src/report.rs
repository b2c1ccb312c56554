use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub ci: Option<(f64, f64)>,
    /// The pre-registered tolerance, in words.
    pub tolerance: String,
    pub verdict: Verdict,
    pub samples: usize,
    pub details: serde_json::Value,
}

impl TestReport {
    pub fn new(name: &str, statistic: f64, tolerance: String, verdict: Verdict, samples: usize) -> Self {
        TestReport { name: name.into(), statistic, ci: None, tolerance, verdict, samples, details: serde_json::Value::Null }
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> Self {
        self.ci = Some((lo, hi));
        self
    }

    pub fn with_details<T: Serialize>(mut self, d: &T) -> Self {
        self.details = serde_json::to_value(d).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn line(&self) -> String {
        let ci = self.ci.map_or(String::new(), |(a, b)| format!(" [{a:.4}, {b:.4}]"));
        format!("{} {}: {:.4}{} ({}; n = {})", self.verdict.label(), self.name, self.statistic, ci, self.tolerance, self.samples)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub reports: Vec<TestReport>,
}

impl ReportBundle {
    /// True when any test failed or was inconclusive.
    pub fn any_failed(&self) -> bool {
        self.reports.iter().any(|r| r.verdict != Verdict::Pass)
    }

    pub fn summary_table(&self) -> String {
        let w = self.reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut s = format!("{:<w$}  {:<12}  {:>12}  {:>8}  tolerance\n", "test", "verdict", "statistic", "n");
        for r in &self.reports {
            let _ = writeln!(
                s,
                "{:<w$}  {:<12}  {:>12.5}  {:>8}  {}",
                r.name,
                r.verdict.label(),
                r.statistic,
                r.samples,
                r.tolerance
            );
        }
        s
    }
}
