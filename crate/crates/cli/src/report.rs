//! Verification reports: one record per check plus run metadata.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for information; never affects the exit code.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    /// Stable identifier of the result the check exercises.
    pub anchor: String,
    pub verdict: Verdict,
    pub required: bool,
    /// Signed distance from the decision threshold; negative means failure.
    pub margin: Option<f64>,
    pub details: BTreeMap<String, Value>,
    pub elapsed_ms: f64,
}

/// JSON value for a float; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}

impl Record {
    pub fn required(check: &str, anchor: &str, passed: bool) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            required: true,
            margin: None,
            details: BTreeMap::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn info(check: &str, anchor: &str) -> Self {
        Self {
            verdict: Verdict::Info,
            required: false,
            ..Self::required(check, anchor, true)
        }
    }

    pub fn margin(mut self, m: f64) -> Self {
        self.margin = m.is_finite().then_some(m);
        if !m.is_finite() {
            self.details.insert("margin".into(), num(m));
        }
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.into(), value.into());
        self
    }

    pub fn number(self, key: &str, x: f64) -> Self {
        self.detail(key, num(x))
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub command: String,
    pub grid: Option<Vec<usize>>,
    pub seed: u64,
    pub size_cap: Option<usize>,
    pub tolerances: Tolerances,
    pub config_hash: Option<String>,
    pub version: String,
}

impl Environment {
    pub fn new(command: &str, seed: u64, tolerances: Tolerances) -> Self {
        Self {
            command: command.into(),
            grid: None,
            seed,
            size_cap: None,
            tolerances,
            config_hash: None,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(environment: Environment, records: Vec<Record>, elapsed_ms: f64) -> Self {
        let count = |v| records.iter().filter(|r| r.verdict == v).count();
        let summary = Summary {
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            informational: count(Verdict::Info),
            elapsed_ms,
        };
        Self {
            environment,
            records,
            summary,
        }
    }

    /// 0 when every required check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.failed > 0)
    }

    pub fn record(&self, check: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.check == check)
    }

    /// Copy with every elapsed time set to zero.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.summary.elapsed_ms = 0.0;
        for rec in &mut r.records {
            rec.elapsed_ms = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
