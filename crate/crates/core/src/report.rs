//! Machine-readable experiment reports.
//!
//! A report is a pure function of the command line, the seed and the tool
//! version. Wall-clock time is the one exception, so it is only recorded when
//! explicitly requested and is left out of [`ExperimentReport::summary`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Lottery, Profile};
use crate::properties::{PropertyVerdict, Status, Witness};

/// What the mechanism's analysis says about a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Holds,
    Fails,
    Unasserted,
}

/// One row of the approximation-bounds table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub objective: String,
    pub n: usize,
    pub deterministic_bound: f64,
    pub randomized_bound: f64,
    pub measured_lo: f64,
    pub measured_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Lottery>,
    #[serde(default)]
    pub objective_values: BTreeMap<String, f64>,
    #[serde(default)]
    pub verdicts: Vec<PropertyVerdict>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expectations: BTreeMap<String, Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_bound: Option<f64>,
    #[serde(default)]
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<BoundRow>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    pub tool_version: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(scenario: impl Into<String>, norm: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            scenario: scenario.into(),
            spec: None,
            norm: norm.into(),
            profile: None,
            output: None,
            objective_values: BTreeMap::new(),
            verdicts: Vec::new(),
            expectations: BTreeMap::new(),
            ratio_interval: None,
            theoretical_bound: None,
            witnesses: Vec::new(),
            table: Vec::new(),
            seed,
            runtime_ms: None,
            tool_version: crate::TOOL_VERSION.to_string(),
            notes: Vec::new(),
        }
    }

    /// Properties whose verdict contradicts the expectation: an expected
    /// property that failed, or an expected failure that passed.
    pub fn contradictions(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .filter_map(|v| match (self.expectations.get(&v.property), v.status) {
                (Some(Expectation::Holds), Status::Fail) => {
                    Some(format!("{} expected to hold but failed", v.property))
                }
                (Some(Expectation::Fails), Status::Pass) => Some(format!(
                    "{} expected to fail but no violation was found",
                    v.property
                )),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    /// Human-readable digest; depends only on fields that are replayable.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "scenario {}", self.scenario);
        if let Some(spec) = &self.spec {
            let _ = write!(s, "  mech {spec}");
        }
        let _ = writeln!(s, "  norm {}  seed {}", self.norm, self.seed);
        for (k, v) in &self.objective_values {
            let _ = writeln!(s, "  {k:<24} {v}");
        }
        if let Some([lo, hi]) = self.ratio_interval {
            let _ = write!(s, "  ratio in [{lo}, {hi}]");
            if let Some(b) = self.theoretical_bound {
                let _ = write!(s, "  (bound {b})");
            }
            s.push('\n');
        }
        for row in &self.table {
            let _ = writeln!(
                s,
                "  {:<3} n={}  det {}  rand {}  measured [{}, {}]",
                row.objective,
                row.n,
                row.deterministic_bound,
                row.randomized_bound,
                row.measured_lo,
                row.measured_hi
            );
        }
        for v in &self.verdicts {
            let status = match v.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inconclusive => "inconclusive",
            };
            let expect = match self.expectations.get(&v.property) {
                Some(Expectation::Holds) => " (expected: holds)",
                Some(Expectation::Fails) => " (expected: fails)",
                Some(Expectation::Unasserted) => " (unasserted)",
                None => "",
            };
            let _ = write!(
                s,
                "  {:<24} {status:<12} margin {:e}{expect}",
                v.property, v.margin
            );
            if let Some(note) = &v.note {
                let _ = write!(s, "  [{note}]");
            }
            s.push('\n');
        }
        if !self.witnesses.is_empty() {
            let _ = writeln!(s, "  {} witness(es) recorded", self.witnesses.len());
        }
        for c in self.contradictions() {
            let _ = writeln!(s, "  !! {c}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}
