//! Published hardware matrices and the metrics reported alongside them.
//!
//! The data lives in `fixtures/published.json`. Every entry records where it
//! comes from, and known transcription problems are noted next to the numbers.
//! [`check_all`] recomputes each reported metric from the printed matrices.
//! It marks a value `Match` when it lands within that entry's tolerance and
//! `Flagged` otherwise.
//!
//! Printed matrices are compared as given. Fidelities use
//! [`operator_fidelity`](crate::metrics::operator_fidelity) (hermitize,
//! clip negative eigenvalues, no trace renormalization).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{element_distance, operator_fidelity};

const PUBLISHED: &str = include_str!("../fixtures/published.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFixture {
    pub source: String,
    pub device: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MatrixFixture {
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        ComplexMatrix::from_parts(&self.re, &self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Fidelity,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Match,
    Flagged,
    NotRecomputable,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Match => "PASS",
            CheckStatus::Flagged => "FLAGGED",
            CheckStatus::NotRecomputable => "N/A",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckFixture {
    pub id: String,
    pub metric: Metric,
    /// `None` when the input matrix was never published.
    pub a: Option<String>,
    pub b: Option<String>,
    pub reported: f64,
    pub tolerance: f64,
    pub expected_status: CheckStatus,
    pub source: String,
    #[serde(default = "default_halve")]
    pub halve: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn default_halve() -> bool {
    true
}

/// One row of the hardware trial-statistics tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardwareTrial {
    pub series: String,
    pub outcome: String,
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
    pub min: f64,
    pub trials: usize,
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureSet {
    pub schema: String,
    pub matrices: BTreeMap<String, MatrixFixture>,
    pub checks: Vec<CheckFixture>,
    pub hardware_trials: Vec<HardwareTrial>,
}

impl FixtureSet {
    /// The bundled fixture set.
    pub fn published() -> Result<Self> {
        Self::from_json(PUBLISHED)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: FixtureSet = serde_json::from_str(s)?;
        for c in &set.checks {
            for id in [&c.a, &c.b].into_iter().flatten() {
                if !set.matrices.contains_key(id) {
                    return Err(Error::Format(format!(
                        "check {} references unknown matrix {id}",
                        c.id
                    )));
                }
            }
        }
        Ok(set)
    }

    pub fn matrix(&self, id: &str) -> Result<ComplexMatrix> {
        self.matrices
            .get(id)
            .ok_or_else(|| Error::Format(format!("unknown fixture matrix {id}")))?
            .matrix()
    }

    pub fn check(&self, id: &str) -> Option<&CheckFixture> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Outcome of recomputing one reported metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub metric: Metric,
    pub reported: f64,
    pub recomputed: Option<f64>,
    /// For distances, the value with the opposite ½ convention.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate: Option<f64>,
    pub delta: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub expected_status: CheckStatus,
    pub note: Option<String>,
}

impl CheckOutcome {
    /// Whether the recomputed status agrees with the annotation in the data.
    pub fn as_expected(&self) -> bool {
        self.status == self.expected_status
    }
}

pub fn run_check(set: &FixtureSet, check: &CheckFixture) -> Result<CheckOutcome> {
    let (recomputed, alternate) = match (&check.a, &check.b) {
        (Some(a), Some(b)) => {
            let (ma, mb) = (set.matrix(a)?, set.matrix(b)?);
            match check.metric {
                Metric::Fidelity => (Some(operator_fidelity(&ma, &mb)?), None),
                Metric::Distance => (
                    Some(element_distance(&ma, &mb, check.halve)?),
                    Some(element_distance(&ma, &mb, !check.halve)?),
                ),
            }
        }
        _ => (None, None),
    };
    let delta = recomputed.map(|v| (v - check.reported).abs());
    let status = match delta {
        None => CheckStatus::NotRecomputable,
        Some(d) if d <= check.tolerance => CheckStatus::Match,
        Some(_) => CheckStatus::Flagged,
    };
    Ok(CheckOutcome {
        id: check.id.clone(),
        metric: check.metric,
        reported: check.reported,
        recomputed,
        alternate,
        delta,
        tolerance: check.tolerance,
        status,
        expected_status: check.expected_status,
        note: check.note.clone(),
    })
}

pub fn check_all(set: &FixtureSet) -> Result<Vec<CheckOutcome>> {
    set.checks.iter().map(|c| run_check(set, c)).collect()
}
