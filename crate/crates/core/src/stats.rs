//! Repeated-trial statistics over sampled runs.

use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tomography::{bitstring, sample_counts};

/// Per-outcome statistics over several independently seeded trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub outcome: String,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub max: f64,
    pub min: f64,
    pub trials: usize,
}

/// Summaries for every outcome of one circuit, in bitstring order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub shots: u64,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<TrialSummary>,
}

/// Runs `trials` samplings of the circuit output; trial `t` uses seed
/// `derive_seed(seed, t)`.
pub fn run_trials(circuit: &Circuit, shots: u64, trials: usize, seed: u64) -> Result<TrialTable> {
    if trials < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 trials for a standard deviation, got {trials}"
        )));
    }
    let state = circuit.run()?;
    let n = state.n_qubits();
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .map(|t| Ok(sample_counts(&state, shots, derive_seed(seed, t as u64))?.frequencies()))
        .collect::<Result<_>>()?;

    let rows = (0..1usize << n)
        .map(|idx| summarize(bitstring(idx, n), per_trial.iter().map(|f| f[idx])))
        .collect();
    Ok(TrialTable {
        shots,
        seed,
        trials,
        rows,
    })
}

fn summarize(outcome: String, values: impl Iterator<Item = f64> + Clone) -> TrialSummary {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    TrialSummary {
        outcome,
        mean,
        sd: var.sqrt(),
        max: values.clone().fold(f64::NEG_INFINITY, f64::max),
        min: values.fold(f64::INFINITY, f64::min),
        trials: n,
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    outcome: &'a str,
    mean: f64,
    sd: f64,
    max: f64,
    min: f64,
    trials: usize,
    shots: u64,
    seed: u64,
}

impl TrialTable {
    pub fn mean_total(&self) -> f64 {
        self.rows.iter().map(|r| r.mean).sum()
    }

    pub fn row(&self, outcome: &str) -> Option<&TrialSummary> {
        self.rows.iter().find(|r| r.outcome == outcome)
    }
}

/// CSV with columns `outcome,mean,sd,max,min,trials,shots,seed`.
pub fn error_bar_table(table: &TrialTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidInput("no summaries to export".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &table.rows {
        w.serialize(CsvRow {
            outcome: &r.outcome,
            mean: r.mean,
            sd: r.sd,
            max: r.max,
            min: r.min,
            trials: r.trials,
            shots: table.shots,
            seed: table.seed,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
