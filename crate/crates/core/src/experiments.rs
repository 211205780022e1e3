//! End-to-end scenarios and their reports.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::{
    bell_carriers, build_arbitrary_psi0, build_arbitrary_psi1, build_classical_bit, build_ghz,
    build_masked_orthogonal, Circuit, StateVector, ARBITRARY_PSI0_ANGLES, ARBITRARY_PSI1_ANGLES,
};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fixtures::FixtureSet;
use crate::linalg::{c, ComplexMatrix, C64};
use crate::masking::{
    check_bipartite_masking, compare_reductions, MaskingInput, MaskingReport, EXACT_TOL,
    EXPERIMENTAL_FIDELITY_FLOOR, EXPERIMENTAL_TOL,
};
use crate::metrics::{element_distance, fidelity, operator_fidelity};
use crate::rng::derive_seed;
use crate::stats::{run_trials, TrialTable};
use crate::tomography::{run_tomography, DEFAULT_SHOTS};

pub const REPORT_SCHEMA: &str = "qmask.report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Classical,
    Orthogonal,
    Arbitrary,
    Ghz,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::Classical,
        ScenarioName::Orthogonal,
        ScenarioName::Arbitrary,
        ScenarioName::Ghz,
    ];

    /// Verdict the scenario is meant to demonstrate.
    pub fn expected_masked(self) -> bool {
        !matches!(self, ScenarioName::Arbitrary)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioName::Classical => "classical",
            ScenarioName::Orthogonal => "orthogonal",
            ScenarioName::Arbitrary => "arbitrary",
            ScenarioName::Ghz => "ghz",
        })
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.to_string() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown scenario {s:?} (expected classical, orthogonal, arbitrary or ghz)"
                ))
            })
    }
}

/// Exact simulation, or sampled measurement plus tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub mode: Mode,
    pub shots: u64,
    pub trials: usize,
    pub seed: u64,
    /// Encoded amplitudes for `orthogonal` and `arbitrary`.
    pub alpha1: C64,
    pub alpha2: C64,
    pub psi0_angles: (f64, f64, f64),
    pub psi1_angles: (f64, f64, f64),
    /// Number of interior θ points for `ghz`.
    pub theta_grid: usize,
    pub phi: f64,
    pub lambda: f64,
}

impl Scenario {
    pub fn new(name: ScenarioName) -> Self {
        Self {
            name,
            mode: Mode::Exact,
            shots: DEFAULT_SHOTS,
            trials: 10,
            seed: 0,
            alpha1: c(FRAC_1_SQRT_2, 0.0),
            alpha2: c(0.0, FRAC_1_SQRT_2),
            psi0_angles: ARBITRARY_PSI0_ANGLES,
            psi1_angles: ARBITRARY_PSI1_ANGLES,
            theta_grid: 9,
            phi: 0.0,
            lambda: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let angles = [
            self.psi0_angles.0,
            self.psi0_angles.1,
            self.psi0_angles.2,
            self.psi1_angles.0,
            self.psi1_angles.1,
            self.psi1_angles.2,
            self.phi,
            self.lambda,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("angles must be finite".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidInput("shots must be positive".into()));
        }
        if self.theta_grid == 0 {
            return Err(Error::InvalidInput(
                "theta grid needs at least one point".into(),
            ));
        }
        let norm = self.alpha1.norm_sqr() + self.alpha2.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "|alpha1|^2 + |alpha2|^2 = {norm}, expected 1"
            )));
        }
        Ok(())
    }

    /// Interior grid `θ_k = kπ/(N+1)`, `k = 1..=N`.
    pub fn thetas(&self) -> Vec<f64> {
        let n = self.theta_grid;
        (1..=n).map(|k| k as f64 * PI / (n + 1) as f64).collect()
    }

    fn tolerance(&self) -> f64 {
        match self.mode {
            Mode::Exact => EXACT_TOL,
            Mode::Sampled => EXPERIMENTAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One numeric check. Informational checks are reported but do not enter
/// the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
    pub informational: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::AtMost,
            threshold,
            pass: value <= threshold,
            informational: false,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            threshold,
            pass: value >= threshold,
            informational: false,
        }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema: String,
    pub scenario: ScenarioName,
    pub mode: Mode,
    pub seed: u64,
    pub shots: Option<u64>,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masking: Option<MaskingReport>,
    pub masked: bool,
    pub expected_masked: bool,
    pub verdict_matches: bool,
}

impl ScenarioReport {
    fn new(s: &Scenario, checks: Vec<Check>, masking: Option<MaskingReport>) -> Self {
        let masked = checks.iter().filter(|c| !c.informational).all(|c| c.pass);
        let expected = s.name.expected_masked();
        Self {
            schema: REPORT_SCHEMA.into(),
            scenario: s.name,
            mode: s.mode,
            seed: s.seed,
            shots: (s.mode == Mode::Sampled).then_some(s.shots),
            tolerance: s.tolerance(),
            checks,
            masking,
            masked,
            expected_masked: expected,
            verdict_matches: masked == expected,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        };
        let _ = writeln!(
            out,
            "scenario: {} ({mode}, seed {})",
            self.scenario, self.seed
        );
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:width$}  {:>14}  {:<15}  result",
            "check", "value", "threshold"
        );
        for c in &self.checks {
            let cmp = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            let result = match (c.informational, c.pass) {
                (true, _) => "info",
                (false, true) => "pass",
                (false, false) => "FAIL",
            };
            let _ = writeln!(
                out,
                "{:width$}  {:>14.6e}  {cmp} {:<12}  {result}",
                c.name, c.value, c.threshold
            );
        }
        let _ = writeln!(
            out,
            "masked: {} (expected {}) -> {}",
            self.masked,
            self.expected_masked,
            if self.verdict_matches {
                "OK"
            } else {
                "MISMATCH"
            }
        );
        out
    }

    /// CSV with columns `name,value,comparison,threshold,pass,informational`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "name",
            "value",
            "comparison",
            "threshold",
            "pass",
            "informational",
        ])?;
        for c in &self.checks {
            let cmp = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            w.write_record([
                c.name.clone(),
                c.value.to_string(),
                cmp.to_string(),
                c.threshold.to_string(),
                c.pass.to_string(),
                c.informational.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport> {
    s.validate()?;
    match (s.name, s.mode) {
        (ScenarioName::Classical, Mode::Exact) => classical_exact(s),
        (ScenarioName::Orthogonal, Mode::Exact) => bipartite_exact(s, bell_carriers()),
        (ScenarioName::Arbitrary, Mode::Exact) => bipartite_exact(s, arbitrary_carriers(s)?),
        (ScenarioName::Ghz, Mode::Exact) => ghz_exact(s),
        (ScenarioName::Classical, Mode::Sampled) => {
            let states = [0, 1]
                .into_iter()
                .map(|b| Ok((format!("bit{b}"), build_classical_bit(b)?.run()?)))
                .collect::<Result<Vec<_>>>()?;
            bipartite_sampled(s, &states)
        }
        (ScenarioName::Orthogonal, Mode::Sampled) => {
            let (p0, p1) = bell_carriers();
            let psi = encoded(s, &p0, &p1)?;
            bipartite_sampled(
                s,
                &[
                    ("psi0".into(), p0),
                    ("psi1".into(), p1),
                    ("psi".into(), psi),
                ],
            )
        }
        (ScenarioName::Arbitrary, Mode::Sampled) => {
            let (p0, p1) = arbitrary_carriers(s)?;
            bipartite_sampled(s, &[("psi0".into(), p0), ("psi1".into(), p1)])
        }
        (ScenarioName::Ghz, Mode::Sampled) => ghz_sampled(s),
    }
}

fn arbitrary_carriers(s: &Scenario) -> Result<(StateVector, StateVector)> {
    let (t0, f0, l0) = s.psi0_angles;
    let (t1, f1, l1) = s.psi1_angles;
    Ok((
        build_arbitrary_psi0(t0, f0, l0)?.run()?,
        build_arbitrary_psi1(t1, f1, l1)?.run()?,
    ))
}

/// The encoded state; uses the gate-level circuit for the default amplitudes.
fn encoded(s: &Scenario, p0: &StateVector, p1: &StateVector) -> Result<StateVector> {
    let default = Scenario::new(s.name);
    if s.name == ScenarioName::Orthogonal
        && s.alpha1 == default.alpha1
        && s.alpha2 == default.alpha2
    {
        return build_masked_orthogonal().run();
    }
    MaskingInput::new(p0.clone(), p1.clone(), s.alpha1, s.alpha2)?.encoded_state()
}

fn subsystem_label(keep: usize) -> &'static str {
    if keep == 0 {
        "A"
    } else {
        "B"
    }
}

fn classical_exact(s: &Scenario) -> Result<ScenarioReport> {
    let half = ComplexMatrix::diag(&[0.5, 0.5]);
    let mut checks = Vec::new();
    let rhos = [0, 1]
        .into_iter()
        .map(|b| DensityMatrix::from_statevector(&build_classical_bit(b)?.run()?))
        .collect::<Result<Vec<_>>>()?;
    for keep in [0, 1] {
        let r0 = rhos[0].reduce(&[keep])?;
        let r1 = rhos[1].reduce(&[keep])?;
        let x = subsystem_label(keep);
        checks.push(Check::at_most(
            format!("reduced_equal_{x}"),
            r0.matrix().max_abs_diff(r1.matrix())?,
            EXACT_TOL,
        ));
        checks.push(Check::at_most(
            format!("reduced_vs_half_identity_{x}"),
            r0.matrix().max_abs_diff(&half)?,
            EXACT_TOL,
        ));
    }
    Ok(ScenarioReport::new(s, checks, None))
}

fn bipartite_exact(s: &Scenario, (p0, p1): (StateVector, StateVector)) -> Result<ScenarioReport> {
    let input = MaskingInput::new(p0.clone(), p1.clone(), s.alpha1, s.alpha2)?;
    let rep = check_bipartite_masking(&input, EXACT_TOL)?;
    let mut checks = vec![
        Check::at_most("reduced_equal_A", rep.reduced_equal_a, EXACT_TOL),
        Check::at_most("reduced_equal_B", rep.reduced_equal_b, EXACT_TOL),
        Check::at_most("cross_cancellation_A", rep.cross_cancellation_a, EXACT_TOL),
        Check::at_most("cross_cancellation_B", rep.cross_cancellation_b, EXACT_TOL),
        Check::at_most(
            "coefficient_restriction",
            rep.coefficient_restriction,
            EXACT_TOL,
        )
        .info(),
    ];

    let r0 = DensityMatrix::from_statevector(&p0)?.reduce(&[1])?;
    let r1 = DensityMatrix::from_statevector(&p1)?.reduce(&[1])?;
    checks.push(
        Check::at_least(
            "fidelity_B(psi0,psi1)",
            fidelity(&r0, &r1)?,
            1.0 - EXACT_TOL,
        )
        .info(),
    );

    if s.name == ScenarioName::Orthogonal {
        let psi = encoded(s, &p0, &p1)?;
        let rho = DensityMatrix::from_statevector(&psi)?;
        let half = ComplexMatrix::diag(&[0.5, 0.5]);
        for keep in [0, 1] {
            checks.push(
                Check::at_most(
                    format!("encoded_vs_half_identity_{}", subsystem_label(keep)),
                    rho.reduce(&[keep])?.matrix().max_abs_diff(&half)?,
                    EXACT_TOL,
                )
                .info(),
            );
        }
        // Theory against the published hardware reductions.
        let fx = FixtureSet::published()?;
        for (label, id) in [
            ("psi0", "orth.rhoB.psi0.exp"),
            ("psi1", "orth.rhoB.psi1.exp"),
        ] {
            let hw = fx.matrix(id)?;
            checks.push(
                Check::at_least(
                    format!("fidelity_B(theory,hardware_{label})"),
                    operator_fidelity(&half, &hw)?,
                    EXPERIMENTAL_FIDELITY_FLOOR,
                )
                .info(),
            );
            checks.push(
                Check::at_most(
                    format!("distance_B(theory,hardware_{label})"),
                    element_distance(&half, &hw, true)?,
                    EXPERIMENTAL_TOL,
                )
                .info(),
            );
        }
    }
    Ok(ScenarioReport::new(s, checks, Some(rep)))
}

fn bipartite_sampled(s: &Scenario, states: &[(String, StateVector)]) -> Result<ScenarioReport> {
    let mut recon = Vec::with_capacity(states.len());
    let mut checks = Vec::new();
    for (k, (label, state)) in states.iter().enumerate() {
        let t = run_tomography(state, s.shots, derive_seed(s.seed, k as u64))?;
        let truth = DensityMatrix::from_statevector(state)?;
        checks.push(
            Check::at_least(
                format!("tomography_fidelity({label})"),
                fidelity(&t.rho, &truth)?,
                EXPERIMENTAL_FIDELITY_FLOOR,
            )
            .info(),
        );
        recon.push((label.clone(), t.rho));
    }
    for keep in [0, 1] {
        let x = subsystem_label(keep);
        let reduced = recon
            .iter()
            .map(|(l, r)| Ok((l.clone(), r.reduce(&[keep])?)))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..reduced.len() {
            for j in i + 1..reduced.len() {
                let (li, ri) = &reduced[i];
                let (lj, rj) = &reduced[j];
                checks.push(Check::at_most(
                    format!("reduced_equal_{x}({li},{lj})"),
                    ri.matrix().max_abs_diff(rj.matrix())?,
                    EXPERIMENTAL_TOL,
                ));
                checks.push(Check::at_least(
                    format!("fidelity_{x}({li},{lj})"),
                    fidelity(ri, rj)?,
                    EXPERIMENTAL_FIDELITY_FLOOR,
                ));
            }
        }
    }
    Ok(ScenarioReport::new(s, checks, None))
}

fn ghz_exact(s: &Scenario) -> Result<ScenarioReport> {
    let mut checks = Vec::new();
    for theta in s.thetas() {
        let state = build_ghz(theta, s.phi, s.lambda)?.run()?;
        let rho = DensityMatrix::from_statevector(&state)?;
        let rep = compare_reductions(rho.matrix(), EXACT_TOL)?;
        checks.push(Check::at_least(
            format!("min_pair_fidelity(theta={theta:.6})"),
            rep.min_fidelity(),
            1.0 - EXACT_TOL,
        ));
        checks.push(
            Check::at_most(
                format!("max_pair_deviation(theta={theta:.6})"),
                rep.max_deviation(),
                EXACT_TOL,
            )
            .info(),
        );
    }
    Ok(ScenarioReport::new(s, checks, None))
}

fn ghz_sampled(s: &Scenario) -> Result<ScenarioReport> {
    let mut checks = Vec::new();
    for (k, theta) in s.thetas().into_iter().enumerate() {
        let state = build_ghz(theta, s.phi, s.lambda)?.run()?;
        let t = run_tomography(&state, s.shots, derive_seed(s.seed, k as u64))?;
        let rep = compare_reductions(t.rho.matrix(), 1.0 - EXPERIMENTAL_FIDELITY_FLOOR)?;
        checks.push(Check::at_least(
            format!("min_pair_fidelity(theta={theta:.6})"),
            rep.min_fidelity(),
            EXPERIMENTAL_FIDELITY_FLOOR,
        ));
        checks.push(Check::at_most(
            format!("max_pair_deviation(theta={theta:.6})"),
            rep.max_deviation(),
            EXPERIMENTAL_TOL,
        ));
    }
    Ok(ScenarioReport::new(s, checks, None))
}

/// Which circuit a statistics run samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsPart {
    /// First carrier (arbitrary) or bit 0 (classical).
    First,
    Second,
}

pub fn stats_circuit(s: &Scenario, part: StatsPart) -> Result<Circuit> {
    s.validate()?;
    match s.name {
        ScenarioName::Orthogonal => Ok(build_masked_orthogonal()),
        ScenarioName::Arbitrary => {
            let (t, f, l) = match part {
                StatsPart::First => s.psi0_angles,
                StatsPart::Second => s.psi1_angles,
            };
            match part {
                StatsPart::First => build_arbitrary_psi0(t, f, l),
                StatsPart::Second => build_arbitrary_psi1(t, f, l),
            }
        }
        ScenarioName::Ghz => build_ghz(PI / 2.0, s.phi, s.lambda),
        ScenarioName::Classical => build_classical_bit(match part {
            StatsPart::First => 0,
            StatsPart::Second => 1,
        }),
    }
}

pub fn run_stats(s: &Scenario, part: StatsPart) -> Result<TrialTable> {
    run_trials(&stats_circuit(s, part)?, s.shots, s.trials, s.seed)
}
