//! `qmask` command-line front end.
//!
//! Exit codes: 0 when the expected verdict is reproduced, 1 on a verdict
//! mismatch, 2 on any error (including bad flags).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qmask::circuits::{build_ghz, build_masked_orthogonal};
use qmask::density::DensityMatrix;
use qmask::experiments::{run_scenario, run_stats, Mode, Scenario, ScenarioName, StatsPart};
use qmask::fixtures::{check_all, CheckOutcome, FixtureSet};
use qmask::io::{ExportFormat, Exportable, LabelledDensity};
use qmask::linalg::C64;
use qmask::masking::tripartite_reductions;
use qmask::stats::{error_bar_table, TrialTable};
use qmask::tomography::run_tomography;

const SEED_ENV: &str = "QMASK_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "qmask",
    version,
    about = "Quantum information masking simulator and checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Shots per measurement setting or per trial.
    #[arg(long, global = true, default_value_t = 8192)]
    shots: u64,

    /// Independent trials for statistics.
    #[arg(long, global = true, default_value_t = 10)]
    trials: usize,

    /// Base RNG seed (QMASK_SEED takes precedence).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and check its masking verdict.
    Run(RunArgs),
    /// Recompute published metrics from the bundled hardware matrices.
    FixturesCheck,
    /// Per-outcome trial statistics for a scenario's circuit.
    Stats(StatsArgs),
    /// Write a state, density matrix, reductions or tomography result to disk.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// classical, orthogonal, arbitrary or ghz.
    scenario: String,

    /// First encoded amplitude as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,

    /// Second encoded amplitude as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,

    /// U3 angles of the first arbitrary carrier as "theta,phi,lambda".
    #[arg(long, allow_hyphen_values = true)]
    psi0: Option<String>,

    /// U3 angles of the second arbitrary carrier as "theta,phi,lambda".
    #[arg(long, allow_hyphen_values = true)]
    psi1: Option<String>,

    /// U3 phi for the ghz scenario.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,

    /// U3 lambda for the ghz scenario.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Exact simulation with tolerance 1e-9 (default).
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,

    /// Sampled tomography with experimental tolerances.
    #[arg(long)]
    sampled: bool,

    /// Number of interior theta points for ghz.
    #[arg(long, default_value_t = 9)]
    theta_grid: usize,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Which circuit to sample where a scenario has two.
    #[arg(long, value_enum, default_value_t = Part::First)]
    part: Part,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Part {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// The masked orthogonal state vector.
    MaskedState,
    /// Density matrix of the masked orthogonal state.
    MaskedRho,
    /// The one-qubit maximally mixed state I/2.
    MaximallyMixed,
    /// Sampled tomography of the masked orthogonal state.
    MaskedTomography,
    /// The three two-qubit reductions of GHZ(theta).
    GhzReductions,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(value_enum)]
    target: Target,

    /// Destination file.
    #[arg(long)]
    out: PathBuf,

    /// GHZ angle for ghz-reductions.
    #[arg(long, default_value_t = PI / 2.0)]
    theta: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn effective_seed(flag: u64) -> anyhow::Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(anyhow!("{SEED_ENV}: {e}")),
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    let seed = effective_seed(cli.seed)?;
    match &cli.command {
        Command::Run(args) => {
            let mut s = scenario(&args.scenario, &cli, seed)?;
            s.mode = if args.sampled {
                Mode::Sampled
            } else {
                Mode::Exact
            };
            s.theta_grid = args.theta_grid;
            let report = run_scenario(&s)?;
            let text = match cli.format {
                Format::Table => report.to_table(),
                Format::Json => report.to_json()? + "\n",
                Format::Csv => report.to_csv()?,
            };
            print!("{text}");
            Ok(report.verdict_matches)
        }
        Command::FixturesCheck => {
            let outcomes = check_all(&FixtureSet::published()?)?;
            let text = match cli.format {
                Format::Table => fixtures_table(&outcomes),
                Format::Json => serde_json::to_string_pretty(&outcomes)? + "\n",
                Format::Csv => fixtures_csv(&outcomes),
            };
            print!("{text}");
            Ok(outcomes.iter().all(CheckOutcome::as_expected))
        }
        Command::Stats(args) => {
            let s = scenario(&args.scenario, &cli, seed)?;
            let part = match args.part {
                Part::First => StatsPart::First,
                Part::Second => StatsPart::Second,
            };
            let table = run_stats(&s, part)?;
            let text = match cli.format {
                Format::Table => stats_table(&table),
                Format::Json => serde_json::to_string_pretty(&table)? + "\n",
                Format::Csv => error_bar_table(&table)?,
            };
            print!("{text}");
            Ok(true)
        }
        Command::Export(args) => {
            let format = match cli.format {
                Format::Json | Format::Table => ExportFormat::Json,
                Format::Csv => ExportFormat::Csv,
            };
            let item = export_item(args.target, args.theta, cli.shots, seed)?;
            item.write(&args.out, format)
                .with_context(|| format!("writing {}", args.out.display()))?;
            Ok(true)
        }
    }
}

fn scenario(args: &ScenarioArgs, cli: &Cli, seed: u64) -> anyhow::Result<Scenario> {
    let name: ScenarioName = args.scenario.parse()?;
    let mut s = Scenario::new(name);
    s.shots = cli.shots;
    s.trials = cli.trials;
    s.seed = seed;
    if let Some(a) = &args.alpha1 {
        s.alpha1 = parse_complex(a)?;
    }
    if let Some(a) = &args.alpha2 {
        s.alpha2 = parse_complex(a)?;
    }
    if let Some(a) = &args.psi0 {
        s.psi0_angles = parse_angles(a)?;
    }
    if let Some(a) = &args.psi1 {
        s.psi1_angles = parse_angles(a)?;
    }
    if let Some(v) = args.phi {
        s.phi = v;
    }
    if let Some(v) = args.lambda {
        s.lambda = v;
    }
    Ok(s)
}

fn parse_floats(s: &str, n: usize) -> anyhow::Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("cannot parse {s:?} as numbers"))?;
    if v.len() != n {
        bail!("expected {n} comma-separated values, got {s:?}");
    }
    Ok(v)
}

fn parse_complex(s: &str) -> anyhow::Result<C64> {
    let v = parse_floats(s, 2)?;
    Ok(C64::new(v[0], v[1]))
}

fn parse_angles(s: &str) -> anyhow::Result<(f64, f64, f64)> {
    let v = parse_floats(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn export_item(target: Target, theta: f64, shots: u64, seed: u64) -> anyhow::Result<Exportable> {
    Ok(match target {
        Target::MaskedState => Exportable::State {
            state: build_masked_orthogonal().run()?,
        },
        Target::MaskedRho => Exportable::Density {
            rho: DensityMatrix::from_statevector(&build_masked_orthogonal().run()?)?,
        },
        Target::MaximallyMixed => Exportable::Density {
            rho: DensityMatrix::maximally_mixed(1)?,
        },
        Target::MaskedTomography => Exportable::Tomography {
            result: run_tomography(&build_masked_orthogonal().run()?, shots, seed)?,
        },
        Target::GhzReductions => {
            let rho = DensityMatrix::from_statevector(&build_ghz(theta, 0.0, 0.0)?.run()?)?;
            let reductions = tripartite_reductions(rho.matrix())?
                .into_iter()
                .map(|(label, m)| {
                    Ok(LabelledDensity {
                        label,
                        rho: DensityMatrix::from_matrix(m)?,
                    })
                })
                .collect::<qmask::Result<Vec<_>>>()?;
            Exportable::Reductions { reductions }
        }
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn fixtures_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    let width = outcomes.iter().map(|o| o.id.len()).max().unwrap_or(2);
    let _ = writeln!(
        out,
        "{:width$}  {:>8}  {:>10}  {:>8}  {:>8}  status",
        "id", "reported", "recomputed", "|delta|", "tol"
    );
    for o in outcomes {
        let mut line = format!(
            "{:width$}  {:>8.4}  {:>10}  {:>8}  {:>8}  {}",
            o.id,
            o.reported,
            opt(o.recomputed),
            opt(o.delta),
            o.tolerance,
            o.status
        );
        if let Some(alt) = o.alternate {
            let _ = write!(line, " (other convention {alt:.4})");
        }
        if !o.as_expected() {
            let _ = write!(line, " [expected {}]", o.expected_status);
        }
        let _ = writeln!(out, "{line}");
    }
    let flagged = outcomes
        .iter()
        .filter(|o| o.status.to_string() == "FLAGGED")
        .count();
    let _ = writeln!(out, "{} checks, {flagged} flagged", outcomes.len());
    out
}

fn fixtures_csv(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::from("id,reported,recomputed,alternate,delta,tolerance,status\n");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            o.id,
            o.reported,
            cell(o.recomputed),
            cell(o.alternate),
            cell(o.delta),
            o.tolerance,
            o.status
        );
    }
    out
}

fn stats_table(t: &TrialTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} trials x {} shots, seed {}",
        t.trials, t.shots, t.seed
    );
    let _ = writeln!(
        out,
        "{:>7}  {:>7}  {:>7}  {:>7}  {:>7}",
        "outcome", "mean", "sd", "max", "min"
    );
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{:>7}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}",
            r.outcome, r.mean, r.sd, r.max, r.min
        );
    }
    out
}
