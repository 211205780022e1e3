//! Finite-shot measurement and linear-inversion state tomography.
//!
//! A measurement setting assigns one Pauli basis per qubit. Every one of the
//! `3ⁿ` settings is sampled, and each Pauli-string expectation `⟨P⟩` is
//! estimated by averaging over all settings compatible with `P` (those that
//! agree with `P` on its non-identity positions). Then
//! `ρ_raw = 2⁻ⁿ Σ_P ⟨P⟩ P` and the physical estimate is the clamp projection
//! of `ρ_raw`.
//!
//! Setting `k` (in the order of [`MeasurementSetting::all`]) is sampled with
//! seed `derive_seed(seed, k)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{Gate, StateVector};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{consts, hermitian_eig, hermitize, kron, ComplexMatrix};
use crate::rng::{derive_seed, rng_from_seed};

/// Default shot count, matching the hardware runs being reproduced.
pub const DEFAULT_SHOTS: u64 = 8192;

/// Measured outcome counts, keyed by bitstring with qubit 0 leftmost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRepr", into = "CountsRepr")]
pub struct CountsTable {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

/// JSON layout `{"shots": n, "counts": {"00": k, ...}}`.
#[derive(Serialize, Deserialize)]
struct CountsRepr {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<CountsRepr> for CountsTable {
    type Error = Error;

    fn try_from(r: CountsRepr) -> Result<Self> {
        let n = r
            .counts
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::Format("counts table is empty".into()))?;
        CountsTable::new(n, r.shots, r.counts)
    }
}

impl From<CountsTable> for CountsRepr {
    fn from(t: CountsTable) -> Self {
        Self {
            shots: t.shots,
            counts: t.counts,
        }
    }
}

impl CountsTable {
    pub fn new(n_qubits: usize, shots: u64, counts: BTreeMap<String, u64>) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidInput("shots must be positive".into()));
        }
        for key in counts.keys() {
            if key.len() != n_qubits || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::Format(format!(
                    "outcome {key:?} is not a {n_qubits}-bit string"
                )));
            }
        }
        let total: u64 = counts.values().sum();
        if total != shots {
            return Err(Error::Format(format!(
                "counts sum to {total}, expected {shots}"
            )));
        }
        Ok(Self {
            n_qubits,
            shots,
            counts,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    /// Relative frequencies indexed by basis index.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.n_qubits];
        for (k, &v) in &self.counts {
            f[usize::from_str_radix(k, 2).expect("validated bitstring")] =
                v as f64 / self.shots as f64;
        }
        f
    }
}

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    format!("{index:0n_qubits$b}")
}

/// Draws `shots` outcomes from the state's Born distribution.
///
/// Each shot draws a uniform `f64` and locates it in the cumulative
/// distribution, so counts are a deterministic function of `(state, shots,
/// seed)`.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<CountsTable> {
    sample_distribution(&state.probabilities(), state.n_qubits(), shots, seed)
}

pub(crate) fn sample_distribution(
    probs: &[f64],
    n_qubits: usize,
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = rng_from_seed(seed);
    let mut hits = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        hits[idx] += 1;
    }
    let counts = hits
        .iter()
        .enumerate()
        .filter(|(_, &h)| h > 0)
        .map(|(i, &h)| (bitstring(i, n_qubits), h))
        .collect();
    CountsTable::new(n_qubits, shots, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    fn as_char(self) -> char {
        match self {
            PauliBasis::X => 'X',
            PauliBasis::Y => 'Y',
            PauliBasis::Z => 'Z',
        }
    }
}

/// Per-qubit measurement bases, written as a string such as `"XZ"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MeasurementSetting {
    bases: Vec<PauliBasis>,
}

impl MeasurementSetting {
    pub fn new(bases: Vec<PauliBasis>) -> Self {
        Self { bases }
    }

    pub fn bases(&self) -> &[PauliBasis] {
        &self.bases
    }

    pub fn n_qubits(&self) -> usize {
        self.bases.len()
    }

    /// All `3ⁿ` settings, lexicographic in X < Y < Z with qubit 0 most
    /// significant.
    pub fn all(n_qubits: usize) -> Vec<MeasurementSetting> {
        let mut out = vec![Vec::new()];
        for _ in 0..n_qubits {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<PauliBasis>| {
                    PauliBasis::ALL.into_iter().map(move |b| {
                        let mut v = prefix.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(MeasurementSetting::new).collect()
    }

    /// Basis-change gates applied before a computational-basis readout.
    pub fn rotation_gates(&self) -> Vec<Gate> {
        let mut gates = Vec::new();
        for (q, b) in self.bases.iter().enumerate() {
            match b {
                PauliBasis::X => gates.push(Gate::h(q)),
                PauliBasis::Y => {
                    gates.push(Gate::sdg(q));
                    gates.push(Gate::h(q));
                }
                PauliBasis::Z => {}
            }
        }
        gates
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bases
            .iter()
            .try_for_each(|b| write!(f, "{}", b.as_char()))
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Format("empty measurement setting".into()));
        }
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'X' => Ok(PauliBasis::X),
                'Y' => Ok(PauliBasis::Y),
                'Z' => Ok(PauliBasis::Z),
                other => Err(Error::Format(format!("unknown basis {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(MeasurementSetting::new)
    }
}

impl TryFrom<String> for MeasurementSetting {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeasurementSetting> for String {
    fn from(m: MeasurementSetting) -> String {
        m.to_string()
    }
}

/// The state after the basis-change rotations of `setting`.
pub fn rotate_into(state: &StateVector, setting: &MeasurementSetting) -> Result<StateVector> {
    if setting.n_qubits() != state.n_qubits() {
        return Err(Error::QubitCountMismatch(
            state.n_qubits(),
            setting.n_qubits(),
        ));
    }
    setting
        .rotation_gates()
        .iter()
        .try_fold(state.clone(), |s, g| s.apply(g))
}

/// Samples the state in the given per-qubit bases.
pub fn measure_in_basis(
    state: &StateVector,
    setting: &MeasurementSetting,
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    sample_counts(&rotate_into(state, setting)?, shots, seed)
}

/// Samples every setting with per-setting derived seeds.
pub fn measure_all_settings(
    state: &StateVector,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<MeasurementSetting, CountsTable>> {
    MeasurementSetting::all(state.n_qubits())
        .into_iter()
        .enumerate()
        .map(|(k, setting)| {
            let counts = measure_in_basis(state, &setting, shots, derive_seed(seed, k as u64))?;
            Ok((setting, counts))
        })
        .collect()
}

/// Exact outcome distributions for every setting (the infinite-shot limit).
pub fn exact_distributions(state: &StateVector) -> Result<BTreeMap<MeasurementSetting, Vec<f64>>> {
    MeasurementSetting::all(state.n_qubits())
        .into_iter()
        .map(|s| {
            let p = rotate_into(state, &s)?.probabilities();
            Ok((s, p))
        })
        .collect()
}

/// Reconstructed state plus bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    /// Linear-inversion estimate before projection; Hermitian by construction.
    #[serde(with = "matrix_parts")]
    pub raw_rho: ComplexMatrix,
    pub settings_used: usize,
    pub shots_per_setting: u64,
    /// `None` for reconstructions from exact or externally supplied data.
    pub seed: Option<u64>,
}

mod matrix_parts {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::ComplexMatrix;

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        let (re, im) = m.to_parts();
        Parts { re, im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let p = Parts::deserialize(d)?;
        ComplexMatrix::from_parts(&p.re, &p.im).map_err(serde::de::Error::custom)
    }
}

/// Linear inversion from measured counts. Every `3ⁿ` setting must be present
/// with a common shot count.
pub fn reconstruct_linear_inversion(
    counts: &BTreeMap<MeasurementSetting, CountsTable>,
) -> Result<TomographyResult> {
    let n = counts
        .keys()
        .next()
        .map(|s| s.n_qubits())
        .ok_or_else(|| Error::MissingSettings("no settings supplied".into()))?;
    let shots = counts.values().next().map(|c| c.shots()).unwrap_or(0);
    if let Some((s, c)) = counts.iter().find(|(_, c)| c.shots() != shots) {
        return Err(Error::InvalidInput(format!(
            "setting {s} has {} shots, expected {shots}",
            c.shots()
        )));
    }
    if let Some((s, _)) = counts
        .iter()
        .find(|(s, c)| s.n_qubits() != n || c.n_qubits() != n)
    {
        return Err(Error::InvalidInput(format!(
            "setting {s} has the wrong qubit count"
        )));
    }
    let freqs: BTreeMap<MeasurementSetting, Vec<f64>> = counts
        .iter()
        .map(|(s, c)| (s.clone(), c.frequencies()))
        .collect();
    let mut result = reconstruct_from_distributions(&freqs)?;
    result.shots_per_setting = shots;
    Ok(result)
}

/// Linear inversion from outcome distributions (frequencies or exact
/// probabilities).
pub fn reconstruct_from_distributions(
    dists: &BTreeMap<MeasurementSetting, Vec<f64>>,
) -> Result<TomographyResult> {
    let n = dists
        .keys()
        .next()
        .map(|s| s.n_qubits())
        .ok_or_else(|| Error::MissingSettings("no settings supplied".into()))?;
    let missing: Vec<String> = MeasurementSetting::all(n)
        .into_iter()
        .filter(|s| !dists.contains_key(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing.join(", ")));
    }
    if let Some((s, _)) = dists
        .iter()
        .find(|(s, p)| s.n_qubits() != n || p.len() != 1 << n)
    {
        return Err(Error::InvalidInput(format!(
            "setting {s} does not match {n} qubits"
        )));
    }

    let paulis = [
        consts::pauli_i(),
        consts::pauli_x(),
        consts::pauli_y(),
        consts::pauli_z(),
    ];
    let dim = 1usize << n;
    let mut raw = ComplexMatrix::zeros(dim, dim);

    // Pauli strings as base-4 digits: 0 = I, 1 = X, 2 = Y, 3 = Z.
    for code in 0..4usize.pow(n as u32) {
        let digits: Vec<usize> = (0..n)
            .map(|q| code / 4usize.pow((n - 1 - q) as u32) % 4)
            .collect();
        let expectation = if code == 0 {
            1.0
        } else {
            pauli_expectation(&digits, dists)
        };
        let op = digits
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, &d| kron(&acc, &paulis[d]));
        raw = raw.add(&op.scale((expectation / dim as f64).into()))?;
    }
    let raw = hermitize(&raw)?;
    let rho = project_to_physical(&raw)?;
    Ok(TomographyResult {
        rho,
        raw_rho: raw,
        settings_used: dists.len(),
        shots_per_setting: 0,
        seed: None,
    })
}

fn pauli_expectation(digits: &[usize], dists: &BTreeMap<MeasurementSetting, Vec<f64>>) -> f64 {
    let n = digits.len();
    let wanted = |d: usize| match d {
        1 => Some(PauliBasis::X),
        2 => Some(PauliBasis::Y),
        3 => Some(PauliBasis::Z),
        _ => None,
    };
    let mut total = 0.0;
    let mut used = 0usize;
    for (setting, probs) in dists {
        let compatible = digits
            .iter()
            .zip(setting.bases())
            .all(|(&d, &b)| wanted(d).is_none_or(|w| w == b));
        if !compatible {
            continue;
        }
        let mut e = 0.0;
        for (idx, &p) in probs.iter().enumerate() {
            let parity = (0..n)
                .filter(|&q| digits[q] != 0 && (idx >> (n - 1 - q)) & 1 == 1)
                .count();
            e += if parity % 2 == 0 { p } else { -p };
        }
        total += e;
        used += 1;
    }
    total / used as f64
}

/// Samples all settings and reconstructs.
pub fn run_tomography(state: &StateVector, shots: u64, seed: u64) -> Result<TomographyResult> {
    let counts = measure_all_settings(state, shots, seed)?;
    let mut result = reconstruct_linear_inversion(&counts)?;
    result.seed = Some(seed);
    Ok(result)
}

/// Nearest-by-clamping physical state: hermitize, zero the negative
/// eigenvalues, renormalize the trace.
pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let asym = raw.hermiticity_error().ok_or(Error::NotSquare {
        rows: raw.rows(),
        cols: raw.cols(),
    })?;
    if asym > 1e-6 {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let eig = hermitian_eig(&hermitize(raw)?)?;
    let total: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::InvalidDensity(
            "all eigenvalues are non-positive".into(),
        ));
    }
    let m = eig.map_spectrum(|l| l.max(0.0) / total);
    DensityMatrix::from_matrix(hermitize(&m)?)
}
