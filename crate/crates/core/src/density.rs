//! Density operators and partial traces.

use serde::{Deserialize, Serialize};

use crate::circuits::{StateVector, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64};

/// Tolerance for the Hermitian, unit-trace and PSD checks on [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-9;

/// State vectors handed to [`DensityMatrix::from_statevector`] may be off
/// unit norm by at most this much.
pub const PURE_NORM_TOL: f64 = 1e-8;

/// Hermitian, positive semidefinite, unit-trace operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` as a density operator on `n_qubits` qubits.
    pub fn new(n_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidDensity(format!(
                "{n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1 << n_qubits;
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidDensity(format!(
                "expected {dim}x{dim} for {n_qubits} qubits, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let asym = matrix.hermiticity_error().unwrap_or(f64::INFINITY);
        if asym > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (asymmetry {asym:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let lowest = hermitian_eig(&matrix)?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        if lowest < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Infers the qubit count from the matrix dimension.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n = qubits_for_dim(matrix.rows()).ok_or_else(|| {
            Error::InvalidDensity(format!("dimension {} is not 2^n", matrix.rows()))
        })?;
        Self::new(n, matrix)
    }

    /// `|s⟩⟨s|`.
    pub fn from_statevector(s: &StateVector) -> Result<Self> {
        let norm_sqr = s.norm_sqr();
        if (norm_sqr - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            n_qubits: s.n_qubits(),
            matrix: outer_amplitudes(s.amplitudes(), s.amplitudes()),
        })
    }

    /// `I / 2ⁿ`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        Self::new(n_qubits, ComplexMatrix::diag(&vec![1.0 / dim as f64; dim]))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).expect("square").trace().re
    }

    /// Reduced state on the `keep` qubits.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, keep)?;
        DensityMatrix::new(keep.len(), crate::linalg::hermitize(&m)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// JSON layout `{"n_qubits": n, "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
struct DensityRepr {
    n_qubits: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<DensityRepr> for DensityMatrix {
    type Error = Error;

    fn try_from(r: DensityRepr) -> Result<Self> {
        let m = ComplexMatrix::from_parts(&r.re, &r.im)?;
        if !m.is_square() {
            return Err(Error::Format(format!(
                "density payload is {}x{}, not square",
                m.rows(),
                m.cols()
            )));
        }
        DensityMatrix::new(r.n_qubits, m)
    }
}

impl From<DensityMatrix> for DensityRepr {
    fn from(d: DensityMatrix) -> Self {
        let (re, im) = d.matrix.to_parts();
        Self {
            n_qubits: d.n_qubits,
            re,
            im,
        }
    }
}

pub(crate) fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim >= 2 && dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

fn outer_amplitudes(a: &[C64], b: &[C64]) -> ComplexMatrix {
    let n = a.len();
    let mut m = ComplexMatrix::zeros(n, b.len());
    for i in 0..n {
        for j in 0..b.len() {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

/// `|a⟩⟨b|`, in general not Hermitian.
pub fn outer(a: &StateVector, b: &StateVector) -> Result<ComplexMatrix> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::QubitCountMismatch(a.n_qubits(), b.n_qubits()));
    }
    Ok(outer_amplitudes(a.amplitudes(), b.amplitudes()))
}

/// Traces out every qubit not listed in `keep`.
///
/// Accepts any square `2ⁿ × 2ⁿ` matrix, including non-Hermitian cross terms
/// such as `|Ψ₀⟩⟨Ψ₁|`. `keep` must be strictly increasing, non-empty, and
/// leave at least one qubit to trace over. Kept qubits retain their relative
/// order in the output.
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = qubits_for_dim(m.rows())
        .ok_or_else(|| Error::InvalidSelection(format!("dimension {} is not 2^n", m.rows())))?;
    if keep.is_empty() || keep.len() >= n {
        return Err(Error::InvalidSelection(format!(
            "keep set {keep:?} must be a non-empty strict subset of {n} qubits"
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSelection(format!(
            "keep set {keep:?} must be strictly increasing"
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            n_qubits: n,
        });
    }

    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    // Bit position of qubit q inside a basis index.
    let pos = |q: usize| n - 1 - q;
    // Scatter the bits of a compact index over the given qubit list.
    let scatter = |compact: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|&(j, _)| compact >> (k - 1 - j) & 1 == 1)
            .map(|(_, &q)| 1 << pos(q))
            .sum()
    };

    let out_dim = 1 << keep.len();
    let env_dim = 1 << traced.len();
    let kept_offsets: Vec<usize> = (0..out_dim).map(|i| scatter(i, keep)).collect();
    let env_offsets: Vec<usize> = (0..env_dim).map(|e| scatter(e, &traced)).collect();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for (r, &kr) in kept_offsets.iter().enumerate() {
        for (c, &kc) in kept_offsets.iter().enumerate() {
            out[(r, c)] = env_offsets.iter().map(|&e| m.get(kr | e, kc | e)).sum();
        }
    }
    Ok(out)
}
