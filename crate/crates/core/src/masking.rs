//! Masking conditions.
//!
//! Information `|b⟩ = α₁|0⟩ + α₂|1⟩` is encoded as `|Ψ⟩ = α₁|Ψ₀⟩ + α₂|Ψ₁⟩`.
//! For subsystem `X` the reduction expands as
//!
//! ```text
//! Tr_X|Ψ⟩⟨Ψ| = |α₁|² Tr_X|Ψ₀⟩⟨Ψ₀| + |α₂|² Tr_X|Ψ₁⟩⟨Ψ₁|
//!             + α₁α₂* Tr_X|Ψ₀⟩⟨Ψ₁| + α₁*α₂ Tr_X|Ψ₁⟩⟨Ψ₀|
//! ```
//!
//! and is independent of the encoded amplitudes when the carrier reductions
//! agree and the two cross terms cancel. For carriers whose cross-term
//! reductions coincide, cancellation reduces to `α₁α₂* + α₁*α₂ = 0`.

use serde::{Deserialize, Serialize};

use crate::circuits::{build_classical_bit, StateVector};
use crate::density::{outer, partial_trace, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::metrics::fidelity;

/// Tolerance for exact, simulated inputs.
pub const EXACT_TOL: f64 = 1e-9;

/// Max-norm tolerance for inputs reconstructed from finite-shot data.
pub const EXPERIMENTAL_TOL: f64 = 0.05;

/// Fidelity floor for reconstructed inputs.
pub const EXPERIMENTAL_FIDELITY_FLOOR: f64 = 0.98;

/// Two carriers and the amplitudes being hidden in them.
#[derive(Debug, Clone)]
pub struct MaskingInput {
    psi0: StateVector,
    psi1: StateVector,
    alpha1: C64,
    alpha2: C64,
}

impl MaskingInput {
    pub fn new(psi0: StateVector, psi1: StateVector, alpha1: C64, alpha2: C64) -> Result<Self> {
        if psi0.n_qubits() != psi1.n_qubits() {
            return Err(Error::QubitCountMismatch(psi0.n_qubits(), psi1.n_qubits()));
        }
        if psi0.n_qubits() != 2 {
            return Err(Error::InvalidInput(format!(
                "bipartite masking needs 2-qubit carriers, got {}",
                psi0.n_qubits()
            )));
        }
        let norm = alpha1.norm_sqr() + alpha2.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "|α₁|² + |α₂|² = {norm}, expected 1"
            )));
        }
        Ok(Self {
            psi0,
            psi1,
            alpha1,
            alpha2,
        })
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn psi1(&self) -> &StateVector {
        &self.psi1
    }

    pub fn alphas(&self) -> (C64, C64) {
        (self.alpha1, self.alpha2)
    }

    /// `α₁|Ψ₀⟩ + α₂|Ψ₁⟩`, renormalized (carriers need not be orthogonal).
    pub fn encoded_state(&self) -> Result<StateVector> {
        let amps: Vec<C64> = self
            .psi0
            .amplitudes()
            .iter()
            .zip(self.psi1.amplitudes())
            .map(|(a, b)| self.alpha1 * a + self.alpha2 * b)
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput("encoded state vanishes".into()));
        }
        StateVector::new(amps.into_iter().map(|z| z / norm).collect())
    }
}

/// Diagnostics for a bipartite masking check.
///
/// Subsystem A is qubit 0 and B is qubit 1. The `*_A` fields are computed
/// on the reduced state of A (B traced out), and the `*_B` fields the same way for B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingReport {
    /// `‖ρ_A(Ψ₀) − ρ_A(Ψ₁)‖_max`.
    pub reduced_equal_a: f64,
    pub reduced_equal_b: f64,
    /// `‖α₁α₂*·Tr_B|Ψ₀⟩⟨Ψ₁| + α₁*α₂·Tr_B|Ψ₁⟩⟨Ψ₀|‖_max`.
    pub cross_cancellation_a: f64,
    pub cross_cancellation_b: f64,
    /// `|α₁α₂* + α₁*α₂|`; informational, not part of the verdict.
    pub coefficient_restriction: f64,
    pub masked: bool,
    pub tolerance: f64,
}

impl MaskingReport {
    /// Largest of the four deviations that enter the verdict.
    pub fn worst_deviation(&self) -> f64 {
        [
            self.reduced_equal_a,
            self.reduced_equal_b,
            self.cross_cancellation_a,
            self.cross_cancellation_b,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `|α₁α₂* + α₁*α₂| = 2|Re(α₁ ᾱ₂)|`; zero when the restriction holds.
pub fn coefficient_restriction_satisfied(alpha1: C64, alpha2: C64) -> f64 {
    2.0 * (alpha1 * alpha2.conj()).re.abs()
}

/// Checks reduced-state equality and cross-term cancellation on both qubits.
pub fn check_bipartite_masking(input: &MaskingInput, tol: f64) -> Result<MaskingReport> {
    let (a1, a2) = input.alphas();
    let rho0 = outer(&input.psi0, &input.psi0)?;
    let rho1 = outer(&input.psi1, &input.psi1)?;
    let c01 = outer(&input.psi0, &input.psi1)?;
    let c10 = outer(&input.psi1, &input.psi0)?;

    // keep = [0] gives subsystem A's reduction, keep = [1] gives B's.
    let per_subsystem = |keep: usize| -> Result<(f64, f64)> {
        let k = [keep];
        let equal = partial_trace(&rho0, &k)?.max_abs_diff(&partial_trace(&rho1, &k)?)?;
        let cross = partial_trace(&c01, &k)?
            .scale(a1 * a2.conj())
            .add(&partial_trace(&c10, &k)?.scale(a1.conj() * a2))?
            .max_abs();
        Ok((equal, cross))
    };
    let (reduced_equal_a, cross_cancellation_a) = per_subsystem(0)?;
    let (reduced_equal_b, cross_cancellation_b) = per_subsystem(1)?;

    let mut report = MaskingReport {
        reduced_equal_a,
        reduced_equal_b,
        cross_cancellation_a,
        cross_cancellation_b,
        coefficient_restriction: coefficient_restriction_satisfied(a1, a2),
        masked: false,
        tolerance: tol,
    };
    report.masked = report.worst_deviation() <= tol;
    Ok(report)
}

/// Pairwise comparison of two 2-qubit reductions of a 3-qubit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionPair {
    pub left: String,
    pub right: String,
    pub fidelity: f64,
    pub max_deviation: f64,
}

/// Result of [`check_multipartite_reductions`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultipartiteReport {
    /// `ρ_A = Tr_{q0}`, `ρ_B = Tr_{q1}`, `ρ_C = Tr_{q2}`, in that order.
    pub reductions: Vec<(String, DensityMatrix)>,
    /// Pairs AB, BC, AC.
    pub pairs: Vec<ReductionPair>,
    pub masked: bool,
    pub tolerance: f64,
}

impl MultipartiteReport {
    pub fn min_fidelity(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.fidelity)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_deviation(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.max_deviation)
            .fold(0.0, f64::max)
    }
}

/// The three 2-qubit reductions of a 3-qubit density matrix, labelled by
/// the traced-out qubit: A drops qubit 0, B drops qubit 1, C drops qubit 2.
pub fn tripartite_reductions(rho: &ComplexMatrix) -> Result<Vec<(String, ComplexMatrix)>> {
    if rho.rows() != 8 {
        return Err(Error::InvalidInput(format!(
            "tripartite reductions need an 8x8 matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    [("A", [1, 2]), ("B", [0, 2]), ("C", [0, 1])]
        .into_iter()
        .map(|(label, keep)| Ok((label.to_string(), partial_trace(rho, &keep)?)))
        .collect()
}

/// Compares the three 2-qubit reductions pairwise; masked when every
/// pairwise fidelity is at least `1 − tol`.
pub fn check_multipartite_reductions(state: &StateVector, tol: f64) -> Result<MultipartiteReport> {
    if state.n_qubits() != 3 {
        return Err(Error::InvalidInput(format!(
            "multipartite check needs 3 qubits, got {}",
            state.n_qubits()
        )));
    }
    let rho = DensityMatrix::from_statevector(state)?;
    compare_reductions(rho.matrix(), tol)
}

/// Same comparison on an arbitrary 3-qubit density matrix (e.g. a
/// tomographic reconstruction).
pub fn compare_reductions(rho: &ComplexMatrix, tol: f64) -> Result<MultipartiteReport> {
    let reductions = tripartite_reductions(rho)?
        .into_iter()
        .map(|(label, m)| Ok((label, DensityMatrix::new(2, crate::linalg::hermitize(&m)?)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::with_capacity(3);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (la, a) = &reductions[i];
        let (lb, b) = &reductions[j];
        pairs.push(ReductionPair {
            left: la.clone(),
            right: lb.clone(),
            fidelity: fidelity(a, b)?,
            max_deviation: a.matrix().max_abs_diff(b.matrix())?,
        });
    }
    let masked = pairs.iter().all(|p| p.fidelity >= 1.0 - tol);
    Ok(MultipartiteReport {
        reductions,
        pairs,
        masked,
        tolerance: tol,
    })
}

/// Encodes a classical bit into a Bell state.
pub fn classical_mask_demo(bit: u8) -> Result<StateVector> {
    build_classical_bit(bit)?.run()
}
