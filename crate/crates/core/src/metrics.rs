//! Closeness measures between density matrices.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitize, matrix_sqrt_psd, ComplexMatrix};

/// Eigenvalues of measured matrices down to this value are clamped to zero by
/// [`condition_density`]; anything lower is rejected.
pub const NOISE_CLAMP: f64 = -1e-3;

/// `Σ_ij |a_ij − b_ij|`, halved when `halve` is set.
pub fn element_distance(a: &ComplexMatrix, b: &ComplexMatrix, halve: bool) -> Result<f64> {
    let total: f64 = a.sub(b)?.entries().iter().map(|z| z.norm()).sum();
    Ok(if halve { 0.5 * total } else { total })
}

/// Uhlmann fidelity `F = Tr √(√a · b · √a)` (not squared).
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.matrix().shape(),
            right: b.matrix().shape(),
        });
    }
    uhlmann_trace(a.matrix(), b.matrix())
}

/// Uhlmann fidelity of two positive operators that need not have unit trace.
///
/// Both inputs are hermitized and their negative eigenvalues clipped to zero,
/// with no renormalization. This is how printed (rounded, slightly
/// unphysical) hardware matrices are compared as given.
pub fn operator_fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let clip = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(hermitian_eig(&hermitize(m)?)?.map_spectrum(|l| l.max(0.0)))
    };
    uhlmann_trace(&clip(a)?, &clip(b)?)
}

fn uhlmann_trace(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let root = matrix_sqrt_psd(a)?;
    let inner = root.matmul(b)?.matmul(&root)?;
    Ok(matrix_sqrt_psd(&hermitize(&inner)?)?.trace().re)
}

/// Single-qubit fidelity from `F² = Tr(ab) + 2√(det a · det b)`.
pub fn fidelity_qubit_closed_form(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "closed form needs 2x2 matrices, got {0}x{0} and {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    let det = |m: &ComplexMatrix| (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
    let overlap = a.matrix().matmul(b.matrix())?.trace().re;
    let cross = (det(a.matrix()).max(0.0) * det(b.matrix()).max(0.0)).sqrt();
    Ok((overlap + 2.0 * cross).max(0.0).sqrt())
}

/// Turns a measured or printed matrix into a valid density matrix.
///
/// Hermitizes, zeroes eigenvalues in `[NOISE_CLAMP, 0)`, and renormalizes the
/// trace. An eigenvalue below `NOISE_CLAMP` is reported as an error.
pub fn condition_density(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eig(&hermitize(raw)?)?;
    if let Some(&lowest) = eig.values.last() {
        if lowest < NOISE_CLAMP {
            return Err(Error::InvalidDensity(format!(
                "eigenvalue {lowest:.6} is below the noise clamp {NOISE_CLAMP}"
            )));
        }
    }
    let total: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::InvalidDensity("no positive spectrum".into()));
    }
    let m = eig.map_spectrum(|l| l.max(0.0) / total);
    DensityMatrix::from_matrix(hermitize(&m)?)
}
