//! Simulation and verification toolkit for quantum information masking.
//!
//! A state `|Ψ⟩ = α₁|Ψ₀⟩ + α₂|Ψ₁⟩` masks the amplitudes when every local
//! reduction is independent of `α₁, α₂`. This crate builds the small
//! circuits involved, computes reductions and fidelities with a
//! self-contained dense linear-algebra layer, simulates shot noise and
//! tomography deterministically from a seed, and checks published hardware
//! numbers against recomputation.
//!
//! ```
//! use qmask::circuits::build_masked_orthogonal;
//! use qmask::density::DensityMatrix;
//! use qmask::linalg::ComplexMatrix;
//!
//! let psi = build_masked_orthogonal().run()?;
//! let rho_b = DensityMatrix::from_statevector(&psi)?.reduce(&[1])?;
//! let half = ComplexMatrix::diag(&[0.5, 0.5]);
//! assert!(rho_b.matrix().max_abs_diff(&half)? < 1e-12);
//! # Ok::<(), qmask::Error>(())
//! ```

pub mod circuits;
pub mod density;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod masking;
pub mod metrics;
pub mod rng;
pub mod stats;
pub mod tomography;

pub use circuits::{Circuit, Gate, GateKind, StateVector};
pub use density::{partial_trace, DensityMatrix};
pub use error::{Error, Result};
pub use experiments::{run_scenario, Mode, Scenario, ScenarioName, ScenarioReport};
pub use linalg::{ComplexMatrix, C64};
pub use masking::{check_bipartite_masking, MaskingInput, MaskingReport};
pub use metrics::{element_distance, fidelity};
pub use tomography::{run_tomography, TomographyResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/states-and-circuits.md")]
    pub struct StatesAndCircuits;
    #[doc = include_str!("../../../book/src/reductions.md")]
    pub struct Reductions;
    #[doc = include_str!("../../../book/src/masking.md")]
    pub struct Masking;
    #[doc = include_str!("../../../book/src/tomography.md")]
    pub struct Tomography;
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub struct Statistics;
    #[doc = include_str!("../../../book/src/published-data.md")]
    pub struct PublishedData;
}
