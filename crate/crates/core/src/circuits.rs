//! Gates, pure states, and the statevector simulator.
//!
//! Qubit 0 is the leftmost label of a ket: in `|q0 q1 q2⟩` the basis index is
//! `Σ bit_i · 2^(n−1−i)`. So `|01⟩` is index 1 and `|10⟩` is index 2.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, consts, ComplexMatrix, C64};

/// Largest register the toolkit handles.
pub const MAX_QUBITS: usize = 3;

/// Tolerance on `Σ|amplitude|²` for a [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;

/// Normalized pure state of one to three qubits.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateVectorRepr", into = "StateVectorRepr")]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes, checking length and normalization.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if !(2..=1 << MAX_QUBITS).contains(&len) || !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "state vector length {len} is not 2^n with 1 ≤ n ≤ {MAX_QUBITS}"
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("amplitudes"));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidInput(format!(
                "{n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Outcome probabilities `|amplitude|²` in basis-index order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Column-vector view.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::column(&self.amplitudes)
    }

    /// Copy with the global phase fixed: the largest-magnitude amplitude
    /// (lowest index on ties) is made real and positive.
    pub fn canonical_phase(&self) -> Self {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, z) in self.amplitudes.iter().enumerate() {
            // Near-ties resolve to the lower index so rounding noise cannot
            // flip the reference amplitude.
            if z.norm() > best_mag + 1e-12 {
                best = i;
                best_mag = z.norm();
            }
        }
        let pivot = self.amplitudes[best];
        let rot = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|z| z * rot).collect(),
        }
    }

    /// Max amplitude difference after fixing the global phase of both states.
    pub fn distance_up_to_phase(&self, other: &Self) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, other.n_qubits));
        }
        let a = self.canonical_phase();
        let b = other.canonical_phase();
        Ok(a.amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    /// Applies a gate, returning the new state.
    pub fn apply(&self, gate: &Gate) -> Result<Self> {
        apply(self, gate)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[")?;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:+.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct StateVectorRepr {
    n_qubits: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<StateVectorRepr> for StateVector {
    type Error = Error;

    fn try_from(r: StateVectorRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::Format("re/im lengths differ".into()));
        }
        let s = StateVector::new(r.re.iter().zip(&r.im).map(|(&a, &b)| c(a, b)).collect())?;
        if s.n_qubits != r.n_qubits {
            return Err(Error::Format(format!(
                "n_qubits {} does not match {} amplitudes",
                r.n_qubits,
                s.dim()
            )));
        }
        Ok(s)
    }
}

impl From<StateVector> for StateVectorRepr {
    fn from(s: StateVector) -> Self {
        Self {
            n_qubits: s.n_qubits,
            re: s.amplitudes.iter().map(|z| z.re).collect(),
            im: s.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    H,
    X,
    S,
    Sdg,
    Cnot,
    U3,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            GateKind::U3 => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Cnot => "CNOT",
            GateKind::U3 => "U3",
        };
        f.write_str(s)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "H" => Ok(GateKind::H),
            "X" => Ok(GateKind::X),
            "S" => Ok(GateKind::S),
            "SDG" => Ok(GateKind::Sdg),
            "CNOT" | "CX" => Ok(GateKind::Cnot),
            "U3" => Ok(GateKind::U3),
            other => Err(Error::InvalidGate(format!("unknown gate kind {other:?}"))),
        }
    }
}

/// One gate application. For CNOT, `targets` is `[control, target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    #[serde(default)]
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
}

impl Gate {
    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            params: Vec::new(),
            targets: vec![q],
        }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }

    pub fn sdg(q: usize) -> Self {
        Self::single(GateKind::Sdg, q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            params: Vec::new(),
            targets: vec![control, target],
        }
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Self {
            kind: GateKind::U3,
            params: vec![theta, phi, lambda],
            targets: vec![q],
        }
    }

    /// Checks parameter count, target count and, given a register size,
    /// target range.
    pub fn validate(&self, n_qubits: Option<usize>) -> Result<()> {
        if self.params.len() != self.kind.n_params() {
            return Err(Error::InvalidGate(format!(
                "{} takes {} parameters, got {}",
                self.kind,
                self.kind.n_params(),
                self.params.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGate(format!(
                "{} has non-finite parameters",
                self.kind
            )));
        }
        if self.targets.len() != self.kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} acts on {} qubit(s), got targets {:?}",
                self.kind,
                self.kind.arity(),
                self.targets
            )));
        }
        if self.kind == GateKind::Cnot && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidGate(format!(
                "CNOT control and target coincide ({})",
                self.targets[0]
            )));
        }
        if let Some(n) = n_qubits {
            if let Some(&bad) = self.targets.iter().find(|&&t| t >= n) {
                return Err(Error::QubitOutOfRange {
                    index: bad,
                    n_qubits: n,
                });
            }
        }
        Ok(())
    }
}

/// U3(θ, φ, λ) = [[cos(θ/2), −e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(λ+φ)} cos(θ/2)]].
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows(&[
        [c(co, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(co, lambda + phi)],
    ])
    .expect("static shape")
}

/// Matrix of a gate on its own qubits: 2×2, or 4×4 for CNOT with the control
/// as the leading (left) qubit.
pub fn gate_matrix(gate: &Gate) -> Result<ComplexMatrix> {
    gate.validate(None)?;
    Ok(match gate.kind {
        GateKind::H => consts::hadamard(),
        GateKind::X => consts::pauli_x(),
        GateKind::S => consts::phase_s(),
        GateKind::Sdg => consts::phase_s().dagger(),
        GateKind::U3 => u3_matrix(gate.params[0], gate.params[1], gate.params[2]),
        GateKind::Cnot => {
            let one = c(1.0, 0.0);
            let mut m = ComplexMatrix::zeros(4, 4);
            m[(0, 0)] = one;
            m[(1, 1)] = one;
            m[(2, 3)] = one;
            m[(3, 2)] = one;
            m
        }
    })
}

#[inline]
fn bit_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

/// Applies `gate` to `state` by acting directly on amplitude pairs.
pub fn apply(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let n = state.n_qubits;
    gate.validate(Some(n))?;
    let mut amps = state.amplitudes.clone();
    match gate.kind {
        GateKind::Cnot => {
            let cm = bit_mask(n, gate.targets[0]);
            let tm = bit_mask(n, gate.targets[1]);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        _ => {
            let u = gate_matrix(gate)?;
            let tm = bit_mask(n, gate.targets[0]);
            for i in 0..amps.len() {
                if i & tm == 0 {
                    let (a0, a1) = (amps[i], amps[i | tm]);
                    amps[i] = u.get(0, 0) * a0 + u.get(0, 1) * a1;
                    amps[i | tm] = u.get(1, 0) * a0 + u.get(1, 1) * a1;
                }
            }
        }
    }
    Ok(StateVector {
        n_qubits: n,
        amplitudes: amps,
    })
}

/// Ordered gate list on a fixed register, run from `|0…0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr")]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitRepr {
    n_qubits: usize,
    #[serde(default)]
    gates: Vec<Gate>,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = Error;

    fn try_from(r: CircuitRepr) -> Result<Self> {
        let mut c = Circuit::new(r.n_qubits)?;
        for g in r.gates {
            c.push(g)?;
        }
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidInput(format!(
                "{n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(Some(self.n_qubits))?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Builder-style [`push`](Self::push).
    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn run(&self) -> Result<StateVector> {
        self.run_from(&StateVector::zero(self.n_qubits)?)
    }

    pub fn run_from(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.n_qubits != self.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, initial.n_qubits));
        }
        self.gates
            .iter()
            .try_fold(initial.clone(), |state, g| apply(&state, g))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn build(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Circuit {
    let mut c = Circuit::new(n_qubits).expect("valid register size");
    for g in gates {
        c.push(g).expect("builder gates are valid");
    }
    c
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn build_psi0_bell() -> Circuit {
    build(2, [Gate::h(0), Gate::cnot(0, 1)])
}

/// `(|01⟩ + |10⟩)/√2`.
pub fn build_psi1_bell() -> Circuit {
    build(2, [Gate::h(0), Gate::x(1), Gate::cnot(0, 1)])
}

/// `(1/√2)Ψ₀ + (i/√2)Ψ₁ = ½(|00⟩ + i|01⟩ + i|10⟩ + |11⟩)` from two H, one S,
/// one X and one CNOT.
///
/// `H⊗H` gives `|++⟩`; X on the first qubit leaves `|+⟩` unchanged; S on the
/// second gives `½(1, i, 1, i)`; the CNOT swaps the `|10⟩`/`|11⟩` amplitudes.
pub fn build_masked_orthogonal() -> Circuit {
    build(
        2,
        [
            Gate::h(0),
            Gate::x(0),
            Gate::h(1),
            Gate::s(1),
            Gate::cnot(0, 1),
        ],
    )
}

/// `cos(θ/2)|00⟩ + e^{iφ} sin(θ/2)|11⟩`: U3 on qubit 0, then CNOT(0→1).
pub fn build_arbitrary_psi0(theta: f64, phi: f64, lambda: f64) -> Result<Circuit> {
    check_angles(theta, phi, lambda)?;
    Ok(build(
        2,
        [Gate::u3(0, theta, phi, lambda), Gate::cnot(0, 1)],
    ))
}

/// `cos(θ/2)|01⟩ + e^{iφ} sin(θ/2)|10⟩`: U3 on qubit 0, X on qubit 1, then
/// CNOT(0→1).
pub fn build_arbitrary_psi1(theta: f64, phi: f64, lambda: f64) -> Result<Circuit> {
    check_angles(theta, phi, lambda)?;
    Ok(build(
        2,
        [
            Gate::u3(0, theta, phi, lambda),
            Gate::x(1),
            Gate::cnot(0, 1),
        ],
    ))
}

/// `cos(θ/2)|000⟩ + e^{iφ} sin(θ/2)|111⟩`: U3 on qubit 0, CNOT(0→1), CNOT(1→2).
pub fn build_ghz(theta: f64, phi: f64, lambda: f64) -> Result<Circuit> {
    check_angles(theta, phi, lambda)?;
    Ok(build(
        3,
        [
            Gate::u3(0, theta, phi, lambda),
            Gate::cnot(0, 1),
            Gate::cnot(1, 2),
        ],
    ))
}

/// Classical-bit encoding: 0 → `(|00⟩+|11⟩)/√2`, 1 → `(|00⟩−|11⟩)/√2`.
pub fn build_classical_bit(bit: u8) -> Result<Circuit> {
    match bit {
        0 => Ok(build_psi0_bell()),
        1 => Ok(build(2, [Gate::x(0), Gate::h(0), Gate::cnot(0, 1)])),
        b => Err(Error::InvalidInput(format!(
            "classical bit must be 0 or 1, got {b}"
        ))),
    }
}

fn check_angles(theta: f64, phi: f64, lambda: f64) -> Result<()> {
    if [theta, phi, lambda].iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "angles must be finite, got ({theta}, {phi}, {lambda})"
        )))
    }
}

/// Angle sets used for the arbitrary-coefficient carriers.
pub const ARBITRARY_PSI0_ANGLES: (f64, f64, f64) = (PI / 4.0, PI / 4.0, PI / 5.0);
pub const ARBITRARY_PSI1_ANGLES: (f64, f64, f64) = (PI / 3.0, PI / 4.0, PI / 5.0);

/// The two Bell carriers `(Ψ₀, Ψ₁)`, computed directly rather than simulated.
pub fn bell_carriers() -> (StateVector, StateVector) {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let z = c(0.0, 0.0);
    (
        StateVector::new(vec![h, z, z, h]).expect("normalized"),
        StateVector::new(vec![z, h, h, z]).expect("normalized"),
    )
}
