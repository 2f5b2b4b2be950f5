//! Exact linear algebra for a single three-level system.
//!
//! All protocol unitaries are diagonal phase matrices `diag(1, e^{iφ₁}, e^{iφ₂})`,
//! so they are stored as a pair of angles and composed by adding phases.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use nalgebra::{Complex, Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Tolerance on normalization, hermiticity and positivity of states.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Tolerance on the completeness relation of Kraus operators.
pub const CHANNEL_TOLERANCE: f64 = 1e-10;

const THIRD_TURN: f64 = TAU / 3.0;

fn max_abs(m: &Matrix3<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A number in `{0, 1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Trit(u8);

impl Trit {
    pub const ZERO: Trit = Trit(0);
    pub const ONE: Trit = Trit(1);
    pub const TWO: Trit = Trit(2);
    pub const ALL: [Trit; 3] = [Trit::ZERO, Trit::ONE, Trit::TWO];

    pub fn new(value: u8) -> Result<Self> {
        if value < 3 {
            Ok(Trit(value))
        } else {
            Err(Error::OutOfAlphabet(value))
        }
    }

    /// Reduces any integer mod 3.
    pub fn wrapping(value: i64) -> Self {
        Trit(value.rem_euclid(3) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Trit {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Trit::new(value)
    }
}

impl From<Trit> for u8 {
    fn from(t: Trit) -> u8 {
        t.0
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a general applies the basis-II phase before encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisChoice {
    I,
    II,
}

impl BasisChoice {
    pub const ALL: [BasisChoice; 2] = [BasisChoice::I, BasisChoice::II];
}

/// A normalized amplitude triple over `|0⟩, |1⟩, |2⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vector3<C64>,
}

impl PureState {
    pub fn new(amplitudes: [C64; 3]) -> Result<Self> {
        let state = PureState {
            amplitudes: Vector3::from(amplitudes),
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Computational basis ket `|k⟩`.
    pub fn basis_ket(k: Trit) -> Self {
        let mut amplitudes = Vector3::zeros();
        amplitudes[k.value() as usize] = C64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn amplitudes(&self) -> [C64; 3] {
        [self.amplitudes[0], self.amplitudes[1], self.amplitudes[2]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// The projector `|s⟩⟨s|`.
    pub fn density(&self) -> MixedState {
        MixedState {
            matrix: self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn detection_probability(&self) -> f64 {
        prepare_initial().inner(self).norm_sqr().clamp(0.0, 1.0)
    }
}

/// A density operator on the qutrit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedState {
    matrix: Matrix3<C64>,
}

impl MixedState {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix3<C64>) -> Result<Self> {
        let state = MixedState { matrix };
        state.check()?;
        Ok(state)
    }

    pub fn maximally_mixed() -> Self {
        MixedState {
            matrix: Matrix3::identity() / C64::new(3.0, 0.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr(ρ²)`; 1 for pure states, 1/3 for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let hermitian = (self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let ev = hermitian.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn check(&self) -> Result<()> {
        let asym = max_abs(&(self.matrix - self.matrix.adjoint()));
        if asym > STATE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix("not Hermitian"));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix("trace is not 1"));
        }
        if self.eigenvalues()[0] < -STATE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix("negative eigenvalue"));
        }
        Ok(())
    }

    /// `⟨φ|ρ|φ⟩`.
    pub fn expectation(&self, s: &PureState) -> f64 {
        s.amplitudes.dotc(&(self.matrix * s.amplitudes)).re
    }

    pub fn detection_probability(&self) -> f64 {
        self.expectation(&prepare_initial()).clamp(0.0, 1.0)
    }
}

impl From<PureState> for MixedState {
    fn from(s: PureState) -> Self {
        s.density()
    }
}

/// States whose `|ψ₀⟩` detection probability can be read off.
pub trait Detectable {
    fn detection_probability(&self) -> f64;
}

impl Detectable for PureState {
    fn detection_probability(&self) -> f64 {
        PureState::detection_probability(self)
    }
}

impl Detectable for MixedState {
    fn detection_probability(&self) -> f64 {
        MixedState::detection_probability(self)
    }
}

/// Probability that C's `|ψ₀⟩` detector fires.
pub fn detection_probability<S: Detectable>(s: &S) -> f64 {
    s.detection_probability()
}

/// The diagonal unitary `diag(1, e^{iφ₁}, e^{iφ₂})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseOperator {
    phases: [f64; 2],
}

impl PhaseOperator {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        PhaseOperator {
            phases: [phi1.rem_euclid(TAU), phi2.rem_euclid(TAU)],
        }
    }

    pub fn identity() -> Self {
        PhaseOperator { phases: [0.0, 0.0] }
    }

    /// Angles in `[0, 2π)`.
    pub fn phases(&self) -> [f64; 2] {
        self.phases
    }

    pub fn compose(&self, other: &PhaseOperator) -> PhaseOperator {
        PhaseOperator::new(
            self.phases[0] + other.phases[0],
            self.phases[1] + other.phases[1],
        )
    }

    pub fn compose_all<'a>(ops: impl IntoIterator<Item = &'a PhaseOperator>) -> PhaseOperator {
        ops.into_iter()
            .fold(PhaseOperator::identity(), |acc, op| acc.compose(op))
    }

    pub fn is_identity(&self) -> bool {
        self.phases.iter().all(|&p| p.min(TAU - p) <= STATE_TOLERANCE)
    }

    pub fn diagonal(&self) -> [C64; 3] {
        [
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, self.phases[0]),
            C64::from_polar(1.0, self.phases[1]),
        ]
    }

    pub fn matrix(&self) -> Matrix3<C64> {
        Matrix3::from_diagonal(&Vector3::from(self.diagonal()))
    }
}

/// Identity for basis I, `diag(1, ω, ω)` for basis II, with `ω = e^{2πi/3}`.
pub fn basis_operator(basis: BasisChoice) -> PhaseOperator {
    match basis {
        BasisChoice::I => PhaseOperator::identity(),
        BasisChoice::II => PhaseOperator::new(THIRD_TURN, THIRD_TURN),
    }
}

/// `diag(1, ωⁿ, ω⁻ⁿ)`.
pub fn encode_operator(n: Trit) -> PhaseOperator {
    let angle = THIRD_TURN * f64::from(n.value());
    PhaseOperator::new(angle, -angle)
}

pub fn apply_operator(op: &PhaseOperator, s: &PureState) -> PureState {
    let d = op.diagonal();
    PureState {
        amplitudes: Vector3::new(
            d[0] * s.amplitudes[0],
            d[1] * s.amplitudes[1],
            d[2] * s.amplitudes[2],
        ),
    }
}

/// `U ρ U†`.
pub fn apply_operator_mixed(op: &PhaseOperator, rho: &MixedState) -> MixedState {
    let d = op.diagonal();
    let matrix = Matrix3::from_fn(|r, c| d[r] * rho.matrix[(r, c)] * d[c].conj());
    MixedState { matrix }
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackChannel {
    kraus_operators: Vec<Matrix3<C64>>,
}

impl AttackChannel {
    pub fn new(kraus_operators: Vec<Matrix3<C64>>) -> Result<Self> {
        if kraus_operators.is_empty() {
            return Err(Error::EmptyChannel);
        }
        let sum: Matrix3<C64> = kraus_operators.iter().map(|k| k.adjoint() * k).sum();
        let deviation = max_abs(&(sum - Matrix3::identity()));
        if deviation > CHANNEL_TOLERANCE {
            return Err(Error::NotTracePreserving(deviation));
        }
        Ok(AttackChannel { kraus_operators })
    }

    pub fn identity() -> Self {
        AttackChannel {
            kraus_operators: vec![Matrix3::identity()],
        }
    }

    /// Keeps the state with probability `1 − p`, otherwise measures it in the
    /// computational basis and forgets the result. `p = 1` is full dephasing.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("dephasing strength {p} not in [0, 1]")));
        }
        let mut ops = Vec::with_capacity(4);
        if p < 1.0 {
            ops.push(Matrix3::identity() * C64::new((1.0 - p).sqrt(), 0.0));
        }
        if p > 0.0 {
            for k in 0..3 {
                let mut proj = Matrix3::zeros();
                proj[(k, k)] = C64::new(p.sqrt(), 0.0);
                ops.push(proj);
            }
        }
        AttackChannel::new(ops)
    }

    pub fn full_dephasing() -> Self {
        AttackChannel::dephasing(1.0).expect("p = 1 is in range")
    }

    /// A single diagonal unitary, e.g. an unannounced `U(n)`.
    pub fn phase_shift(op: &PhaseOperator) -> Self {
        AttackChannel {
            kraus_operators: vec![op.matrix()],
        }
    }

    /// Coupling to a qubit ancilla: with amplitude `sin θ` the ancilla flips
    /// when the qutrit is in `|0⟩`, then the ancilla is traced out.
    pub fn ancilla_coupling(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut keep = Matrix3::identity();
        keep[(0, 0)] = C64::new(c, 0.0);
        let mut flip = Matrix3::zeros();
        flip[(0, 0)] = C64::new(s, 0.0);
        AttackChannel {
            kraus_operators: vec![keep, flip],
        }
    }

    /// Average effect of measuring in `basis` and resending the observed state.
    pub fn measure_and_resend(basis: MeasurementBasis) -> Self {
        AttackChannel {
            kraus_operators: basis.states().iter().map(|s| s.density().matrix).collect(),
        }
    }

    pub fn kraus_operators(&self) -> &[Matrix3<C64>] {
        &self.kraus_operators
    }
}

/// `Σ Kᵢ ρ Kᵢ†`.
pub fn apply_channel(channel: &AttackChannel, rho: &MixedState) -> MixedState {
    let matrix = channel
        .kraus_operators
        .iter()
        .map(|k| k * rho.matrix * k.adjoint())
        .sum();
    MixedState { matrix }
}

pub fn prepare_initial() -> PureState {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    PureState {
        amplitudes: Vector3::new(a, a, a),
    }
}

/// `|ψ_k⟩ = (1/√3) Σ_j e^{2πijk/3} |j⟩`; index 0 is `|ψ₀⟩`.
pub fn fourier_basis() -> [PureState; 3] {
    let scale = 1.0 / 3f64.sqrt();
    let ket = |k: usize| PureState {
        amplitudes: Vector3::from_fn(|j, _| C64::from_polar(scale, THIRD_TURN * (j * k) as f64)),
    };
    [ket(0), ket(1), ket(2)]
}

pub fn computational_basis() -> [PureState; 3] {
    Trit::ALL.map(PureState::basis_ket)
}

/// An orthonormal basis an interceptor can measure in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    Computational,
    Fourier,
}

impl MeasurementBasis {
    pub fn states(self) -> [PureState; 3] {
        match self {
            MeasurementBasis::Computational => computational_basis(),
            MeasurementBasis::Fourier => fourier_basis(),
        }
    }
}

/// Born-rule probabilities of `rho` in an orthonormal basis.
pub fn probabilities_in_basis(rho: &MixedState, basis: &[PureState; 3]) -> [f64; 3] {
    basis.map(|s| rho.expectation(&s).max(0.0))
}

/// Probabilities of C's three Fourier-basis outcomes.
pub fn outcome_probabilities(rho: &MixedState) -> [f64; 3] {
    probabilities_in_basis(rho, &fourier_basis())
}

/// Index of the Fourier projector that fired; 0 means `|ψ₀⟩` was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct MeasurementOutcome(u8);

impl MeasurementOutcome {
    pub const DETECTED: MeasurementOutcome = MeasurementOutcome(0);

    pub fn new(index: u8) -> Result<Self> {
        Trit::new(index).map(|t| MeasurementOutcome(t.value()))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_detection(self) -> bool {
        self.0 == 0
    }
}

impl TryFrom<u8> for MeasurementOutcome {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        MeasurementOutcome::new(value)
    }
}

impl From<MeasurementOutcome> for u8 {
    fn from(o: MeasurementOutcome) -> u8 {
        o.0
    }
}

/// Draws an outcome index. Probabilities within `STATE_TOLERANCE` of 0 are
/// treated as exactly 0, so deterministic outcomes never flip on rounding.
pub fn sample_outcome<R: Rng + ?Sized>(probs: [f64; 3], rng: &mut R) -> MeasurementOutcome {
    let snapped = probs.map(|p| if p <= STATE_TOLERANCE { 0.0 } else { p });
    let total: f64 = snapped.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, p) in snapped.iter().enumerate() {
        acc += p;
        if *p > 0.0 && u < acc {
            return MeasurementOutcome(k as u8);
        }
    }
    // u landed on the upper edge; return the last outcome with mass
    let last = snapped.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    MeasurementOutcome(last as u8)
}

/// Projector onto `(|0⟩ + |1⟩)/√2`; handy in tests as a non-diagonal state.
pub fn plus_01() -> PureState {
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState {
        amplitudes: Vector3::new(a, a, C64::new(0.0, 0.0)),
    }
}
