//! State-vector simulation of the qubits shared by every node in the network.
//!
//! All live qubits belong to one [`QuantumRegister`], which stores the joint
//! state as a dense vector of 2^n complex amplitudes. Conventions:
//!
//! * Ket order follows allocation order: the earliest-allocated live qubit is
//!   the leftmost symbol in printed kets (the most significant bit of the
//!   amplitude index).
//! * After every renormalization the global phase is chosen so that the first
//!   nonzero amplitude is real and non-negative, keeping printed states
//!   reproducible.
//! * The register RNG is consumed by `measure` only, one draw per call, so a
//!   seed fixes the full outcome sequence of a run.
//!
//! Measured qubits collapse to a basis factor and are immediately traced out
//! of the vector; their handles stay valid for outcome lookups but reject
//! further gates.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Complex coefficient of one basis state.
pub type Amplitude = Complex64;

/// Most live qubits a register will hold; the amplitude vector doubles per
/// qubit, so this caps memory at a desk-scale 2^24 entries.
pub const QUBIT_CAP: usize = 24;

/// `|alpha|^2 + |beta|^2` must be within this of 1 for caller-supplied
/// states. Loose enough to accept amplitudes quoted to four decimal places;
/// accepted states are renormalized to machine precision internally.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-4;

/// Bound on `|sum of squared amplitudes - 1|` maintained across operations.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Joint-state reads require the listed qubits to factor from the rest of
/// the register within this bound.
pub const FACTOR_TOLERANCE: f64 = 1e-9;

/// Printed states omit terms with coefficient modulus below this, so values
/// that would render as 0.0000 never appear.
pub const PRINT_THRESHOLD: f64 = 5e-5;

const MIN_POSTSELECT_PROB: f64 = 1e-12;

/// Opaque handle to a qubit. Handles are unique per register and never
/// reused, even after the qubit is measured and traced out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitId(u64);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Lifecycle tag of a handle: still part of the joint state, or collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitState {
    Live,
    Measured(u8),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QsimError {
    #[error("amplitudes are not normalizable: |alpha|^2 + |beta|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("register is full: cap of {cap} live qubits reached")]
    RegisterFull { cap: usize },
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("qubit {0} was already measured")]
    AlreadyMeasured(QubitId),
    #[error("operation needs two distinct qubits, got {0} twice")]
    SameQubit(QubitId),
    #[error("duplicate qubit {0} in peek list")]
    DuplicateQubit(QubitId),
    #[error("peek list may not be empty")]
    EmptyPeek,
    #[error("listed qubits are entangled with the rest of the register")]
    EntangledSubset,
    #[error("outcome {outcome} on qubit {qubit} has probability ~0 and cannot be postselected")]
    ImpossibleOutcome { qubit: QubitId, outcome: u8 },
}

type Result<T> = std::result::Result<T, QsimError>;

/// Joint state vector of all live qubits plus bookkeeping for measured ones.
#[derive(Debug, Clone)]
pub struct QuantumRegister {
    amps: Vec<Complex64>,
    /// Live qubits in allocation order; index 0 is the leftmost ket symbol.
    order: Vec<QubitId>,
    measured: BTreeMap<QubitId, u8>,
    next_id: u64,
    cap: usize,
    rng: ChaCha8Rng,
    ops: u64,
    max_norm_error: f64,
}

impl QuantumRegister {
    pub fn new(seed: u64) -> Self {
        Self::with_capacity(seed, QUBIT_CAP)
    }

    /// Register with a smaller cap; used by tests that exercise the limit
    /// without allocating a 2^24-entry vector.
    pub fn with_capacity(seed: u64, cap: usize) -> Self {
        Self {
            amps: vec![Complex64::new(1.0, 0.0)],
            order: Vec::new(),
            measured: BTreeMap::new(),
            next_id: 0,
            cap: cap.min(QUBIT_CAP),
            rng: ChaCha8Rng::seed_from_u64(seed),
            ops: 0,
            max_norm_error: 0.0,
        }
    }

    /// Appends a fresh qubit in state `alpha|0> + beta|1>`.
    ///
    /// The input must be normalized within [`INPUT_NORM_TOLERANCE`]; it is
    /// renormalized to machine precision before entering the register.
    pub fn alloc_qubit(&mut self, alpha: Complex64, beta: Complex64) -> Result<QubitId> {
        let (alpha, beta) = validate_state(alpha, beta)?;
        if self.order.len() >= self.cap {
            return Err(QsimError::RegisterFull { cap: self.cap });
        }
        let id = QubitId(self.next_id);
        self.next_id += 1;

        let mut next = Vec::with_capacity(self.amps.len() * 2);
        for &a in &self.amps {
            next.push(a * alpha);
            next.push(a * beta);
        }
        self.amps = next;
        self.order.push(id);
        self.fix_global_phase();
        Ok(id)
    }

    pub fn live_count(&self) -> usize {
        self.order.len()
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    /// Live qubits in allocation order.
    pub fn live_qubits(&self) -> &[QubitId] {
        &self.order
    }

    pub fn state_of(&self, q: QubitId) -> Option<QubitState> {
        if self.order.contains(&q) {
            Some(QubitState::Live)
        } else {
            self.measured.get(&q).map(|&bit| QubitState::Measured(bit))
        }
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        matches!(self.state_of(q), Some(QubitState::Live))
    }

    /// Raw amplitude vector, for inspection and test oracles.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Number of gate and measurement operations applied so far.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    /// Largest `|norm^2 - 1|` observed after any operation so far.
    pub fn max_norm_error(&self) -> f64 {
        self.max_norm_error
    }

    pub fn h(&mut self, q: QubitId) -> Result<()> {
        let mask = self.mask_of(q)?;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = FRAC_1_SQRT_2 * (a + b);
                self.amps[j] = FRAC_1_SQRT_2 * (a - b);
            }
        }
        self.note_op();
        Ok(())
    }

    pub fn x(&mut self, q: QubitId) -> Result<()> {
        let mask = self.mask_of(q)?;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
        self.note_op();
        Ok(())
    }

    pub fn z(&mut self, q: QubitId) -> Result<()> {
        let mask = self.mask_of(q)?;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
        self.note_op();
        Ok(())
    }

    pub fn cnot(&mut self, control: QubitId, target: QubitId) -> Result<()> {
        if control == target {
            return Err(QsimError::SameQubit(control));
        }
        let cmask = self.mask_of(control)?;
        let tmask = self.mask_of(target)?;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        self.note_op();
        Ok(())
    }

    /// Projective Z-basis measurement. Consumes exactly one RNG draw; the
    /// collapsed qubit is traced out of the vector and its handle keeps the
    /// outcome.
    pub fn measure(&mut self, q: QubitId) -> Result<u8> {
        let mask = self.mask_of(q)?;
        let prob_zero: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = if self.rng.gen::<f64>() < prob_zero { 0 } else { 1 };
        self.collapse(q, mask, outcome, prob_zero);
        Ok(outcome)
    }

    /// Projects a qubit onto a chosen outcome without consuming the RNG.
    ///
    /// Errors if that outcome has (numerically) zero probability. This is the
    /// hook tests use to force each measurement branch of a protocol.
    pub fn postselect(&mut self, q: QubitId, outcome: u8) -> Result<()> {
        let mask = self.mask_of(q)?;
        let prob_zero: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let prob = if outcome == 0 { prob_zero } else { self.norm_sqr() - prob_zero };
        if prob < MIN_POSTSELECT_PROB {
            return Err(QsimError::ImpossibleOutcome { qubit: q, outcome });
        }
        self.collapse(q, mask, outcome, prob_zero);
        Ok(())
    }

    /// Read-only joint state of the listed qubits, as (basis label, amplitude)
    /// pairs in binary order. Ket symbols follow allocation order, not list
    /// order. Errors if the listed qubits are entangled with the rest of the
    /// register.
    pub fn peek_joint_state(&self, qs: &[QubitId]) -> Result<Vec<(String, Amplitude)>> {
        let marginal = self.marginal(qs)?;
        let width = qs.len();
        Ok(marginal
            .into_iter()
            .enumerate()
            .map(|(i, a)| (format!("{:0width$b}", i, width = width), a))
            .collect())
    }

    /// `|<target|q>|^2` for a single unentangled qubit. The target amplitudes
    /// are validated and renormalized exactly like `alloc_qubit` input.
    pub fn fidelity(&self, q: QubitId, alpha: Complex64, beta: Complex64) -> Result<f64> {
        let (alpha, beta) = validate_state(alpha, beta)?;
        let m = self.marginal(&[q])?;
        Ok((alpha.conj() * m[0] + beta.conj() * m[1]).norm_sqr())
    }

    fn mask_of(&self, q: QubitId) -> Result<usize> {
        match self.order.iter().position(|&other| other == q) {
            // order[0] is the leftmost ket symbol = most significant bit.
            Some(pos) => Ok(1 << (self.order.len() - 1 - pos)),
            None => {
                if self.measured.contains_key(&q) {
                    Err(QsimError::AlreadyMeasured(q))
                } else {
                    Err(QsimError::UnknownQubit(q))
                }
            }
        }
    }

    fn collapse(&mut self, q: QubitId, mask: usize, outcome: u8, prob_zero: f64) {
        let prob = if outcome == 0 { prob_zero } else { self.norm_sqr() - prob_zero };
        let scale = 1.0 / prob.sqrt();
        let want = if outcome == 0 { 0 } else { mask };
        // Project onto the outcome and trace the collapsed qubit out in one
        // pass; dropping a basis-state factor leaves the other amplitudes
        // untouched apart from renormalization.
        let mut next = Vec::with_capacity(self.amps.len() / 2);
        for (i, &a) in self.amps.iter().enumerate() {
            if i & mask == want {
                next.push(a * scale);
            }
        }
        self.amps = next;
        let pos = self.order.iter().position(|&other| other == q).unwrap();
        self.order.remove(pos);
        self.measured.insert(q, outcome);
        self.fix_global_phase();
        self.note_op();
    }

    /// Multiplies by a global phase so the first nonzero amplitude is real
    /// and non-negative.
    fn fix_global_phase(&mut self) {
        let Some(first) = self.amps.iter().find(|a| a.norm_sqr() > 1e-24) else {
            return;
        };
        if first.im == 0.0 && first.re >= 0.0 {
            return;
        }
        let phase = first / first.norm();
        let correction = phase.conj();
        for a in &mut self.amps {
            *a *= correction;
        }
    }

    fn note_op(&mut self) {
        self.ops += 1;
        let err = (self.norm_sqr() - 1.0).abs();
        if err > self.max_norm_error {
            self.max_norm_error = err;
        }
    }

    /// Pure state of the listed qubits, extracted by factoring the register
    /// as (listed) x (rest) and checking the factorization is exact within
    /// [`FACTOR_TOLERANCE`].
    fn marginal(&self, qs: &[QubitId]) -> Result<Vec<Complex64>> {
        if qs.is_empty() {
            return Err(QsimError::EmptyPeek);
        }
        let mut positions = Vec::with_capacity(qs.len());
        for &q in qs {
            let mask = self.mask_of(q)?;
            if positions.contains(&mask) {
                return Err(QsimError::DuplicateQubit(q));
            }
            positions.push(mask);
        }
        // Ket order = allocation order: sort the selected bit masks from most
        // significant down.
        positions.sort_unstable_by(|a, b| b.cmp(a));

        let n = self.order.len();
        let in_dim = 1usize << positions.len();
        let out_dim = 1usize << (n - positions.len());
        let out_masks: Vec<usize> = (0..n)
            .map(|k| 1 << (n - 1 - k))
            .filter(|m| !positions.contains(m))
            .collect();

        // m[in_idx * out_dim + out_idx] = amplitude, i.e. the state vector
        // viewed as an in_dim x out_dim matrix; a product state is rank one.
        let mut m = vec![Complex64::new(0.0, 0.0); in_dim * out_dim];
        for (i, &a) in self.amps.iter().enumerate() {
            let mut in_idx = 0;
            for &mask in &positions {
                in_idx = (in_idx << 1) | usize::from(i & mask != 0);
            }
            let mut out_idx = 0;
            for &mask in &out_masks {
                out_idx = (out_idx << 1) | usize::from(i & mask != 0);
            }
            m[in_idx * out_dim + out_idx] = a;
        }

        let (j0, col_norm_sqr) = (0..out_dim)
            .map(|j| (j, (0..in_dim).map(|i| m[i * out_dim + j].norm_sqr()).sum::<f64>()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let col_norm = col_norm_sqr.sqrt();
        let mut inside: Vec<Complex64> =
            (0..in_dim).map(|i| m[i * out_dim + j0] / col_norm).collect();

        // Rank-one check: every column must be proportional to `inside`.
        for j in 0..out_dim {
            let coef: Complex64 =
                (0..in_dim).map(|i| inside[i].conj() * m[i * out_dim + j]).sum();
            for i in 0..in_dim {
                if (m[i * out_dim + j] - inside[i] * coef).norm() > FACTOR_TOLERANCE {
                    return Err(QsimError::EntangledSubset);
                }
            }
        }

        fix_phase(&mut inside);
        Ok(inside)
    }
}

/// Validates a caller-supplied qubit state and renormalizes it exactly.
fn validate_state(alpha: Complex64, beta: Complex64) -> Result<(Complex64, Complex64)> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(QsimError::NonFinite);
    }
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(QsimError::NotNormalized { norm_sqr });
    }
    let scale = 1.0 / norm_sqr.sqrt();
    Ok((alpha * scale, beta * scale))
}

fn fix_phase(amps: &mut [Complex64]) {
    let Some(first) = amps.iter().find(|a| a.norm_sqr() > 1e-24) else {
        return;
    };
    if first.im == 0.0 && first.re >= 0.0 {
        return;
    }
    let correction = (first / first.norm()).conj();
    for a in amps {
        *a *= correction;
    }
}

/// Renders a peeked state in the trace format, e.g.
/// `(0.4091)|0> + (0.9125)|1>`. Terms with coefficient modulus below
/// [`PRINT_THRESHOLD`] are omitted; complex coefficients render as
/// `(re+imi)`.
pub fn format_state(entries: &[(String, Amplitude)]) -> String {
    let mut terms = Vec::new();
    for (label, amp) in entries {
        if amp.norm() < PRINT_THRESHOLD {
            continue;
        }
        terms.push(format!("({})|{}>", format_coefficient(*amp), label));
    }
    terms.join(" + ")
}

fn format_coefficient(amp: Complex64) -> String {
    if amp.im.abs() < PRINT_THRESHOLD {
        fixed4(amp.re)
    } else if amp.re.abs() < PRINT_THRESHOLD {
        format!("{}i", fixed4(amp.im))
    } else {
        format!("{}{:+.4}i", fixed4(amp.re), amp.im)
    }
}

fn fixed4(x: f64) -> String {
    let s = format!("{:.4}", x);
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}
