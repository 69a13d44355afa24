//! Teleportation primitives: Bell-pair creation, Bell-state measurement, and
//! recovery of the payload state from the classical two-bit result.
//!
//! A hop teleports qubit `s` over a shared pair `(a, b)`: the sender runs
//! `CNOT(s -> a); H(s)` and measures both, producing a [`BsmResult`]; the
//! receiver applies `X` then `Z` to `b` according to the two bits. The
//! measurements land on each result with probability 1/4 regardless of the
//! payload, and the recovered state equals the input exactly.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::qsim::{QsimError, QuantumRegister, QubitId};

/// Classical outcome of a Bell-state measurement, packed as
/// `2 * m_source + m_epr` into 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BsmResult(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("bsm result must be in 0..=3, got {0}")]
pub struct InvalidBsmValue(pub u8);

impl BsmResult {
    pub fn new(value: u8) -> Result<Self, InvalidBsmValue> {
        if value <= 3 {
            Ok(Self(value))
        } else {
            Err(InvalidBsmValue(value))
        }
    }

    pub fn from_bits(m_source: bool, m_epr: bool) -> Self {
        Self(u8::from(m_source) << 1 | u8::from(m_epr))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Measurement bit of the payload qubit; drives the `Z` correction.
    pub fn m_source(self) -> bool {
        self.0 & 0b10 != 0
    }

    /// Measurement bit of the sender's pair half; drives the `X` correction.
    pub fn m_epr(self) -> bool {
        self.0 & 0b01 != 0
    }

    pub const ALL: [BsmResult; 4] = [BsmResult(0), BsmResult(1), BsmResult(2), BsmResult(3)];
}

impl fmt::Display for BsmResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for BsmResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for BsmResult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = u8::deserialize(deserializer)?;
        BsmResult::new(value).map_err(D::Error::custom)
    }
}

/// Allocates two qubits and entangles them into `(|00> + |11>)/sqrt(2)`.
/// Returns the halves in allocation order.
pub fn make_bell_pair(reg: &mut QuantumRegister) -> Result<(QubitId, QubitId), QsimError> {
    if reg.live_count() + 2 > reg.capacity() {
        return Err(QsimError::RegisterFull { cap: reg.capacity() });
    }
    let one = num_complex::Complex64::new(1.0, 0.0);
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let a = reg.alloc_qubit(one, zero)?;
    let b = reg.alloc_qubit(one, zero)?;
    reg.h(a)?;
    reg.cnot(a, b)?;
    Ok((a, b))
}

/// Projects `source` and `epr_half` onto the Bell basis: `CNOT(source ->
/// epr_half); H(source)` followed by measuring both, source bit first. Both
/// qubits are consumed and accept no further gates.
pub fn bell_state_measurement(
    reg: &mut QuantumRegister,
    source: QubitId,
    epr_half: QubitId,
) -> Result<BsmResult, QsimError> {
    reg.cnot(source, epr_half)?;
    reg.h(source)?;
    let m_source = reg.measure(source)?;
    let m_epr = reg.measure(epr_half)?;
    Ok(BsmResult::from_bits(m_source == 1, m_epr == 1))
}

/// [`bell_state_measurement`] with both outcomes forced by postselection
/// instead of drawn from the register RNG. Used by tests that must visit
/// every measurement branch.
pub fn bell_state_measurement_forced(
    reg: &mut QuantumRegister,
    source: QubitId,
    epr_half: QubitId,
    result: BsmResult,
) -> Result<BsmResult, QsimError> {
    reg.cnot(source, epr_half)?;
    reg.h(source)?;
    reg.postselect(source, u8::from(result.m_source()))?;
    reg.postselect(epr_half, u8::from(result.m_epr()))?;
    Ok(result)
}

/// Applies the Pauli corrections that turn the receiver's pair half into the
/// teleported payload: `X` if `m_epr`, then `Z` if `m_source`.
pub fn quantum_state_recovery(
    reg: &mut QuantumRegister,
    q: QubitId,
    result: BsmResult,
) -> Result<(), QsimError> {
    if !reg.is_live(q) {
        // Surface the usual lifecycle errors even when no correction fires.
        return match reg.state_of(q) {
            Some(_) => Err(QsimError::AlreadyMeasured(q)),
            None => Err(QsimError::UnknownQubit(q)),
        };
    }
    if result.m_epr() {
        reg.x(q)?;
    }
    if result.m_source() {
        reg.z(q)?;
    }
    Ok(())
}
