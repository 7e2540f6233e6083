//! Permissioned vector commitments (PVC) and a permissioned proof of
//! liabilities (PPoL) built on them.
//!
//! A PVC is an epoch-based three-party system: a *provider* maintains a
//! committed database in which every entry belongs to one *user*, and
//! *auditors* verify, from public data alone, that every change to the
//! database was signed by the entry's owner and that the key table only ever
//! grows. The PPoL layer adds a publicly verifiable commitment to the sum of
//! all entries plus a zero-knowledge range proof, which together give an
//! exchange-style liabilities report that off-the-books collusion cannot
//! evade without leaving cryptographic traces.
//!
//! Module map:
//! - [`curve`]: pairing backend contract, MSM, hash-to-group.
//! - [`domain`]: radix-2 evaluation domain, FFT ordering, vanishing division.
//! - [`srs`]: trusted-setup bases (powers, Lagrange, tree-quotient, helper
//!   verification families).
//! - [`amt`]: KZG vector commitments with O(log n)-maintainable proof trees.
//! - [`quotient`]: zerocheck / binarity / sumcheck quotient arguments.
//! - [`apk`]: aggregated-public-key proofs and per-user helper values.
//! - [`append`]: append-only proofs for the committed key table.
//! - [`pvc`]: the provider / user / auditor state machines.
//! - [`ppol`]: liability sum proofs and masked bit-decomposition range proofs.

pub mod amt;
pub mod apk;
pub mod append;
pub mod curve;
pub mod domain;
pub mod ppol;
pub mod pvc;
pub mod quotient;
pub mod srs;

use thiserror::Error;

/// Errors surfaced by the protocol library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("{0} is not a supported power-of-two domain size")]
    InvalidDomainSize(usize),
    #[error("polynomial identity does not hold: {0}")]
    IdentityViolation(&'static str),
    #[error("evaluation is not a bit")]
    NonBinaryValue,
    #[error("database value exceeds the 2^{0} range bound")]
    ValueOutOfRange(u32),
    #[error("index {0} already acted this epoch")]
    DuplicateInEpoch(usize),
    #[error("wrong epoch: expected {expected}, got {got}")]
    WrongEpoch { expected: u64, got: u64 },
    #[error("registration must fill slot {expected}, got {got}")]
    RegistrationOrder { expected: usize, got: usize },
    #[error("key table is full")]
    CapacityExceeded,
    #[error("helper values failed well-formedness verification")]
    BadHelpers,
    #[error("signature verification failed")]
    BadSignature,
    #[error("user already signed in this epoch")]
    DoubleSign,
    #[error("index {0} is not registered (or not yet active)")]
    NotRegistered(usize),
    #[error("update rejected by application policy")]
    PolicyRejected,
    #[error("secure-ceremony setup is a stub; load an SRS file instead")]
    CeremonyUnavailable,
    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<ark_serialize::SerializationError> for Error {
    fn from(e: ark_serialize::SerializationError) -> Self {
        Error::Serialization(e.to_string())
    }
}
