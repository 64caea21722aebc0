//! Information-theoretic secure computation for curious players.
//!
//! Secrets live as Shamir sharings over a prime field. Addition is local;
//! multiplication multiplies shares locally (a degree-2t sharing) and then
//! runs the degree-reduction sub-protocol driven by the public matrix C.
//! Circuits are evaluated gate by gate, and every value a player sees is
//! recorded so coalitions' views can be audited for leakage.

mod audit;
mod circuit;
mod field;
mod reduction;
mod session;
mod shamir;

use thiserror::Error;

pub use audit::{privacy_audit, AuditReport, AuditWitness};
pub use circuit::{evaluate_circuit, Circuit, CircuitFile, Evaluation, Gate, GateFile, OutputValue};
pub use field::{check_prime, Coins, CountingCoins, Fe, SeededCoins, TapeCoins};
pub use reduction::{mul_with_reduction, reduction_matrix, ReductionMatrix};
pub use session::{Session, ViewEntry};
pub use shamir::{add_shares, default_alphas, eval_poly, interpolate_at, reconstruct, share, share_at, ShareVector};

/// Default modulus for demonstrations (2^31 - 1).
pub const DEMO_MODULUS: u64 = 2_147_483_647;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpcError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("field of size {p} has too few nonzero points for {n} players")]
    FieldTooSmall { n: usize, p: u64 },
    #[error("need at least {needed} shares, got {got}")]
    TooFewShares { needed: usize, got: usize },
    #[error("share index {0} out of range")]
    NoSuchShare(usize),
    #[error("shares are not consistent with a single polynomial of degree <= {0}")]
    InconsistentShares(usize),
    #[error("sharings belong to different sessions (modulus, threshold or evaluation points differ)")]
    MismatchedSession,
    #[error("degree reduction needs 2t < n (t={t}, n={n})")]
    DegreeTooHigh { t: usize, n: usize },
    #[error("threshold t={t} exceeds floor((n-1)/2) for n={n}")]
    ThresholdTooHigh { t: usize, n: usize },
    #[error("coalition of {size} players exceeds floor((n-1)/2) for n={n}")]
    CoalitionTooLarge { size: usize, n: usize },
    #[error("player {0} has no value for one of its input gates")]
    MissingInput(usize),
    #[error("value {value} is not an element of GF({p})")]
    ValueOutOfField { value: u64, p: u64 },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("enumeration has {size} cases, above the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },
}
