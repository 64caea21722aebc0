//! Deterministic laboratory for Byzantine agreement under device-interface
//! faults, and for Shamir-sharing based secure computation.
//!
//! * [`model`]: agents, device faults, scenarios and their JSON form.
//! * [`engine`]: synchronous round execution with fault injection.
//! * [`protocols`]: oral messages OM(m), the one-round corrupt-only
//!   protocol, and the recursive M(k, n).
//! * [`verifier`]: interactive-consistency verdicts, the bound oracle, and
//!   exhaustive adversary search.
//! * [`mpc`]: prime-field sharing, degree reduction, circuit evaluation and
//!   the curious-coalition privacy audit.
//! * [`report`]: machine-readable run reports.

pub mod engine;
pub mod model;
pub mod mpc;
pub mod protocols;
pub mod report;
pub mod verifier;
