//! Simulation and security analysis of a two-particle quantum oblivious
//! transfer protocol.
//!
//! Alice encodes a bit `λ ∈ {+1, −1}` in the product of the spin signs of two
//! spin-½ particles prepared along a random axis (horizontal or vertical).
//! Bob measures both particles, confirms success, and only then learns the
//! axis. An honest Bob learns `λ` with probability 1/2 and knows when he has
//! it. A cheating Bob measuring at arbitrary angles `(α, β)` guesses right
//! with probability `1/2 + cos(α − β)/4`, never better than 3/4.
//!
//! * [`qstate`]: single-particle measurement statistics and reproducible randomness.
//! * [`encoding`]: bit ↔ particle-pair encoding.
//! * [`protocol`]: the message-driven protocol with a lossy channel and transcripts.
//! * [`adversary`]: receiver strategies and the single-particle comparison protocol.
//! * [`analysis`]: closed forms, exact enumeration, Monte Carlo and sweeps.

pub mod adversary;
pub mod analysis;
pub mod encoding;
mod error;
pub mod protocol;
pub mod qstate;
pub mod stats;

pub use adversary::Strategy;
pub use encoding::{Basis, OtBit};
pub use error::{Error, Result};
pub use protocol::{run_session, ChannelConfig, SessionResult};
pub use qstate::{MeasurementAxis, RandomStream};
