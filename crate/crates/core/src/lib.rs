//! Simulation of Stark-shift-gate laser cooling of trapped ions.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: truncated Fock-space and multi-level operator algebra.
//! * [`model`]: Hamiltonians and dissipators of the two-level traveling-wave
//!   model, the effective Stark-shift Hamiltonian, the three-level continuous
//!   cooling scheme, and the three-ion chain.
//! * [`dynamics`]: Lindblad integration, Liouvillian steady states and
//!   quantum-jump trajectory ensembles.
//! * [`rates`]: closed-form Lamb-Dicke rate theory.
//! * [`protocol`]: the pulsed cooling cycle.
//! * [`experiment`]: named scenarios, config parsing and CSV output.
//!
//! Units: frequencies and rates in units of the trap frequency scale, ħ = 1.

mod error;
mod parallel;

pub mod dynamics;
pub mod experiment;
pub mod model;
pub mod operator;
pub mod protocol;
pub mod rates;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use parallel::Execution;
