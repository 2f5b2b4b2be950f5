//! Single-qutrit detectable Byzantine agreement.
//!
//! Three generals A, B and C pass one qutrit around (A → B → C), each applying
//! a diagonal phase for a secret basis and a secret number. C measures in the
//! Fourier basis; runs where C detects `|ψ₀⟩` and all three announced bases
//! match leave the generals with lists whose entries satisfy
//! `(a + b + c) mod 3 = 0`. Those lists drive the classical detectable
//! broadcast procedure in [`agreement`].
//!
//! Modules:
//! - [`qutrit`]: exact 3-level states, phase operators, channels, measurement.
//! - [`distribution`]: the list-distribution rounds, sifting, cross-check.
//! - [`adversaries`]: traitor strategies and hooks.
//! - [`agreement`]: position messages, consistency checks, the decision table.
//! - [`harness`]: scenarios, aggregated reports and the `simulate` CLI.

pub mod adversaries;
pub mod agreement;
pub mod distribution;
mod error;
pub mod harness;
pub mod qutrit;
pub mod random;

pub use error::{Error, Result};
pub use qutrit::Trit;
