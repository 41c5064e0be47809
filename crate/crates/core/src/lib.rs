//! Transient entanglement of two driven emitters on a chiral channel.
//!
//! Engines: Born-Markov Lindblad ([`markov`]) with closed forms ([`analytic`]),
//! TCL-2 / Redfield / secular over an XX spin-chain bath ([`bath`], [`tcl`]),
//! and a Liouville-space MPS with one-site TDVP ([`mps`]). Disorder and loss studies
//! live in [`robustness`].

pub mod analytic;
pub mod bath;
pub mod bessel;
pub mod error;
pub mod markov;
pub mod mps;
pub mod par;
pub mod quantum;
pub mod robustness;
pub mod tcl;
pub mod trajectory;

pub use error::{Error, Result};
pub use quantum::{C64, CMat, CVec, DensityMatrix, PureState, SubsystemSplit};
