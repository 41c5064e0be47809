//! Liouville-space MPS for the full chain: MPO of the Lindbladian, one-site TDVP,
//! diagnostics, and a dense reference for short chains.

pub mod dense;
pub mod krylov;
pub mod model;
pub mod mpo;
pub mod run;
pub mod state;
pub mod tdvp;

pub use dense::DenseChain;
pub use krylov::{local_exponential, KrylovConfig};
pub use model::{build_chain_model, ChainModel, ChainParams};
pub use mpo::{build_liouvillian_mpo, dense_liouvillian, trace_covector_residual, LiouvillianMpo, MPO_BOND};
pub use run::{run_model, run_mps_experiment, MpsConfig, MpsPeak, MpsRun, TRACE_DRIFT_ABORT};
pub use state::VectorizedMps;
pub use tdvp::{tdvp_step, Tdvp, TdvpConfig};
