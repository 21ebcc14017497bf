//! Variational quantum algorithms (VQE, QAOA, VQD) on a statevector
//! simulator, applied to frustrated spin chains and weighted Max-cut.

pub mod circuits;
pub mod error;
pub mod exact;
pub mod optimizers;
pub mod pauli;
pub mod problems;
pub mod rng;
pub mod statevector;
pub mod vqa;

pub use circuits::{build_efficient_su2, build_pauli_cluster_ansatz, build_qaoa_ansatz, Circuit};
pub use error::{Error, Result};
pub use optimizers::{Objective, OptimizerTrace};
pub use pauli::{Observable, Pauli, PauliString, PauliTerm};
pub use problems::{Graph, MgmParams};
pub use rng::SeedStream;
pub use statevector::{NoiseConfig, StateVector};
