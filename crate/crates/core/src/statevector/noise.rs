//! Depolarizing noise as stochastic Pauli trajectories.
//!
//! After each native gate on qubits `Q`, with probability `p` a uniformly
//! random non-identity Pauli on `Q` is applied. Averaged over trajectories
//! this is the depolarizing channel of strength `p`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each multi-qubit gate.
    pub p2: f64,
    /// Independent bit-flip probability per measured bit.
    pub p_readout: f64,
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            p1: 0.001,
            p2: 0.01,
            p_readout: 0.01,
            enabled: false,
        }
    }
}

impl NoiseConfig {
    /// The default NISQ-like rates, switched on.
    pub fn nisq() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    pub fn off() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Readout flip probability actually in effect.
    pub fn readout(&self) -> f64 {
        if self.enabled {
            self.p_readout
        } else {
            0.0
        }
    }
}

/// With probability `p`, applies a uniformly random non-identity Pauli on `qubits`.
pub fn depolarize(state: &mut StateVector, qubits: &[usize], p: f64, rng: &mut Rng) {
    if p <= 0.0 || !rng.random_bool(p.min(1.0)) {
        return;
    }
    let k = qubits.len();
    // index 1..4^k - 1, two bits per qubit: 1=X, 2=Y, 3=Z
    let choice = rng.random_range(1..(1usize << (2 * k)));
    let mut x = 0u64;
    let mut z = 0u64;
    for (i, &q) in qubits.iter().enumerate() {
        match (choice >> (2 * i)) & 3 {
            1 => x |= 1 << q,
            2 => {
                x |= 1 << q;
                z |= 1 << q;
            }
            3 => z |= 1 << q,
            _ => {}
        }
    }
    let p = PauliString::from_masks(state.n_qubits(), x, z).expect("qubits are in range");
    state.apply_pauli_in_place(&p);
}
