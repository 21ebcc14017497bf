//! Fixtures shared by the kernel benchmarks.

use spinvar::problems::build_mgm;
use spinvar::{build_efficient_su2, Circuit, MgmParams, Observable, SeedStream, StateVector};

/// MGM ring with the default couplings.
pub fn mgm(n: usize) -> Observable {
    build_mgm(&MgmParams::new(n)).expect("n >= 4")
}

/// Haar-like random state from a fixed seed.
pub fn state(n: usize) -> StateVector {
    StateVector::random(n, &mut SeedStream::new(7).child(0)).expect("n in range")
}

/// EfficientSU2 circuit with deterministic angles.
pub fn su2(n: usize, reps: usize) -> (Circuit, Vec<f64>) {
    let c = build_efficient_su2(n, reps).expect("valid shape");
    let theta = (0..c.n_params()).map(|i| 0.1 + 0.37 * i as f64).collect();
    (c, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let (c, theta) = su2(6, 2);
        assert_eq!(theta.len(), 36);
        let s = c.prepare(&theta).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(mgm(6).n_qubits(), state(6).n_qubits());
    }
}
