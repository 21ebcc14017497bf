//! Checks against independently derived values: closed forms, grid scans
//! and dense linear algebra, never against this crate's own solvers.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use spinvar::circuits::Angle;
use spinvar::exact::dense_matrix;
use spinvar::problems::{build_maxcut, build_mgm, Edge};
use spinvar::statevector::estimate_expectation_sampled;
use spinvar::vqa::{CircuitObjective, Simulator};
use spinvar::{
    build_qaoa_ansatz, Circuit, Graph, MgmParams, NoiseConfig, Observable, SeedStream, StateVector,
};

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn single_edge_qaoa_grid_reaches_the_cut() {
    // One edge of weight w: the optimal cut is w, and depth-1 QAOA on two
    // qubits reaches it, so a fine grid over (gamma, beta) must get close.
    let w = 1.7;
    let g = Graph::new(2, vec![Edge { u: 0, v: 1, w }]).unwrap();
    let h = build_maxcut(&g).unwrap();
    let c = build_qaoa_ansatz(&h, 1).unwrap();
    assert_eq!(c.n_params(), 2);
    let steps = 160;
    let mut best = f64::INFINITY;
    for i in 0..steps {
        for j in 0..steps {
            let theta = [
                2.0 * PI * i as f64 / steps as f64,
                2.0 * PI * j as f64 / steps as f64,
            ];
            let e = h.expectation(&c.prepare(&theta).unwrap()).unwrap();
            assert!(e >= -w - 1e-12);
            best = best.min(e);
        }
    }
    assert!(best < -w * 0.999, "grid minimum {best}");
}

#[test]
fn uniform_state_gives_half_the_total_weight() {
    // Each edge is cut by half of all bitstrings.
    let g = Graph::new(
        4,
        vec![
            Edge { u: 0, v: 1, w: 1.0 },
            Edge { u: 1, v: 2, w: 2.0 },
            Edge { u: 2, v: 3, w: 0.5 },
            Edge { u: 0, v: 3, w: 1.5 },
        ],
    )
    .unwrap();
    let h = build_maxcut(&g).unwrap();
    let e = h.expectation(&StateVector::uniform(4).unwrap()).unwrap();
    assert!((e + 2.5).abs() < 1e-12);
}

#[test]
fn two_spin_heisenberg_singlet() {
    // For two spins, XX + YY + ZZ has the singlet at -3 and the triplet at +1.
    let h = Observable::from_labels(&[(1.0, "XX"), (1.0, "YY"), (1.0, "ZZ")]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = StateVector::from_amplitudes(
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    assert!((h.expectation(&singlet).unwrap() + 3.0).abs() < 1e-12);
    assert!((h.expectation(&StateVector::zero(2).unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sampled_ground_energy_is_within_five_sigma() {
    let h = build_mgm(&MgmParams::new(4)).unwrap();
    let eig = SymmetricEigen::new(dense_matrix(&h).unwrap());
    let (i0, &e0) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let ground: Vec<Complex64> = eig.eigenvectors.column(i0).iter().copied().collect();
    let norm: f64 = ground.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let ground = StateVector::from_amplitudes(4, ground.iter().map(|a| a / norm).collect()).unwrap();
    let mut rng = SeedStream::new(21).child(0);
    let estimates: Vec<f64> = (0..200)
        .map(|_| estimate_expectation_sampled(&h, &ground, 1024, &mut rng, 0.0).unwrap())
        .collect();
    let (mean, sd) = mean_sd(&estimates);
    let sigma = sd / (estimates.len() as f64).sqrt();
    assert!(sd > 0.0, "a non-product ground state has shot noise");
    assert!(
        (mean - e0).abs() < 5.0 * sigma,
        "mean {mean} exact {e0} sigma {sigma}"
    );
}

#[test]
fn depolarizing_and_readout_shrink_z_geometrically() {
    // Each single-qubit gate is followed by X, Y or Z with total probability
    // p; two of the three flip Z, so <Z> shrinks by 1 - 4p/3 per gate. A
    // readout flip with probability r multiplies <Z> by 1 - 2r.
    let (p, r, gates) = (0.05, 0.02, 10);
    let mut c = Circuit::new(2);
    for _ in 0..gates {
        c.rx(0, Angle::Fixed(0.0)).unwrap();
    }
    let z = Observable::from_labels(&[(1.0, "ZI")]).unwrap();
    let noise = NoiseConfig {
        p1: p,
        p2: 0.0,
        p_readout: r,
        enabled: true,
    };
    let obj = CircuitObjective::new(
        &c,
        &z,
        Simulator::Sampled { shots: 4096, noise },
        SeedStream::new(0).child(0),
    )
    .unwrap();
    let mut rng = SeedStream::new(8).child(0);
    let estimates: Vec<f64> = (0..200)
        .map(|_| obj.energy_with(&[], &mut rng).unwrap())
        .collect();
    let (mean, sd) = mean_sd(&estimates);
    let sigma = sd / (estimates.len() as f64).sqrt();
    let expected = (1.0 - 4.0 * p / 3.0).powi(gates) * (1.0 - 2.0 * r);
    assert!(
        (mean - expected).abs() < 5.0 * sigma,
        "mean {mean} expected {expected} sigma {sigma}"
    );
}

#[test]
fn two_qubit_depolarizing_on_zz() {
    // After a two-qubit gate, 15 Paulis are equally likely; 8 of them
    // anticommute with ZI, so <ZI> shrinks by 1 - 16p/15.
    let p = 0.1;
    let mut c = Circuit::new(2);
    c.cx(0, 1).unwrap();
    let zi = Observable::from_labels(&[(1.0, "ZI")]).unwrap();
    let noise = NoiseConfig {
        p1: 0.0,
        p2: p,
        p_readout: 0.0,
        enabled: true,
    };
    let obj = CircuitObjective::new(
        &c,
        &zi,
        Simulator::Sampled { shots: 4096, noise },
        SeedStream::new(0).child(0),
    )
    .unwrap();
    let mut rng = SeedStream::new(9).child(0);
    let estimates: Vec<f64> = (0..200)
        .map(|_| obj.energy_with(&[], &mut rng).unwrap())
        .collect();
    let (mean, sd) = mean_sd(&estimates);
    let sigma = sd / (estimates.len() as f64).sqrt();
    let expected = 1.0 - 16.0 * p / 15.0;
    assert!(
        (mean - expected).abs() < 5.0 * sigma,
        "mean {mean} expected {expected} sigma {sigma}"
    );
}

#[test]
fn qubit_zero_is_the_first_label_character() {
    // X on qubit 0 maps |00> to basis index 1.
    let x0 = Observable::from_labels(&[(1.0, "XI")]).unwrap();
    let s = x0.matvec(&StateVector::zero(2).unwrap()).unwrap();
    assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
}
