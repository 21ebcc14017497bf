//! Invariant checks shared by the property suite and the acceptance runner.
//! Each takes generated inputs and reports a violation as `Err`.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng as _;
use spinvar::exact::{dense_matrix, dense_spectrum, lanczos_lowest, LanczosConfig};
use spinvar::optimizers::{finite_difference_gradient, parameter_shift_gradient, SpsaConfig};
use spinvar::problems::{build_maxcut, build_mgm};
use spinvar::vqa::{vqe_run, Ansatz, OptimizerChoice, RunConfig, Simulator};
use spinvar::{
    build_efficient_su2, Graph, MgmParams, NoiseConfig, Observable, PauliString, SeedStream, StateVector,
};

pub type Check = std::result::Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn pauli_label() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), 1..=5)
        .prop_map(|v| v.into_iter().collect())
}

/// Up to eight random real-weighted Pauli terms on 1 to 5 qubits.
pub fn observable() -> impl Strategy<Value = Observable> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(
            (
                -2.0f64..2.0,
                prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n),
            ),
            1..8,
        )
        .prop_map(|terms| {
            let labeled: Vec<(f64, String)> = terms
                .into_iter()
                .map(|(c, l)| (c, l.into_iter().collect()))
                .collect();
            let refs: Vec<(f64, &str)> = labeled.iter().map(|(c, l)| (*c, l.as_str())).collect();
            Observable::from_labels(&refs).unwrap()
        })
    })
}

pub fn random_state(n: usize, seed: u64) -> StateVector {
    StateVector::random(n, &mut SeedStream::new(seed).child(0)).unwrap()
}

fn random_theta(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = SeedStream::new(seed).child(stream);
    (0..n).map(|_| rng.random_range(-3.2..3.2)).collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn norm_preserved(n: usize, reps: usize, seed: u64) -> Check {
    let c = build_efficient_su2(n, reps).unwrap();
    let s = c.prepare(&random_theta(c.n_params(), seed, 1)).unwrap();
    ensure((s.norm_sqr() - 1.0).abs() < 1e-12, || {
        format!("norm^2 = {}", s.norm_sqr())
    })
}

pub fn expectation_real(o: &Observable, seed: u64) -> Check {
    let s = random_state(o.n_qubits(), seed);
    let e = o.expectation_complex(&s).unwrap();
    ensure(e.im.abs() < 1e-10 * (1.0 + e.re.abs()), || {
        format!("imaginary part {}", e.im)
    })?;
    ensure(e.re.abs() <= o.spectral_bound() + 1e-10, || {
        format!("{} exceeds bound", e.re)
    })
}

pub fn matvec_matches_dense(o: &Observable, seed: u64) -> Check {
    let s = random_state(o.n_qubits(), seed);
    let dense = dense_matrix(o).unwrap() * DVector::from_column_slice(s.amplitudes());
    let sparse = o.matvec(&s).unwrap();
    let d = max_diff(sparse.amplitudes(), dense.as_slice());
    ensure(d < 1e-10, || format!("matvec differs by {d}"))
}

/// `exp(-i a/2 P) = cos(a/2) I - i sin(a/2) P` since `P^2 = I`.
pub fn rotation_matches_exponential(label: &str, angle: f64, seed: u64) -> Check {
    if label.chars().all(|c| c == 'I') {
        return Ok(());
    }
    let p = PauliString::from_label(label).unwrap();
    let n = p.n_qubits();
    let mut s = random_state(n, seed);
    let before = DVector::from_column_slice(s.amplitudes());
    s.apply_pauli_rotation(&p, angle).unwrap();
    let pm = dense_matrix(&Observable::from_labels(&[(1.0, label)]).unwrap()).unwrap();
    let dim = 1usize << n;
    let u = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new((angle / 2.0).cos(), 0.0)
        - pm * Complex64::new(0.0, (angle / 2.0).sin());
    let expected = u * before;
    let d = max_diff(s.amplitudes(), expected.as_slice());
    ensure(d < 1e-12, || format!("{label} rotation differs by {d}"))
}

pub fn shift_matches_finite_difference(n: usize, reps: usize, seed: u64) -> Check {
    let c = build_efficient_su2(n, reps).unwrap();
    let o = if n >= 4 {
        build_mgm(&MgmParams::new(n)).unwrap()
    } else {
        let mut rng = SeedStream::new(seed).child(2);
        let labels: Vec<String> = (0..4)
            .map(|_| {
                (0..n)
                    .map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)])
                    .collect()
            })
            .collect();
        let refs: Vec<(f64, &str)> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (0.3 + i as f64, l.as_str()))
            .collect();
        Observable::from_labels(&refs).unwrap()
    };
    let theta = random_theta(c.n_params(), seed, 3);
    let f = |t: &[f64]| o.expectation(&c.prepare(t)?);
    let shift = parameter_shift_gradient(f, &theta, &c.shift_multipliers().unwrap()).unwrap();
    let fd = finite_difference_gradient(f, &theta, 1e-5).unwrap();
    let d = shift
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(d < 1e-6, || format!("shift vs finite difference {d}"))
}

pub fn lanczos_matches_dense(o: &Observable, k: usize, seed: u64) -> Check {
    if k > 1 << o.n_qubits() {
        return Ok(());
    }
    let dense = dense_spectrum(o).unwrap();
    let got = lanczos_lowest(
        o,
        &LanczosConfig {
            k,
            seed,
            ..Default::default()
        },
    )
    .unwrap();
    let d = got
        .iter()
        .zip(&dense)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(d < 1e-8, || format!("lanczos {got:?} dense {:?}", &dense[..k]))
}

pub fn variational_bound(n: usize, alpha: f64, seed: u64) -> Check {
    let h = build_mgm(&MgmParams {
        alpha,
        ..MgmParams::new(n)
    })
    .unwrap();
    let e0 = dense_spectrum(&h).unwrap()[0];
    let c = build_efficient_su2(n, 2).unwrap();
    let e = h
        .expectation(&c.prepare(&random_theta(c.n_params(), seed, 4)).unwrap())
        .unwrap();
    ensure(e >= e0 - 1e-10, || format!("energy {e} below ground {e0}"))
}

pub fn maxcut_diagonal(n: usize, seed: u64) -> Check {
    let mut rng = SeedStream::new(seed).child(5);
    let g = Graph::random_gnp(n, 0.6, Some((0.5, 2.0)), &mut rng).unwrap();
    let h = build_maxcut(&g).unwrap();
    for b in 0..1usize << n {
        let d = h.diagonal_element(b) + g.cut_value(b);
        ensure(d.abs() < 1e-12, || format!("bitstring {b}: diagonal + cut = {d}"))?;
    }
    Ok(())
}

/// A short noisy run repeated under the same seed is bit-identical.
pub fn reproducible(seed: u64) -> Check {
    let h = build_mgm(&MgmParams::new(4)).unwrap();
    let ansatz = Ansatz::efficient_su2(4, 1).unwrap();
    let mut cfg = RunConfig::new("mgm", OptimizerChoice::Spsa(SpsaConfig::default()), 3, seed);
    cfg.simulator = Simulator::Sampled {
        shots: 256,
        noise: NoiseConfig::nisq(),
    };
    let run = || {
        let mut r = vqe_run(&h, &ansatz, &cfg).unwrap();
        r.trace.wall_time_s = 0.0;
        r
    };
    let (a, b) = (run(), run());
    ensure(a == b, || {
        format!("seed {seed} gave {} then {}", a.final_energy, b.final_energy)
    })
}
