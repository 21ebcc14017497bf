//! Shot sampling and sampled expectation estimates.
//!
//! Outcomes are drawn by inverse-CDF lookup: one cumulative table per state,
//! then a binary search per shot. Readout noise flips each measured bit
//! independently afterwards.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{bitstring, gates, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng::Rng;

/// Histogram of measured bitstrings (qubit 0 first).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Counts(pub BTreeMap<String, u64>);

impl Counts {
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.0.get(bits).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Counts) {
        for (k, v) in &other.0 {
            *self.0.entry(k.clone()).or_insert(0) += v;
        }
    }

    /// Most frequent outcome; ties go to the smallest basis index.
    pub fn most_frequent(&self) -> Option<(String, u64)> {
        let index = |s: &str| super::parse_bitstring(s).unwrap_or(usize::MAX);
        self.0
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| index(b.0).cmp(&index(a.0))))
            .map(|(k, v)| (k.clone(), *v))
    }
}

struct Cdf(Vec<f64>);

impl Cdf {
    fn new(state: &StateVector) -> Self {
        let mut acc = 0.0;
        Cdf(state
            .amplitudes()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect())
    }

    fn draw(&self, rng: &mut Rng) -> usize {
        let total = *self.0.last().expect("non-empty state");
        let u = rng.random::<f64>() * total;
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1)
    }
}

fn flip_bits(mut b: usize, n_qubits: usize, p: f64, rng: &mut Rng) -> usize {
    if p > 0.0 {
        for q in 0..n_qubits {
            if rng.random_bool(p) {
                b ^= 1 << q;
            }
        }
    }
    b
}

/// Draws `shots` basis indices from `|a_i|^2`, then applies readout flips.
pub fn sample_indices(state: &StateVector, shots: u64, rng: &mut Rng, p_readout: f64) -> Vec<usize> {
    let cdf = Cdf::new(state);
    (0..shots)
        .map(|_| flip_bits(cdf.draw(rng), state.n_qubits(), p_readout, rng))
        .collect()
}

pub fn sample_counts(state: &StateVector, shots: u64, rng: &mut Rng, p_readout: f64) -> Counts {
    let mut counts = Counts::default();
    for b in sample_indices(state, shots, rng, p_readout) {
        *counts.0.entry(bitstring(b, state.n_qubits())).or_insert(0) += 1;
    }
    counts
}

/// Terms that can be read out from one shared measurement basis.
#[derive(Debug, Clone)]
pub struct MeasurementGroup {
    /// Union of the members' Paulis; one basis letter per qubit.
    pub basis: PauliString,
    /// Indices into the observable's term list.
    pub terms: Vec<usize>,
}

/// Greedy first-fit colouring of non-identity terms into qubit-wise
/// commuting groups, in term order.
pub fn group_qubit_wise(o: &Observable) -> Vec<MeasurementGroup> {
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    for (i, t) in o.terms().iter().enumerate() {
        if t.string.is_identity() {
            continue;
        }
        match groups.iter_mut().find(|g| g.basis.qubit_wise_commutes(&t.string)) {
            Some(g) => {
                g.basis = PauliString::from_masks(
                    o.n_qubits(),
                    g.basis.x_mask() | t.string.x_mask(),
                    g.basis.z_mask() | t.string.z_mask(),
                )
                .expect("same width");
                g.terms.push(i);
            }
            None => groups.push(MeasurementGroup {
                basis: t.string,
                terms: vec![i],
            }),
        }
    }
    groups
}

/// Per-term parity sums accumulated over shots, mergeable across trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    parity_sums: Vec<f64>,
    group_shots: Vec<u64>,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        for (a, b) in self.parity_sums.iter_mut().zip(&other.parity_sums) {
            *a += b;
        }
        for (a, b) in self.group_shots.iter_mut().zip(&other.group_shots) {
            *a += b;
        }
    }
}

/// Grouped shot-based estimator of `<O>`.
#[derive(Debug, Clone)]
pub struct SampledEstimator<'a> {
    observable: &'a Observable,
    groups: Vec<MeasurementGroup>,
}

impl<'a> SampledEstimator<'a> {
    pub fn new(observable: &'a Observable) -> Self {
        Self {
            observable,
            groups: group_qubit_wise(observable),
        }
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    /// Splits `shots` equally over groups, remainder to the earliest ones.
    /// Every group gets at least one shot.
    pub fn allocate(&self, shots: u64) -> Vec<u64> {
        let g = self.groups.len() as u64;
        if g == 0 {
            return Vec::new();
        }
        (0..g)
            .map(|i| (shots / g + u64::from(i < shots % g)).max(1))
            .collect()
    }

    pub fn empty_tally(&self) -> Tally {
        Tally {
            parity_sums: vec![0.0; self.observable.len()],
            group_shots: vec![0; self.groups.len()],
        }
    }

    /// Measures group `g` on `state` with `shots` shots into `tally`.
    pub fn measure_group(
        &self,
        state: &StateVector,
        g: usize,
        shots: u64,
        rng: &mut Rng,
        p_readout: f64,
        tally: &mut Tally,
    ) {
        if shots == 0 {
            return;
        }
        let group = &self.groups[g];
        let mut rotated = state.clone();
        for q in 0..state.n_qubits() {
            match group.basis.get(q) {
                Pauli::X => rotated.apply_1q_unchecked(&gates::hadamard(), q),
                // RX(pi/2)^dagger Z RX(pi/2) = Y
                Pauli::Y => rotated.apply_1q_unchecked(&gates::rx(std::f64::consts::FRAC_PI_2), q),
                _ => {}
            }
        }
        let outcomes = sample_indices(&rotated, shots, rng, p_readout);
        let terms = self.observable.terms();
        for &ti in &group.terms {
            let support = terms[ti].string.support();
            let s: i64 = outcomes
                .iter()
                .map(|&b| {
                    if (b as u64 & support).count_ones() & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                })
                .sum();
            tally.parity_sums[ti] += s as f64;
        }
        tally.group_shots[g] += shots;
    }

    /// Measures every group of one state with the given per-group shots.
    pub fn measure_all(
        &self,
        state: &StateVector,
        shots_per_group: &[u64],
        rng: &mut Rng,
        p_readout: f64,
        tally: &mut Tally,
    ) {
        for (g, &shots) in shots_per_group.iter().enumerate() {
            self.measure_group(state, g, shots, rng, p_readout, tally);
        }
    }

    pub fn estimate(&self, tally: &Tally) -> f64 {
        let terms = self.observable.terms();
        let mut e = self.observable.identity_coefficient();
        for (g, group) in self.groups.iter().enumerate() {
            let n = tally.group_shots[g];
            if n == 0 {
                continue;
            }
            for &ti in &group.terms {
                e += terms[ti].coefficient * tally.parity_sums[ti] / n as f64;
            }
        }
        e
    }
}

/// Shot-based estimate of `<s|O|s>`, unbiased when `p_readout == 0`.
pub fn estimate_expectation_sampled(
    o: &Observable,
    s: &StateVector,
    shots: u64,
    rng: &mut Rng,
    p_readout: f64,
) -> Result<f64> {
    if o.n_qubits() != s.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: o.n_qubits(),
            found: s.n_qubits(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let est = SampledEstimator::new(o);
    let mut tally = est.empty_tally();
    est.measure_all(s, &est.allocate(shots), rng, p_readout, &mut tally);
    Ok(est.estimate(&tally))
}
