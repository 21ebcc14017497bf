use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::optimizers::{parameter_shift_gradient, Objective};
use crate::pauli::Observable;
use crate::rng::{Rng, SeedStream};
use crate::statevector::{sample_counts, Counts, NoiseConfig, SampledEstimator, StateVector};

/// Upper bound on noise trajectories per estimate.
pub const MAX_TRAJECTORIES: u64 = 256;

/// How an energy is obtained from a prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Simulator {
    /// Exact statevector expectation.
    Exact,
    /// Shot-based estimate; with noise enabled, averaged over
    /// `min(shots, 256)` stochastic trajectories.
    Sampled { shots: u64, noise: NoiseConfig },
}

impl Simulator {
    pub fn shots(&self) -> Option<u64> {
        match self {
            Simulator::Exact => None,
            Simulator::Sampled { shots, .. } => Some(*shots),
        }
    }

    pub fn noise(&self) -> NoiseConfig {
        match self {
            Simulator::Exact => NoiseConfig::off(),
            Simulator::Sampled { noise, .. } => *noise,
        }
    }

    /// Trajectory count used per estimate, when noise is on.
    pub fn trajectories(&self) -> Option<u64> {
        match self {
            Simulator::Sampled { shots, noise } if noise.enabled => Some((*shots).min(MAX_TRAJECTORIES)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Simulator::Sampled { shots, noise } = self {
            if *shots == 0 {
                return Err(Error::InvalidArgument("shots must be >= 1".into()));
            }
            noise.validate()?;
        }
        Ok(())
    }
}

/// Share `t` of `total` split over `parts`, remainder to the earliest.
fn share(total: u64, parts: u64, t: u64) -> u64 {
    total / parts + u64::from(t < total % parts)
}

/// Energy of `circuit(theta)|0>` under `observable`, plus optional overlap
/// penalties `beta * |<phi|psi(theta)>|^2` against frozen states.
pub struct CircuitObjective<'a> {
    circuit: &'a Circuit,
    observable: &'a Observable,
    estimator: SampledEstimator<'a>,
    simulator: Simulator,
    penalties: Vec<(StateVector, f64)>,
    shift: Option<Vec<f64>>,
    rng: Rng,
    evaluations: u64,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(
        circuit: &'a Circuit,
        observable: &'a Observable,
        simulator: Simulator,
        rng: Rng,
    ) -> Result<Self> {
        if circuit.n_qubits() != observable.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: observable.n_qubits(),
                found: circuit.n_qubits(),
            });
        }
        circuit.check_slots()?;
        simulator.validate()?;
        Ok(Self {
            circuit,
            observable,
            estimator: SampledEstimator::new(observable),
            simulator,
            penalties: Vec::new(),
            shift: circuit.shift_multipliers().ok(),
            rng,
            evaluations: 0,
        })
    }

    /// Adds `beta * |<state|psi(theta)>|^2` to every evaluation.
    pub fn with_penalty(mut self, state: StateVector, beta: f64) -> Self {
        self.penalties.push((state, beta));
        self
    }

    pub fn energy_exact(&self, theta: &[f64]) -> Result<f64> {
        self.observable.expectation(&self.circuit.prepare(theta)?)
    }

    fn penalty(&self, state: &StateVector) -> Result<f64> {
        let mut total = 0.0;
        for (phi, beta) in &self.penalties {
            total += beta * phi.fidelity(state)?;
        }
        Ok(total)
    }

    /// Energy estimate without penalties, drawing from `rng`.
    pub fn energy_with(&self, theta: &[f64], rng: &mut Rng) -> Result<f64> {
        match self.simulator {
            Simulator::Exact => self.energy_exact(theta),
            Simulator::Sampled { shots, noise } if !noise.enabled => {
                let state = self.circuit.prepare(theta)?;
                let mut tally = self.estimator.empty_tally();
                self.estimator
                    .measure_all(&state, &self.estimator.allocate(shots), rng, 0.0, &mut tally);
                Ok(self.estimator.estimate(&tally))
            }
            Simulator::Sampled { shots, noise } => {
                let per_group = self.estimator.allocate(shots);
                let trajectories = shots.min(MAX_TRAJECTORIES);
                let streams = SeedStream::new(rng.next_u64());
                let tallies: Vec<_> = (0..trajectories)
                    .into_par_iter()
                    .map(|t| -> Result<_> {
                        let mut trng = streams.child(t);
                        let mut state = StateVector::zero(self.circuit.n_qubits())?;
                        self.circuit.apply_noisy(theta, &mut state, &noise, &mut trng)?;
                        let mut tally = self.estimator.empty_tally();
                        let shots_t: Vec<u64> =
                            per_group.iter().map(|&g| share(g, trajectories, t)).collect();
                        self.estimator
                            .measure_all(&state, &shots_t, &mut trng, noise.p_readout, &mut tally);
                        Ok(tally)
                    })
                    .collect::<Result<_>>()?;
                let mut total = self.estimator.empty_tally();
                for t in &tallies {
                    total.merge(t);
                }
                Ok(self.estimator.estimate(&total))
            }
        }
    }

    /// Measures `shots` bitstrings of the prepared state (noisy
    /// trajectories and readout flips when noise is on).
    pub fn sample(&self, theta: &[f64], shots: u64, rng: &mut Rng) -> Result<Counts> {
        let noise = self.simulator.noise();
        if !noise.enabled {
            return Ok(sample_counts(&self.circuit.prepare(theta)?, shots, rng, 0.0));
        }
        let trajectories = shots.min(MAX_TRAJECTORIES);
        let streams = SeedStream::new(rng.next_u64());
        let parts: Vec<Counts> = (0..trajectories)
            .into_par_iter()
            .map(|t| -> Result<Counts> {
                let mut trng = streams.child(t);
                let mut state = StateVector::zero(self.circuit.n_qubits())?;
                self.circuit.apply_noisy(theta, &mut state, &noise, &mut trng)?;
                Ok(sample_counts(
                    &state,
                    share(shots, trajectories, t),
                    &mut trng,
                    noise.p_readout,
                ))
            })
            .collect::<Result<_>>()?;
        let mut counts = Counts::default();
        for c in &parts {
            counts.merge(c);
        }
        Ok(counts)
    }
}

impl Objective for CircuitObjective<'_> {
    fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let mut rng = self.rng.clone();
        let mut energy = self.energy_with(theta, &mut rng)?;
        self.rng = rng;
        if !self.penalties.is_empty() {
            energy += self.penalty(&self.circuit.prepare(theta)?)?;
        }
        Ok(energy)
    }

    fn fidelity(&mut self, a: &[f64], b: &[f64]) -> Option<Result<f64>> {
        self.evaluations += 1;
        Some(
            self.circuit
                .prepare(a)
                .and_then(|sa| sa.fidelity(&self.circuit.prepare(b)?)),
        )
    }

    fn shift_gradient(&mut self, theta: &[f64]) -> Option<Result<Vec<f64>>> {
        let multipliers = self.shift.clone()?;
        Some(parameter_shift_gradient(
            |t| self.evaluate(t),
            theta,
            &multipliers,
        ))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}
