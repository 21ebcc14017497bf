//! VQE, QAOA and VQD drivers and the spin-gap scan.

mod objective;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_efficient_su2, build_pauli_cluster_ansatz, build_qaoa_ansatz, circuit_depth, Circuit,
};
use crate::error::{Error, Result};
use crate::exact;
use crate::optimizers::{
    qnspsa_minimize, shift_gradient_minimize, spsa_minimize, GradientConfig, Objective, OptimizerTrace,
    QnspsaConfig, SpsaConfig,
};
use crate::pauli::{Observable, PauliString};
use crate::problems::{build_mgm, MgmParams};
use crate::rng::{streams, SeedStream};
use crate::statevector::{parse_bitstring, Counts, StateVector};

pub use objective::{CircuitObjective, Simulator, MAX_TRAJECTORIES};

/// Shots used to read out the final state of a QAOA run.
pub const DEFAULT_FINAL_SHOTS: u64 = 4096;

/// A parameterized circuit together with its family name and repetitions.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub family: String,
    pub reps: usize,
    pub circuit: Circuit,
}

impl Ansatz {
    pub fn efficient_su2(n: usize, reps: usize) -> Result<Self> {
        Ok(Self {
            family: "efficient_su2".into(),
            reps,
            circuit: build_efficient_su2(n, reps)?,
        })
    }

    pub fn qaoa(h: &Observable, p: usize) -> Result<Self> {
        Ok(Self {
            family: "qaoa".into(),
            reps: p,
            circuit: build_qaoa_ansatz(h, p)?,
        })
    }

    pub fn pauli_cluster(strings: &[PauliString], reps: usize) -> Result<Self> {
        Ok(Self {
            family: "pauli_cluster".into(),
            reps,
            circuit: build_pauli_cluster_ansatz(strings, reps)?,
        })
    }

    pub fn info(&self) -> AnsatzInfo {
        AnsatzInfo {
            family: self.family.clone(),
            reps: self.reps,
            n_params: self.circuit.n_params(),
            depth: circuit_depth(&self.circuit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzInfo {
    pub family: String,
    pub reps: usize,
    pub n_params: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "config", rename_all = "snake_case")]
pub enum OptimizerChoice {
    Spsa(SpsaConfig),
    Qnspsa(QnspsaConfig),
    Grad(GradientConfig),
}

impl OptimizerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerChoice::Spsa(_) => "spsa",
            OptimizerChoice::Qnspsa(_) => "qnspsa",
            OptimizerChoice::Grad(_) => "grad",
        }
    }

    fn run(
        &self,
        obj: &mut dyn Objective,
        theta0: &[f64],
        iters: usize,
        seeds: &SeedStream,
    ) -> Result<OptimizerTrace> {
        let mut rng = seeds.child(streams::OPTIMIZER);
        match self {
            OptimizerChoice::Spsa(cfg) => spsa_minimize(obj, theta0, iters, cfg, &mut rng),
            OptimizerChoice::Qnspsa(cfg) => qnspsa_minimize(obj, theta0, iters, cfg, &mut rng),
            OptimizerChoice::Grad(cfg) => shift_gradient_minimize(obj, theta0, iters, cfg),
        }
    }
}

/// Whether reported energies use `H` or `2H` (Pauli matrices in place of
/// spin operators).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyConvention {
    #[default]
    Actual,
    Doubled,
}

impl EnergyConvention {
    pub fn factor(self) -> f64 {
        match self {
            EnergyConvention::Actual => 1.0,
            EnergyConvention::Doubled => 2.0,
        }
    }
}

/// Everything about a run except the Hamiltonian and the ansatz.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub optimizer: OptimizerChoice,
    pub iters: usize,
    pub simulator: Simulator,
    pub seed: u64,
    /// Optimization always runs on `H`; this only scales what is reported.
    pub convention: EnergyConvention,
    /// Reference ground energy of `H` (actual convention), if known.
    pub exact_energy: Option<f64>,
    /// Read out the final state and report the most frequent bitstring.
    pub sample_final: bool,
    pub final_shots: u64,
    /// `H` is a Max-cut cost, so `-<x|H|x>` is the cut of bitstring `x`.
    pub maxcut: bool,
}

impl RunConfig {
    pub fn new(problem: impl Into<String>, optimizer: OptimizerChoice, iters: usize, seed: u64) -> Self {
        Self {
            problem: problem.into(),
            optimizer,
            iters,
            simulator: Simulator::Exact,
            seed,
            convention: EnergyConvention::Actual,
            exact_energy: None,
            sample_final: false,
            final_shots: DEFAULT_FINAL_SHOTS,
            maxcut: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqaResult {
    pub problem: String,
    pub n_qubits: usize,
    pub ansatz: AnsatzInfo,
    pub optimizer: OptimizerChoice,
    pub iters: usize,
    pub seed: u64,
    pub simulator: Simulator,
    pub trajectories: Option<u64>,
    pub energy_convention: EnergyConvention,
    /// Objective values are scaled by the convention factor.
    pub trace: OptimizerTrace,
    /// Minimum over the trace (for VQD levels above 0: the penalty-free
    /// energy at the best point).
    pub best_energy: f64,
    pub best_theta: Vec<f64>,
    /// Fresh estimate at `best_theta`, independent of the optimizer's draws.
    pub final_energy: f64,
    pub exact_energy: Option<f64>,
    pub bitstring: Option<String>,
    pub counts: Option<Counts>,
    pub cut_value: Option<f64>,
    /// `|best - exact| / |exact| < 0.01`, when the exact energy is known.
    pub converged: Option<bool>,
    pub warnings: Vec<String>,
}

fn initial_point(n_params: usize, seeds: &SeedStream) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut rng = seeds.child(streams::INITIAL_POINT);
    (0..n_params).map(|_| rng.random_range(-PI..PI)).collect()
}

fn scale_trace(trace: &mut OptimizerTrace, factor: f64) {
    if factor == 1.0 {
        return;
    }
    for r in &mut trace.records {
        r.objective_value *= factor;
        r.best_objective *= factor;
    }
    trace.best_value *= factor;
}

fn run_with(
    h: &Observable,
    ansatz: &Ansatz,
    cfg: &RunConfig,
    penalties: &[(StateVector, f64)],
) -> Result<VqaResult> {
    if ansatz.circuit.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: ansatz.circuit.n_qubits(),
        });
    }
    let seeds = SeedStream::new(cfg.seed);
    let factor = cfg.convention.factor();
    let mut obj = CircuitObjective::new(&ansatz.circuit, h, cfg.simulator, seeds.child(streams::OBJECTIVE))?;
    for (state, beta) in penalties {
        obj = obj.with_penalty(state.clone(), *beta);
    }
    let theta0 = initial_point(ansatz.circuit.n_params(), &seeds);
    let mut trace = match cfg.optimizer.run(&mut obj, &theta0, cfg.iters, &seeds) {
        Ok(t) => t,
        Err(Error::OptimizerAborted { source, mut trace }) => {
            scale_trace(&mut trace, factor);
            return Err(Error::OptimizerAborted { source, trace });
        }
        Err(e) => return Err(e),
    };
    scale_trace(&mut trace, factor);
    let best_theta = trace.best_theta.clone();
    let final_energy = factor * obj.energy_with(&best_theta, &mut seeds.child(streams::FINAL_EVAL))?;
    let best_energy = if penalties.is_empty() {
        trace.best_value
    } else {
        factor * obj.energy_exact(&best_theta)?
    };

    let (mut bitstring, mut counts, mut cut_value) = (None, None, None);
    if cfg.sample_final {
        let c = obj.sample(
            &best_theta,
            cfg.final_shots,
            &mut seeds.child(streams::FINAL_SAMPLE),
        )?;
        if let Some((bits, _)) = c.most_frequent() {
            if cfg.maxcut {
                cut_value = Some(-h.diagonal_element(parse_bitstring(&bits)?));
            }
            bitstring = Some(bits);
        }
        counts = Some(c);
    }
    let exact_energy = cfg.exact_energy.map(|e| factor * e);
    let converged = exact_energy.map(|e| (best_energy - e).abs() / e.abs().max(f64::MIN_POSITIVE) < 0.01);
    Ok(VqaResult {
        problem: cfg.problem.clone(),
        n_qubits: h.n_qubits(),
        ansatz: ansatz.info(),
        optimizer: cfg.optimizer.clone(),
        iters: cfg.iters,
        seed: cfg.seed,
        simulator: cfg.simulator,
        trajectories: cfg.simulator.trajectories(),
        energy_convention: cfg.convention,
        trace,
        best_energy,
        best_theta,
        final_energy,
        exact_energy,
        bitstring,
        counts,
        cut_value,
        converged,
        warnings: Vec::new(),
    })
}

/// Minimizes `<psi(theta)|H|psi(theta)>` over the ansatz from a uniform
/// random start in `[-pi, pi)^P`.
pub fn vqe_run(h: &Observable, ansatz: &Ansatz, cfg: &RunConfig) -> Result<VqaResult> {
    run_with(h, ansatz, cfg, &[])
}

/// Builds the level-`p` QAOA ansatz for `h`, runs it like VQE and reads out
/// the most probable bitstring of the optimized state.
pub fn qaoa_run(h: &Observable, p: usize, cfg: &RunConfig) -> Result<VqaResult> {
    let ansatz = Ansatz::qaoa(h, p)?;
    let cfg = RunConfig {
        sample_final: true,
        ..cfg.clone()
    };
    run_with(h, &ansatz, &cfg, &[])
}

/// Default overlap penalty: strictly larger than the whole spectral range
/// of `h`. At exactly the range a penalized earlier state can tie with the
/// top of the spectrum.
pub fn default_vqd_beta(h: &Observable) -> f64 {
    2.5 * h.spectral_bound()
}

/// Variational quantum deflation for the `k` lowest states.
///
/// Level 0 is a plain VQE run with `cfg.seed`; level `j` uses a seed derived
/// from it and penalizes overlap with every earlier optimized state.
/// `ansatz_for_level` may deepen the circuit for higher levels.
pub fn vqd_run(
    h: &Observable,
    ansatz_for_level: &dyn Fn(usize) -> Result<Ansatz>,
    k: usize,
    betas: Option<&[f64]>,
    cfg: &RunConfig,
) -> Result<Vec<VqaResult>> {
    if k < 2 {
        return Err(Error::InvalidArgument("VQD needs k >= 2 states".into()));
    }
    let default_beta = default_vqd_beta(h);
    let betas: Vec<f64> = match betas {
        Some(b) if b.len() < k - 1 => {
            return Err(Error::InvalidArgument(format!(
                "VQD needs {} penalty weights, got {}",
                k - 1,
                b.len()
            )))
        }
        Some(b) => b.to_vec(),
        None => vec![default_beta; k - 1],
    };
    if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::InvalidArgument("VQD penalty weights must be > 0".into()));
    }
    let root = SeedStream::new(cfg.seed);
    let mut results: Vec<VqaResult> = Vec::with_capacity(k);
    let mut frozen: Vec<(StateVector, f64)> = Vec::new();
    for level in 0..k {
        let ansatz = ansatz_for_level(level)?;
        let level_cfg = RunConfig {
            seed: if level == 0 {
                cfg.seed
            } else {
                root.derive(level as u64).root()
            },
            ..cfg.clone()
        };
        let mut result = run_with(h, &ansatz, &level_cfg, &frozen)?;
        if level > 0 {
            result.final_energy = result.best_energy;
            let prev = results[level - 1].best_energy;
            if result.best_energy < prev - 1e-9 {
                result.warnings.push(format!(
                    "level {level} energy {} is below level {} energy {prev}; an earlier level is not converged",
                    result.best_energy,
                    level - 1
                ));
            }
        }
        if level + 1 < k {
            frozen.push((ansatz.circuit.prepare(&result.best_theta)?, betas[level]));
        }
        results.push(result);
    }
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub parity: Parity,
}

/// How each chain length of a gap scan is solved.
#[derive(Debug, Clone)]
pub enum GapMethod {
    Exact {
        seed: u64,
    },
    /// Two-level VQD with EfficientSU2; `reps: None` uses
    /// [`default_reps`].
    Vqd {
        reps: Option<usize>,
        run: Box<RunConfig>,
    },
}

/// Repetitions used for an `n`-spin chain when none are given:
/// `max(5, ceil(n/2))`.
pub fn default_reps(n: usize) -> usize {
    5.max(n.div_ceil(2))
}

/// Two lowest MGM energies and their gap for every `n` in `ns`, computed in
/// parallel and returned in input order.
pub fn energy_gap_scan(ns: &[usize], params: &MgmParams, method: &GapMethod) -> Result<Vec<GapRow>> {
    ns.par_iter()
        .map(|&n| {
            let p = MgmParams {
                n_spins: n,
                ..*params
            };
            let h = build_mgm(&p)?;
            let (e0, e1) = match method {
                GapMethod::Exact { seed } => {
                    let e = exact::lowest_eigenvalues(&h, 2, *seed)?;
                    (e[0], e[1])
                }
                GapMethod::Vqd { reps, run } => {
                    let r = reps.unwrap_or_else(|| default_reps(n));
                    let cfg = RunConfig {
                        problem: format!("mgm n={n}"),
                        ..(**run).clone()
                    };
                    let levels = vqd_run(&h, &|_| Ansatz::efficient_su2(n, r), 2, None, &cfg)?;
                    (levels[0].best_energy, levels[1].best_energy)
                }
            };
            Ok(GapRow {
                n,
                e0,
                e1,
                gap: e1 - e0,
                parity: if n % 2 == 0 { Parity::Even } else { Parity::Odd },
            })
        })
        .collect()
}
