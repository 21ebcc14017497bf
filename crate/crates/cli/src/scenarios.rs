//! Named benchmark scenarios, run over a sweep of seeds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinvar::optimizers::{GradientConfig, QnspsaConfig, SpsaConfig};
use spinvar::problems::{build_mgm, MgmParams};
use spinvar::statevector::NoiseConfig;
use spinvar::vqa::{qaoa_run, vqe_run, Ansatz, OptimizerChoice, RunConfig, Simulator, VqaResult};
use spinvar::{exact, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Vqe { reps: usize },
    Qaoa { p: usize },
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub label: &'static str,
    pub family: Family,
    pub optimizer: OptimizerChoice,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub n_spins: usize,
    pub iters: usize,
    pub simulator: Simulator,
    pub runs: Vec<ScenarioRun>,
}

fn spsa() -> OptimizerChoice {
    OptimizerChoice::Spsa(SpsaConfig::default())
}

fn qnspsa() -> OptimizerChoice {
    OptimizerChoice::Qnspsa(QnspsaConfig::default())
}

fn grad() -> OptimizerChoice {
    OptimizerChoice::Grad(GradientConfig::default())
}

fn noisy() -> Simulator {
    Simulator::Sampled {
        shots: 1024,
        noise: NoiseConfig::nisq(),
    }
}

pub fn registry() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "noisy-4spin-spsa",
            description: "4-spin MGM, noisy shots, SPSA: VQE (EfficientSU2 r=5) vs QAOA (p=5), 800 iterations",
            n_spins: 4,
            iters: 800,
            simulator: noisy(),
            runs: vec![
                ScenarioRun { label: "vqe-spsa", family: Family::Vqe { reps: 5 }, optimizer: spsa() },
                ScenarioRun { label: "qaoa-spsa", family: Family::Qaoa { p: 5 }, optimizer: spsa() },
            ],
        },
        Scenario {
            name: "noisy-4spin-qnspsa",
            description: "4-spin MGM, noisy shots, QNSPSA for VQE and QAOA plus the SPSA QAOA baseline, 800 iterations",
            n_spins: 4,
            iters: 800,
            simulator: noisy(),
            runs: vec![
                ScenarioRun { label: "vqe-qnspsa", family: Family::Vqe { reps: 5 }, optimizer: qnspsa() },
                ScenarioRun { label: "qaoa-qnspsa", family: Family::Qaoa { p: 5 }, optimizer: qnspsa() },
                ScenarioRun { label: "qaoa-spsa", family: Family::Qaoa { p: 5 }, optimizer: spsa() },
            ],
        },
        Scenario {
            name: "noiseless-4spin",
            description: "4-spin MGM, exact expectation, gradient optimizer: VQE (r=5) and QAOA (p=5), 500 iterations",
            n_spins: 4,
            iters: 500,
            simulator: Simulator::Exact,
            runs: vec![
                ScenarioRun { label: "vqe-grad", family: Family::Vqe { reps: 5 }, optimizer: grad() },
                ScenarioRun { label: "qaoa-grad", family: Family::Qaoa { p: 5 }, optimizer: grad() },
            ],
        },
        Scenario {
            name: "8spin-qaoa-p16",
            description: "8-spin MGM, exact expectation, QAOA p=16 with the gradient optimizer, 1300 iterations",
            n_spins: 8,
            iters: 1300,
            simulator: Simulator::Exact,
            runs: vec![ScenarioRun { label: "qaoa-grad", family: Family::Qaoa { p: 16 }, optimizer: grad() }],
        },
        Scenario {
            name: "8spin-vqe",
            description: "8-spin MGM, exact expectation, EfficientSU2 r=11 (192 parameters) with the gradient optimizer, 1300 iterations",
            n_spins: 8,
            iters: 1300,
            simulator: Simulator::Exact,
            runs: vec![ScenarioRun { label: "vqe-grad", family: Family::Vqe { reps: 11 }, optimizer: grad() }],
        },
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    registry().into_iter().find(|s| s.name == name)
}

pub fn names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name).collect()
}

pub struct Outcome {
    pub seed: u64,
    pub label: &'static str,
    pub result: Result<VqaResult>,
}

impl Scenario {
    pub fn exact_energy(&self) -> Result<f64> {
        let h = build_mgm(&MgmParams::new(self.n_spins))?;
        Ok(exact::lowest_eigenvalues(&h, 1, 0)?[0])
    }

    /// Runs every (seed, run) pair in parallel; outcomes come back in
    /// seed-major, registry order.
    pub fn run(&self, seeds: &[u64], iters: Option<usize>) -> Result<Vec<Outcome>> {
        let h = build_mgm(&MgmParams::new(self.n_spins))?;
        let exact_energy = self.exact_energy()?;
        let iters = iters.unwrap_or(self.iters);
        let jobs: Vec<(u64, &ScenarioRun)> = seeds
            .iter()
            .flat_map(|&s| self.runs.iter().map(move |r| (s, r)))
            .collect();
        Ok(jobs
            .into_par_iter()
            .map(|(seed, run)| {
                let mut cfg = RunConfig::new(
                    format!("mgm n={} J=1 alpha=-0.1", self.n_spins),
                    run.optimizer.clone(),
                    iters,
                    seed,
                );
                cfg.simulator = self.simulator;
                cfg.exact_energy = Some(exact_energy);
                let result = match run.family {
                    Family::Vqe { reps } => {
                        Ansatz::efficient_su2(self.n_spins, reps).and_then(|a| vqe_run(&h, &a, &cfg))
                    }
                    Family::Qaoa { p } => qaoa_run(&h, p, &cfg),
                };
                Outcome {
                    seed,
                    label: run.label,
                    result,
                }
            })
            .collect())
    }
}

fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub seeds: Vec<u64>,
    pub final_energies: Vec<f64>,
    pub best_energies: Vec<f64>,
    pub median_final_energy: Option<f64>,
    pub median_best_energy: Option<f64>,
    /// Median of `|final_energy - exact_energy|`.
    pub median_error: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: String,
    pub description: String,
    pub exact_energy: f64,
    pub runs: BTreeMap<String, RunAggregate>,
}

pub fn aggregate(s: &Scenario, exact_energy: f64, outcomes: &[Outcome]) -> Aggregate {
    let mut runs = BTreeMap::new();
    for run in &s.runs {
        let mut agg = RunAggregate {
            seeds: Vec::new(),
            final_energies: Vec::new(),
            best_energies: Vec::new(),
            median_final_energy: None,
            median_best_energy: None,
            median_error: None,
            failures: Vec::new(),
        };
        for o in outcomes.iter().filter(|o| o.label == run.label) {
            match &o.result {
                Ok(r) => {
                    agg.seeds.push(o.seed);
                    agg.final_energies.push(r.final_energy);
                    agg.best_energies.push(r.best_energy);
                }
                Err(e) => agg.failures.push(format!("seed {}: {e}", o.seed)),
            }
        }
        agg.median_final_energy = median(&agg.final_energies);
        agg.median_best_energy = median(&agg.best_energies);
        let errors: Vec<f64> = agg
            .final_energies
            .iter()
            .map(|e| (e - exact_energy).abs())
            .collect();
        agg.median_error = median(&errors);
        runs.insert(run.label.to_string(), agg);
    }
    Aggregate {
        scenario: s.name.to_string(),
        description: s.description.to_string(),
        exact_energy,
        runs,
    }
}
