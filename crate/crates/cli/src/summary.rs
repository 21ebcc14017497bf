//! `summary.json`, `trace.csv` and `convergence.svg` for one run.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spinvar::statevector::NoiseConfig;
use spinvar::vqa::{AnsatzInfo, EnergyConvention, OptimizerChoice, VqaResult};

use crate::plot::{Chart, Series};
use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub method: String,
    pub n_qubits: usize,
    pub ansatz: Option<AnsatzInfo>,
    pub optimizer: Option<OptimizerChoice>,
    pub iters: Option<usize>,
    pub seed: u64,
    pub shots: Option<u64>,
    pub noise: NoiseConfig,
    pub trajectories: Option<u64>,
    pub final_energy: f64,
    pub best_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitstring: Option<String>,
    pub energy_convention: EnergyConvention,
    pub converged: Option<bool>,
    pub evaluations: Option<u64>,
    pub wall_time_s: f64,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn from_result(method: &str, r: &VqaResult, wall_time_s: f64) -> Self {
        Self {
            problem: r.problem.clone(),
            method: method.to_string(),
            n_qubits: r.n_qubits,
            ansatz: Some(r.ansatz.clone()),
            optimizer: Some(r.optimizer.clone()),
            iters: Some(r.iters),
            seed: r.seed,
            shots: r.simulator.shots(),
            noise: r.simulator.noise(),
            trajectories: r.trajectories,
            final_energy: r.final_energy,
            best_energy: r.best_energy,
            exact_energy: r.exact_energy,
            cut_value: r.cut_value,
            bitstring: r.bitstring.clone(),
            energy_convention: r.energy_convention,
            converged: r.converged,
            evaluations: Some(r.trace.evaluations()),
            wall_time_s,
            tool_version: TOOL_VERSION.to_string(),
            warnings: r.warnings.clone(),
        }
    }

    /// A non-variational result (exact diagonalization, brute force).
    pub fn classical(problem: String, method: &str, n_qubits: usize, energy: f64, seed: u64) -> Self {
        Self {
            problem,
            method: method.to_string(),
            n_qubits,
            ansatz: None,
            optimizer: None,
            iters: None,
            seed,
            shots: None,
            noise: NoiseConfig::off(),
            trajectories: None,
            final_energy: energy,
            best_energy: energy,
            exact_energy: Some(energy),
            cut_value: None,
            bitstring: None,
            energy_convention: EnergyConvention::Actual,
            converged: Some(true),
            evaluations: None,
            wall_time_s: 0.0,
            tool_version: TOOL_VERSION.to_string(),
            warnings: Vec::new(),
        }
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("cannot serialize {}: {e}", path.display())))?;
    write(path, &(text + "\n"))
}

pub fn convergence_chart(title: &str, r: &VqaResult) -> Chart {
    let pts = |f: fn(&spinvar::optimizers::TraceRecord) -> f64| {
        r.trace
            .records
            .iter()
            .map(|rec| (rec.cumulative_evaluations as f64, f(rec)))
            .collect()
    };
    Chart {
        title: title.to_string(),
        x_label: "objective evaluations".into(),
        y_label: "energy".into(),
        series: vec![
            Series {
                label: "objective".into(),
                points: pts(|r| r.objective_value),
                markers: false,
            },
            Series {
                label: "best so far".into(),
                points: pts(|r| r.best_objective),
                markers: false,
            },
        ],
        reference: r.exact_energy.map(|e| ("exact".to_string(), e)),
    }
}

/// Writes `trace.csv`, `summary.json` and, unless disabled, `convergence.svg`.
pub fn write_run(dir: &Path, summary: &Summary, r: &VqaResult, plot: bool) -> Result<(), CliError> {
    create_dir(dir)?;
    write(&dir.join("trace.csv"), &r.trace.to_csv())?;
    write_json(&dir.join("summary.json"), summary)?;
    if plot {
        let title = format!("{} ({})", summary.problem, summary.method);
        write(
            &dir.join("convergence.svg"),
            &convergence_chart(&title, r).render(),
        )?;
    }
    Ok(())
}
