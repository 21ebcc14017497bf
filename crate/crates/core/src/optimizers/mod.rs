//! Classical outer loops driving a black-box objective.
//!
//! All optimizers minimize, count every objective call through
//! [`Objective::evaluations`], and return an [`OptimizerTrace`] with one
//! record per iteration.

mod gradient;
mod qnspsa;
mod spsa;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gradient::{
    finite_difference_gradient, parameter_shift_gradient, shift_gradient_minimize, GradientConfig,
};
pub use qnspsa::{qnspsa_minimize, QnspsaConfig};
pub use spsa::{spsa_minimize, SpsaConfig};

/// A cost function over parameter vectors.
///
/// `evaluate` may be stochastic, but must be deterministic given the
/// objective's own RNG position. Implementations count one evaluation per
/// `evaluate` call and per fidelity probe.
pub trait Objective {
    fn n_params(&self) -> usize;

    fn evaluate(&mut self, theta: &[f64]) -> Result<f64>;

    /// `|<psi(a)|psi(b)>|^2`, if the objective has a state behind it.
    fn fidelity(&mut self, _a: &[f64], _b: &[f64]) -> Option<Result<f64>> {
        None
    }

    /// Exact gradient (parameter-shift rule) when every slot supports it.
    fn shift_gradient(&mut self, _theta: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn evaluations(&self) -> u64;
}

type FidelityFn<'a> = Box<dyn FnMut(&[f64], &[f64]) -> f64 + 'a>;

/// Closure-backed objective, mostly for tests and classical problems.
pub struct FnObjective<'a, F> {
    n_params: usize,
    f: F,
    fidelity: Option<FidelityFn<'a>>,
    evaluations: u64,
}

impl<'a, F: FnMut(&[f64]) -> f64> FnObjective<'a, F> {
    pub fn new(n_params: usize, f: F) -> Self {
        Self {
            n_params,
            f,
            fidelity: None,
            evaluations: 0,
        }
    }

    pub fn with_fidelity(mut self, probe: impl FnMut(&[f64], &[f64]) -> f64 + 'a) -> Self {
        self.fidelity = Some(Box::new(probe));
        self
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<'_, F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        Ok((self.f)(theta))
    }

    fn fidelity(&mut self, a: &[f64], b: &[f64]) -> Option<Result<f64>> {
        let probe = self.fidelity.as_mut()?;
        self.evaluations += 1;
        Some(Ok(probe(a, b)))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cumulative_evaluations: u64,
    pub objective_value: f64,
    pub best_objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub optimizer: String,
    pub records: Vec<TraceRecord>,
    /// Evaluations spent before the first iteration (gain calibration,
    /// initial value).
    pub setup_evaluations: u64,
    pub final_theta: Vec<f64>,
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    pub wall_time_s: f64,
}

pub const TRACE_CSV_HEADER: &str = "iteration,cumulative_evaluations,objective_value,best_objective";

impl OptimizerTrace {
    fn new(optimizer: &str, theta0: &[f64]) -> Self {
        Self {
            optimizer: optimizer.to_string(),
            records: Vec::new(),
            setup_evaluations: 0,
            final_theta: theta0.to_vec(),
            best_theta: theta0.to_vec(),
            best_value: f64::INFINITY,
            wall_time_s: 0.0,
        }
    }

    /// Appends an iteration; `theta` is the point `value` was measured at.
    fn record(&mut self, evaluations: u64, value: f64, theta: &[f64], keep_theta: bool) {
        if value < self.best_value {
            self.best_value = value;
            self.best_theta = theta.to_vec();
        }
        self.records.push(TraceRecord {
            iteration: self.records.len(),
            cumulative_evaluations: evaluations,
            objective_value: value,
            best_objective: self.best_value,
            theta: keep_theta.then(|| theta.to_vec()),
        });
    }

    pub fn evaluations(&self) -> u64 {
        self.records
            .last()
            .map_or(self.setup_evaluations, |r| r.cumulative_evaluations)
    }

    pub fn last_value(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective_value)
    }

    /// Header plus one `iteration,cumulative_evaluations,objective_value,best_objective`
    /// row per record.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.iteration, r.cumulative_evaluations, r.objective_value, r.best_objective
            );
        }
        s
    }

    fn abort(self, source: Error) -> Error {
        Error::OptimizerAborted {
            source: Box::new(source),
            trace: Box::new(self),
        }
    }
}

/// `+1` or `-1` with equal probability, per component.
fn rademacher(n: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    use rand::Rng as _;
    (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect()
}

fn check_theta0(obj: &dyn Objective, theta0: &[f64]) -> Result<()> {
    if theta0.len() != obj.n_params() {
        return Err(Error::ParamLength {
            expected: obj.n_params(),
            found: theta0.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = OptimizerTrace::new("spsa", &[0.0]);
        t.record(2, 1.5, &[0.1], false);
        t.record(4, 2.0, &[0.2], false);
        assert_eq!(
            t.to_csv(),
            "iteration,cumulative_evaluations,objective_value,best_objective\n0,2,1.5,1.5\n1,4,2,1.5\n"
        );
        assert_eq!(t.best_theta, vec![0.1]);
    }
}
