use std::collections::VecDeque;
use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spsa::finite;
use super::{check_theta0, Objective, OptimizerTrace};
use crate::error::{Error, Result};

/// `m [f(t + pi/(2m) e_j) - f(t - pi/(2m) e_j)] / 2` for every slot `j`,
/// where slot `j` feeds a single Pauli rotation with multiplier `m_j`.
pub fn parameter_shift_gradient(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    theta: &[f64],
    multipliers: &[f64],
) -> Result<Vec<f64>> {
    if multipliers.len() != theta.len() {
        return Err(Error::ParamLength {
            expected: multipliers.len(),
            found: theta.len(),
        });
    }
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for (j, &m) in multipliers.iter().enumerate() {
        let s = PI / (2.0 * m);
        shifted[j] = theta[j] + s;
        let plus = f(&shifted)?;
        shifted[j] = theta[j] - s;
        let minus = f(&shifted)?;
        shifted[j] = theta[j];
        grad.push(m * (plus - minus) / 2.0);
    }
    Ok(grad)
}

/// Central differences with step `h`; `2P` evaluations.
pub fn finite_difference_gradient(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    theta: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        shifted[j] = theta[j] + h;
        let plus = f(&shifted)?;
        shifted[j] = theta[j] - h;
        let minus = f(&shifted)?;
        shifted[j] = theta[j];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    /// Curvature pairs kept for the quasi-Newton direction; 0 gives plain
    /// steepest descent.
    pub memory: usize,
    pub gradient_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Step used when the objective has no shift gradient.
    pub fd_step: f64,
    pub record_theta: bool,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            gradient_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            fd_step: 1e-4,
            record_theta: false,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gradient(obj: &mut dyn Objective, theta: &[f64], h: f64, iteration: usize) -> Result<Vec<f64>> {
    let g = match obj.shift_gradient(theta) {
        Some(g) => g?,
        None => finite_difference_gradient(|t| obj.evaluate(t), theta, h)?,
    };
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite { iteration })
    }
}

/// Two-loop recursion: approximate inverse-Hessian applied to `-g`.
fn quasi_newton_direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y) in pairs.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push((a, rho));
    }
    if let Some((s, y)) = pairs.back() {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= scale);
    } else {
        let norm = dot(g, g).sqrt();
        let scale = 1.0 / norm.max(1.0);
        q.iter_mut().for_each(|v| *v *= scale);
    }
    for ((s, y), (a, rho)) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Deterministic descent with a limited-memory quasi-Newton direction and
/// Armijo backtracking.
///
/// Gradients come from [`Objective::shift_gradient`] when available, central
/// differences otherwise. Stops after `iters` iterations, when the gradient
/// norm drops below the tolerance, or when no step decreases the objective.
pub fn shift_gradient_minimize(
    obj: &mut dyn Objective,
    theta0: &[f64],
    iters: usize,
    cfg: &GradientConfig,
) -> Result<OptimizerTrace> {
    check_theta0(obj, theta0)?;
    if iters == 0 {
        return Err(Error::InvalidArgument("iteration count must be >= 1".into()));
    }
    if !(cfg.backtrack > 0.0 && cfg.backtrack < 1.0) || !(cfg.armijo > 0.0 && cfg.armijo < 1.0) {
        return Err(Error::InvalidArgument(
            "line search constants must lie in (0, 1)".into(),
        ));
    }
    let start = Instant::now();
    let mut trace = OptimizerTrace::new("gradient", theta0);
    let mut theta = theta0.to_vec();

    let setup = obj
        .evaluate(&theta)
        .and_then(|v| finite(v, 0))
        .and_then(|v| Ok((v, gradient(obj, &theta, cfg.fd_step, 0)?)));
    let (mut value, mut g) = match setup {
        Ok(v) => v,
        Err(e) => return Err(trace.abort(e)),
    };
    trace.setup_evaluations = obj.evaluations();
    trace.best_value = value;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();

    for k in 0..iters {
        if dot(&g, &g).sqrt() < cfg.gradient_tol {
            break;
        }
        let mut d = quasi_newton_direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            pairs.clear();
            d = quasi_newton_direction(&g, &pairs);
            slope = dot(&g, &d);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let candidate: Vec<f64> = theta.iter().zip(&d).map(|(x, di)| x + t * di).collect();
            let v = match obj.evaluate(&candidate).and_then(|v| finite(v, k)) {
                Ok(v) => v,
                Err(e) => {
                    trace.final_theta = theta;
                    return Err(trace.abort(e));
                }
            };
            if v <= value + cfg.armijo * t * slope {
                accepted = Some((candidate, v));
                break;
            }
            t *= cfg.backtrack;
        }
        let Some((next, next_value)) = accepted else {
            break;
        };
        let next_g = match gradient(obj, &next, cfg.fd_step, k) {
            Ok(g) => g,
            Err(e) => {
                trace.final_theta = theta;
                return Err(trace.abort(e));
            }
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_g.iter().zip(&g).map(|(a, b)| a - b).collect();
        if cfg.memory > 0 && dot(&s, &y) > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y));
        }
        theta = next;
        value = next_value;
        g = next_g;
        trace.record(obj.evaluations(), value, &theta, cfg.record_theta);
    }
    trace.final_theta = theta;
    trace.wall_time_s = start.elapsed().as_secs_f64();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::FnObjective;

    #[test]
    fn shift_rule_on_cosine() {
        // <Z> after RY(t)|0> is cos t.
        let f = |t: &[f64]| Ok(t[0].cos());
        assert!(parameter_shift_gradient(f, &[0.0], &[1.0]).unwrap()[0].abs() < 1e-15);
        let g = parameter_shift_gradient(f, &[PI / 2.0], &[1.0]).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-15);
        // cos(2t) with the slot doubled
        let g = parameter_shift_gradient(|t| Ok((2.0 * t[0]).cos()), &[0.3], &[2.0]).unwrap();
        assert!((g[0] + 2.0 * (0.6f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn rosenbrock_converges() {
        let rosen = |t: &[f64]| (1.0 - t[0]).powi(2) + 100.0 * (t[1] - t[0] * t[0]).powi(2);
        let mut obj = FnObjective::new(2, rosen);
        let trace = shift_gradient_minimize(&mut obj, &[-1.2, 1.0], 500, &GradientConfig::default()).unwrap();
        assert!(
            (trace.final_theta[0] - 1.0).abs() < 1e-4,
            "{:?}",
            trace.final_theta
        );
        assert!((trace.final_theta[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_in_sixteen_dimensions() {
        let mut obj = FnObjective::new(16, |t: &[f64]| {
            t.iter().enumerate().map(|(i, x)| (1.0 + i as f64) * x * x).sum()
        });
        let trace = shift_gradient_minimize(&mut obj, &[1.0; 16], 200, &GradientConfig::default()).unwrap();
        assert!(dot(&trace.final_theta, &trace.final_theta).sqrt() < 1e-6);
        for w in trace.records.windows(2) {
            assert!(w[1].objective_value <= w[0].objective_value);
            assert!(w[1].cumulative_evaluations > w[0].cumulative_evaluations);
        }
    }
}
