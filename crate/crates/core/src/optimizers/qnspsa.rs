use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spsa::{finite, spsa_gradient};
use super::{check_theta0, rademacher, Objective, OptimizerTrace};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnspsaConfig {
    pub learning_rate: f64,
    /// Displacement used by the fidelity probes.
    pub perturbation: f64,
    pub regularization: f64,
    /// Keep a running average of metric estimates (seeded with the identity)
    /// instead of using each single-shot estimate.
    pub averaging: bool,
    /// Perturbation of the SPSA gradient estimate, decayed as `c/(k+1)^gamma`.
    pub c: f64,
    pub gamma: f64,
    /// Decay the learning rate as `((1+A)/(k+1+A))^alpha` with `A = 0.05 * iters`.
    pub decay: bool,
    pub alpha: f64,
    /// Reject a step when the objective at the candidate exceeds the last
    /// accepted value by more than the allowed increase (one extra
    /// evaluation per iteration).
    pub blocking: bool,
    /// `None` calibrates to twice the standard deviation of
    /// `blocking_samples` evaluations at the start point.
    pub allowed_increase: Option<f64>,
    pub blocking_samples: usize,
    pub record_theta: bool,
}

impl Default for QnspsaConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            perturbation: 0.01,
            regularization: 0.001,
            averaging: true,
            c: 0.1,
            gamma: 0.101,
            decay: false,
            alpha: 0.602,
            blocking: true,
            allowed_increase: None,
            blocking_samples: 10,
            record_theta: false,
        }
    }
}

impl QnspsaConfig {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("learning rate", self.learning_rate),
            ("perturbation", self.perturbation),
            ("regularization", self.regularization),
            ("c", self.c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("QNSPSA {name} must be > 0")));
            }
        }
        if self.blocking && self.allowed_increase.is_none() && self.blocking_samples < 2 {
            return Err(Error::InvalidArgument(
                "QNSPSA blocking calibration needs at least 2 samples".into(),
            ));
        }
        Ok(())
    }
}

/// Mean objective at `theta` and the allowed increase for blocking.
fn calibrate_blocking(obj: &mut dyn Objective, theta: &[f64], cfg: &QnspsaConfig) -> Result<(f64, f64)> {
    let n = if cfg.allowed_increase.is_some() {
        1
    } else {
        cfg.blocking_samples
    };
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(finite(obj.evaluate(theta)?, 0)?);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let allowed = cfg.allowed_increase.unwrap_or_else(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        2.0 * var.sqrt()
    });
    Ok((mean, allowed))
}

fn probe(obj: &mut dyn Objective, a: &[f64], b: &[f64], iteration: usize) -> Result<f64> {
    let f = obj
        .fidelity(a, b)
        .ok_or_else(|| Error::InvalidArgument("QNSPSA needs an objective with a fidelity probe".into()))??;
    finite(f, iteration)
}

/// Single-sample estimate of the Fubini-Study metric at `theta`.
pub(crate) fn metric_sample(
    obj: &mut dyn Objective,
    theta: &[f64],
    eps: f64,
    rng: &mut Rng,
    iteration: usize,
) -> Result<DMatrix<f64>> {
    let n = theta.len();
    let d1 = DVector::from_vec(rademacher(n, rng));
    let d2 = DVector::from_vec(rademacher(n, rng));
    let at = |s1: f64, s2: f64| -> Vec<f64> {
        (0..n)
            .map(|i| theta[i] + eps * (s1 * d1[i] + s2 * d2[i]))
            .collect()
    };
    let f_pp = probe(obj, theta, &at(1.0, 1.0), iteration)?;
    let f_p = probe(obj, theta, &at(1.0, 0.0), iteration)?;
    let f_mp = probe(obj, theta, &at(-1.0, 1.0), iteration)?;
    let f_m = probe(obj, theta, &at(-1.0, 0.0), iteration)?;
    let delta_f = f_pp - f_p - f_mp + f_m;
    let outer = &d1 * d2.transpose();
    Ok((&outer + outer.transpose()) * (-delta_f / (8.0 * eps * eps)))
}

/// `(sqrt(G^2) + lambda I)^{-1} g` for symmetric `G`.
fn precondition(metric: &DMatrix<f64>, g: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let eig = metric.clone().symmetric_eigen();
    let shifted: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs() + lambda).collect();
    let largest = shifted.iter().cloned().fold(0.0, f64::max);
    let smallest = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest.is_nan() || smallest <= 1e-14 * largest.max(1.0) {
        return Err(Error::SingularMetric(lambda));
    }
    let q = &eig.eigenvectors;
    let g = DVector::from_column_slice(g);
    let mut coeffs = q.transpose() * g;
    for (c, s) in coeffs.iter_mut().zip(&shifted) {
        *c /= s;
    }
    Ok((q * coeffs).iter().copied().collect())
}

/// Quantum natural SPSA: SPSA gradients preconditioned by a stochastic
/// estimate of the state-space metric.
///
/// Costs two evaluations plus four fidelity probes per iteration, and one
/// more evaluation with blocking on.
pub fn qnspsa_minimize(
    obj: &mut dyn Objective,
    theta0: &[f64],
    iters: usize,
    cfg: &QnspsaConfig,
    rng: &mut Rng,
) -> Result<OptimizerTrace> {
    check_theta0(obj, theta0)?;
    cfg.validate()?;
    if iters == 0 {
        return Err(Error::InvalidArgument("iteration count must be >= 1".into()));
    }
    let start = Instant::now();
    let n = theta0.len();
    let stability = 0.05 * iters as f64;
    let mut trace = OptimizerTrace::new("qnspsa", theta0);
    let mut blocking = None;
    if cfg.blocking {
        match calibrate_blocking(obj, theta0, cfg) {
            Ok(b) => blocking = Some(b),
            Err(e) => return Err(trace.abort(e)),
        }
    }
    trace.setup_evaluations = obj.evaluations();
    let mut theta = theta0.to_vec();
    let mut metric = DMatrix::<f64>::identity(n, n);

    for k in 0..iters {
        let ck = cfg.c / ((k + 1) as f64).powf(cfg.gamma);
        let step = spsa_gradient(obj, &theta, ck, rng, k).and_then(|(g, value)| {
            let sample = metric_sample(obj, &theta, cfg.perturbation, rng, k)?;
            Ok((g, value, sample))
        });
        let (g, value, sample) = match step {
            Ok(v) => v,
            Err(e) => {
                trace.final_theta = theta;
                trace.wall_time_s = start.elapsed().as_secs_f64();
                return Err(trace.abort(e));
            }
        };
        trace.record(obj.evaluations(), value, &theta, cfg.record_theta);
        if cfg.averaging {
            let w = 1.0 / (k as f64 + 2.0);
            metric = metric * (1.0 - w) + sample * w;
        } else {
            metric = sample;
        }
        let direction = match precondition(&metric, &g, cfg.regularization) {
            Ok(d) => d,
            Err(e) => {
                trace.final_theta = theta;
                return Err(trace.abort(e));
            }
        };
        let eta = if cfg.decay {
            cfg.learning_rate * ((1.0 + stability) / (k as f64 + 1.0 + stability)).powf(cfg.alpha)
        } else {
            cfg.learning_rate
        };
        let candidate: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t - eta * d).collect();
        match blocking.as_mut() {
            None => theta = candidate,
            Some((last, allowed)) => match obj.evaluate(&candidate).and_then(|v| finite(v, k)) {
                Ok(v) if v <= *last + *allowed => {
                    *last = v;
                    theta = candidate;
                }
                Ok(_) => {}
                Err(e) => {
                    trace.final_theta = theta;
                    return Err(trace.abort(e));
                }
            },
        }
    }
    trace.final_theta = theta;
    trace.wall_time_s = start.elapsed().as_secs_f64();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::FnObjective;
    use crate::rng::SeedStream;

    fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    #[test]
    fn quadratic_with_identity_metric() {
        let mut obj = FnObjective::new(2, |t: &[f64]| t.iter().map(|x| x * x).sum())
            .with_fidelity(|a, b| (-sq_dist(a, b)).exp());
        let mut rng = SeedStream::new(3).child(0);
        let trace = qnspsa_minimize(&mut obj, &[1.0, 1.0], 200, &QnspsaConfig::default(), &mut rng).unwrap();
        let norm = trace.final_theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 0.1, "{:?}", trace.final_theta);
        assert_eq!(trace.setup_evaluations, 10);
        // The last blocking check comes after the final record.
        assert_eq!(trace.evaluations(), 10 + 200 * 7 - 1);
    }

    #[test]
    fn unblocked_quadratic() {
        let mut obj = FnObjective::new(2, |t: &[f64]| t.iter().map(|x| x * x).sum())
            .with_fidelity(|a, b| (-sq_dist(a, b)).exp());
        let mut rng = SeedStream::new(3).child(0);
        let cfg = QnspsaConfig {
            blocking: false,
            ..Default::default()
        };
        let trace = qnspsa_minimize(&mut obj, &[1.0, 1.0], 200, &cfg, &mut rng).unwrap();
        let norm = trace.final_theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 0.1, "{:?}", trace.final_theta);
        assert_eq!(trace.evaluations(), 200 * 6);
    }

    #[test]
    fn blocking_never_accepts_an_increase() {
        let mut obj = FnObjective::new(2, |t: &[f64]| t.iter().map(|x| x * x).sum())
            .with_fidelity(|a, b| (-sq_dist(a, b)).exp());
        let mut rng = SeedStream::new(5).child(0);
        let cfg = QnspsaConfig {
            allowed_increase: Some(0.0),
            record_theta: true,
            ..Default::default()
        };
        let trace = qnspsa_minimize(&mut obj, &[0.7, -0.4], 50, &cfg, &mut rng).unwrap();
        let values: Vec<f64> = trace
            .records
            .iter()
            .map(|r| r.theta.as_ref().unwrap().iter().map(|x| x * x).sum())
            .collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn metric_sample_is_unbiased() {
        // F(a, b) = exp(-(a-b)^T G (a-b)) has metric G.
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 0.7]);
        let gq = g.clone();
        let mut obj = FnObjective::new(3, |_: &[f64]| 0.0).with_fidelity(move |a, b| {
            let d = DVector::from_iterator(3, a.iter().zip(b).map(|(x, y)| x - y));
            (-(d.transpose() * &gq * &d)[0]).exp()
        });
        let mut rng = SeedStream::new(9).child(0);
        let mut avg = DMatrix::<f64>::zeros(3, 3);
        let samples = 20_000;
        for _ in 0..samples {
            avg += metric_sample(&mut obj, &[0.1, 0.2, 0.3], 1e-3, &mut rng, 0).unwrap();
        }
        avg /= samples as f64;
        assert!((avg - g).abs().max() < 0.1);
    }

    #[test]
    fn missing_probe_is_an_error() {
        let mut obj = FnObjective::new(1, |t: &[f64]| t[0]);
        let mut rng = SeedStream::new(3).child(0);
        let err = qnspsa_minimize(&mut obj, &[1.0], 5, &QnspsaConfig::default(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::OptimizerAborted { .. }));
    }

    #[test]
    fn singular_metric_is_reported() {
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(
            precondition(&zero, &[1.0, 1.0], 0.0),
            Err(Error::SingularMetric(_))
        ));
        assert_eq!(precondition(&zero, &[1.0, 2.0], 0.5).unwrap(), vec![2.0, 4.0]);
    }
}
