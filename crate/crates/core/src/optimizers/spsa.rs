use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_theta0, rademacher, Objective, OptimizerTrace};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    /// Step gain; `None` calibrates it from `calibration_steps` probes.
    pub a: Option<f64>,
    pub c: f64,
    /// Stability constant; `None` means `0.05 * iters`.
    pub stability: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    /// Intended magnitude of the first update when calibrating.
    pub target_step: f64,
    /// Each calibration probe costs two evaluations.
    pub calibration_steps: usize,
    pub record_theta: bool,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: None,
            c: 0.1,
            stability: None,
            alpha: 0.602,
            gamma: 0.101,
            target_step: 0.1,
            calibration_steps: 5,
            record_theta: false,
        }
    }
}

impl SpsaConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.c) || self.a.is_some_and(|a| !positive(a)) {
            return Err(Error::InvalidArgument("SPSA gains a and c must be > 0".into()));
        }
        if self.stability.is_some_and(|s| s.is_nan() || s < 0.0) {
            return Err(Error::InvalidArgument(
                "SPSA stability constant must be >= 0".into(),
            ));
        }
        if self.a.is_none() && (self.calibration_steps == 0 || !positive(self.target_step)) {
            return Err(Error::InvalidArgument(
                "SPSA calibration needs calibration_steps >= 1 and target_step > 0".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn stability_for(&self, iters: usize) -> f64 {
        self.stability.unwrap_or(0.05 * iters as f64)
    }

    pub(crate) fn c_k(&self, k: usize) -> f64 {
        self.c / ((k + 1) as f64).powf(self.gamma)
    }
}

pub(crate) fn finite(value: f64, iteration: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { iteration })
    }
}

/// Two-sided SPSA gradient estimate at `theta` with perturbation `ck`.
/// Returns the estimate and the mean of the two probe values.
pub(crate) fn spsa_gradient(
    obj: &mut dyn Objective,
    theta: &[f64],
    ck: f64,
    rng: &mut Rng,
    iteration: usize,
) -> Result<(Vec<f64>, f64)> {
    let delta = rademacher(theta.len(), rng);
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
    let fp = finite(obj.evaluate(&plus)?, iteration)?;
    let fm = finite(obj.evaluate(&minus)?, iteration)?;
    let scale = (fp - fm) / (2.0 * ck);
    Ok((delta.iter().map(|d| scale / d).collect(), 0.5 * (fp + fm)))
}

/// Chooses `a` so that `a_0 * mean|g_i|` equals the target step.
fn calibrate(
    obj: &mut dyn Objective,
    theta: &[f64],
    cfg: &SpsaConfig,
    stability: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let mut magnitude = 0.0;
    for _ in 0..cfg.calibration_steps {
        let (g, _) = spsa_gradient(obj, theta, cfg.c, rng, 0)?;
        // |g_i| is the same for every component of one Rademacher estimate.
        magnitude += g.first().map_or(0.0, |v| v.abs());
    }
    magnitude /= cfg.calibration_steps as f64;
    let base = cfg.target_step * (stability + 1.0).powf(cfg.alpha);
    Ok(if magnitude > 0.0 { base / magnitude } else { base })
}

/// Minimizes `obj` from `theta0` with `iters` SPSA iterations.
///
/// Each record holds the mean of the iteration's two probe values, taken
/// around the pre-update point, which is also the point stored as best.
pub fn spsa_minimize(
    obj: &mut dyn Objective,
    theta0: &[f64],
    iters: usize,
    cfg: &SpsaConfig,
    rng: &mut Rng,
) -> Result<OptimizerTrace> {
    check_theta0(obj, theta0)?;
    cfg.validate()?;
    if iters == 0 {
        return Err(Error::InvalidArgument("iteration count must be >= 1".into()));
    }
    let start = Instant::now();
    let mut trace = OptimizerTrace::new("spsa", theta0);
    let stability = cfg.stability_for(iters);
    let a = match cfg.a {
        Some(a) => a,
        None => match calibrate(obj, theta0, cfg, stability, rng) {
            Ok(a) => a,
            Err(e) => return Err(trace.abort(e)),
        },
    };
    trace.setup_evaluations = obj.evaluations();

    let mut theta = theta0.to_vec();
    for k in 0..iters {
        let (g, value) = match spsa_gradient(obj, &theta, cfg.c_k(k), rng, k) {
            Ok(v) => v,
            Err(e) => {
                trace.final_theta = theta;
                trace.wall_time_s = start.elapsed().as_secs_f64();
                return Err(trace.abort(e));
            }
        };
        trace.record(obj.evaluations(), value, &theta, cfg.record_theta);
        let ak = a / (k as f64 + 1.0 + stability).powf(cfg.alpha);
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= ak * gi;
        }
    }
    trace.final_theta = theta;
    trace.wall_time_s = start.elapsed().as_secs_f64();
    Ok(trace)
}
