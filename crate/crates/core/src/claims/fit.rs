//! Maximum-likelihood fitting of `(beta1, beta2, theta)`.
//!
//! The simplex runs on `(ln beta1, ln beta2, ln theta)`, which keeps every
//! trial point admissible. Starting values come from moment matching on the
//! observed inter-arrival times and delays and from the empirical Kendall's
//! tau of those pairs.

use crate::claims::likelihood::{likelihood_quadrature, log_likelihood};
use crate::claims::types::{EventLog, ModelParams};
use crate::copula::{empirical_kendall_tau, theta_from_tau, INDEPENDENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::quadrature::QuadratureOptions;

/// Upper clamp on the empirical tau used for the starting value of theta.
pub const MAX_INITIAL_TAU: f64 = 0.95;

/// Default upper bound on theta during the search, the value matching
/// `MAX_INITIAL_TAU` (tau = 0.95, theta = 38). The likelihood has no
/// maximum without it: the first claim's term is the copula density itself,
/// which grows without bound as theta rises along `beta2 / beta1 = t_1 / w_1`.
pub const DEFAULT_THETA_MAX: f64 = 2.0 * MAX_INITIAL_TAU / (1.0 - MAX_INITIAL_TAU);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub simplex: SimplexOptions,
    pub quadrature: QuadratureOptions,
    /// Restart once from a fresh simplex around the best point when the first
    /// run hits the iteration cap.
    pub restart: bool,
    /// Trial points with theta above this bound are rejected.
    pub theta_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            quadrature: likelihood_quadrature(),
            restart: true,
            theta_max: DEFAULT_THETA_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelParams,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub init: ModelParams,
}

/// Starting point for the optimizer.
///
/// Rates are reciprocal sample means of the inter-arrival times and delays;
/// theta inverts the empirical tau of `(t*_i, w_i)` after clamping it to
/// `[0, MAX_INITIAL_TAU]`. A non-positive tau starts at independence.
pub fn initial_params(log: &EventLog) -> Result<ModelParams> {
    if log.len() < 2 {
        return Err(Error::Invalid(format!(
            "initial values need at least 2 events, got {}",
            log.len()
        )));
    }
    let gaps = log.inter_arrivals();
    let delays = log.delays();
    if let Some(k) = gaps.iter().position(|&g| g <= 0.0) {
        return Err(Error::Invalid(format!(
            "event {} has a non-positive inter-arrival time {}",
            k + 1,
            gaps[k]
        )));
    }
    let n = gaps.len() as f64;
    let mean_gap = gaps.iter().sum::<f64>() / n;
    let mean_delay = delays.iter().sum::<f64>() / n;
    if mean_delay <= 0.0 {
        return Err(Error::Invalid("all reporting delays are zero".into()));
    }
    let pairs: Vec<(f64, f64)> = gaps.into_iter().zip(delays).collect();
    let tau = empirical_kendall_tau(&pairs)?.clamp(0.0, MAX_INITIAL_TAU);
    let theta = if tau <= 0.0 {
        INDEPENDENCE_THRESHOLD
    } else {
        theta_from_tau(tau)?.value()
    };
    ModelParams::new(1.0 / mean_gap, 1.0 / mean_delay, theta)
}

fn to_log_space(p: &ModelParams) -> [f64; 3] {
    [p.beta1.ln(), p.beta2.ln(), p.theta.value().max(f64::MIN_POSITIVE).ln()]
}

fn from_log_space(x: &[f64]) -> Option<ModelParams> {
    ModelParams::new(x[0].exp(), x[1].exp(), x[2].exp()).ok()
}

/// Maximizes the log-likelihood. Non-convergence is reported through
/// `converged = false`; a quadrature failure aborts the fit with its error.
pub fn fit_mle(log: &EventLog, init: Option<ModelParams>, opts: &FitOptions) -> Result<FitResult> {
    if log.len() < 3 {
        return Err(Error::Invalid(format!(
            "maximum likelihood needs at least 3 events, got {}",
            log.len()
        )));
    }
    let init = match init {
        Some(p) => p,
        None => initial_params(log)?,
    };
    if init.theta.value() > opts.theta_max {
        return Err(Error::Invalid(format!(
            "initial theta {} exceeds the search bound {}",
            init.theta.value(),
            opts.theta_max
        )));
    }
    let objective = |x: &[f64]| -> Result<f64> {
        match from_log_space(x) {
            Some(p) if p.theta.value() <= opts.theta_max => {
                Ok(-log_likelihood(log, &p, &opts.quadrature)?)
            }
            _ => Ok(f64::INFINITY),
        }
    };

    let mut run = nelder_mead(objective, &to_log_space(&init), &opts.simplex)?;
    let mut iterations = run.iterations;
    if !run.converged && opts.restart {
        let restart = SimplexOptions {
            initial_step: 0.5 * opts.simplex.initial_step,
            ..opts.simplex
        };
        run = nelder_mead(objective, &run.x, &restart)?;
        iterations += run.iterations;
    }
    let params = from_log_space(&run.x)
        .ok_or_else(|| Error::Degenerate(format!("optimizer left the parameter space at {:?}", run.x)))?;
    let loglik = -run.value;
    Ok(FitResult {
        params,
        loglik,
        converged: run.converged && loglik.is_finite(),
        iterations,
        init,
    })
}
