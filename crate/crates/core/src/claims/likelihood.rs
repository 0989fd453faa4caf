use rayon::prelude::*;

use crate::claims::density::ln_joint_density_ts;
use crate::claims::types::{EventLog, ModelParams};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOptions;

/// Quadrature settings for likelihood terms: purely relative, because the
/// density of a late claim under poor parameters can be far below any fixed
/// absolute floor and the optimizer still needs its logarithm.
pub fn likelihood_quadrature() -> QuadratureOptions {
    QuadratureOptions::relative(1e-8)
}

/// `Σ_i ln f_(T_i,S_i)(t_i, s_i)`.
///
/// Terms are evaluated in parallel and reduced in record order, so the result
/// does not depend on the worker count. A term whose density underflows to
/// zero makes the total `-inf`.
pub fn log_likelihood(log: &EventLog, params: &ModelParams, opts: &QuadratureOptions) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::Invalid("log-likelihood of an empty event log".into()));
    }
    if let Some(r) = log.records().iter().find(|r| r.s <= r.t || r.t <= 0.0) {
        return Err(Error::Invalid(format!(
            "event {} needs 0 < t < s for the likelihood, got ({}, {})",
            r.index, r.t, r.s
        )));
    }
    let terms: Vec<f64> = log
        .records()
        .par_iter()
        .map(|r| ln_joint_density_ts(r.index, r.t, r.s, params, opts))
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}
