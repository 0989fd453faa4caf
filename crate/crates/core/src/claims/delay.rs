//! Reporting-delay probabilities on the calendar-year grid.
//!
//! Calendar interval `I_k = [k - 1, k)` in log time units (years). For the
//! `i`-th claim, `p(i, j, l) = P(S_i ∈ I_{j+l} | T_i ∈ I_j)`; `l = 0` is the
//! same-year report.

use statrs::function::gamma::ln_gamma;

use crate::claims::types::ModelParams;
use crate::copula::{conditional_cdf_from_logs, conditional_survival_from_logs};
use crate::error::{Error, Result};
use crate::numeric::{ln_exp_cdf, ln_exp_pdf, ln_gamma_pdf};
use crate::quadrature::{integrate_log, integrate_log_breaks, QuadratureOptions};

/// Denominators below this are rejected as degenerate.
pub const MIN_OCCURRENCE_PROBABILITY: f64 = 1e-300;

/// Bounds of calendar interval `I_k`.
#[inline]
pub fn calendar_interval(k: usize) -> (f64, f64) {
    ((k - 1) as f64, k as f64)
}

/// 1-based calendar year containing time `t >= 0`.
#[inline]
pub fn calendar_year(t: f64) -> usize {
    t.floor() as usize + 1
}

/// `ln P(T_i ∈ I_j)` for `T_i ~ Gamma(i, beta1)`, by quadrature.
pub fn ln_occurrence_probability(i: usize, j: usize, params: &ModelParams, opts: &QuadratureOptions) -> Result<f64> {
    let (lo, hi) = calendar_interval(j);
    let shape = i as f64;
    integrate_log(|t| Ok(ln_gamma_pdf(t, shape, params.beta1)), lo, hi, opts)
}

/// `ln P(W ∈ [w_lo, w_hi] | T* = a)` with `ln_u = ln F_{T*}(a)`. An empty
/// window has probability zero.
fn ln_delay_window(ln_u: f64, w_lo: f64, w_hi: f64, p: &ModelParams) -> f64 {
    let prob = if w_lo <= 0.0 {
        conditional_cdf_from_logs(ln_u, ln_exp_cdf(w_hi, p.beta2), p.theta)
    } else {
        conditional_survival_from_logs(ln_u, ln_exp_cdf(w_lo, p.beta2), p.theta)
            - conditional_survival_from_logs(ln_u, ln_exp_cdf(w_hi, p.beta2), p.theta)
    };
    if prob > 0.0 {
        prob.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln P(T_i ∈ I_j, S_i ∈ I_{j+l})`.
///
/// The joint density of `(T_i, S_i)` integrated over the report window. The
/// delay integral is done in closed form through the conditional
/// distribution function of the copula, leaving the occurrence time `t` and,
/// for `i >= 2`, the last inter-arrival time `a` to quadrature.
pub fn ln_joint_interval_probability(
    i: usize,
    j: usize,
    l: usize,
    params: &ModelParams,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::Invalid(format!(
            "event order and occurrence year are 1-based, got i = {i}, j = {j}"
        )));
    }
    let (t_lo, t_hi) = calendar_interval(j);
    let (s_lo, s_hi) = calendar_interval(j + l);
    let (b1, b2) = (params.beta1, params.beta2);
    let window = |t: f64| ((s_lo - t).max(0.0), s_hi - t);
    if i == 1 {
        // The copula ridge F_{T*}(t) = F_W(s - t) crosses the window edges here.
        let ridges = [s_lo * b2 / (b1 + b2), s_hi * b2 / (b1 + b2)];
        return integrate_log_breaks(
            |t| {
                let (w_lo, w_hi) = window(t);
                Ok(ln_exp_pdf(t, b1) + ln_delay_window(ln_exp_cdf(t, b1), w_lo, w_hi, params))
            },
            t_lo,
            t_hi,
            &ridges,
            opts,
        );
    }
    // Exp(b1) at a times Gamma(i-1, b1) at t - a is
    // b1^i (t - a)^(i-2) e^(-b1 t) / Gamma(i-1).
    let shape = (i - 1) as f64;
    let power = shape - 1.0;
    let ln_norm = i as f64 * b1.ln() - ln_gamma(shape);
    integrate_log(
        |t| {
            let (w_lo, w_hi) = window(t);
            let ridges = [w_lo * b2 / b1, w_hi * b2 / b1];
            let inner = integrate_log_breaks(
                |a| {
                    let gamma_part = if power == 0.0 { 0.0 } else { power * (t - a).ln() };
                    Ok(gamma_part + ln_delay_window(ln_exp_cdf(a, b1), w_lo, w_hi, params))
                },
                0.0,
                t,
                &ridges,
                opts,
            )?;
            Ok(ln_norm - b1 * t + inner)
        },
        t_lo,
        t_hi,
        opts,
    )
}

/// Conditional probability that claim `i`, occurring in year `j`, is reported
/// `l` years later. Requires `j + l <= horizon`.
pub fn delay_probability(
    i: usize,
    j: usize,
    l: usize,
    params: &ModelParams,
    horizon: usize,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::Invalid(format!(
            "event order and occurrence year are 1-based, got i = {i}, j = {j}"
        )));
    }
    if j + l > horizon {
        return Err(Error::Invalid(format!(
            "report year {} lies beyond the horizon {horizon}",
            j + l
        )));
    }
    let ln_den = ln_occurrence_probability(i, j, params, opts)?;
    if ln_den < MIN_OCCURRENCE_PROBABILITY.ln() {
        return Err(Error::Degenerate(format!(
            "P(T_{i} in I_{j}) = exp({ln_den:.3}) is below {MIN_OCCURRENCE_PROBABILITY:e}"
        )));
    }
    let ln_num = ln_joint_interval_probability(i, j, l, params, opts)?;
    Ok((ln_num - ln_den).exp().clamp(0.0, 1.0))
}

/// Probabilities for every lag `l = 0 ..= horizon - j`.
pub fn delay_distribution(
    i: usize,
    j: usize,
    params: &ModelParams,
    horizon: usize,
    opts: &QuadratureOptions,
) -> Result<Vec<f64>> {
    if j > horizon {
        return Err(Error::Invalid(format!(
            "occurrence year {j} lies beyond the horizon {horizon}"
        )));
    }
    (0..=horizon - j)
        .map(|l| delay_probability(i, j, l, params, horizon, opts))
        .collect()
}
