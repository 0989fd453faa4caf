//! Joint densities of the claims model.
//!
//! `(T*, W)` couples an exponential inter-arrival time with an exponential
//! reporting delay through a Clayton copula. The observable pair for the
//! `i`-th claim is `(T_i, S_i) = (T_{i-1} + T*_i, T_i + W_i)` where
//! `T_{i-1} ~ Gamma(i - 1, beta1)` is independent of `(T*_i, W_i)`, so its
//! density is a one-dimensional convolution evaluated by quadrature.

use crate::claims::types::ModelParams;
use crate::copula::log_density_from_logs;
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

use crate::numeric::{ln_exp_cdf, ln_exp_pdf};
use crate::quadrature::{integrate_log_breaks, QuadratureOptions};

/// Log of the joint density of inter-arrival time and delay.
pub fn ln_joint_density_tw(t_star: f64, w: f64, params: &ModelParams) -> Result<f64> {
    if !(t_star > 0.0 && w > 0.0) || !t_star.is_finite() || !w.is_finite() {
        return Err(Error::Domain(format!(
            "joint density needs t* > 0 and w > 0, got ({t_star}, {w})"
        )));
    }
    Ok(ln_tw_unchecked(t_star, w, params))
}

#[inline]
fn ln_tw_unchecked(t_star: f64, w: f64, p: &ModelParams) -> f64 {
    ln_exp_pdf(t_star, p.beta1)
        + ln_exp_pdf(w, p.beta2)
        + log_density_from_logs(ln_exp_cdf(t_star, p.beta1), ln_exp_cdf(w, p.beta2), p.theta)
}

pub fn joint_density_tw(t_star: f64, w: f64, params: &ModelParams) -> Result<f64> {
    ln_joint_density_tw(t_star, w, params).map(f64::exp)
}

/// Log of the joint density of occurrence and report time of the `i`-th claim.
///
/// For `i = 1` the Gamma prior degenerates to a point mass at zero and the
/// density is the direct transform `f_(T*,W)(t, s - t)`, with no quadrature.
/// For `i >= 2` the convolution over the inter-arrival time `a` in `(0, t)`,
/// `∫ f_(T*,W)(a, s - t) gamma_{i-1}(t - a) da`, is integrated in log space.
pub fn ln_joint_density_ts(
    i: usize,
    t: f64,
    s: f64,
    params: &ModelParams,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if i == 0 {
        return Err(Error::Domain("event order i is 1-based".into()));
    }
    if !(t > 0.0 && t.is_finite() && s.is_finite()) || s < t {
        return Err(Error::Domain(format!(
            "joint density needs 0 < t <= s, got ({t}, {s})"
        )));
    }
    let w = s - t;
    if w == 0.0 {
        return Err(Error::Boundary(format!(
            "report time equals occurrence time ({t}); the delay density is evaluated at w = 0"
        )));
    }
    if i == 1 {
        return Ok(ln_tw_unchecked(t, w, params));
    }
    let shape = (i - 1) as f64;
    let beta1 = params.beta1;
    let ln_v = ln_exp_cdf(w, params.beta2);
    // Exp(beta1) at a times Gamma(i-1, beta1) at t - a: the exponential
    // factors combine to exp(-beta1 t), leaving only (t - a)^(i-2) varying.
    let constant = ln_exp_pdf(w, params.beta2) + i as f64 * beta1.ln() - beta1 * t - ln_gamma(shape);
    let power = shape - 1.0;
    // For strong dependence the copula density concentrates on the ridge
    // F_{T*}(a) = F_W(w), i.e. a = w beta2 / beta1.
    let ridge = w * params.beta2 / beta1;
    let breaks: &[f64] = if params.theta.is_independent() { &[] } else { &[ridge] };
    integrate_log_breaks(
        |a| {
            let gamma_part = if power == 0.0 { 0.0 } else { power * (t - a).ln() };
            Ok(constant + gamma_part + log_density_from_logs(ln_exp_cdf(a, beta1), ln_v, params.theta))
        },
        0.0,
        t,
        breaks,
        opts,
    )
}

pub fn joint_density_ts(
    i: usize,
    t: f64,
    s: f64,
    params: &ModelParams,
    opts: &QuadratureOptions,
) -> Result<f64> {
    ln_joint_density_ts(i, t, s, params, opts).map(f64::exp)
}
