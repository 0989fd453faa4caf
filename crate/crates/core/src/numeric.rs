//! Small log-domain helpers shared by the likelihood and quadrature code.

use statrs::function::gamma::ln_gamma;

/// `ln Σ exp(x_k)`, stable for large magnitudes; `-inf` for an empty or all
/// `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-density of Gamma(shape, rate) at `x > 0`.
pub fn ln_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

/// `ln(1 - e^{-rate x})`, the log of an exponential distribution function.
/// Switches to `ln_1p` in the upper tail so values near 0 keep their precision.
#[inline]
pub fn ln_exp_cdf(x: f64, rate: f64) -> f64 {
    let r = rate * x;
    if r < std::f64::consts::LN_2 {
        (-(-r).exp_m1()).ln()
    } else {
        (-(-r).exp()).ln_1p()
    }
}

/// `ln(rate e^{-rate x})`.
#[inline]
pub fn ln_exp_pdf(x: f64, rate: f64) -> f64 {
    rate.ln() - rate * x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_relative_eq!(log_sum_exp(&[0.0, 0.0]), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(log_sum_exp(&[-1000.0, -1000.0]), -1000.0 + 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn gamma_pdf_reduces_to_exponential() {
        assert_relative_eq!(ln_gamma_pdf(2.0, 1.0, 0.5), ln_exp_pdf(2.0, 0.5), epsilon = 1e-14);
        // Gamma(3, 2) at 1: 2^3 e^-2 / 2
        assert_relative_eq!(ln_gamma_pdf(1.0, 3.0, 2.0), (4.0 * (-2f64).exp()).ln(), epsilon = 1e-13);
    }

    #[test]
    fn exp_cdf_small_argument() {
        assert_relative_eq!(ln_exp_cdf(1e-20, 1.0), (1e-20f64).ln(), epsilon = 1e-12);
    }
}
