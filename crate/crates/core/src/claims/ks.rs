use crate::error::{Error, Result};

/// Terms of the Kolmogorov series used for p-values.
const KOLMOGOROV_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub rate: f64,
}

/// Asymptotic Kolmogorov survival function
/// `Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k² λ²)`, clamped to `[0, 1]`.
pub fn kolmogorov_p_value(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=KOLMOGOROV_TERMS {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against a fully specified Exponential(rate).
pub fn ks_exponential_with_rate(sample: &[f64], rate: f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Invalid("KS test needs at least one observation".into()));
    }
    if let Some(x) = sample.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Invalid(format!(
            "exponential KS test needs positive observations, got {x}"
        )));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = -(-rate * x).exp_m1();
            let above = (k + 1) as f64 / n - f;
            let below = f - k as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_p_value(n.sqrt() * statistic),
        rate,
    })
}

/// KS test against Exponential(1 / sample mean). The p-value is the plain
/// asymptotic one, without a correction for the estimated rate.
pub fn ks_exponential(sample: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Invalid("KS test needs at least one observation".into()));
    }
    let mean = sample.iter().sum::<f64>() / sample.len() as f64;
    ks_exponential_with_rate(sample, 1.0 / mean)
}
