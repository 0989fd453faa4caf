//! Monte-Carlo harness: dependent `(t*, w)` pairs by accept-reject, event-log
//! assembly, parameter-recovery studies and report-year ratio tables.
//!
//! Each replication draws from its own ChaCha8 stream (`set_stream(r)` on a
//! generator seeded with the master seed), so results do not depend on how
//! rayon schedules the replications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::claims::delay::calendar_year;
use crate::claims::fit::{fit_mle, FitOptions};
use crate::claims::types::{EventLog, EventRecord, ModelParams};
use crate::copula::{empirical_kendall_tau, log_density_from_logs, ClaytonTheta};
use crate::error::{Error, Result};
use crate::numeric::ln_exp_cdf;

pub const DEFAULT_REPLICATIONS: usize = 200;
pub const DEFAULT_ENVELOPE_SAFETY: f64 = 1.1;
/// Points in the per-draw envelope grid.
pub const ENVELOPE_GRID_POINTS: usize = 512;
/// Proposal quantile bounds of the envelope grid.
pub const ENVELOPE_QUANTILE: f64 = 1e-6;
/// Overall acceptance rates below this are treated as a broken sampler.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-3;
/// Hard cap on proposals for a single draw.
const MAX_PROPOSALS_PER_DRAW: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub envelope_safety: f64,
}

impl SimConfig {
    /// Configuration with the default replication count and envelope safety.
    pub fn new(params: ModelParams, n: usize, seed: u64) -> Result<Self> {
        Self {
            params,
            n,
            replications: DEFAULT_REPLICATIONS,
            seed,
            envelope_safety: DEFAULT_ENVELOPE_SAFETY,
        }
        .validated()
    }

    pub fn with_replications(mut self, replications: usize) -> Result<Self> {
        self.replications = replications;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::Invalid(format!("sample size must be >= 2, got {}", self.n)));
        }
        if self.replications < 1 {
            return Err(Error::Invalid("replications must be >= 1".into()));
        }
        if !(self.envelope_safety >= 1.0 && self.envelope_safety.is_finite()) {
            return Err(Error::Invalid(format!(
                "envelope safety must be >= 1, got {}",
                self.envelope_safety
            )));
        }
        Ok(self)
    }
}

/// Generator for replication `r`: the master seed with stream `r`.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Sampled pairs plus accept-reject bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub pairs: Vec<(f64, f64)>,
    pub proposals: u64,
    pub accepted: u64,
}

impl PairSample {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    pub fn t_stars(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// Envelope constant `M` for the ratio `f_{W|T*}(w) / f_W(w) = c(u, F_W(w))`
/// at `ln u = ln F_{T*}(t*)`: the grid maximum times `safety`.
///
/// The grid is log-spaced in `w` between the proposal quantiles `q_lo` and
/// `1 - 1e-6`, with `q_lo = min(1e-6, u / 100)`. The ratio peaks near
/// `v ≈ u`, so very small `u` needs a lower starting quantile.
pub fn envelope_constant(ln_u: f64, beta2: f64, theta: ClaytonTheta, safety: f64) -> f64 {
    if theta.is_independent() {
        return safety;
    }
    let q_lo = ENVELOPE_QUANTILE.min(ln_u.exp() / 100.0).max(f64::MIN_POSITIVE);
    let w_lo = -(-q_lo).ln_1p() / beta2;
    let w_hi = -ENVELOPE_QUANTILE.ln() / beta2;
    let (a, b) = (w_lo.ln(), w_hi.ln());
    let step = (b - a) / (ENVELOPE_GRID_POINTS - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    for k in 0..ENVELOPE_GRID_POINTS {
        let w = (a + step * k as f64).exp();
        best = best.max(log_density_from_logs(ln_u, ln_exp_cdf(w, beta2), theta));
    }
    safety * best.exp()
}

/// Draws `n` pairs: `t* ~ Exp(beta1)`, then `w` from the conditional law of
/// the delay given `t*` by accept-reject against an `Exp(beta2)` proposal.
pub fn sample_pairs<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    safety: f64,
    rng: &mut R,
) -> Result<PairSample> {
    let arrival = Exp::new(params.beta1).map_err(|e| Error::Domain(e.to_string()))?;
    let delay = Exp::new(params.beta2).map_err(|e| Error::Domain(e.to_string()))?;
    let theta = params.theta;
    let mut pairs = Vec::with_capacity(n);
    let mut proposals = 0u64;
    let mut accepted = 0u64;

    for _ in 0..n {
        let t_star = loop {
            let x: f64 = arrival.sample(rng);
            if x > 0.0 {
                break x;
            }
        };
        if theta.is_independent() {
            pairs.push((t_star, delay.sample(rng)));
            proposals += 1;
            accepted += 1;
            continue;
        }
        let ln_u = ln_exp_cdf(t_star, params.beta1);
        let m = envelope_constant(ln_u, params.beta2, theta, safety);
        let mut tries = 0u64;
        let w = loop {
            tries += 1;
            if tries > MAX_PROPOSALS_PER_DRAW {
                return Err(Error::Sampler(format!(
                    "no proposal accepted after {MAX_PROPOSALS_PER_DRAW} tries at t* = {t_star}"
                )));
            }
            let w: f64 = delay.sample(rng);
            let ratio = log_density_from_logs(ln_u, ln_exp_cdf(w, params.beta2), theta).exp();
            if ratio > m {
                return Err(Error::Sampler(format!(
                    "envelope violated: ratio {ratio} exceeds M = {m} at t* = {t_star}, w = {w}"
                )));
            }
            let y: f64 = rng.random();
            if y * m < ratio {
                break w;
            }
        };
        proposals += tries;
        accepted += 1;
        pairs.push((t_star, w));
    }

    let sample = PairSample {
        pairs,
        proposals,
        accepted,
    };
    if sample.acceptance_rate() < MIN_ACCEPTANCE_RATE {
        return Err(Error::Sampler(format!(
            "acceptance rate {} below {MIN_ACCEPTANCE_RATE}",
            sample.acceptance_rate()
        )));
    }
    Ok(sample)
}

/// The pair stream of replication 0 of `cfg`.
pub fn sample_pair_stream(cfg: &SimConfig) -> Result<PairSample> {
    let cfg = cfg.validated()?;
    sample_pairs(&cfg.params, cfg.n, cfg.envelope_safety, &mut replication_rng(cfg.seed, 0))
}

/// Occurrence times are running sums of the inter-arrival times; report
/// times add each delay.
pub fn assemble_event_log(pairs: &[(f64, f64)]) -> Result<EventLog> {
    let mut t = 0.0;
    let mut records = Vec::with_capacity(pairs.len());
    for (k, &(t_star, w)) in pairs.iter().enumerate() {
        if !(t_star > 0.0 && t_star.is_finite()) || !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Invalid(format!(
                "pair {}: need t* > 0 and w >= 0, got ({t_star}, {w})",
                k + 1
            )));
        }
        t += t_star;
        records.push(EventRecord {
            index: k + 1,
            t,
            s: t + w,
        });
    }
    EventLog::from_records(records)
}

/// One replication of a recovery study.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub estimate: Option<[f64; 3]>,
    pub tau: f64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub truth: [f64; 3],
    pub n: usize,
    pub replications: usize,
    /// Replications whose fit failed or did not converge.
    pub excluded: usize,
    pub mean: [f64; 3],
    pub bias: [f64; 3],
    pub mse: [f64; 3],
    pub mean_tau: f64,
    pub mean_acceptance_rate: f64,
    pub runs: Vec<Replication>,
}

impl RecoveryReport {
    pub fn exclusion_rate(&self) -> f64 {
        self.excluded as f64 / self.replications as f64
    }

    pub fn used(&self) -> usize {
        self.replications - self.excluded
    }
}

fn run_replication(cfg: &SimConfig, fit: &FitOptions, r: usize) -> Result<Replication> {
    let mut rng = replication_rng(cfg.seed, r as u64);
    let sample = sample_pairs(&cfg.params, cfg.n, cfg.envelope_safety, &mut rng)?;
    let tau = empirical_kendall_tau(&sample.pairs)?;
    let log = assemble_event_log(&sample.pairs)?;
    let estimate = match fit_mle(&log, None, fit) {
        Ok(f) if f.converged => Some(f.params.as_array()),
        Ok(_) => None,
        Err(e) if e.is_numerical() => None,
        Err(e) => return Err(e),
    };
    Ok(Replication {
        estimate,
        tau,
        acceptance_rate: sample.acceptance_rate(),
    })
}

/// Samples, assembles and fits `cfg.replications` independent portfolios and
/// aggregates mean, bias and MSE of the estimates. Fits that fail numerically
/// or do not converge are excluded and counted.
pub fn recovery_study(cfg: &SimConfig, fit: &FitOptions) -> Result<RecoveryReport> {
    let cfg = cfg.validated()?;
    let runs: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(&cfg, fit, r))
        .collect::<Result<_>>()?;

    let truth = cfg.params.as_array();
    let estimates: Vec<[f64; 3]> = runs.iter().filter_map(|r| r.estimate).collect();
    let used = estimates.len();
    let mut mean = [f64::NAN; 3];
    let mut bias = [f64::NAN; 3];
    let mut mse = [f64::NAN; 3];
    if used > 0 {
        for k in 0..3 {
            mean[k] = estimates.iter().map(|e| e[k]).sum::<f64>() / used as f64;
            bias[k] = mean[k] - truth[k];
            mse[k] = estimates.iter().map(|e| (e[k] - truth[k]).powi(2)).sum::<f64>() / used as f64;
        }
    }
    let reps = runs.len() as f64;
    Ok(RecoveryReport {
        truth,
        n: cfg.n,
        replications: cfg.replications,
        excluded: cfg.replications - used,
        mean,
        bias,
        mse,
        mean_tau: runs.iter().map(|r| r.tau).sum::<f64>() / reps,
        mean_acceptance_rate: runs.iter().map(|r| r.acceptance_rate).sum::<f64>() / reps,
        runs,
    })
}

/// Share of the claims reported in the final year by occurrence year.
/// `counts[l]` counts claims that occurred `l` years before the final year.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub years: usize,
    /// Length of one calendar year in simulation time units.
    pub year_length: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl RatioTable {
    pub fn ratios(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    /// Share of claims that occurred in the final year itself.
    pub fn same_year_share(&self) -> f64 {
        self.counts[0] as f64 / self.total as f64
    }
}

/// Simulates a portfolio of `cfg.n` claims (replication 0), spreads it over
/// `years` calendar years of equal length `t_n / years`, and tabulates the
/// occurrence years of the claims reported in the final year.
pub fn report_ratio_table(cfg: &SimConfig, years: usize) -> Result<RatioTable> {
    if years < 1 {
        return Err(Error::Invalid("ratio table needs at least one year".into()));
    }
    let sample = sample_pair_stream(cfg)?;
    let log = assemble_event_log(&sample.pairs)?;
    let last = log.records().last().map(|r| r.t).unwrap_or(0.0);
    let year_length = last / years as f64;
    let log = log.rescaled(year_length)?;
    let mut counts = vec![0u64; years];
    for r in log.records() {
        if calendar_year(r.s) == years {
            let occurred = calendar_year(r.t).min(years);
            counts[years - occurred] += 1;
        }
    }
    let total = counts.iter().sum();
    if total == 0 {
        return Err(Error::Invalid(format!(
            "no simulated claim is reported in year {years}"
        )));
    }
    Ok(RatioTable {
        years,
        year_length,
        counts,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ks::ks_exponential_with_rate;
    use crate::copula::tau_from_theta;

    fn params(theta: f64) -> ModelParams {
        ModelParams::new(0.5, 0.5, theta).unwrap()
    }

    /// Supremum over v of c(u, v): interior stationary point when it exists,
    /// otherwise the value at v = 1.
    fn closed_form_sup(u: f64, theta: f64) -> f64 {
        let th = ClaytonTheta::new(theta).unwrap();
        let c = |v: f64| log_density_from_logs(u.ln(), v.ln(), th).exp();
        let base = (theta + 1.0) * (u.powf(-theta) - 1.0) / theta;
        let mut best = (theta + 1.0) * u.powf(theta);
        if base > 1.0 {
            best = best.max(c(base.powf(-1.0 / theta)));
        }
        best
    }

    #[test]
    fn envelope_brackets_the_true_supremum() {
        for &theta in &[0.5, 1.5, 5.0] {
            for &u in &[1e-9f64, 1e-4, 0.01, 0.3, 0.7, 0.999] {
                let m = envelope_constant(u.ln(), 0.5, ClaytonTheta::new(theta).unwrap(), 1.0);
                let sup = closed_form_sup(u, theta);
                assert!(m <= sup * (1.0 + 1e-9), "theta {theta} u {u}: {m} > {sup}");
                assert!(m * 1.1 >= sup, "theta {theta} u {u}: {m} too small vs {sup}");
            }
        }
    }

    #[test]
    fn assemble_prefix_sums() {
        let log = assemble_event_log(&[(1.0, 0.5), (2.0, 0.1)]).unwrap();
        let r = log.records();
        assert_eq!((r[0].index, r[0].t, r[0].s), (1, 1.0, 1.5));
        assert_eq!((r[1].index, r[1].t), (2, 3.0));
        assert!((r[1].s - 3.1).abs() < 1e-15);
        assert!(assemble_event_log(&[]).unwrap().is_empty());
        assert!(assemble_event_log(&[(0.0, 1.0)]).is_err());
        assert!(assemble_event_log(&[(1.0, -1.0)]).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let cfg = SimConfig::new(params(1.5), 300, 11).unwrap();
        let a = sample_pair_stream(&cfg).unwrap();
        let b = sample_pair_stream(&cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_pair_stream(&SimConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.pairs, c.pairs);
    }

    #[test]
    fn independence_accepts_everything() {
        let cfg = SimConfig::new(params(0.0), 10_000, 3).unwrap();
        let s = sample_pair_stream(&cfg).unwrap();
        assert_eq!(s.acceptance_rate(), 1.0);
        assert!(empirical_kendall_tau(&s.pairs).unwrap().abs() < 0.03);
    }

    #[test]
    fn dependent_sampler_is_calibrated() {
        for &theta in &[0.5, 4.0] {
            let cfg = SimConfig::new(params(theta), 10_000, 5).unwrap();
            let s = sample_pair_stream(&cfg).unwrap();
            let target = tau_from_theta(ClaytonTheta::new(theta).unwrap());
            let tau = empirical_kendall_tau(&s.pairs).unwrap();
            assert!((tau - target).abs() < 0.03, "theta {theta}: tau {tau} vs {target}");
        }
    }

    #[test]
    fn margins_are_exponential() {
        let cfg = SimConfig::new(params(1.5), 5_000, 21).unwrap();
        let s = sample_pair_stream(&cfg).unwrap();
        assert!(ks_exponential_with_rate(&s.t_stars(), 0.5).unwrap().p_value > 0.01);
        assert!(ks_exponential_with_rate(&s.delays(), 0.5).unwrap().p_value > 0.01);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(params(1.5), 1, 0).is_err());
        let cfg = SimConfig::new(params(1.5), 10, 0).unwrap();
        assert!(cfg.with_replications(0).is_err());
        assert!(SimConfig { envelope_safety: 0.9, ..cfg }.validated().is_err());
    }

    #[test]
    fn ratio_table_partitions_final_year() {
        let cfg = SimConfig::new(params(1.5), 200, 2024).unwrap();
        let t = report_ratio_table(&cfg, 7).unwrap();
        assert_eq!(t.counts.iter().sum::<u64>(), t.total);
        assert!((t.ratios().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fast_reporting_stays_in_year() {
        let p = ModelParams::new(0.5, 50.0, 0.0).unwrap();
        let cfg = SimConfig::new(p, 500, 9).unwrap();
        let t = report_ratio_table(&cfg, 7).unwrap();
        assert!(t.same_year_share() > 0.9);
    }

    #[test]
    fn single_replication_report_is_that_fit() {
        let cfg = SimConfig::new(params(1.5), 40, 77)
            .unwrap()
            .with_replications(1)
            .unwrap();
        let fit = FitOptions::default();
        let rep = recovery_study(&cfg, &fit).unwrap();
        let est = rep.runs[0].estimate.expect("fit converged");
        for k in 0..3 {
            assert_eq!(rep.mean[k], est[k]);
            assert_eq!(rep.bias[k], est[k] - rep.truth[k]);
            assert_eq!(rep.mse[k], (est[k] - rep.truth[k]).powi(2));
        }
    }
}
