//! Simulates a portfolio with dependent inter-arrival times and delays, then
//! recovers the parameters by maximum likelihood.

use ibnr_core::claims::{fit_mle, ks_exponential, FitOptions, ModelParams};
use ibnr_core::simulation::{assemble_event_log, sample_pair_stream, SimConfig};

fn main() -> ibnr_core::Result<()> {
    let truth = ModelParams::new(0.5, 0.5, 1.5)?;
    let cfg = SimConfig::new(truth, 200, 2024)?;
    let sample = sample_pair_stream(&cfg)?;
    let log = assemble_event_log(&sample.pairs)?;
    println!("simulated {} claims, acceptance rate {:.3}", log.len(), sample.acceptance_rate());

    let fit = fit_mle(&log, None, &FitOptions::default())?;
    let [b1, b2, th] = fit.params.as_array();
    let [i1, i2, it] = fit.init.as_array();
    println!("start     beta1 {i1:.4}  beta2 {i2:.4}  theta {it:.4}");
    println!("estimate  beta1 {b1:.4}  beta2 {b2:.4}  theta {th:.4}");
    println!("log-likelihood {:.4}, converged {}, {} iterations", fit.loglik, fit.converged, fit.iterations);
    for (name, sample) in [("inter-arrival", log.inter_arrivals()), ("delay", log.delays())] {
        let ks = ks_exponential(&sample)?;
        println!("KS {name}: D = {:.4}, p = {:.3}", ks.statistic, ks.p_value);
    }
    Ok(())
}
