//! Clayton copula basics: distribution function, density, conditional law
//! and the link between theta and Kendall's tau.

use ibnr_core::copula::{
    clayton_cdf, clayton_density, conditional_cdf_v_given_u, tau_from_theta, theta_from_tau, ClaytonTheta, UnitPair,
};

fn main() -> ibnr_core::Result<()> {
    for th in [0.5, 1.5, 5.0] {
        let theta = ClaytonTheta::new(th)?;
        let p = UnitPair::new(0.3, 0.6)?;
        println!(
            "theta {th:>4}: tau {:.4}  C(0.3, 0.6) = {:.6}  c(0.3, 0.6) = {:.6}  P(V <= 0.6 | U = 0.3) = {:.6}",
            tau_from_theta(theta),
            clayton_cdf(p, theta),
            clayton_density(p, theta)?,
            conditional_cdf_v_given_u(0.3, 0.6, theta)?
        );
    }
    let theta = theta_from_tau(3.0 / 7.0)?;
    println!("tau 3/7 corresponds to theta {:.6}", theta.value());
    Ok(())
}
