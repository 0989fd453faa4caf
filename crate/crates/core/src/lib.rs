//! IBNR claim-count reserving with a Clayton-copula model of claim
//! inter-arrival times and reporting delays, next to a Chain-Ladder baseline.
//!
//! * [`copula`]: Clayton generator, distribution, density and Kendall's tau.
//! * [`claims`]: joint densities, likelihood and MLE, delay probabilities,
//!   IBNR forecasts and the exponential KS check.
//! * [`chain_ladder`]: run-off triangles, development factors, projection and
//!   percentage-error tables.
//! * [`simulation`]: accept-reject sampling of dependent pairs, parameter
//!   recovery studies and report-year ratio tables.
//! * [`io`]: CSV formats for event logs, triangles and reports.
//! * [`cli`]: the `ibnr` command-line driver.

pub mod chain_ladder;
pub mod claims;
pub mod cli;
pub mod copula;
pub mod error;
pub mod io;
pub mod numeric;
pub mod optimize;
pub mod quadrature;
pub mod simulation;

pub use error::{Error, Result};
