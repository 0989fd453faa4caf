//! Copula model of claim occurrence and reporting: densities, likelihood,
//! maximum-likelihood fitting, delay probabilities and IBNR count forecasts.

pub mod delay;
pub mod density;
pub mod fit;
pub mod forecast;
pub mod ks;
pub mod likelihood;
pub mod types;

pub use delay::{calendar_interval, calendar_year, delay_distribution, delay_probability};
pub use density::{joint_density_ts, joint_density_tw, ln_joint_density_ts, ln_joint_density_tw};
pub use fit::{fit_mle, initial_params, FitOptions, FitResult};
pub use forecast::{forecast_triangle, observed_counts, predict_ibnr, predict_ibnr_records, IbnrForecast};
pub use ks::{ks_exponential, ks_exponential_with_rate, KsResult};
pub use likelihood::{likelihood_quadrature, log_likelihood};
pub use types::{EventLog, EventRecord, ModelParams};
