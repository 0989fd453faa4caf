use rayon::prelude::*;

use crate::chain_ladder::{Cell, Triangle, TriangleKind};
use crate::claims::delay::{calendar_year, delay_distribution};
use crate::claims::types::{EventLog, EventRecord, ModelParams};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOptions;

/// Expected claim counts by occurrence year `j` (row `j - 1`) and reporting
/// lag `l` (column `l`). Row `j` carries lags `0 ..= horizon - j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IbnrForecast {
    pub horizon: usize,
    pub counts: Vec<Vec<f64>>,
}

impl IbnrForecast {
    /// All-zero forecast with `years` occurrence rows.
    pub fn zeros(years: usize, horizon: usize) -> Result<Self> {
        if years > horizon {
            return Err(Error::Invalid(format!(
                "{years} occurrence years exceed the horizon {horizon}"
            )));
        }
        Ok(Self {
            horizon,
            counts: (1..=years).map(|j| vec![0.0; horizon - j + 1]).collect(),
        })
    }

    pub fn years(&self) -> usize {
        self.counts.len()
    }

    /// Expected count for occurrence year `j` (1-based) at lag `l`.
    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.counts
            .get(j.wrapping_sub(1))
            .and_then(|row| row.get(l))
            .copied()
            .unwrap_or(0.0)
    }

    /// Entrywise sum of two forecasts over the same grid.
    pub fn add(&self, other: &IbnrForecast) -> Result<IbnrForecast> {
        if self.horizon != other.horizon || self.years() != other.years() {
            return Err(Error::Shape(format!(
                "forecasts differ in shape: {}x{} vs {}x{}",
                self.years(),
                self.horizon,
                other.years(),
                other.horizon
            )));
        }
        Ok(IbnrForecast {
            horizon: self.horizon,
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }

    /// Expected counts as an incremental run-off triangle with `width`
    /// development columns. Every cell carries a model value and is marked
    /// projected; cells beyond the horizon are left unobserved.
    pub fn to_incremental_triangle(&self, origin_year: i32, width: usize) -> Triangle {
        let rows = self.years();
        let mut values = vec![vec![0.0; width]; rows];
        let mut projected = vec![vec![false; width]; rows];
        for (r, row) in self.counts.iter().enumerate() {
            for (l, &v) in row.iter().enumerate().take(width) {
                values[r][l] = v;
                projected[r][l] = true;
            }
        }
        Triangle::from_parts(
            origin_year,
            TriangleKind::Incremental,
            values,
            vec![vec![false; width]; rows],
            projected,
        )
    }
}

/// Forecast contributed by an arbitrary set of records, each weighted by its
/// own event order. Records occurring at or after year `years + 1` are an
/// error.
pub fn predict_ibnr_records(
    records: &[EventRecord],
    params: &ModelParams,
    years: usize,
    horizon: usize,
    opts: &QuadratureOptions,
) -> Result<IbnrForecast> {
    let mut forecast = IbnrForecast::zeros(years, horizon)?;
    if let Some(r) = records.iter().find(|r| calendar_year(r.t) > years) {
        return Err(Error::Invalid(format!(
            "event {} occurs in year {}, beyond the {years} forecast years",
            r.index,
            calendar_year(r.t)
        )));
    }
    let per_event: Vec<(usize, Vec<f64>)> = records
        .par_iter()
        .map(|r| {
            let j = calendar_year(r.t);
            delay_distribution(r.index, j, params, horizon, opts).map(|p| (j, p))
        })
        .collect::<Result<_>>()?;
    for (j, probs) in per_event {
        for (cell, p) in forecast.counts[j - 1].iter_mut().zip(probs) {
            *cell += p;
        }
    }
    Ok(forecast)
}

/// Expected number of claims occurring in year `j` and reported in year
/// `j + l`: the sum of the delay probabilities of the claims observed to
/// occur in year `j`. Rows cover years `1 ..=` the last occurrence year.
pub fn predict_ibnr(
    log: &EventLog,
    params: &ModelParams,
    horizon: usize,
    opts: &QuadratureOptions,
) -> Result<IbnrForecast> {
    let years = log
        .records()
        .iter()
        .map(|r| calendar_year(r.t))
        .max()
        .unwrap_or(0);
    if years > horizon {
        return Err(Error::Invalid(format!(
            "events occur in year {years}, beyond the horizon {horizon}"
        )));
    }
    predict_ibnr_records(log.records(), params, years, horizon, opts)
}

/// Observed claim counts by occurrence year and reporting lag: `counts[r][l]`
/// counts the claims that occurred in year `r + 1` and were reported in year
/// `r + 1 + l`, for every cell inside the staircase `r + l < years`.
pub fn observed_counts(log: &EventLog, years: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; years]; years];
    for r in log.records() {
        let (j, k) = (calendar_year(r.t), calendar_year(r.s));
        if j >= 1 && k <= years {
            counts[j - 1][k - j] += 1;
        }
    }
    counts
}

/// Incremental triangle in the layout of a reserving table: observed counts
/// from `log` in the staircase and the model's expected counts, marked
/// projected, below it. Cells the forecast horizon does not reach stay
/// unobserved.
pub fn forecast_triangle(log: &EventLog, forecast: &IbnrForecast, origin_year: i32) -> Result<Triangle> {
    let years = forecast.years();
    let observed = observed_counts(log, years);
    let cells = (0..years)
        .map(|r| {
            (0..years)
                .map(|l| {
                    if r + l < years {
                        Cell::Observed(observed[r][l] as f64)
                    } else {
                        match forecast.counts[r].get(l) {
                            Some(&v) => Cell::Projected(v),
                            None => Cell::Unobserved,
                        }
                    }
                })
                .collect()
        })
        .collect();
    Triangle::new(origin_year, TriangleKind::Incremental, cells)
}
