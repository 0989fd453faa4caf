use crate::copula::ClaytonTheta;
use crate::error::{Error, Result};

/// Parameters of the copula claims model: exponential rates for the
/// inter-arrival time and the reporting delay, and the Clayton dependence
/// between them. Rates are per unit of the event-log time scale (years).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta1: f64,
    pub beta2: f64,
    pub theta: ClaytonTheta,
}

impl ModelParams {
    pub fn new(beta1: f64, beta2: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("beta1", beta1), ("beta2", beta2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            beta1,
            beta2,
            theta: ClaytonTheta::new(theta)?,
        })
    }

    /// The same model expressed on a time axis whose unit is `unit` old units.
    /// Rates scale with the unit; the copula is invariant.
    pub fn rescaled(&self, unit: f64) -> Result<Self> {
        Self::new(self.beta1 * unit, self.beta2 * unit, self.theta.value())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta1, self.beta2, self.theta.value()]
    }
}

/// One claim: 1-based arrival order, occurrence time `t` and report time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub t: f64,
    pub s: f64,
}

impl EventRecord {
    /// Reporting delay `s - t`.
    #[inline]
    pub fn delay(&self) -> f64 {
        self.s - self.t
    }
}

/// Claims ordered by occurrence time with consecutive 1-based indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    /// Builds a log from `(occurrence, report)` pairs in any order. Pairs are
    /// sorted by occurrence (stable, so ties keep input order) and re-indexed.
    pub fn from_times(times: &[(f64, f64)]) -> Result<Self> {
        for (k, &(t, s)) in times.iter().enumerate() {
            validate_pair(k + 1, t, s)?;
        }
        let mut sorted = times.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            records: sorted
                .into_iter()
                .enumerate()
                .map(|(k, (t, s))| EventRecord { index: k + 1, t, s })
                .collect(),
        })
    }

    /// Wraps records that already satisfy the ordering and indexing invariants.
    pub fn from_records(records: Vec<EventRecord>) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for (k, r) in records.iter().enumerate() {
            validate_pair(r.index, r.t, r.s)?;
            if r.index != k + 1 {
                return Err(Error::Invalid(format!(
                    "record at position {} has index {}, expected {}",
                    k + 1,
                    r.index,
                    k + 1
                )));
            }
            if r.t < prev {
                return Err(Error::Invalid(format!(
                    "record {} occurs before its predecessor ({} < {prev})",
                    r.index, r.t
                )));
            }
            prev = r.t;
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Inter-arrival times `t_i - t_{i-1}` with `t_0 = 0`.
    pub fn inter_arrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.records
            .iter()
            .map(|r| {
                let d = r.t - prev;
                prev = r.t;
                d
            })
            .collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.records.iter().map(EventRecord::delay).collect()
    }

    /// The log on a time axis whose unit is `unit` old units.
    pub fn rescaled(&self, unit: f64) -> Result<Self> {
        if !(unit.is_finite() && unit > 0.0) {
            return Err(Error::Domain(format!("time unit must be > 0, got {unit}")));
        }
        Ok(Self {
            records: self
                .records
                .iter()
                .map(|r| EventRecord {
                    index: r.index,
                    t: r.t / unit,
                    s: r.s / unit,
                })
                .collect(),
        })
    }
}

fn validate_pair(row: usize, t: f64, s: f64) -> Result<()> {
    if !(t.is_finite() && s.is_finite()) || t < 0.0 {
        return Err(Error::Invalid(format!(
            "event {row}: times must be finite with occurrence >= 0, got ({t}, {s})"
        )));
    }
    if s < t {
        return Err(Error::Invalid(format!(
            "event {row}: report time {s} precedes occurrence time {t}"
        )));
    }
    Ok(())
}
