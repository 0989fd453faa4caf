//! CSV formats for event logs, run-off triangles and reports.
//!
//! Triangle files start with a header whose first cell is the triangle kind
//! (`cumulative` or `incremental`) followed by the development years
//! `0, 1, ..., J`. Each further row starts with its accident year; years must
//! be consecutive from the first (the origin year). Empty cells are
//! unobserved and a trailing `*` marks a projected value:
//!
//! ```text
//! cumulative,0,1,2
//! 2014,100,150,160
//! 2015,120,175*,186*
//! 2016,90,131*,140*
//! ```
//!
//! Event logs have the header `event_id,occurrence,report`. Times are either
//! fractional years or ISO dates (`YYYY-MM-DD`). Dates are converted to years
//! since January 1 of the earliest occurrence year with the actual/365.25
//! convention.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so reading
//! a written file reproduces the values exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::chain_ladder::{Cell, DevFactors, ErrorTable, Triangle, TriangleKind};
use crate::claims::forecast::IbnrForecast;
use crate::claims::types::EventLog;
use crate::error::{Error, Result};
use crate::simulation::{RatioTable, RecoveryReport};

/// Days per year in the date convention.
pub const DAYS_PER_YEAR: f64 = 365.25;
const DATE_FORMAT: &str = "%Y-%m-%d";

/// How triangle values are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueFormat {
    /// Shortest representation that reads back to the same `f64`.
    #[default]
    Exact,
    /// Rounded to whole claims, as in printed reserving tables.
    Integer,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new().flexible(true).from_writer(file))
}

fn line_of(record: &csv::StringRecord, fallback: usize) -> usize {
    record.position().map_or(fallback, |p| p.line() as usize)
}

/// Fractional years from January 1 of `origin_year` to `date`.
pub fn date_to_years(date: NaiveDate, origin_year: i32) -> f64 {
    let origin = NaiveDate::from_ymd_opt(origin_year, 1, 1).expect("January 1 exists");
    (date - origin).num_days() as f64 / DAYS_PER_YEAR
}

/// Inverse of [`date_to_years`], rounded to the nearest day.
pub fn years_to_date(years: f64, origin_year: i32) -> Result<NaiveDate> {
    let origin = NaiveDate::from_ymd_opt(origin_year, 1, 1).expect("January 1 exists");
    let days = (years * DAYS_PER_YEAR).round();
    if !days.is_finite() || days.abs() > 1e8 {
        return Err(Error::Domain(format!("{years} years is not a representable date")));
    }
    origin
        .checked_add_signed(chrono::Duration::days(days as i64))
        .ok_or_else(|| Error::Domain(format!("{years} years is not a representable date")))
}

enum TimeValue {
    Years(f64),
    Date(NaiveDate),
}

fn parse_time(field: &str) -> Option<TimeValue> {
    if let Ok(d) = NaiveDate::parse_from_str(field, DATE_FORMAT) {
        return Some(TimeValue::Date(d));
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite()).map(TimeValue::Years)
}

/// Reads an event log. Rows may appear in any order; the log is sorted by
/// occurrence and re-indexed. An empty file gives an empty log.
pub fn read_event_log(path: impl AsRef<Path>) -> Result<EventLog> {
    read_event_log_with_origin(path).map(|(log, _)| log)
}

/// [`read_event_log`], also returning the origin year when the file uses
/// dates.
pub fn read_event_log_with_origin(path: impl AsRef<Path>) -> Result<(EventLog, Option<i32>)> {
    let path = path.as_ref();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (k, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = line_of(&rec, k + 1);
        if !header_seen {
            let names: Vec<&str> = rec.iter().collect();
            if names != ["event_id", "occurrence", "report"] {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected header event_id,occurrence,report, found {}", names.join(",")),
                ));
            }
            header_seen = true;
            continue;
        }
        if rec.len() != 3 {
            return Err(parse_err(path, line, format!("expected 3 fields, found {}", rec.len())));
        }
        let id = rec[0].to_string();
        let occurrence = parse_time(&rec[1])
            .ok_or_else(|| parse_err(path, line, format!("bad occurrence time {:?}", &rec[1])))?;
        let report = parse_time(&rec[2])
            .ok_or_else(|| parse_err(path, line, format!("bad report time {:?}", &rec[2])))?;
        rows.push((line, id, occurrence, report));
    }

    let dates = rows
        .iter()
        .flat_map(|r| [&r.2, &r.3])
        .filter(|v| matches!(v, TimeValue::Date(_)))
        .count();
    if dates != 0 && dates != 2 * rows.len() {
        return Err(parse_err(path, 1, "mixes dates and numeric times"));
    }
    let origin_year = rows
        .iter()
        .filter_map(|r| match r.2 {
            TimeValue::Date(d) => Some(d.year()),
            TimeValue::Years(_) => None,
        })
        .min();
    let to_years = |v: &TimeValue| match (v, origin_year) {
        (TimeValue::Years(y), _) => *y,
        (TimeValue::Date(d), Some(o)) => date_to_years(*d, o),
        (TimeValue::Date(_), None) => unreachable!("origin exists when dates exist"),
    };

    let mut times = Vec::with_capacity(rows.len());
    for (line, id, occ, rep) in &rows {
        let (t, s) = (to_years(occ), to_years(rep));
        if t < 0.0 {
            return Err(parse_err(path, *line, format!("event {id}: occurrence time {t} is negative")));
        }
        if s < t {
            return Err(parse_err(
                path,
                *line,
                format!("event {id}: report {s} precedes occurrence {t}"),
            ));
        }
        times.push((t, s));
    }
    Ok((EventLog::from_times(&times)?, origin_year))
}

/// Writes an event log with fractional-year times.
pub fn write_event_log(log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(["event_id", "occurrence", "report"]).map_err(csv_err(path))?;
    for r in log.records() {
        w.write_record([r.index.to_string(), num(r.t), num(r.s)])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes an event log with ISO dates counted from January 1 of `origin_year`.
pub fn write_event_log_dates(log: &EventLog, origin_year: i32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(["event_id", "occurrence", "report"]).map_err(csv_err(path))?;
    for r in log.records() {
        w.write_record([
            r.index.to_string(),
            years_to_date(r.t, origin_year)?.format(DATE_FORMAT).to_string(),
            years_to_date(r.s, origin_year)?.format(DATE_FORMAT).to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn parse_cell(field: &str) -> std::result::Result<Cell, String> {
    if field.is_empty() {
        return Ok(Cell::Unobserved);
    }
    let (number, projected) = match field.strip_suffix('*') {
        Some(n) => (n.trim(), true),
        None => (field, false),
    };
    let v: f64 = number.parse().map_err(|_| format!("bad cell value {field:?}"))?;
    Ok(if projected { Cell::Projected(v) } else { Cell::Observed(v) })
}

pub fn read_triangle(path: impl AsRef<Path>) -> Result<Triangle> {
    let path = path.as_ref();
    let mut records = reader(path)?.into_records();
    let header = match records.next() {
        Some(rec) => rec.map_err(csv_err(path))?,
        None => return Err(parse_err(path, 1, "missing header row")),
    };
    let kind = match &header[0] {
        "cumulative" => TriangleKind::Cumulative,
        "incremental" => TriangleKind::Incremental,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("header must start with cumulative or incremental, found {other:?}"),
            ))
        }
    };
    let cols = header.len() - 1;
    for (j, name) in header.iter().skip(1).enumerate() {
        if name.parse::<usize>() != Ok(j) {
            return Err(parse_err(
                path,
                1,
                format!("development header {} should be {j}, found {name:?}", j + 1),
            ));
        }
    }

    let mut origin = None;
    let mut cells = Vec::new();
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = line_of(&rec, k + 2);
        if rec.len() != cols + 1 {
            return Err(parse_err(
                path,
                line,
                format!("ragged grid: {} fields, expected {}", rec.len(), cols + 1),
            ));
        }
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad accident year {:?}", &rec[0])))?;
        let first = *origin.get_or_insert(year);
        if year != first + cells.len() as i32 {
            return Err(parse_err(
                path,
                line,
                format!("accident year {year} should be {}", first + cells.len() as i32),
            ));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(parse_cell)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| parse_err(path, line, m))?;
        cells.push(row);
    }
    let origin = origin.ok_or_else(|| parse_err(path, 2, "triangle has no rows"))?;
    Triangle::new(origin, kind, cells)
}

fn format_cell(cell: Cell, format: ValueFormat) -> String {
    let render = |v: f64| match format {
        ValueFormat::Exact => num(v),
        ValueFormat::Integer => format!("{}", v.round() as i64),
    };
    match cell {
        Cell::Unobserved => String::new(),
        Cell::Observed(v) => render(v),
        Cell::Projected(v) => format!("{}*", render(v)),
    }
}

pub fn write_triangle(t: &Triangle, path: impl AsRef<Path>, format: ValueFormat) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let mut header = vec![t.kind().as_str().to_string()];
    header.extend((0..t.cols()).map(|j| j.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, row) in t.cells().iter().enumerate() {
        let mut rec = vec![(t.origin_year() + i as i32).to_string()];
        rec.extend(row.iter().map(|&c| format_cell(c, format)));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes an error table with four-decimal percentages; cells without a
/// comparison are empty. A table without rows produces only the header.
pub fn write_error_table(table: &ErrorTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let mut header = vec!["accident_year".to_string()];
    header.extend((0..table.cols()).map(|j| j.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, row) in table.cells.iter().enumerate() {
        let mut rec = vec![(table.origin_year + i as i32).to_string()];
        rec.extend(row.iter().map(|c| c.map(|v| format!("{v:.4}")).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a table written by [`write_error_table`].
pub fn read_error_table(path: impl AsRef<Path>) -> Result<ErrorTable> {
    let path = path.as_ref();
    let mut records = reader(path)?.into_records();
    let header = match records.next() {
        Some(rec) => rec.map_err(csv_err(path))?,
        None => return Err(parse_err(path, 1, "missing header row")),
    };
    if &header[0] != "accident_year" {
        return Err(parse_err(path, 1, "header must start with accident_year"));
    }
    let cols = header.len() - 1;
    let mut origin = None;
    let mut cells = Vec::new();
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = line_of(&rec, k + 2);
        if rec.len() != cols + 1 {
            return Err(parse_err(path, line, "ragged grid"));
        }
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad accident year {:?}", &rec[0])))?;
        origin.get_or_insert(year);
        let row = rec
            .iter()
            .skip(1)
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>()
                        .map(Some)
                        .map_err(|_| parse_err(path, line, format!("bad value {f:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(row);
    }
    Ok(ErrorTable {
        origin_year: origin.unwrap_or(0),
        cells,
    })
}

/// Shortest round-tripping rendering; switches to exponent form for very
/// small or large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes expected counts by occurrence year and lag at full precision.
pub fn write_forecast(forecast: &IbnrForecast, origin_year: i32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let mut header = vec!["accident_year".to_string()];
    header.extend((0..forecast.horizon).map(|l| l.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for (j, row) in forecast.counts.iter().enumerate() {
        let mut rec = vec![(origin_year + j as i32).to_string()];
        rec.extend((0..forecast.horizon).map(|l| row.get(l).map(|&v| num(v)).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes development factors as `development_year,factor`; the factor in
/// row `j` carries column `j - 1` to column `j`.
pub fn write_factors(factors: &DevFactors, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(["development_year", "factor"]).map_err(csv_err(path))?;
    for (k, f) in factors.factors.iter().enumerate() {
        w.write_record([(k + 1).to_string(), num(*f)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// One row per sample size and parameter: truth, mean estimate, bias, MSE
/// and the study diagnostics.
pub fn write_recovery_reports(reports: &[RecoveryReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record([
        "n",
        "parameter",
        "truth",
        "mean",
        "bias",
        "mse",
        "mean_tau",
        "replications",
        "excluded",
        "acceptance_rate",
    ])
    .map_err(csv_err(path))?;
    for report in reports {
        for (k, name) in ["beta1", "beta2", "theta"].iter().enumerate() {
            w.write_record([
                report.n.to_string(),
                name.to_string(),
                num(report.truth[k]),
                num(report.mean[k]),
                num(report.bias[k]),
                num(report.mse[k]),
                num(report.mean_tau),
                report.replications.to_string(),
                report.excluded.to_string(),
                num(report.mean_acceptance_rate),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Ratio rows by sample size, one column per occurrence year, newest first,
/// with four-decimal shares.
pub fn write_ratio_tables(tables: &[(usize, RatioTable)], final_year: i32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let years = tables.first().map_or(0, |t| t.1.years);
    if let Some((n, t)) = tables.iter().find(|t| t.1.years != years) {
        return Err(Error::Shape(format!(
            "ratio table for n = {n} spans {} years, expected {years}",
            t.years
        )));
    }
    let mut header = vec!["n".to_string(), "reported".to_string()];
    header.extend((0..years).map(|l| (final_year - l as i32).to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for (n, t) in tables {
        let mut rec = vec![n.to_string(), t.total.to_string()];
        rec.extend(t.ratios().iter().map(|r| format!("{r:.4}")));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `key=value` lines in the given order.
pub fn write_manifest(entries: &[(String, String)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = File::create(path).map_err(io_err(path))?;
    for (k, v) in entries {
        writeln!(f, "{k}={v}").map_err(io_err(path))?;
    }
    Ok(())
}

/// Reads a `key=value` manifest; blank lines and `#` comments are skipped.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, k + 1, format!("expected key=value, found {line:?}")))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
