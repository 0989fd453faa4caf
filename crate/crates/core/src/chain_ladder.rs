//! Chain-Ladder baseline on run-off triangles.
//!
//! Rows are accident years, columns development years. The observed region
//! is the upper-left staircase `i + j <= I` with `I = rows - 1`; projected
//! cells carry model values and are kept distinct from observations.
//! Development factors are the volume-weighted ratios
//! `f_j = Σ C[i][j] / Σ C[i][j-1]` over every row where both cells are
//! observed.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleKind {
    Incremental,
    Cumulative,
}

impl TriangleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TriangleKind::Incremental => "incremental",
            TriangleKind::Cumulative => "cumulative",
        }
    }
}

impl fmt::Display for TriangleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Unobserved,
    Observed(f64),
    Projected(f64),
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Unobserved => None,
            Cell::Observed(v) | Cell::Projected(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    origin_year: i32,
    kind: TriangleKind,
    cells: Vec<Vec<Cell>>,
}

impl Triangle {
    /// Validated construction from a rectangular cell grid.
    ///
    /// When any cell is observed, the observed set must be exactly the
    /// staircase `i + j <= rows - 1`. Observed values must be finite and
    /// nonnegative, and nondecreasing along rows for cumulative triangles.
    pub fn new(origin_year: i32, kind: TriangleKind, cells: Vec<Vec<Cell>>) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if let Some(i) = cells.iter().position(|r| r.len() != cols) {
            return Err(Error::Shape(format!(
                "row {i} has {} cells, expected {cols}",
                cells[i].len()
            )));
        }
        let any_observed = cells.iter().flatten().any(|c| matches!(c, Cell::Observed(_)));
        for (i, row) in cells.iter().enumerate() {
            let mut prev = f64::NEG_INFINITY;
            for (j, c) in row.iter().enumerate() {
                let in_staircase = i + j < rows;
                if any_observed && in_staircase != matches!(c, Cell::Observed(_)) {
                    return Err(Error::Shape(format!(
                        "cell ({i}, {j}) breaks the observed staircase of a {rows}-row triangle"
                    )));
                }
                if let Some(v) = c.value() {
                    if !v.is_finite() {
                        return Err(Error::Invalid(format!("cell ({i}, {j}) is not finite")));
                    }
                }
                if let Cell::Observed(v) = *c {
                    if v < 0.0 {
                        return Err(Error::Invalid(format!("cell ({i}, {j}) = {v} is negative")));
                    }
                    if kind == TriangleKind::Cumulative && v < prev {
                        return Err(Error::Invalid(format!(
                            "cumulative row {i} decreases at development year {j} ({v} < {prev})"
                        )));
                    }
                    prev = v;
                }
            }
        }
        Ok(Self { origin_year, kind, cells })
    }

    /// Upper triangle from ragged rows: row `i` holds the observed cells of
    /// accident year `origin_year + i` and must have `rows - i` entries
    /// (capped at the column count, which is the first row's length).
    pub fn from_upper(origin_year: i32, kind: TriangleKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let expected = (n - i).min(cols);
            if row.len() != expected {
                return Err(Error::Shape(format!(
                    "row {i} has {} observed cells, expected {expected}",
                    row.len()
                )));
            }
            let mut r: Vec<Cell> = row.into_iter().map(Cell::Observed).collect();
            r.resize(cols, Cell::Unobserved);
            cells.push(r);
        }
        Self::new(origin_year, kind, cells)
    }

    /// Unvalidated construction from value/observed/projected grids.
    pub(crate) fn from_parts(
        origin_year: i32,
        kind: TriangleKind,
        values: Vec<Vec<f64>>,
        observed: Vec<Vec<bool>>,
        projected: Vec<Vec<bool>>,
    ) -> Self {
        let cells = values
            .into_iter()
            .zip(observed.into_iter().zip(projected))
            .map(|(vals, (obs, proj))| {
                vals.into_iter()
                    .zip(obs.into_iter().zip(proj))
                    .map(|(v, (o, p))| match (o, p) {
                        (true, _) => Cell::Observed(v),
                        (false, true) => Cell::Projected(v),
                        _ => Cell::Unobserved,
                    })
                    .collect()
            })
            .collect();
        Self { origin_year, kind, cells }
    }

    pub fn origin_year(&self) -> i32 {
        self.origin_year
    }

    pub fn kind(&self) -> TriangleKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cells(&self) -> &[Vec<Cell>] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(Cell::Unobserved)
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.cell(i, j).value()
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        matches!(self.cell(i, j), Cell::Observed(_))
    }

    pub fn is_projected(&self, i: usize, j: usize) -> bool {
        matches!(self.cell(i, j), Cell::Projected(_))
    }

    /// Same grid with every cell value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Triangle {
        let cells = self
            .cells
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match *c {
                        Cell::Observed(v) => Cell::Observed(v * factor),
                        Cell::Projected(v) => Cell::Projected(v * factor),
                        Cell::Unobserved => Cell::Unobserved,
                    })
                    .collect()
            })
            .collect();
        Triangle { cells, ..self.clone() }
    }

    /// The triangle restricted to its observed cells.
    pub fn observed_only(&self) -> Triangle {
        let cells = self
            .cells
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Observed(_) => *c,
                        _ => Cell::Unobserved,
                    })
                    .collect()
            })
            .collect();
        Triangle { cells, ..self.clone() }
    }

    /// Values rounded half away from zero, as printed in reserving tables.
    pub fn rounded(&self) -> Vec<Vec<Option<i64>>> {
        self.cells
            .iter()
            .map(|r| r.iter().map(|c| c.value().map(|v| v.round() as i64)).collect())
            .collect()
    }

    /// Maps each row's leading run of valued cells through
    /// `f(value, previous input, previous output)`; both carries start at 0.
    fn map_rows<F>(&self, kind: TriangleKind, mut f: F) -> Triangle
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        let cells = self
            .cells
            .iter()
            .map(|row| {
                let (mut prev_in, mut prev_out) = (0.0, 0.0);
                let mut out = Vec::with_capacity(row.len());
                let mut open = true;
                for c in row {
                    let mapped = match (*c, open) {
                        (Cell::Observed(v), true) => {
                            prev_out = f(v, prev_in, prev_out);
                            prev_in = v;
                            Cell::Observed(prev_out)
                        }
                        (Cell::Projected(v), true) => {
                            prev_out = f(v, prev_in, prev_out);
                            prev_in = v;
                            Cell::Projected(prev_out)
                        }
                        _ => {
                            open = false;
                            Cell::Unobserved
                        }
                    };
                    out.push(mapped);
                }
                out
            })
            .collect();
        Triangle {
            origin_year: self.origin_year,
            kind,
            cells,
        }
    }
}

/// Row-wise prefix sums of an incremental triangle.
pub fn to_cumulative(t: &Triangle) -> Result<Triangle> {
    if t.kind != TriangleKind::Incremental {
        return Err(Error::KindMismatch {
            expected: "incremental",
            found: t.kind.as_str(),
        });
    }
    Ok(t.map_rows(TriangleKind::Cumulative, |v, _, prev_out| prev_out + v))
}

/// Row-wise first differences of a cumulative triangle.
pub fn to_incremental(t: &Triangle) -> Result<Triangle> {
    if t.kind != TriangleKind::Cumulative {
        return Err(Error::KindMismatch {
            expected: "cumulative",
            found: t.kind.as_str(),
        });
    }
    Ok(t.map_rows(TriangleKind::Incremental, |v, prev_in, _| v - prev_in))
}

/// Volume-weighted development factors; `factors[k]` carries development
/// year `k` to `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DevFactors {
    pub factors: Vec<f64>,
}

impl DevFactors {
    /// Factor for development year `j >= 1` (from `j - 1` to `j`).
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|k| self.factors.get(k)).copied()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

pub fn dev_factors(t: &Triangle) -> Result<DevFactors> {
    if t.kind != TriangleKind::Cumulative {
        return Err(Error::KindMismatch {
            expected: "cumulative",
            found: t.kind.as_str(),
        });
    }
    let mut factors = Vec::with_capacity(t.cols().saturating_sub(1));
    for j in 1..t.cols() {
        let (mut num, mut den, mut pairs) = (0.0, 0.0, 0usize);
        for i in 0..t.rows() {
            if let (Cell::Observed(prev), Cell::Observed(cur)) = (t.cell(i, j - 1), t.cell(i, j)) {
                num += cur;
                den += prev;
                pairs += 1;
            }
        }
        if pairs == 0 {
            return Err(Error::Shape(format!(
                "no accident year is observed at both development years {} and {j}",
                j - 1
            )));
        }
        if den == 0.0 {
            return Err(Error::DivisionByZero(format!(
                "development year {} sums to zero",
                j - 1
            )));
        }
        factors.push(num / den);
    }
    Ok(DevFactors { factors })
}

/// Fills every unobserved cell from the row's latest observation:
/// `C[i][j] = C[i][d_i] · Π_{k = d_i + 1}^{j} f_k`.
pub fn project(t: &Triangle, f: &DevFactors) -> Result<Triangle> {
    if t.kind != TriangleKind::Cumulative {
        return Err(Error::KindMismatch {
            expected: "cumulative",
            found: t.kind.as_str(),
        });
    }
    if f.len() + 1 != t.cols() {
        return Err(Error::Shape(format!(
            "{} factors for a triangle with {} development years",
            f.len(),
            t.cols()
        )));
    }
    let mut cells = t.cells.clone();
    for (i, row) in cells.iter_mut().enumerate() {
        let last = row
            .iter()
            .rposition(|c| matches!(c, Cell::Observed(_)))
            .ok_or_else(|| Error::Shape(format!("accident year row {i} has no observed diagonal cell")))?;
        if row[..last].iter().any(|c| !matches!(c, Cell::Observed(_))) {
            return Err(Error::Shape(format!("accident year row {i} has gaps before its diagonal")));
        }
        let mut level = row[last].value().unwrap_or(0.0);
        for (j, cell) in row.iter_mut().enumerate().skip(last + 1) {
            level *= f.factors[j - 1];
            *cell = Cell::Projected(level);
        }
    }
    Ok(Triangle {
        origin_year: t.origin_year,
        kind: t.kind,
        cells,
    })
}

/// Percentage errors `|actual - predicted| · 100 / predicted`, one entry per
/// projected cell of `predicted` for which `actual` holds a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub origin_year: i32,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl ErrorTable {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells.get(i).and_then(|r| r.get(j)).copied().flatten()
    }

    /// Mean of the populated entries, `None` when the table is empty.
    pub fn mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self.cells.iter().flatten().flatten().copied().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

pub fn error_table(actual: &Triangle, predicted: &Triangle) -> Result<ErrorTable> {
    if actual.kind != predicted.kind {
        return Err(Error::KindMismatch {
            expected: predicted.kind.as_str(),
            found: actual.kind.as_str(),
        });
    }
    if actual.origin_year != predicted.origin_year
        || actual.rows() < predicted.rows()
        || actual.cols() < predicted.cols()
    {
        return Err(Error::Shape(format!(
            "actual triangle ({}x{} from {}) does not cover predicted ({}x{} from {})",
            actual.rows(),
            actual.cols(),
            actual.origin_year,
            predicted.rows(),
            predicted.cols(),
            predicted.origin_year
        )));
    }
    let mut cells = vec![vec![None; predicted.cols()]; predicted.rows()];
    for (i, row) in cells.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            if let (Cell::Projected(p), Some(a)) = (predicted.cell(i, j), actual.value(i, j)) {
                if p == 0.0 {
                    return Err(Error::DivisionByZero(format!(
                        "predicted cell ({i}, {j}) is zero"
                    )));
                }
                *out = Some((a - p).abs() * 100.0 / p);
            }
        }
    }
    Ok(ErrorTable {
        origin_year: predicted.origin_year,
        cells,
    })
}
