//! Loading, validating, currency-converting and aligning weekly price series.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Quotes within this many days of a target date count as the same week.
pub const MATCH_TOLERANCE_DAYS: i64 = 3;

/// Date-stamped observations of one variable, strictly increasing in date.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    name: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl RawSeries {
    /// Builds a series, rejecting unsorted or duplicate dates and non-finite
    /// values.
    pub fn new(name: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let name = name.into();
        if observations.is_empty() {
            return Err(Error::Validation(format!("series `{name}` is empty")));
        }
        for w in observations.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Validation(format!(
                    "series `{name}`: dates not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if let Some((d, v)) = observations.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "series `{name}`: non-finite value {v} on {d}"
            )));
        }
        Ok(Self { name, observations })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|(d, _)| *d).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|(_, v)| *v).collect()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// How to read a vendor CSV export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub date_column: String,
    /// chrono format string; ISO 8601 by default.
    pub date_format: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            date_column: "date".to_string(),
            date_format: "%Y-%m-%d".to_string(),
        }
    }
}

/// Reads one value column of a CSV file with default options.
pub fn load_csv(path: impl AsRef<Path>, value_column: &str) -> Result<RawSeries> {
    load_csv_with(path, value_column, &CsvOptions::default())
}

/// Reads one value column of a CSV file. Rows may come in any order; the
/// result is sorted by date. Row numbers in errors count data rows from 1.
pub fn load_csv_with(
    path: impl AsRef<Path>,
    value_column: &str,
    options: &CsvOptions,
) -> Result<RawSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: format!("header: {e}"),
        })?
        .clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Validation(format!("{}: no column named `{name}`", path.display()))
        })
    };
    let date_idx = find(&options.date_column)?;
    let value_idx = find(value_column)?;

    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, &options.date_format).map_err(|e| {
            Error::Parse {
                row,
                message: format!("date `{raw_date}`: {e}"),
            }
        })?;
        let raw_value = record.get(value_idx).unwrap_or("");
        let value: f64 = raw_value.parse().map_err(|_| Error::Parse {
            row,
            message: format!("value `{raw_value}` in column `{value_column}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                row,
                message: format!("value `{raw_value}` is not finite"),
            });
        }
        observations.push((date, value));
    }
    if observations.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    observations.sort_by_key(|(d, _)| *d);
    if let Some(w) = observations.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Validation(format!(
            "{}: duplicate date {}",
            path.display(),
            w[0].0
        )));
    }
    if observations.len() < 2 {
        return Err(Error::Validation(format!(
            "{}: need at least 2 observations",
            path.display()
        )));
    }
    RawSeries::new(value_column, observations)
}

/// Index of the candidate date nearest `target` within the tolerance,
/// skipping already-used candidates. Ties go to the earlier date.
fn match_date(target: NaiveDate, candidates: &[NaiveDate], used: Option<&[bool]>) -> Option<usize> {
    let lo = target - chrono::Duration::days(MATCH_TOLERANCE_DAYS);
    let start = candidates.partition_point(|d| *d < lo);
    let mut best: Option<(i64, usize)> = None;
    for (i, d) in candidates.iter().enumerate().skip(start) {
        let gap = (*d - target).num_days();
        if gap > MATCH_TOLERANCE_DAYS {
            break;
        }
        if used.is_some_and(|u| u[i]) {
            continue;
        }
        // strict `<` keeps the earlier date on ties
        if best.is_none_or(|(g, _)| gap.abs() < g) {
            best = Some((gap.abs(), i));
        }
    }
    best.map(|(_, i)| i)
}

/// Multiplies each asset quote by the exchange rate quoted in the same week.
pub fn convert_currency(asset: &RawSeries, fx: &RawSeries) -> Result<RawSeries> {
    let fx_dates = fx.dates();
    let mut out = Vec::with_capacity(asset.len());
    let mut missing = Vec::new();
    for (date, value) in asset.observations() {
        match match_date(*date, &fx_dates, None) {
            Some(i) => out.push((*date, value * fx.observations[i].1)),
            None => missing.push(*date),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(20).map(|d| d.to_string()).collect();
        let more = missing.len().saturating_sub(shown.len());
        return Err(Error::Alignment(format!(
            "no `{}` quote within {MATCH_TOLERANCE_DAYS} days of {} `{}` date(s): {}{}",
            fx.name(),
            missing.len(),
            asset.name(),
            shown.join(", "),
            if more > 0 { format!(" (+{more} more)") } else { String::new() }
        )));
    }
    RawSeries::new(asset.name(), out)
}

/// A rectangular table of named, equally long columns on a common date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl AlignedPanel {
    pub fn new(dates: Vec<NaiveDate>, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = dates.len();
        if n < 2 {
            return Err(Error::Validation(format!("panel needs at least 2 rows, got {n}")));
        }
        if columns.is_empty() {
            return Err(Error::Validation("panel has no columns".into()));
        }
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("panel dates not strictly increasing".into()));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut data = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::Validation(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("column `{name}` has non-finite cells")));
            }
            if names.contains(&name) {
                return Err(Error::Validation(format!("duplicate column `{name}`")));
            }
            names.push(name);
            data.push(col);
        }
        Ok(Self {
            dates,
            names,
            columns: data,
        })
    }

    /// Panel over synthetic data on a weekly grid starting 1995-11-05.
    pub fn weekly(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.1.len());
        let start = NaiveDate::from_ymd_opt(1995, 11, 5).expect("valid date");
        let dates = (0..n)
            .map(|i| start + chrono::Duration::weeks(i as i64))
            .collect();
        Self::new(dates, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column_at(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Panel with only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let cols = names
            .iter()
            .map(|n| Ok((n.to_string(), self.column(n)?.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dates.clone(), cols)
    }

    /// Columns as standalone series (e.g. to re-align).
    pub fn to_series(&self) -> Vec<RawSeries> {
        self.names
            .iter()
            .zip(&self.columns)
            .map(|(name, col)| RawSeries {
                name: name.clone(),
                observations: self.dates.iter().copied().zip(col.iter().copied()).collect(),
            })
            .collect()
    }
}

/// Restricts several series to the weeks they all share. The first series
/// supplies the date axis; others match within the tolerance, one quote per
/// week. Weeks missing from any series are dropped.
pub fn align_panel(series: &[RawSeries]) -> Result<AlignedPanel> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "align_panel needs at least 2 series, got {}",
            series.len()
        )));
    }
    let anchor = &series[0];
    let others: Vec<Vec<NaiveDate>> = series[1..].iter().map(RawSeries::dates).collect();
    let mut used: Vec<Vec<bool>> = others.iter().map(|d| vec![false; d.len()]).collect();

    let mut dates = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); series.len()];
    for (date, value) in anchor.observations() {
        let matches: Option<Vec<usize>> = others
            .iter()
            .zip(&used)
            .map(|(cand, u)| match_date(*date, cand, Some(u)))
            .collect();
        let Some(matches) = matches else { continue };
        dates.push(*date);
        cols[0].push(*value);
        for (k, i) in matches.into_iter().enumerate() {
            used[k][i] = true;
            cols[k + 1].push(series[k + 1].observations[i].1);
        }
    }
    if dates.is_empty() {
        let names: Vec<&str> = series.iter().map(RawSeries::name).collect();
        return Err(Error::Alignment(format!(
            "series {} share no common week",
            names.join(", ")
        )));
    }
    AlignedPanel::new(
        dates,
        series
            .iter()
            .map(|s| s.name.clone())
            .zip(cols)
            .collect(),
    )
}

/// First differences: out[t] = x[t+1] - x[t].
pub fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Running sum, the inverse of [`diff`] up to the starting level.
pub fn cumsum(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// First difference of a panel column.
pub fn difference(panel: &AlignedPanel, column: &str) -> Result<Vec<f64>> {
    Ok(diff(panel.column(column)?))
}
