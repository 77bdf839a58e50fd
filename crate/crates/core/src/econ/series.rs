use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series is empty")]
    Empty,
    #[error("year {year} is outside the series range {start}..={end}")]
    OutOfRange { year: i32, start: i32, end: i32 },
    #[error("years are not contiguous: {prev} is followed by {next}")]
    Gap { prev: i32, next: i32 },
    #[error("series {0} do not cover the same years")]
    Mismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One value per calendar year over a contiguous range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(start_year: i32, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(Self { start_year, values })
    }

    /// A series holding `value` in every year of `years`.
    pub fn constant(years: RangeInclusive<i32>, value: f64) -> Result<Self, SeriesError> {
        let n = (years.end() - years.start() + 1).max(0) as usize;
        Self::new(*years.start(), vec![value; n])
    }

    /// Builds a series from `(year, value)` pairs that must be contiguous and
    /// ascending.
    pub fn from_pairs(pairs: &[(i32, f64)]) -> Result<Self, SeriesError> {
        let first = pairs.first().ok_or(SeriesError::Empty)?;
        for w in pairs.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(SeriesError::Gap { prev: w[0].0, next: w[1].0 });
            }
        }
        Self::new(first.0, pairs.iter().map(|p| p.1).collect())
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn years(&self) -> RangeInclusive<i32> {
        self.start_year..=self.end_year()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn covers(&self, years: &RangeInclusive<i32>) -> bool {
        years.start() >= &self.start_year && years.end() <= &self.end_year()
    }

    pub fn get(&self, year: i32) -> Result<f64, SeriesError> {
        if year < self.start_year || year > self.end_year() {
            return Err(SeriesError::OutOfRange { year, start: self.start_year, end: self.end_year() });
        }
        Ok(self.values[(year - self.start_year) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.start_year + i as i32, *v))
    }

    pub fn window(&self, years: RangeInclusive<i32>) -> Result<AnnualSeries, SeriesError> {
        if years.is_empty() {
            return Err(SeriesError::Empty);
        }
        let lo = self.get(*years.start()).map(|_| (*years.start() - self.start_year) as usize)?;
        let hi = self.get(*years.end()).map(|_| (*years.end() - self.start_year) as usize)?;
        Self::new(*years.start(), self.values[lo..=hi].to_vec())
    }

    /// Prefix sums: element `i` is the sum of elements `0..=i`.
    pub fn cumulative(&self) -> AnnualSeries {
        let mut acc = 0.0;
        let values = self
            .values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        AnnualSeries { start_year: self.start_year, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> AnnualSeries {
        AnnualSeries { start_year: self.start_year, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }
}

/// Reads a `year,value` CSV. Lines starting with `#` are comments; a
/// `# unit: <label>` comment sets the returned unit label.
pub fn load_series_csv(path: &Path) -> Result<(AnnualSeries, Option<String>), SeriesError> {
    let text =
        fs::read_to_string(path).map_err(|source| SeriesError::Io { path: path.display().to_string(), source })?;
    parse_series(&text)
}

pub(crate) fn parse_series(text: &str) -> Result<(AnnualSeries, Option<String>), SeriesError> {
    let mut unit = None;
    let mut header_seen = false;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(u) = comment.trim().strip_prefix("unit:") {
                unit = Some(u.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "year,value" {
                return Err(SeriesError::Parse {
                    line: lineno,
                    msg: format!("expected header `year,value`, got `{line}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut cols = line.split(',');
        let (Some(y), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(SeriesError::Parse { line: lineno, msg: "expected two columns".into() });
        };
        let year =
            y.trim().parse::<i32>().map_err(|e| SeriesError::Parse { line: lineno, msg: format!("year: {e}") })?;
        let value =
            v.trim().parse::<f64>().map_err(|e| SeriesError::Parse { line: lineno, msg: format!("value: {e}") })?;
        if !value.is_finite() {
            return Err(SeriesError::Parse { line: lineno, msg: "value is not finite".into() });
        }
        pairs.push((year, value));
    }
    Ok((AnnualSeries::from_pairs(&pairs)?, unit))
}
