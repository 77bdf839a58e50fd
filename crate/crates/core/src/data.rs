//! Bundled dataset loader.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::demand::{DemandCalibration, DemandError};
use crate::econ::{load_baseline, load_series_csv, AnnualSeries, BaselineError, EconomyBaseline, Money, SeriesError};
use crate::growth::{GrowthError, NaturalBandCalibration};
use crate::slack::{load_slack_records, SlackError, SlackRecord};

/// Environment variable that overrides the bundled data directory.
pub const DATA_DIR_ENV: &str = "DUALSIM_DATA_DIR";

pub const BASELINE_FILE: &str = "paper2020.csv";
pub const SLACK_FILE: &str = "slack2020.csv";
pub const TFP_FILE: &str = "tfp_china_1978_2018.csv";
pub const TFP_REFERENCE_FILE: &str = "tfp_reference_us_eu_jp_kr.csv";
pub const NATURAL_BAND_FILE: &str = "natural_band.toml";
pub const DEMAND_FILE: &str = "demand_calibration.toml";
pub const TFR_FILE: &str = "tfr_1992_2015.csv";
pub const CONSUMPTION_FILE: &str = "per_capita_consumption_2012_2020.csv";
pub const EXPORTS_FILE: &str = "exports_history.csv";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("data directory {0} does not exist")]
    MissingDir(String),
    #[error("{file}: {source}")]
    Baseline {
        file: String,
        #[source]
        source: BaselineError,
    },
    #[error("{file}: {source}")]
    Series {
        file: String,
        #[source]
        source: SeriesError,
    },
    #[error(transparent)]
    Slack(#[from] SlackError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("{file}: {msg}")]
    Table { file: String, msg: String },
}

/// Data directory: `$DUALSIM_DATA_DIR` if set, else the repository `data/`.
pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")),
    }
}

/// One row of the export history table.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ExportObservation {
    pub year: i32,
    pub exports: Money,
    pub gdp: Money,
}

#[derive(Debug, Deserialize)]
struct ExportRow {
    year: i32,
    exports: f64,
    gdp: f64,
    #[allow(dead_code)]
    provenance: String,
}

#[derive(Debug, Deserialize)]
struct ReferenceRow {
    field: String,
    value: f64,
    unit: String,
    #[allow(dead_code)]
    provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundledData {
    pub dir: PathBuf,
    pub baseline: EconomyBaseline,
    pub slack: Vec<SlackRecord>,
    /// Percent per year.
    pub tfp: AnnualSeries,
    /// Reference TFP means, as fractions.
    pub tfp_reference: BTreeMap<String, f64>,
    pub natural: NaturalBandCalibration,
    pub demand: DemandCalibration,
    pub fertility: AnnualSeries,
    /// RMB per person-year.
    pub per_capita_consumption: AnnualSeries,
    pub exports: Vec<ExportObservation>,
}

impl BundledData {
    pub fn load_default() -> Result<Self, DataError> {
        Self::load(&data_dir())
    }

    pub fn load(dir: &Path) -> Result<Self, DataError> {
        if !dir.is_dir() {
            return Err(DataError::MissingDir(dir.display().to_string()));
        }
        let file = |name: &str| dir.join(name);
        let series = |name: &str| {
            load_series_csv(&file(name))
                .map(|(s, _)| s)
                .map_err(|source| DataError::Series { file: name.into(), source })
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            baseline: load_baseline(&file(BASELINE_FILE))
                .map_err(|source| DataError::Baseline { file: BASELINE_FILE.into(), source })?,
            slack: load_slack_records(&file(SLACK_FILE))?,
            tfp: series(TFP_FILE)?,
            tfp_reference: load_reference(&file(TFP_REFERENCE_FILE))?,
            natural: NaturalBandCalibration::load(&file(NATURAL_BAND_FILE))?,
            demand: DemandCalibration::load(&file(DEMAND_FILE))?,
            fertility: series(TFR_FILE)?,
            per_capita_consumption: series(CONSUMPTION_FILE)?,
            exports: load_exports(&file(EXPORTS_FILE))?,
        })
    }

    pub fn export_observation(&self, year: i32) -> Option<ExportObservation> {
        self.exports.iter().copied().find(|o| o.year == year)
    }
}

fn table_err(path: &Path, msg: impl ToString) -> DataError {
    DataError::Table { file: path.display().to_string(), msg: msg.to_string() }
}

fn load_reference(path: &Path) -> Result<BTreeMap<String, f64>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| table_err(path, e))?;
    let mut out = BTreeMap::new();
    for row in rdr.deserialize::<ReferenceRow>() {
        let row = row.map_err(|e| table_err(path, e))?;
        let value = match row.unit.as_str() {
            "percent" => row.value / 100.0,
            "fraction" => row.value,
            other => return Err(table_err(path, format!("field `{}`: unsupported unit `{other}`", row.field))),
        };
        if out.insert(row.field.clone(), value).is_some() {
            return Err(table_err(path, format!("duplicate field `{}`", row.field)));
        }
    }
    Ok(out)
}

fn load_exports(path: &Path) -> Result<Vec<ExportObservation>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| table_err(path, e))?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<ExportRow>() {
        let row = row.map_err(|e| table_err(path, e))?;
        if !(row.gdp > 0.0) || row.exports < 0.0 {
            return Err(table_err(path, format!("year {}: exports must be >= 0 and GDP > 0", row.year)));
        }
        out.push(ExportObservation { year: row.year, exports: Money(row.exports), gdp: Money(row.gdp) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_loads() {
        let d = BundledData::load(&PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))).unwrap();
        assert_eq!(d.baseline.year, 2020);
        assert_eq!(d.slack.len(), 4);
        assert_eq!(d.tfp.years(), 1978..=2018);
        assert_eq!(d.exports.len(), 3);
        assert!((d.tfp_reference["catch_up_tfp_baseline"] - 0.012).abs() < 1e-15);
    }

    #[test]
    fn missing_dir_is_reported() {
        let err = BundledData::load(Path::new("/nonexistent/dualsim")).unwrap_err();
        assert!(matches!(err, DataError::MissingDir(_)));
    }
}
