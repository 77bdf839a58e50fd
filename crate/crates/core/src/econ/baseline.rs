use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use super::units::{convert_units, Dimension, Unit, UnitError};
use super::{LandArea, Money, Population};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cannot open baseline {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed baseline CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing mandatory field `{0}`")]
    MissingField(&'static str),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("field `{0}` appears more than once")]
    Duplicate(String),
    #[error("field `{field}`: cannot parse value `{value}`")]
    BadValue { field: String, value: String },
    #[error("field `{field}`: {source}")]
    Unit {
        field: String,
        #[source]
        source: UnitError,
    },
    #[error("field `{field}`: expected a {expected:?} unit, got `{unit}`")]
    WrongDimension { field: String, expected: Dimension, unit: Unit },
    #[error("field `{field}` is a stock and cannot be negative ({value})")]
    NegativeStock { field: String, value: f64 },
}

/// Dated snapshot of macro aggregates in canonical units.
///
/// Only `year` and `gdp` are mandatory. Every other field is `None` when the
/// source does not provide it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomyBaseline {
    pub year: i32,
    pub gdp: Money,
    pub exports: Option<Money>,
    pub debt_stock: Option<Money>,
    pub m2_stock: Option<Money>,
    pub employed_total: Option<Population>,
    pub state_capital_stock: Option<Money>,
    pub construction_land_total: Option<LandArea>,
    pub tradable_asset_stock: Option<Money>,
    pub fiscal_land_transfer_fees: Option<Money>,
    /// Field name to provenance note, as recorded in the source.
    pub provenance: BTreeMap<String, String>,
}

impl EconomyBaseline {
    /// A baseline with only the mandatory fields set.
    pub fn new(year: i32, gdp: Money) -> Self {
        Self {
            year,
            gdp,
            exports: None,
            debt_stock: None,
            m2_stock: None,
            employed_total: None,
            state_capital_stock: None,
            construction_land_total: None,
            tradable_asset_stock: None,
            fiscal_land_transfer_fees: None,
            provenance: BTreeMap::new(),
        }
    }

    pub fn debt_ratio(&self) -> Option<f64> {
        self.debt_stock.map(|d| d.0 / self.gdp.0)
    }

    pub fn m2_ratio(&self) -> Option<f64> {
        self.m2_stock.map(|m| m.0 / self.gdp.0)
    }

    pub fn export_share(&self) -> Option<f64> {
        self.exports.map(|x| x.0 / self.gdp.0)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, BaselineError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
        let mut values: BTreeMap<String, (f64, Unit)> = BTreeMap::new();
        let mut provenance = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("").to_string();
            if field.is_empty() {
                continue;
            }
            let raw = rec.get(1).unwrap_or("");
            let unit_label = rec.get(2).unwrap_or("");
            let spec = field_spec(&field).ok_or_else(|| BaselineError::UnknownField(field.clone()))?;
            if values.contains_key(&field) {
                return Err(BaselineError::Duplicate(field));
            }
            let unit: Unit =
                unit_label.parse().map_err(|source| BaselineError::Unit { field: field.clone(), source })?;
            if unit.dimension() != spec {
                return Err(BaselineError::WrongDimension { field, expected: spec, unit });
            }
            let dec: Decimal = raw
                .parse()
                .or_else(|_| Decimal::from_scientific(raw))
                .map_err(|_| BaselineError::BadValue { field: field.clone(), value: raw.to_string() })?;
            let canonical = convert_units(dec, unit, unit.canonical())
                .map_err(|source| BaselineError::Unit { field: field.clone(), source })?;
            let v = canonical
                .to_f64()
                .ok_or_else(|| BaselineError::BadValue { field: field.clone(), value: raw.to_string() })?;
            if v < 0.0 && field != "year" {
                return Err(BaselineError::NegativeStock { field, value: v });
            }
            if let Some(p) = rec.get(3).filter(|p| !p.is_empty()) {
                provenance.insert(field.clone(), p.to_string());
            }
            values.insert(field, (v, unit));
        }

        let year = values.get("year").ok_or(BaselineError::MissingField("year"))?.0;
        if year.fract() != 0.0 {
            return Err(BaselineError::BadValue { field: "year".into(), value: year.to_string() });
        }
        let gdp = values.get("gdp").ok_or(BaselineError::MissingField("gdp"))?.0;
        let money = |k: &str| values.get(k).map(|v| Money(v.0));
        Ok(Self {
            year: year as i32,
            gdp: Money(gdp),
            exports: money("exports"),
            debt_stock: money("debt_stock"),
            m2_stock: money("m2_stock"),
            employed_total: values.get("employed_total").map(|v| Population(v.0)),
            state_capital_stock: money("state_capital_stock"),
            construction_land_total: values.get("construction_land_total").map(|v| LandArea(v.0)),
            tradable_asset_stock: money("tradable_asset_stock"),
            fiscal_land_transfer_fees: money("fiscal_land_transfer_fees"),
            provenance,
        })
    }
}

fn field_spec(field: &str) -> Option<Dimension> {
    Some(match field {
        "year" => Dimension::Time,
        "gdp"
        | "exports"
        | "debt_stock"
        | "m2_stock"
        | "state_capital_stock"
        | "tradable_asset_stock"
        | "fiscal_land_transfer_fees" => Dimension::Currency,
        "employed_total" => Dimension::People,
        "construction_land_total" => Dimension::Area,
        _ => return None,
    })
}

/// Loads and validates a baseline CSV (`field,value,unit,provenance`).
pub fn load_baseline(source: &Path) -> Result<EconomyBaseline, BaselineError> {
    let file = File::open(source).map_err(|e| BaselineError::Io { path: source.display().to_string(), source: e })?;
    EconomyBaseline::from_reader(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EconomyBaseline, BaselineError> {
        EconomyBaseline::from_reader(text.as_bytes())
    }

    #[test]
    fn empty_source_is_missing_mandatory_field() {
        let err = parse("field,value,unit,provenance\n").unwrap_err();
        assert!(matches!(err, BaselineError::MissingField("year")));
        assert!(err.to_string().contains("missing mandatory field"));
    }

    #[test]
    fn missing_gdp() {
        let err = parse("field,value,unit,provenance\nyear,2020,year,\n").unwrap_err();
        assert!(matches!(err, BaselineError::MissingField("gdp")));
    }

    #[test]
    fn optional_fields_are_absent_not_zero() {
        let b = parse("field,value,unit,provenance\nyear,2020,year,\ngdp,100,trillion RMB,\n").unwrap();
        assert_eq!(b.year, 2020);
        assert_eq!(b.gdp, Money(100.0));
        assert!(b.debt_stock.is_none());
        assert!(b.employed_total.is_none());
        assert!(b.debt_ratio().is_none());
    }

    #[test]
    fn billions_are_normalised() {
        let b = parse(
            "field,value,unit,provenance\nyear,2020,year,\ngdp,101600,billion RMB,\nfiscal_land_transfer_fees,8414.2,billion RMB,note\n",
        )
        .unwrap();
        assert_eq!(b.gdp, Money(101.6));
        assert_eq!(b.fiscal_land_transfer_fees, Some(Money(8.4142)));
        assert_eq!(b.provenance.get("fiscal_land_transfer_fees").map(String::as_str), Some("note"));
    }

    #[test]
    fn negative_stock_rejected() {
        let err =
            parse("field,value,unit,provenance\nyear,2020,year,\ngdp,100,trillion RMB,\ndebt_stock,-1,trillion RMB,\n")
                .unwrap_err();
        assert!(matches!(err, BaselineError::NegativeStock { .. }));
    }

    #[test]
    fn unknown_and_mismatched_fields_rejected() {
        assert!(matches!(
            parse("field,value,unit,provenance\nyear,2020,year,\ngdp,1,trillion RMB,\nfoo,1,year,\n").unwrap_err(),
            BaselineError::UnknownField(_)
        ));
        assert!(matches!(
            parse("field,value,unit,provenance\nyear,2020,year,\ngdp,1,million Mu,\n").unwrap_err(),
            BaselineError::WrongDimension { .. }
        ));
        assert!(matches!(
            parse("field,value,unit,provenance\nyear,2020,year,\ngdp,abc,trillion RMB,\n").unwrap_err(),
            BaselineError::BadValue { .. }
        ));
    }
}
