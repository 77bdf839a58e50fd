use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("unknown unit `{0}`")]
    Unknown(String),
    #[error("cannot convert {from} to {to}")]
    Incompatible { from: Unit, to: Unit },
    #[error("value out of range while converting {from} to {to}")]
    Overflow { from: Unit, to: Unit },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Currency,
    People,
    Area,
    Share,
    Time,
}

/// Units accepted at ingestion. Currency is stored canonically in trillion
/// RMB, people in millions, land in million Mu, shares as fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    BillionRmb,
    TrillionRmb,
    Persons,
    MillionPersons,
    Mu,
    MillionMu,
    Percent,
    Fraction,
    Year,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::BillionRmb | Unit::TrillionRmb => Dimension::Currency,
            Unit::Persons | Unit::MillionPersons => Dimension::People,
            Unit::Mu | Unit::MillionMu => Dimension::Area,
            Unit::Percent | Unit::Fraction => Dimension::Share,
            Unit::Year => Dimension::Time,
        }
    }

    /// The unit every value of this dimension is normalised to.
    pub fn canonical(self) -> Unit {
        match self.dimension() {
            Dimension::Currency => Unit::TrillionRmb,
            Dimension::People => Unit::MillionPersons,
            Dimension::Area => Unit::MillionMu,
            Dimension::Share => Unit::Fraction,
            Dimension::Time => Unit::Year,
        }
    }

    // Power of ten relative to the smallest unit of the same dimension.
    fn exponent(self) -> u32 {
        match self {
            Unit::BillionRmb => 9,
            Unit::TrillionRmb => 12,
            Unit::Persons | Unit::Mu | Unit::Year | Unit::Percent => 0,
            Unit::MillionPersons | Unit::MillionMu => 6,
            Unit::Fraction => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Unit::BillionRmb => "billion RMB",
            Unit::TrillionRmb => "trillion RMB",
            Unit::Persons => "persons",
            Unit::MillionPersons => "million persons",
            Unit::Mu => "Mu",
            Unit::MillionMu => "million Mu",
            Unit::Percent => "percent",
            Unit::Fraction => "fraction",
            Unit::Year => "year",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl serde::Serialize for Unit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase();
        let unit = match norm.as_str() {
            "billion rmb" | "billion yuan" => Unit::BillionRmb,
            "trillion rmb" | "trillion yuan" => Unit::TrillionRmb,
            "persons" | "person" => Unit::Persons,
            "million persons" | "million" => Unit::MillionPersons,
            "mu" => Unit::Mu,
            "million mu" => Unit::MillionMu,
            "percent" | "%" => Unit::Percent,
            "fraction" | "ratio" => Unit::Fraction,
            "year" => Unit::Year,
            _ => return Err(UnitError::Unknown(s.trim().to_string())),
        };
        Ok(unit)
    }
}

/// Rescales `value` between two units of the same dimension.
///
/// Arithmetic is exact decimal scaling by a power of ten, so converting there
/// and back returns the input unchanged.
pub fn convert_units(value: Decimal, from: Unit, to: Unit) -> Result<Decimal, UnitError> {
    if from.dimension() != to.dimension() {
        return Err(UnitError::Incompatible { from, to });
    }
    let (fe, te) = (from.exponent(), to.exponent());
    let overflow = || UnitError::Overflow { from, to };
    if fe == te {
        return Ok(value);
    }
    let shift = fe.abs_diff(te);
    let factor = Decimal::from_i128_with_scale(10i128.pow(shift), 0);
    let out = if fe > te {
        value.checked_mul(factor).ok_or_else(overflow)?
    } else {
        value.checked_div(factor).ok_or_else(overflow)?
    };
    Ok(out.normalize())
}
