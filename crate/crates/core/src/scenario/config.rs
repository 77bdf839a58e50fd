use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScenarioError, DEFAULT_TAPER};
use crate::growth::Elasticities;
use crate::monetary::{CapitalizationLevel, MonetaryParams};

pub const HORIZON_MIN: i32 = 2021;
pub const HORIZON_MAX: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeverLevel {
    None,
    Low,
    High,
}

impl LeverLevel {
    pub const ALL: [LeverLevel; 3] = [LeverLevel::None, LeverLevel::Low, LeverLevel::High];

    pub fn label(self) -> &'static str {
        match self {
            LeverLevel::None => "none",
            LeverLevel::Low => "low",
            LeverLevel::High => "high",
        }
    }
}

/// Every lever must be given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Levers {
    pub capital_reform: LeverLevel,
    pub labor_reform: LeverLevel,
    pub land_reform: LeverLevel,
    pub capitalization: LeverLevel,
    pub innovation: LeverLevel,
}

impl Levers {
    pub const NAMES: [&'static str; 5] =
        ["capital-reform", "labor-reform", "land-reform", "capitalization", "innovation"];

    pub fn uniform(level: LeverLevel) -> Self {
        Self {
            capital_reform: level,
            labor_reform: level,
            land_reform: level,
            capitalization: level,
            innovation: level,
        }
    }

    pub fn get(&self, name: &str) -> Option<LeverLevel> {
        Some(match name {
            "capital-reform" => self.capital_reform,
            "labor-reform" => self.labor_reform,
            "land-reform" => self.land_reform,
            "capitalization" => self.capitalization,
            "innovation" => self.innovation,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, level: LeverLevel) -> bool {
        let slot = match name {
            "capital-reform" => &mut self.capital_reform,
            "labor-reform" => &mut self.labor_reform,
            "land-reform" => &mut self.land_reform,
            "capitalization" => &mut self.capitalization,
            "innovation" => &mut self.innovation,
            _ => return false,
        };
        *slot = level;
        true
    }
}

fn default_start() -> i32 {
    HORIZON_MIN
}
fn default_end() -> i32 {
    2035
}
fn default_taper() -> f64 {
    DEFAULT_TAPER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    #[serde(default = "default_start")]
    pub start_year: i32,
    #[serde(default = "default_end")]
    pub end_year: i32,
    /// Strength of the front-loaded reform profile, in [0, 1].
    #[serde(default = "default_taper")]
    pub taper: f64,
    #[serde(default)]
    pub elasticities: Option<Elasticities>,
    /// Annual export growth; unset keeps the export share of GDP constant.
    #[serde(default)]
    pub export_growth: Option<f64>,
}

fn default_g_debt() -> f64 {
    0.10
}
fn default_g_money() -> f64 {
    0.08
}
fn default_release() -> f64 {
    0.067
}
fn default_small() -> f64 {
    CapitalizationLevel::Small.default_fraction()
}
fn default_interest() -> f64 {
    MonetaryParams::default().debt_interest
}
fn default_weight() -> f64 {
    MonetaryParams::default().gdp_weight
}
fn default_price() -> f64 {
    MonetaryParams::default().gdp_price_factor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonetarySection {
    #[serde(default = "default_g_debt")]
    pub g_debt: f64,
    #[serde(default = "default_g_money")]
    pub g_money: f64,
    #[serde(default = "default_interest")]
    pub debt_interest: f64,
    #[serde(default = "default_weight")]
    pub gdp_weight: f64,
    #[serde(default = "default_price")]
    pub gdp_price_factor: f64,
    /// Overrides the level implied by the capitalization lever.
    #[serde(default)]
    pub capitalization_level: Option<CapitalizationLevel>,
    #[serde(default = "default_release")]
    pub release_rate: f64,
    #[serde(default = "default_small")]
    pub small_fraction: f64,
    /// Capitalizable stock; defaults to the baseline tradable asset stock.
    #[serde(default)]
    pub asset_base: Option<f64>,
    #[serde(default)]
    pub new_land_flow: f64,
}

impl Default for MonetarySection {
    fn default() -> Self {
        toml::from_str("").expect("all monetary fields have defaults")
    }
}

impl MonetarySection {
    pub fn params(&self) -> MonetaryParams {
        MonetaryParams {
            gdp_weight: self.gdp_weight,
            gdp_price_factor: self.gdp_price_factor,
            debt_interest: self.debt_interest,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemographicsSection {
    /// Fertility series, relative to the data directory.
    #[serde(default)]
    pub fertility_file: Option<String>,
    #[serde(default)]
    pub entry_lag_years: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub levers: Levers,
    #[serde(default)]
    pub monetary: MonetarySection,
    #[serde(default)]
    pub demographics: DemographicsSection,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn horizon(&self) -> RangeInclusive<i32> {
        self.scenario.start_year..=self.scenario.end_year
    }

    pub fn elasticities(&self) -> Elasticities {
        self.scenario.elasticities.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let s = &self.scenario;
        if s.name.trim().is_empty() {
            return Err(ScenarioError::invalid("scenario.name", "must not be empty"));
        }
        for (path, y) in [("scenario.start_year", s.start_year), ("scenario.end_year", s.end_year)] {
            if !(HORIZON_MIN..=HORIZON_MAX).contains(&y) {
                return Err(ScenarioError::invalid(path, format!("{y} is outside [{HORIZON_MIN}, {HORIZON_MAX}]")));
            }
        }
        if s.end_year < s.start_year {
            return Err(ScenarioError::invalid("scenario.end_year", "precedes scenario.start_year"));
        }
        if !(0.0..=1.0).contains(&s.taper) {
            return Err(ScenarioError::invalid("scenario.taper", format!("{} is outside [0, 1]", s.taper)));
        }
        self.elasticities().validate().map_err(|e| ScenarioError::invalid("scenario.elasticities", e))?;
        if let Some(g) = s.export_growth {
            if !g.is_finite() || g <= -1.0 {
                return Err(ScenarioError::invalid("scenario.export_growth", "must be finite and above -1"));
            }
        }
        let m = &self.monetary;
        for (path, v) in [("monetary.g_debt", m.g_debt), ("monetary.g_money", m.g_money)] {
            if !v.is_finite() || v <= -1.0 {
                return Err(ScenarioError::invalid(path, "must be finite and above -1"));
            }
        }
        m.params().validate().map_err(|e| ScenarioError::invalid("monetary", e))?;
        for (path, v) in [("monetary.release_rate", m.release_rate), ("monetary.small_fraction", m.small_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ScenarioError::invalid(path, format!("{v} is outside [0, 1]")));
            }
        }
        if m.small_fraction <= 0.0 || m.small_fraction >= 0.5 {
            return Err(ScenarioError::invalid(
                "monetary.small_fraction",
                "must lie strictly between none (0) and half (0.5)",
            ));
        }
        if let Some(b) = m.asset_base {
            if !(b >= 0.0) {
                return Err(ScenarioError::invalid("monetary.asset_base", "must be non-negative"));
            }
        }
        if !(m.new_land_flow >= 0.0) {
            return Err(ScenarioError::invalid("monetary.new_land_flow", "must be non-negative"));
        }
        if self.demographics.fertility_file.as_deref().is_some_and(|f| f.trim().is_empty()) {
            return Err(ScenarioError::invalid("demographics.fertility_file", "must not be empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[scenario]
name = "t"
[levers]
capital-reform = "low"
labor-reform = "low"
land-reform = "low"
capitalization = "low"
innovation = "low"
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ScenarioConfig::from_toml(MIN).unwrap();
        assert_eq!(c.horizon(), 2021..=2035);
        assert_eq!(c.monetary.g_debt, 0.10);
        assert_eq!(c.levers, Levers::uniform(LeverLevel::Low));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = MIN.replace("name = \"t\"", "name = \"t\"\nbogus = 1");
        let err = ScenarioConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn missing_lever_is_an_error() {
        let text = MIN.replace("innovation = \"low\"\n", "");
        assert!(ScenarioConfig::from_toml(&text).unwrap_err().to_string().contains("innovation"));
    }

    #[test]
    fn duplicate_lever_is_an_error() {
        let text = MIN.replace("innovation = \"low\"", "innovation = \"low\"\ninnovation = \"high\"");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn horizon_bounds_name_the_field() {
        let text = MIN.replace("name = \"t\"", "name = \"t\"\nend_year = 2101");
        match ScenarioConfig::from_toml(&text).unwrap_err() {
            ScenarioError::Validation { path, .. } => assert_eq!(path, "scenario.end_year"),
            e => panic!("{e}"),
        }
        let text = MIN.replace("name = \"t\"", "name = \"t\"\nstart_year = 2020");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn elasticity_simplex_checked() {
        let text = MIN.replace("name = \"t\"", "name = \"t\"\nelasticities = { labor = 0.6, capital = 0.6 }");
        match ScenarioConfig::from_toml(&text).unwrap_err() {
            ScenarioError::Validation { path, .. } => assert_eq!(path, "scenario.elasticities"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = ScenarioConfig::from_toml(MIN).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
