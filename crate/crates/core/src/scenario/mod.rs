//! Lever-driven projections.
//!
//! A scenario sets each reform lever to `none`, `low` or `high`. Levers map
//! onto the land-inclusive growth model year by year; the demand ledger and
//! the debt/money model then run on the resulting GDP path as diagnostics
//! (they do not feed back into growth).

mod calibrate;
mod config;
mod sweep;

use std::ops::RangeInclusive;

use serde::Serialize;
use thiserror::Error;

pub use calibrate::{
    calibrate, calibrate_to, golden_section, registered_targets, Calibration, CalibrationTarget, LITERAL_G_DEBT,
    LITERAL_G_GDP, LITERAL_G_MONEY, LITERAL_HORIZON, LITERAL_RELEASE_RATE,
};
pub use config::{
    DemographicsSection, LeverLevel, Levers, MonetarySection, ScenarioConfig, ScenarioSection, HORIZON_MAX, HORIZON_MIN,
};
pub use sweep::{sweep, LeverGrid};

use crate::data::BundledData;
use crate::demand::{
    cohort_contraction, consumption_contraction, excess_capacity_ledger, export_dependence, export_shortfall,
    land_finance_transfer, reform_demand_release, DemandComponents, DemandError, DemandLedger, DemandRelease,
    Orientation,
};
use crate::econ::{AnnualSeries, Money, Rate, SeriesError};
use crate::growth::{classical_growth, ClassicalGrowthInputs, GrowthError};
use crate::monetary::{
    coverage_path, first_collapse, project_with_gdp_path, CapitalizationLevel, CapitalizationScenario, MonetaryError,
};

/// Factor-input term of the growth model at the low and high reform targets.
pub const FACTOR_TARGET_LOW: f64 = 0.0325;
pub const FACTOR_TARGET_HIGH: f64 = 0.0380;
/// TFP from land capitalization.
pub const CAPITALIZATION_TFP: f64 = 0.0100;
pub const INNOVATION_TFP_LOW: f64 = 0.0100;
pub const INNOVATION_TFP_HIGH: f64 = 0.0150;
/// Split of the reform factor increment across the three factor levers.
pub const LABOR_WEIGHT: f64 = 0.35;
pub const CAPITAL_WEIGHT: f64 = 0.30;
pub const LAND_WEIGHT: f64 = 0.35;
/// Part of the land increment that re-uses idle land; the rest is new land.
pub const LAND_REUSE_SHARE: f64 = 0.70;
pub const DEFAULT_TAPER: f64 = 0.4;
pub const PERIOD_YEARS: usize = 5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {msg}")]
    Validation { path: String, msg: String },
    #[error("data: {0}")]
    Data(String),
}

impl ScenarioError {
    pub(crate) fn invalid(path: &str, msg: impl ToString) -> Self {
        ScenarioError::Validation { path: path.to_string(), msg: msg.to_string() }
    }

    /// True for configuration problems (as opposed to data problems).
    pub fn is_validation(&self) -> bool {
        matches!(self, ScenarioError::Parse(_) | ScenarioError::Validation { .. } | ScenarioError::Io { .. })
    }
}

macro_rules! data_err {
    ($($t:ty),*) => {$(
        impl From<$t> for ScenarioError {
            fn from(e: $t) -> Self {
                ScenarioError::Data(e.to_string())
            }
        }
    )*};
}
data_err!(SeriesError, GrowthError, DemandError, MonetaryError, crate::slack::SlackError, crate::data::DataError);

/// Bundled scenario files by name (`natural`, `reform-low`, `reform-high`).
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let text = match name {
        "natural" => include_str!("../../../../scenarios/natural.toml"),
        "reform-low" => include_str!("../../../../scenarios/reform_low.toml"),
        "reform-high" => include_str!("../../../../scenarios/reform_high.toml"),
        _ => return None,
    };
    Some(ScenarioConfig::from_toml(text).expect("bundled scenario is valid"))
}

/// Geometric average growth over a block of years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodAverage {
    pub start: i32,
    pub end: i32,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub year: i32,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub name: String,
    pub horizon: RangeInclusive<i32>,
    /// Annual GDP growth over the horizon.
    pub growth: AnnualSeries,
    /// Growth-model inputs behind each year of `growth`.
    pub inputs: Vec<ClassicalGrowthInputs>,
    pub period_averages: Vec<PeriodAverage>,
    pub horizon_average: Rate,
    /// GDP level from the baseline year.
    pub gdp: AnnualSeries,
    pub debt_ratio: AnnualSeries,
    pub m2_ratio: AnnualSeries,
    pub coverage: AnnualSeries,
    pub flow_assets: AnnualSeries,
    pub collapse_year: Option<i32>,
    pub demand: Vec<DemandLedger>,
    pub reform_release: DemandRelease,
    pub capitalization: CapitalizationLevel,
    pub events: Vec<Event>,
}

/// `(prod (1 + g))^(1/n) - 1`.
pub fn geometric_average(rates: &[f64]) -> Rate {
    if rates.is_empty() {
        return Rate::ZERO;
    }
    let log_sum: f64 = rates.iter().map(|g| (1.0 + g).ln()).sum();
    Rate((log_sum / rates.len() as f64).exp() - 1.0)
}

/// Consecutive five-year blocks from the start of the series; a shorter
/// final block is kept.
pub fn period_averages(growth: &AnnualSeries) -> Vec<PeriodAverage> {
    growth
        .values()
        .chunks(PERIOD_YEARS)
        .enumerate()
        .map(|(i, block)| {
            let start = growth.start_year() + (i * PERIOD_YEARS) as i32;
            PeriodAverage { start, end: start + block.len() as i32 - 1, rate: geometric_average(block) }
        })
        .collect()
}

/// Front-loaded linear profile with mean exactly 1: `1 + s (m - i) / m`,
/// `m = (n - 1) / 2`.
pub fn taper_profile(n: usize, strength: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let m = (n - 1) as f64 / 2.0;
    (0..n).map(|i| 1.0 + strength * (m - i as f64) / m).collect()
}

fn extend(series: &AnnualSeries, year: i32) -> f64 {
    let clamped = year.clamp(series.start_year(), series.end_year());
    series.get(clamped).expect("clamped into range")
}

fn factor_target(level: LeverLevel) -> Option<f64> {
    match level {
        LeverLevel::None => None,
        LeverLevel::Low => Some(FACTOR_TARGET_LOW),
        LeverLevel::High => Some(FACTOR_TARGET_HIGH),
    }
}

/// Yearly growth-model inputs implied by the levers.
pub fn lever_inputs(
    config: &ScenarioConfig,
    data: &BundledData,
) -> Result<Vec<(i32, ClassicalGrowthInputs)>, ScenarioError> {
    let e = config.elasticities();
    let levers = &config.levers;
    let horizon = config.horizon();
    let natural = &data.natural;
    let capital_central = natural.capital_central();
    let n = horizon.clone().count();
    let original = |y: i32| (extend(&natural.labor, y), extend(&capital_central, y));
    let original_term = |y: i32| -> f64 {
        let (w, k) = original(y);
        e.labor * w + e.capital * k
    };
    let mean_original = horizon.clone().map(original_term).sum::<f64>() / n as f64;

    let mut increments = [0.0f64; 3];
    for (slot, (level, weight, elasticity, path)) in [
        (levers.labor_reform, LABOR_WEIGHT, e.labor, "levers.labor-reform"),
        (levers.capital_reform, CAPITAL_WEIGHT, e.capital, "levers.capital-reform"),
        (levers.land_reform, LAND_WEIGHT, e.land, "levers.land-reform"),
    ]
    .into_iter()
    .enumerate()
    {
        if let Some(target) = factor_target(level) {
            if elasticity == 0.0 {
                return Err(ScenarioError::invalid(path, "lever is active but the factor's elasticity is zero"));
            }
            increments[slot] = weight * (target - mean_original);
        }
    }

    let innovation = match levers.innovation {
        LeverLevel::None => natural.tech_growth.0,
        LeverLevel::Low => INNOVATION_TFP_LOW,
        LeverLevel::High => INNOVATION_TFP_HIGH,
    };
    let capitalization = match levers.capitalization {
        LeverLevel::None => 0.0,
        LeverLevel::Low | LeverLevel::High => CAPITALIZATION_TFP,
    };
    let profile = taper_profile(n, config.scenario.taper);

    // Years between the baseline and the scenario start run without reform.
    let first = data.baseline.year + 1;
    let mut out = Vec::new();
    for year in first..=*horizon.end() {
        let (w, k) = original(year);
        let mut inputs = ClassicalGrowthInputs {
            tfp_growth: Rate(natural.tech_growth.0),
            labor_original_growth: Rate(w),
            capital_original_growth: Rate(k),
            elasticities: e,
            ..Default::default()
        };
        if horizon.contains(&year) {
            let p = profile[(year - horizon.start()) as usize];
            inputs.tfp_growth = Rate(innovation + capitalization);
            if increments[0] != 0.0 {
                inputs.labor_slack_growth = Rate(increments[0] * p / e.labor);
            }
            if increments[1] != 0.0 {
                inputs.capital_slack_growth = Rate(increments[1] * p / e.capital);
            }
            if increments[2] != 0.0 {
                inputs.land_slack_growth = Rate(LAND_REUSE_SHARE * increments[2] * p / e.land);
                inputs.land_new_growth = Rate((1.0 - LAND_REUSE_SHARE) * increments[2] * p / e.land);
            }
        }
        out.push((year, inputs));
    }
    Ok(out)
}

fn land_scale(level: LeverLevel) -> f64 {
    match level {
        LeverLevel::None => 0.0,
        LeverLevel::Low => 0.5,
        LeverLevel::High => 1.0,
    }
}

/// Runs one scenario against the bundled data. Pure in `(config, data)`.
pub fn run_scenario(config: &ScenarioConfig, data: &BundledData) -> Result<ProjectionResult, ScenarioError> {
    config.validate()?;
    let horizon = config.horizon();
    let base = &data.baseline;
    if *horizon.start() <= base.year {
        return Err(ScenarioError::invalid(
            "scenario.start_year",
            format!("must be after the baseline year {}", base.year),
        ));
    }

    // Growth.
    let yearly = lever_inputs(config, data)?;
    let mut all_growth = Vec::with_capacity(yearly.len());
    for (_, inputs) in &yearly {
        all_growth.push(classical_growth(inputs)?.0);
    }
    let full_path = AnnualSeries::new(base.year + 1, all_growth)?;
    let growth = full_path.window(horizon.clone())?;
    let inputs: Vec<ClassicalGrowthInputs> =
        yearly.iter().filter(|(y, _)| horizon.contains(y)).map(|(_, i)| *i).collect();
    let period_averages = period_averages(&growth);
    let horizon_average = geometric_average(growth.values());

    // Debt and money.
    let m = &config.monetary;
    let projection = project_with_gdp_path(base, &full_path, Rate(m.g_debt), Rate(m.g_money))?;
    let level = m.capitalization_level.unwrap_or(match config.levers.capitalization {
        LeverLevel::None => CapitalizationLevel::None,
        LeverLevel::Low => CapitalizationLevel::Half,
        LeverLevel::High => CapitalizationLevel::Full,
    });
    let asset_base = m.asset_base.map(Money).or(base.tradable_asset_stock).ok_or_else(|| {
        ScenarioError::Data("baseline lacks tradable_asset_stock and monetary.asset_base is unset".into())
    })?;
    let mut cap = CapitalizationScenario::new(level, asset_base, Rate(m.release_rate));
    if level == CapitalizationLevel::Small {
        cap.tradable_fraction = m.small_fraction;
    }
    cap.new_land_flow = Money(m.new_land_flow);
    let (coverage, flow_assets, _) = coverage_path(base, &projection, &cap, &m.params())?;
    let collapse_year = first_collapse(&coverage);

    // Demand diagnostics over the projection years.
    let demand_cal = &data.demand;
    let mut fertility = data.fertility.clone();
    if let Some(file) = &config.demographics.fertility_file {
        let path = data.dir.join(file);
        fertility = crate::econ::load_series_csv(&path)
            .map_err(|e| ScenarioError::invalid("demographics.fertility_file", e))?
            .0;
    }
    let lag = config.demographics.entry_lag_years.unwrap_or(demand_cal.cohort.entry_lag_years);
    let needed_end = *horizon.end() - lag as i32;
    if needed_end > fertility.end_year() {
        let last = *fertility.values().last().expect("non-empty");
        let extra = (needed_end - fertility.end_year()) as usize;
        let mut v = fertility.values().to_vec();
        v.extend(std::iter::repeat_n(last, extra));
        fertility = AnnualSeries::new(fertility.start_year(), v)?;
    }
    let ledger = crate::demand::CohortLedger::from_fertility(fertility, lag, demand_cal.cohort.replacement_cohort)?;
    let demand_years = (base.year + 1)..=*horizon.end();
    let delta = cohort_contraction(&ledger, demand_years.clone())?;
    let pc0 = data
        .per_capita_consumption
        .get(base.year)
        .map_err(|e| ScenarioError::Data(format!("per-capita consumption: {e}")))?;
    let gdp0 = base.gdp.0;
    let gdp_ratio = |y: i32| projection.gdp.get(y).map(|g| g / gdp0);
    let per_capita = AnnualSeries::new(
        base.year + 1,
        demand_years.clone().map(|y| gdp_ratio(y).map(|r| pc0 * r)).collect::<Result<Vec<_>, _>>()?,
    )?;
    let (annual, cumulative) = consumption_contraction(&delta, &per_capita)?;

    let k = land_scale(config.levers.land_reform);
    let levers = demand_cal.release_levers()?.scaled(k);
    let reform_release = reform_demand_release(&levers)?;
    let exports0 = base.exports.ok_or_else(|| ScenarioError::Data("baseline lacks exports".into()))?;
    let fees0 = base
        .fiscal_land_transfer_fees
        .ok_or_else(|| ScenarioError::Data("baseline lacks fiscal_land_transfer_fees".into()))?;
    let threshold = demand_cal.exports.threshold;
    let observed_squeeze = demand_cal.housing.observed_squeeze;

    let mut events = Vec::new();
    let mut demand = Vec::new();
    let mut orientation = export_dependence(exports0, base.gdp, threshold)?.orientation;
    for (i, year) in demand_years.enumerate() {
        let r = gdp_ratio(year)?;
        let gdp = Money(gdp0 * r);
        let exports = match config.scenario.export_growth {
            Some(g) => exports0 * (1.0 + g).powi(i as i32 + 1),
            None => exports0 * r,
        };
        let dep = export_dependence(exports, gdp, threshold)?;
        if dep.orientation != orientation {
            let label = match dep.orientation {
                Orientation::ExportOriented => "export-oriented",
                Orientation::DomesticOriented => "domestic-oriented",
            };
            events.push(Event { year, kind: "export-classification".into(), detail: label.into() });
            orientation = dep.orientation;
        }
        let components = DemandComponents {
            cohort_contraction: Money(annual.get(year)?),
            export_shortfall: export_shortfall(exports, gdp, threshold),
            land_finance_transfer: land_finance_transfer(fees0 * r, demand_cal.land_finance.farmer_share)? * (1.0 - k),
            housing_crowd_out: Money(((observed_squeeze - reform_release.housing_release.0) * r).max(0.0)),
        };
        let entry =
            excess_capacity_ledger(year, &components, Money(cumulative.get(year)?), dep.share, &demand_cal.excess);
        if horizon.contains(&year) {
            demand.push(entry);
        }
    }
    if let Some(y) = collapse_year {
        events.push(Event { year: y, kind: "collapse".into(), detail: format!("coverage below 1 from {y}") });
    }
    events.sort_by(|a, b| (a.year, &a.kind).cmp(&(b.year, &b.kind)));

    Ok(ProjectionResult {
        name: config.scenario.name.clone(),
        horizon: horizon.clone(),
        growth,
        inputs,
        period_averages,
        horizon_average,
        gdp: projection.gdp.clone(),
        debt_ratio: projection.debt_ratio.clone(),
        m2_ratio: projection.m2_ratio.clone(),
        coverage,
        flow_assets,
        collapse_year,
        demand,
        reform_release,
        capitalization: level,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taper_has_unit_mean() {
        for n in [1usize, 2, 5, 15, 80] {
            let p = taper_profile(n, 0.4);
            let mean = p.iter().sum::<f64>() / n as f64;
            assert!((mean - 1.0).abs() < 1e-12, "n = {n}");
        }
        assert!(taper_profile(0, 0.4).is_empty());
    }

    #[test]
    fn geometric_average_of_constant() {
        let r = geometric_average(&[0.05; 7]);
        assert!((r.0 - 0.05).abs() < 1e-15);
        assert_eq!(geometric_average(&[]), Rate::ZERO);
    }

    #[test]
    fn period_blocks() {
        let s = AnnualSeries::new(2021, vec![0.01; 12]).unwrap();
        let p = period_averages(&s);
        assert_eq!(p.len(), 3);
        assert_eq!((p[2].start, p[2].end), (2031, 2032));
    }
}
