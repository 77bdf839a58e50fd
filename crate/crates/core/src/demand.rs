//! Demand-side balance.
//!
//! Fertility below replacement shrinks labour-market entry cohorts after an
//! entry lag, which removes their consumption; land finance moves income out
//! of rural households; high house prices squeeze urban consumption; exports
//! below the export-oriented line leave output unsold. The shortfalls map to
//! an industrial excess-capacity ledger.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{AnnualSeries, Money, SeriesError};

/// Total fertility rate at which each cohort exactly replaces the previous one.
pub const REPLACEMENT_TFR: f64 = 2.10;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("{what} must lie in [0, 1], got {value}")]
    ShareOutOfRange { what: &'static str, value: f64 },
    #[error("GDP must be positive, got {0}")]
    NonPositiveGdp(f64),
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("target ratio {target} exceeds current ratio {current}")]
    TargetAboveCurrent { current: f64, target: f64 },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} does not cover {start}..={end}")]
    Coverage { what: &'static str, start: i32, end: i32 },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("cannot read demand calibration {path}: {msg}")]
    Calibration { path: String, msg: String },
}

fn unit_share(what: &'static str, value: f64) -> Result<(), DemandError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(DemandError::ShareOutOfRange { what, value })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<(), DemandError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(DemandError::Negative { what, value })
    }
}

/// Entry-side cohort accounting. Births are in millions; exits are a
/// constant outflow equal to one replacement-level cohort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortLedger {
    pub fertility: AnnualSeries,
    pub births: AnnualSeries,
    pub employment_entry_lag: u32,
    pub replacement_tfr: f64,
    /// Entrants per year at replacement fertility, and the yearly exit flow.
    pub replacement_cohort: f64,
}

impl CohortLedger {
    /// Births scale with fertility relative to replacement:
    /// `births = replacement_cohort * tfr / 2.10`.
    pub fn from_fertility(
        fertility: AnnualSeries,
        entry_lag: u32,
        replacement_cohort: f64,
    ) -> Result<Self, DemandError> {
        if !(replacement_cohort > 0.0) {
            return Err(DemandError::NonPositive { what: "replacement cohort", value: replacement_cohort });
        }
        if let Some(v) = fertility.values().iter().find(|v| **v < 0.0) {
            return Err(DemandError::Negative { what: "fertility", value: *v });
        }
        let births = fertility.map(|tfr| replacement_cohort * tfr / REPLACEMENT_TFR);
        Ok(Self {
            fertility,
            births,
            employment_entry_lag: entry_lag,
            replacement_tfr: REPLACEMENT_TFR,
            replacement_cohort,
        })
    }

    /// Years for which the lagged births are known.
    pub fn entry_years(&self) -> RangeInclusive<i32> {
        let lag = self.employment_entry_lag as i32;
        (self.births.start_year() + lag)..=(self.births.end_year() + lag)
    }
}

/// Change in the working population (millions) per year:
/// `births(t - lag) - exits`.
pub fn cohort_contraction(ledger: &CohortLedger, horizon: RangeInclusive<i32>) -> Result<AnnualSeries, DemandError> {
    let lag = ledger.employment_entry_lag as i32;
    let entry = ledger.entry_years();
    if horizon.is_empty() || *horizon.start() < *entry.start() || *horizon.end() > *entry.end() {
        return Err(DemandError::Coverage { what: "lagged births", start: *horizon.start(), end: *horizon.end() });
    }
    let values = horizon
        .clone()
        .map(|t| ledger.births.get(t - lag).map(|b| b - ledger.replacement_cohort))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnnualSeries::new(*horizon.start(), values)?)
}

/// Consumption lost with the missing workers, in trillion RMB.
///
/// `annual(t) = -delta(t) * per_capita(t)`; `delta` is in millions and
/// `per_capita` in RMB per person-year.
pub fn consumption_contraction(
    delta_employed: &AnnualSeries,
    per_capita_consumption: &AnnualSeries,
) -> Result<(AnnualSeries, AnnualSeries), DemandError> {
    if delta_employed.years() != per_capita_consumption.years() {
        return Err(SeriesError::Mismatch("employment change and per-capita consumption".into()).into());
    }
    let values =
        delta_employed.values().iter().zip(per_capita_consumption.values()).map(|(d, c)| -d * c * 1e-6).collect();
    let annual = AnnualSeries::new(delta_employed.start_year(), values)?;
    let cumulative = annual.cumulative();
    Ok((annual, cumulative))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    DomesticOriented,
    ExportOriented,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExportDependence {
    pub share: f64,
    pub orientation: Orientation,
}

/// Export share of GDP, export-oriented at or above `threshold`.
pub fn export_dependence(exports: Money, gdp: Money, threshold: f64) -> Result<ExportDependence, DemandError> {
    if !(gdp.0 > 0.0) {
        return Err(DemandError::NonPositiveGdp(gdp.0));
    }
    let share = exports.0 / gdp.0;
    let orientation = if share >= threshold { Orientation::ExportOriented } else { Orientation::DomesticOriented };
    Ok(ExportDependence { share, orientation })
}

/// Rural income moved out through land transfer fees.
pub fn land_finance_transfer(transfer_fees: Money, farmer_share: f64) -> Result<Money, DemandError> {
    unit_share("farmer share", farmer_share)?;
    Ok(transfer_fees * farmer_share)
}

/// Urban consumption released by lowering the price-to-income ratio:
/// `squeeze_base * (current - target) / current`.
pub fn housing_crowd_out(current_ratio: f64, target_ratio: f64, squeeze_base: Money) -> Result<Money, DemandError> {
    if !(current_ratio > 0.0) {
        return Err(DemandError::NonPositive { what: "current price-to-income ratio", value: current_ratio });
    }
    non_negative("target price-to-income ratio", target_ratio)?;
    if target_ratio > current_ratio {
        return Err(DemandError::TargetAboveCurrent { current: current_ratio, target: target_ratio });
    }
    Ok(squeeze_base * ((current_ratio - target_ratio) / current_ratio))
}

/// Squeeze base for which moving from `current` to `target` releases exactly
/// `observed`.
pub fn squeeze_base_for(observed: Money, current_ratio: f64, target_ratio: f64) -> Result<Money, DemandError> {
    if !(current_ratio > target_ratio) {
        return Err(DemandError::TargetAboveCurrent { current: current_ratio, target: target_ratio });
    }
    Ok(observed * (current_ratio / (current_ratio - target_ratio)))
}

/// Same-year forgone final demand by channel, trillion RMB.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DemandComponents {
    pub cohort_contraction: Money,
    pub export_shortfall: Money,
    pub land_finance_transfer: Money,
    pub housing_crowd_out: Money,
}

impl DemandComponents {
    /// Channels that remove household demand (all but exports).
    fn household(&self) -> f64 {
        self.cohort_contraction.0.max(0.0) + self.land_finance_transfer.0.max(0.0) + self.housing_crowd_out.0.max(0.0)
    }

    fn total(&self) -> f64 {
        self.household() + self.export_shortfall.0.max(0.0)
    }
}

/// Shortfall of exports below the export-oriented line.
pub fn export_shortfall(exports: Money, gdp: Money, threshold: f64) -> Money {
    Money((threshold * gdp.0 - exports.0).max(0.0))
}

/// Output content of forgone demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcessCapacityMapping {
    pub industrial_content: f64,
    pub consumer_content: f64,
}

impl ExcessCapacityMapping {
    pub fn validate(&self) -> Result<(), DemandError> {
        non_negative("industrial content", self.industrial_content)?;
        non_negative("consumer content", self.consumer_content)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandLedger {
    pub year: i32,
    pub consumption_contraction_annual: Money,
    pub consumption_contraction_cumulative: Money,
    pub export_share: f64,
    pub export_shortfall: Money,
    pub land_finance_transfer: Money,
    pub housing_crowd_out: Money,
    pub excess_capacity: Money,
    pub consumer_goods_excess: Money,
}

/// Maps the year's components to industrial and consumer-goods excess.
/// Negative components (demand gains) contribute nothing.
pub fn excess_capacity_ledger(
    year: i32,
    components: &DemandComponents,
    cumulative_contraction: Money,
    export_share: f64,
    mapping: &ExcessCapacityMapping,
) -> DemandLedger {
    DemandLedger {
        year,
        consumption_contraction_annual: components.cohort_contraction,
        consumption_contraction_cumulative: cumulative_contraction,
        export_share,
        export_shortfall: components.export_shortfall,
        land_finance_transfer: components.land_finance_transfer,
        housing_crowd_out: components.housing_crowd_out,
        excess_capacity: Money(mapping.industrial_content * components.total()),
        consumer_goods_excess: Money(mapping.consumer_content * components.household()),
    }
}

/// Reform levers that return income to households.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseLevers {
    pub rural_asset_base: f64,
    /// Fraction of rural assets transacted per year.
    pub land_transaction_share: f64,
    pub tax_rate: f64,
    pub present_value_factor: f64,
    /// Fraction of homestead and construction land put to business use.
    pub homestead_share: f64,
    pub homestead_yield_base: f64,
    pub rural_consumption_share: f64,
    pub housing_current_ratio: f64,
    pub housing_target_ratio: f64,
    pub housing_squeeze_base: f64,
}

impl ReleaseLevers {
    pub fn zero() -> Self {
        Self {
            rural_asset_base: 0.0,
            land_transaction_share: 0.0,
            tax_rate: 0.0,
            present_value_factor: 0.0,
            homestead_share: 0.0,
            homestead_yield_base: 0.0,
            rural_consumption_share: 0.0,
            housing_current_ratio: 1.0,
            housing_target_ratio: 1.0,
            housing_squeeze_base: 0.0,
        }
    }

    /// Scales the intensity levers (transaction share, homestead share and
    /// the housing-ratio move) by `k` in [0, 1].
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = *self;
        out.land_transaction_share *= k;
        out.homestead_share *= k;
        out.housing_target_ratio =
            self.housing_current_ratio - k * (self.housing_current_ratio - self.housing_target_ratio);
        out
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        non_negative("rural asset base", self.rural_asset_base)?;
        non_negative("homestead yield base", self.homestead_yield_base)?;
        non_negative("housing squeeze base", self.housing_squeeze_base)?;
        unit_share("land transaction share", self.land_transaction_share)?;
        unit_share("tax rate", self.tax_rate)?;
        unit_share("present value factor", self.present_value_factor)?;
        unit_share("homestead share", self.homestead_share)?;
        unit_share("rural consumption share", self.rural_consumption_share)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandRelease {
    /// After-tax present-value property income from land transactions.
    pub property_income: Money,
    /// Income from land put to business use.
    pub business_income: Money,
    /// Consumption out of the new rural income.
    pub rural_consumption: Money,
    pub housing_release: Money,
    pub total: Money,
}

/// Annual demand released by reform: rural consumption out of property and
/// business income, plus the housing release.
pub fn reform_demand_release(levers: &ReleaseLevers) -> Result<DemandRelease, DemandError> {
    levers.validate()?;
    let property_income = Money(
        levers.rural_asset_base * levers.land_transaction_share * (1.0 - levers.tax_rate) * levers.present_value_factor,
    );
    let business_income = Money(levers.homestead_share * levers.homestead_yield_base);
    let rural_consumption = (property_income + business_income) * levers.rural_consumption_share;
    let housing_release = housing_crowd_out(
        levers.housing_current_ratio,
        levers.housing_target_ratio,
        Money(levers.housing_squeeze_base),
    )?;
    Ok(DemandRelease {
        property_income,
        business_income,
        rural_consumption,
        housing_release,
        total: rural_consumption + housing_release,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortCalibration {
    pub entry_lag_years: u32,
    pub replacement_cohort: f64,
    pub replacement_tfr: f64,
    pub calibration_start: i32,
    pub calibration_end: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandFinanceCalibration {
    pub farmer_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportCalibration {
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HousingCalibration {
    pub current_ratio: f64,
    pub target_ratio: f64,
    pub observed_squeeze: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseCalibration {
    pub rural_asset_base: f64,
    pub land_transaction_share: f64,
    pub tax_rate: f64,
    pub present_value_factor: f64,
    pub homestead_share: f64,
    pub homestead_yield_base: f64,
    pub rural_consumption_share: f64,
}

/// Bundled demand-side constants (`demand_calibration.toml`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandCalibration {
    pub cohort: CohortCalibration,
    pub land_finance: LandFinanceCalibration,
    pub exports: ExportCalibration,
    pub housing: HousingCalibration,
    pub excess: ExcessCapacityMapping,
    pub release: ReleaseCalibration,
}

impl DemandCalibration {
    pub fn load(path: &Path) -> Result<Self, DemandError> {
        let err = |msg: String| DemandError::Calibration { path: path.display().to_string(), msg };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let cal: Self = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        cal.validate().map_err(|e| err(e.to_string()))?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        if (self.cohort.replacement_tfr - REPLACEMENT_TFR).abs() > 1e-12 {
            return Err(DemandError::Calibration {
                path: String::new(),
                msg: format!("replacement TFR is fixed at {REPLACEMENT_TFR}, got {}", self.cohort.replacement_tfr),
            });
        }
        unit_share("farmer share", self.land_finance.farmer_share)?;
        unit_share("export threshold", self.exports.threshold)?;
        self.excess.validate()?;
        self.release_levers()?.validate()
    }

    pub fn housing_squeeze_base(&self) -> Result<Money, DemandError> {
        squeeze_base_for(Money(self.housing.observed_squeeze), self.housing.current_ratio, self.housing.target_ratio)
    }

    pub fn release_levers(&self) -> Result<ReleaseLevers, DemandError> {
        let r = &self.release;
        Ok(ReleaseLevers {
            rural_asset_base: r.rural_asset_base,
            land_transaction_share: r.land_transaction_share,
            tax_rate: r.tax_rate,
            present_value_factor: r.present_value_factor,
            homestead_share: r.homestead_share,
            homestead_yield_base: r.homestead_yield_base,
            rural_consumption_share: r.rural_consumption_share,
            housing_current_ratio: self.housing.current_ratio,
            housing_target_ratio: self.housing.target_ratio,
            housing_squeeze_base: self.housing_squeeze_base()?.0,
        })
    }

    pub fn cohort_ledger(&self, fertility: AnnualSeries) -> Result<CohortLedger, DemandError> {
        CohortLedger::from_fertility(fertility, self.cohort.entry_lag_years, self.cohort.replacement_cohort)
    }

    pub fn calibration_years(&self) -> RangeInclusive<i32> {
        self.cohort.calibration_start..=self.cohort.calibration_end
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn replacement_fertility_is_steady_state() {
        let tfr = AnnualSeries::constant(1990..=2000, REPLACEMENT_TFR).unwrap();
        let ledger = CohortLedger::from_fertility(tfr, 20, 24.0).unwrap();
        let d = cohort_contraction(&ledger, 2010..=2020).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sub_replacement_is_strictly_negative() {
        let tfr = AnnualSeries::constant(1990..=2000, 1.6).unwrap();
        let ledger = CohortLedger::from_fertility(tfr, 20, 24.0).unwrap();
        let d = cohort_contraction(&ledger, 2010..=2020).unwrap();
        assert!(d.values().iter().all(|v| *v < 0.0));
        assert!(cohort_contraction(&ledger, 2009..=2020).is_err());
    }

    #[test]
    fn zero_change_gives_zero_contraction() {
        let d = AnnualSeries::constant(2012..=2020, 0.0).unwrap();
        let c = AnnualSeries::constant(2012..=2020, 5e4).unwrap();
        let (a, cum) = consumption_contraction(&d, &c).unwrap();
        assert!(a.values().iter().chain(cum.values()).all(|v| *v == 0.0));
        let short = AnnualSeries::constant(2012..=2019, 5e4).unwrap();
        assert!(consumption_contraction(&d, &short).is_err());
    }

    #[test]
    fn export_threshold_boundary() {
        let at = export_dependence(Money(20.0), Money(100.0), 0.20).unwrap();
        assert_eq!(at.orientation, Orientation::ExportOriented);
        let below = export_dependence(Money(19.999999), Money(100.0), 0.20).unwrap();
        assert_eq!(below.orientation, Orientation::DomesticOriented);
        assert!(export_dependence(Money(1.0), Money(0.0), 0.2).is_err());
    }

    #[test]
    fn land_finance_examples() {
        assert_eq!(land_finance_transfer(Money(8.4142), 0.5).unwrap(), Money(4.2071));
        assert_eq!(land_finance_transfer(Money(8.4142), 0.0).unwrap(), Money(0.0));
        assert_eq!(land_finance_transfer(Money(10.0), 1.0).unwrap(), Money(10.0));
        assert!(land_finance_transfer(Money(1.0), 1.5).is_err());
    }

    #[test]
    fn housing_examples() {
        assert_eq!(housing_crowd_out(9.3, 9.3, Money(10.0)).unwrap(), Money(0.0));
        assert_eq!(housing_crowd_out(9.3, 0.0, Money(10.0)).unwrap(), Money(10.0));
        assert!(housing_crowd_out(6.0, 9.3, Money(10.0)).is_err());
        let base = squeeze_base_for(Money(3.6458), 9.3, 6.0).unwrap();
        let released = housing_crowd_out(9.3, 6.0, base).unwrap();
        assert_relative_eq!(released.0, 3.6458, max_relative = 1e-12);
        assert!((3.0..=4.0).contains(&released.0));
    }

    #[test]
    fn zero_components_zero_excess() {
        let m = ExcessCapacityMapping { industrial_content: 1.05, consumer_content: 0.65 };
        let l = excess_capacity_ledger(2020, &DemandComponents::default(), Money::ZERO, 0.1, &m);
        assert_eq!(l.excess_capacity, Money::ZERO);
        assert_eq!(l.consumer_goods_excess, Money::ZERO);
    }

    #[test]
    fn zero_levers_release_nothing() {
        let r = reform_demand_release(&ReleaseLevers::zero()).unwrap();
        assert_eq!(r.total, Money::ZERO);
        let mut bad = ReleaseLevers::zero();
        bad.tax_rate = 1.2;
        assert!(reform_demand_release(&bad).is_err());
    }

    fn components() -> impl Strategy<Value = DemandComponents> {
        (0.0f64..20.0, 0.0f64..20.0, 0.0f64..20.0, 0.0f64..20.0).prop_map(|(a, b, c, d)| DemandComponents {
            cohort_contraction: Money(a),
            export_shortfall: Money(b),
            land_finance_transfer: Money(c),
            housing_crowd_out: Money(d),
        })
    }

    proptest! {
        #[test]
        fn excess_is_additive_and_monotone(x in components(), y in components(), k in 0.0f64..3.0, j in 0.0f64..3.0) {
            let m = ExcessCapacityMapping { industrial_content: k, consumer_content: j };
            let sum = DemandComponents {
                cohort_contraction: x.cohort_contraction + y.cohort_contraction,
                export_shortfall: x.export_shortfall + y.export_shortfall,
                land_finance_transfer: x.land_finance_transfer + y.land_finance_transfer,
                housing_crowd_out: x.housing_crowd_out + y.housing_crowd_out,
            };
            let ex = excess_capacity_ledger(0, &x, Money::ZERO, 0.0, &m).excess_capacity.0;
            let ey = excess_capacity_ledger(0, &y, Money::ZERO, 0.0, &m).excess_capacity.0;
            let es = excess_capacity_ledger(0, &sum, Money::ZERO, 0.0, &m).excess_capacity.0;
            prop_assert!((es - ex - ey).abs() <= 1e-9 * es.max(1.0));
            prop_assert!(es + 1e-12 >= ex && ex >= 0.0);
        }

        #[test]
        fn export_classification_is_scale_invariant(x in 0.0f64..50.0, g in 1.0f64..200.0, k in 1e-3f64..1e3) {
            let a = export_dependence(Money(x), Money(g), 0.2).unwrap();
            let b = export_dependence(Money(x * k), Money(g * k), 0.2).unwrap();
            // Rescaling may move the share by one ulp; only compare away from the line.
            if (a.share - 0.2).abs() > 1e-12 {
                prop_assert_eq!(a.orientation, b.orientation);
            }
        }

        #[test]
        fn land_transfer_is_linear(f in 0.0f64..100.0, g in 0.0f64..100.0, s in 0.0f64..1.0) {
            let a = land_finance_transfer(Money(f), s).unwrap().0;
            let b = land_finance_transfer(Money(g), s).unwrap().0;
            let ab = land_finance_transfer(Money(f + g), s).unwrap().0;
            prop_assert!((ab - a - b).abs() <= 1e-12 * ab.max(1.0));
            let half = land_finance_transfer(Money(f), s / 2.0).unwrap().0;
            prop_assert!((2.0 * half - a).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn sustained_low_fertility_means_contraction(tfr in 0.5f64..2.09, pc in 1e3f64..1e6, lag in 15u32..30) {
            let fert = AnnualSeries::constant(1980..=2000, tfr).unwrap();
            let ledger = CohortLedger::from_fertility(fert, lag, 24.0).unwrap();
            let start = 1980 + lag as i32;
            let d = cohort_contraction(&ledger, start..=start + 20).unwrap();
            let pcs = AnnualSeries::constant(start..=start + 20, pc).unwrap();
            let (annual, cum) = consumption_contraction(&d, &pcs).unwrap();
            prop_assert!(annual.values().iter().all(|v| *v > 0.0));
            prop_assert_eq!(cum, annual.cumulative());
        }
    }
}
