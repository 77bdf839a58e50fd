//! Growth accounting in growth-rate form.
//!
//! Two models are provided. The two-factor model splits the residual into a
//! flat technology component and a reform (allocation) component:
//!
//! ```text
//! Y = dA1/A1 + dA2/A2 + a dW/W + b dK/K,            a + b = 1
//! ```
//!
//! The land-inclusive model separates original factor growth (`f`), the
//! re-use of idle factors after reform (`rn`) and newly added land (`in`):
//!
//! ```text
//! Y = dA/A + a (dWf + dWrn)/W + b (dKf + dKrn)/K + c (dLf + dLrn + dLin)/L,
//! a + b + c = 1
//! ```

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{AnnualSeries, Rate, SeriesError};

pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GrowthError {
    #[error("elasticities must each lie in [0, 1] and sum to 1 (got {labor}, {capital}, {land}; sum {sum})")]
    Simplex { labor: f64, capital: f64, land: f64, sum: f64 },
    #[error("natural growth excludes reform TFP, but {0} was supplied")]
    ReformTfpPresent(f64),
    #[error("non-finite input `{0}`")]
    NonFinite(&'static str),
    #[error("horizon {start}..={end}: {what} covers {got_start}..={got_end}")]
    Horizon { start: i32, end: i32, what: &'static str, got_start: i32, got_end: i32 },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("cannot read calibration {path}: {msg}")]
    Calibration { path: String, msg: String },
}

/// Output elasticities of labor (`a`), capital (`b`) and land (`c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Elasticities {
    pub labor: f64,
    pub capital: f64,
    #[serde(default)]
    pub land: f64,
}

impl Default for Elasticities {
    fn default() -> Self {
        Self { labor: 0.5, capital: 0.4, land: 0.1 }
    }
}

impl Elasticities {
    pub fn two_factor(labor: f64, capital: f64) -> Self {
        Self { labor, capital, land: 0.0 }
    }

    pub fn validate(&self) -> Result<(), GrowthError> {
        let sum = self.labor + self.capital + self.land;
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(in_unit(self.labor) && in_unit(self.capital) && in_unit(self.land))
            || (sum - 1.0).abs() > SIMPLEX_TOLERANCE
        {
            return Err(GrowthError::Simplex { labor: self.labor, capital: self.capital, land: self.land, sum });
        }
        Ok(())
    }
}

/// Inputs of the two-factor model with a split residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthInputs {
    pub labor_growth: Rate,
    pub capital_growth: Rate,
    pub labor_elasticity: f64,
    pub capital_elasticity: f64,
    pub tfp_tech_growth: Rate,
    pub tfp_reform_growth: Rate,
}

impl GrowthInputs {
    fn validate(&self) -> Result<(), GrowthError> {
        Elasticities::two_factor(self.labor_elasticity, self.capital_elasticity).validate()?;
        for (name, v) in [
            ("labor_growth", self.labor_growth.0),
            ("capital_growth", self.capital_growth.0),
            ("tfp_tech_growth", self.tfp_tech_growth.0),
            ("tfp_reform_growth", self.tfp_reform_growth.0),
        ] {
            if !v.is_finite() {
                return Err(GrowthError::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// Two-factor growth including the reform TFP term.
pub fn two_factor_growth(inputs: &GrowthInputs) -> Result<Rate, GrowthError> {
    inputs.validate()?;
    Ok(Rate(
        inputs.tfp_tech_growth.0
            + inputs.tfp_reform_growth.0
            + inputs.labor_elasticity * inputs.labor_growth.0
            + inputs.capital_elasticity * inputs.capital_growth.0,
    ))
}

/// Growth with no reform contribution: technology plus factor inputs.
pub fn natural_growth(inputs: &GrowthInputs) -> Result<Rate, GrowthError> {
    if inputs.tfp_reform_growth.0 != 0.0 {
        return Err(GrowthError::ReformTfpPresent(inputs.tfp_reform_growth.0));
    }
    two_factor_growth(inputs)
}

/// Inputs of the land-inclusive model. Factor terms are increments relative
/// to the factor stock (`dWf/W` etc).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassicalGrowthInputs {
    pub tfp_growth: Rate,
    pub labor_original_growth: Rate,
    pub labor_slack_growth: Rate,
    pub capital_original_growth: Rate,
    pub capital_slack_growth: Rate,
    pub land_original_growth: Rate,
    pub land_slack_growth: Rate,
    pub land_new_growth: Rate,
    pub elasticities: Elasticities,
}

impl ClassicalGrowthInputs {
    pub fn labor_term(&self) -> f64 {
        self.elasticities.labor * (self.labor_original_growth.0 + self.labor_slack_growth.0)
    }

    pub fn capital_term(&self) -> f64 {
        self.elasticities.capital * (self.capital_original_growth.0 + self.capital_slack_growth.0)
    }

    pub fn land_term(&self) -> f64 {
        self.elasticities.land * (self.land_original_growth.0 + self.land_slack_growth.0 + self.land_new_growth.0)
    }
}

/// Land-inclusive growth rate.
pub fn classical_growth(inputs: &ClassicalGrowthInputs) -> Result<Rate, GrowthError> {
    inputs.elasticities.validate()?;
    let rates = [
        ("tfp_growth", inputs.tfp_growth.0),
        ("labor_original_growth", inputs.labor_original_growth.0),
        ("labor_slack_growth", inputs.labor_slack_growth.0),
        ("capital_original_growth", inputs.capital_original_growth.0),
        ("capital_slack_growth", inputs.capital_slack_growth.0),
        ("land_original_growth", inputs.land_original_growth.0),
        ("land_slack_growth", inputs.land_slack_growth.0),
        ("land_new_growth", inputs.land_new_growth.0),
    ];
    if let Some((name, _)) = rates.iter().find(|(_, v)| !v.is_finite()) {
        return Err(GrowthError::NonFinite(name));
    }
    Ok(Rate(inputs.tfp_growth.0 + inputs.labor_term() + inputs.capital_term() + inputs.land_term()))
}

/// Split of total TFP growth into a flat technology baseline and the part
/// attributed to reform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfpDecomposition {
    pub total_tfp_growth: Rate,
    pub tech_baseline_growth: Rate,
    pub reform_tfp_growth: Rate,
}

impl TfpDecomposition {
    /// Reform TFP below zero (total under the technology baseline).
    pub fn is_negative_reform(&self) -> bool {
        self.reform_tfp_growth.0 < 0.0
    }
}

/// `reform = total - baseline`. Negative reform components are returned as is.
pub fn decompose_tfp(total_tfp_growth: Rate, tech_baseline_growth: Rate) -> TfpDecomposition {
    TfpDecomposition {
        total_tfp_growth,
        tech_baseline_growth,
        reform_tfp_growth: Rate(total_tfp_growth.0 - tech_baseline_growth.0),
    }
}

/// Area between a TFP growth curve and a flat technology baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReformTfpArea {
    /// Sum over years of `total - baseline`.
    pub integral: f64,
    /// Per-year mean of `total - baseline`.
    pub mean: f64,
    pub years: usize,
}

pub fn reform_tfp_integral(total_tfp: &AnnualSeries, baseline: Rate) -> Result<ReformTfpArea, GrowthError> {
    if total_tfp.is_empty() {
        return Err(SeriesError::Empty.into());
    }
    let integral: f64 = total_tfp.values().iter().map(|v| v - baseline.0).sum();
    Ok(ReformTfpArea { integral, mean: integral / total_tfp.len() as f64, years: total_tfp.len() })
}

/// Mean of a series over `years` (inclusive).
pub fn episode_mean(series: &AnnualSeries, years: RangeInclusive<i32>) -> Result<f64, GrowthError> {
    Ok(series.window(years)?.mean())
}

/// Band of average natural growth rates across the range of capital paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalBand {
    pub low: Rate,
    pub high: Rate,
}

impl NaturalBand {
    pub fn midpoint(&self) -> Rate {
        Rate((self.low.0 + self.high.0) / 2.0)
    }

    pub fn contains(&self, r: Rate) -> bool {
        r.0 >= self.low.0 && r.0 <= self.high.0
    }
}

fn require_cover(series: &AnnualSeries, horizon: &RangeInclusive<i32>, what: &'static str) -> Result<(), GrowthError> {
    if series.covers(horizon) {
        Ok(())
    } else {
        Err(GrowthError::Horizon {
            start: *horizon.start(),
            end: *horizon.end(),
            what,
            got_start: series.start_year(),
            got_end: series.end_year(),
        })
    }
}

/// Annual natural growth along one labour path and one capital path.
pub fn natural_path(
    horizon: RangeInclusive<i32>,
    labor: &AnnualSeries,
    capital: &AnnualSeries,
    tech: Rate,
    labor_elasticity: f64,
    capital_elasticity: f64,
) -> Result<AnnualSeries, GrowthError> {
    require_cover(labor, &horizon, "labor path")?;
    require_cover(capital, &horizon, "capital path")?;
    let mut out = Vec::new();
    for year in horizon.clone() {
        let inputs = GrowthInputs {
            labor_growth: Rate(labor.get(year)?),
            capital_growth: Rate(capital.get(year)?),
            labor_elasticity,
            capital_elasticity,
            tfp_tech_growth: tech,
            tfp_reform_growth: Rate::ZERO,
        };
        out.push(natural_growth(&inputs)?.0);
    }
    Ok(AnnualSeries::new(*horizon.start(), out)?)
}

/// Minimum and maximum average natural growth when capital growth ranges
/// between the low and the high path.
///
/// Growth is linear in the capital path, so the extremes sit on the two
/// boundary paths; both are evaluated and ordered.
pub fn calibrate_natural_band(
    horizon: RangeInclusive<i32>,
    labor: &AnnualSeries,
    capital_low: &AnnualSeries,
    capital_high: &AnnualSeries,
    tech: Rate,
    labor_elasticity: f64,
    capital_elasticity: f64,
) -> Result<NaturalBand, GrowthError> {
    let lo = natural_path(horizon.clone(), labor, capital_low, tech, labor_elasticity, capital_elasticity)?.mean();
    let hi = natural_path(horizon, labor, capital_high, tech, labor_elasticity, capital_elasticity)?.mean();
    Ok(NaturalBand { low: Rate(lo.min(hi)), high: Rate(lo.max(hi)) })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NaturalBandFile {
    start_year: i32,
    tech_growth: f64,
    labor_elasticity: f64,
    capital_elasticity: f64,
    labor_growth: Vec<f64>,
    capital_growth_low: Vec<f64>,
    capital_growth_high: Vec<f64>,
}

/// Input paths used to calibrate the natural (no-reform) growth band.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalBandCalibration {
    pub tech_growth: Rate,
    pub labor_elasticity: f64,
    pub capital_elasticity: f64,
    pub labor: AnnualSeries,
    pub capital_low: AnnualSeries,
    pub capital_high: AnnualSeries,
}

impl NaturalBandCalibration {
    pub fn load(path: &Path) -> Result<Self, GrowthError> {
        let err = |msg: String| GrowthError::Calibration { path: path.display().to_string(), msg };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        Self::from_toml(&text).map_err(|e| match e {
            GrowthError::Calibration { msg, .. } => err(msg),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, GrowthError> {
        let f: NaturalBandFile =
            toml::from_str(text).map_err(|e| GrowthError::Calibration { path: String::new(), msg: e.to_string() })?;
        let cal = Self {
            tech_growth: Rate(f.tech_growth),
            labor_elasticity: f.labor_elasticity,
            capital_elasticity: f.capital_elasticity,
            labor: AnnualSeries::new(f.start_year, f.labor_growth)?,
            capital_low: AnnualSeries::new(f.start_year, f.capital_growth_low)?,
            capital_high: AnnualSeries::new(f.start_year, f.capital_growth_high)?,
        };
        Elasticities::two_factor(cal.labor_elasticity, cal.capital_elasticity).validate()?;
        if cal.labor.years() != cal.capital_low.years() || cal.labor.years() != cal.capital_high.years() {
            return Err(SeriesError::Mismatch("labor/capital paths".into()).into());
        }
        Ok(cal)
    }

    pub fn horizon(&self) -> RangeInclusive<i32> {
        self.labor.years()
    }

    /// Capital path halfway between the low and high paths.
    pub fn capital_central(&self) -> AnnualSeries {
        let vals =
            self.capital_low.values().iter().zip(self.capital_high.values()).map(|(l, h)| (l + h) / 2.0).collect();
        AnnualSeries::new(self.capital_low.start_year(), vals).expect("calibration paths are non-empty")
    }

    pub fn band(&self) -> Result<NaturalBand, GrowthError> {
        calibrate_natural_band(
            self.horizon(),
            &self.labor,
            &self.capital_low,
            &self.capital_high,
            self.tech_growth,
            self.labor_elasticity,
            self.capital_elasticity,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pct(x: f64) -> Rate {
        Rate::from_percent(x)
    }

    fn eq1(tech: f64, reform: f64, a: f64, w: f64, b: f64, k: f64) -> GrowthInputs {
        GrowthInputs {
            labor_growth: pct(w),
            capital_growth: pct(k),
            labor_elasticity: a,
            capital_elasticity: b,
            tfp_tech_growth: pct(tech),
            tfp_reform_growth: pct(reform),
        }
    }

    #[test]
    fn natural_growth_hand_example() {
        // 1.0 + 0.5 * 0 + 0.5 * 3.0
        let y = natural_growth(&eq1(1.0, 0.0, 0.5, 0.0, 0.5, 3.0)).unwrap();
        assert_abs_diff_eq!(y.percent(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn natural_growth_zero() {
        assert_eq!(natural_growth(&eq1(0.0, 0.0, 0.5, 0.0, 0.5, 0.0)).unwrap(), Rate(0.0));
    }

    #[test]
    fn natural_growth_rejects_reform_component() {
        assert!(matches!(natural_growth(&eq1(1.0, 0.5, 0.5, 0.0, 0.5, 0.0)), Err(GrowthError::ReformTfpPresent(_))));
        let y = two_factor_growth(&eq1(1.0, 0.5, 0.5, 0.0, 0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(y.percent(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn simplex_violations() {
        assert!(natural_growth(&eq1(1.0, 0.0, 0.6, 0.0, 0.5, 3.0)).is_err());
        assert!(Elasticities { labor: 1.2, capital: -0.2, land: 0.0 }.validate().is_err());
        assert!(Elasticities { labor: 0.5, capital: 0.4, land: 0.1 + 1e-9 }.validate().is_err());
        assert!(Elasticities::default().validate().is_ok());
    }

    #[test]
    fn classical_zero_increments_collapse_to_residual() {
        let inputs = ClassicalGrowthInputs { tfp_growth: pct(1.7), ..Default::default() };
        let inputs = ClassicalGrowthInputs { elasticities: Elasticities::default(), ..inputs };
        assert_eq!(classical_growth(&inputs).unwrap(), pct(1.7));
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_tfp(pct(3.10), pct(1.00));
        assert_abs_diff_eq!(d.reform_tfp_growth.percent(), 2.10, epsilon = 1e-12);
        let d = decompose_tfp(pct(3.43), pct(1.20));
        assert_abs_diff_eq!(d.reform_tfp_growth.percent(), 2.23, epsilon = 1e-12);
        let d = decompose_tfp(pct(1.20), pct(1.20));
        assert_eq!(d.reform_tfp_growth, Rate(0.0));
        let d = decompose_tfp(pct(0.5), pct(1.2));
        assert!(d.is_negative_reform());
    }

    #[test]
    fn integral_of_flat_series_is_zero() {
        let s = AnnualSeries::constant(1990..=2000, 1.2).unwrap();
        let area = reform_tfp_integral(&s, Rate(1.2)).unwrap();
        assert_eq!(area.integral, 0.0);
        assert_eq!(area.mean, 0.0);
        assert_eq!(area.years, 11);
    }

    #[test]
    fn degenerate_band() {
        let labor = AnnualSeries::constant(2021..=2025, -0.005).unwrap();
        let cap = AnnualSeries::constant(2021..=2025, 0.03).unwrap();
        let band = calibrate_natural_band(2021..=2025, &labor, &cap, &cap, Rate(0.01), 0.5, 0.5).unwrap();
        assert_eq!(band.low, band.high);
    }

    #[test]
    fn band_horizon_mismatch() {
        let labor = AnnualSeries::constant(2021..=2030, 0.0).unwrap();
        let cap = AnnualSeries::constant(2021..=2035, 0.03).unwrap();
        let err = calibrate_natural_band(2021..=2035, &labor, &cap, &cap, Rate(0.01), 0.5, 0.5).unwrap_err();
        assert!(matches!(err, GrowthError::Horizon { .. }));
    }

    fn arb_rate() -> impl Strategy<Value = f64> {
        -0.2f64..0.2
    }

    fn arb_inputs() -> impl Strategy<Value = ClassicalGrowthInputs> {
        ((0.0f64..1.0, 0.0f64..1.0), prop::array::uniform8(arb_rate())).prop_map(|((u, v), r)| {
            // Map (u, v) onto the simplex.
            let a = u;
            let b = (1.0 - a) * v;
            let c = 1.0 - a - b;
            ClassicalGrowthInputs {
                tfp_growth: Rate(r[0]),
                labor_original_growth: Rate(r[1]),
                labor_slack_growth: Rate(r[2]),
                capital_original_growth: Rate(r[3]),
                capital_slack_growth: Rate(r[4]),
                land_original_growth: Rate(r[5]),
                land_slack_growth: Rate(r[6]),
                land_new_growth: Rate(r[7]),
                elasticities: Elasticities { labor: a, capital: b, land: c },
            }
        })
    }

    proptest! {
        #[test]
        fn two_models_agree_on_common_subdomain(tech in arb_rate(), reform in arb_rate(), w in arb_rate(), k in arb_rate(), a in 0.0f64..1.0) {
            let b = 1.0 - a;
            let y1 = two_factor_growth(&GrowthInputs {
                labor_growth: Rate(w), capital_growth: Rate(k),
                labor_elasticity: a, capital_elasticity: b,
                tfp_tech_growth: Rate(tech), tfp_reform_growth: Rate(reform),
            }).unwrap();
            let y2 = classical_growth(&ClassicalGrowthInputs {
                tfp_growth: Rate(tech + reform),
                labor_original_growth: Rate(w),
                capital_original_growth: Rate(k),
                elasticities: Elasticities::two_factor(a, b),
                ..Default::default()
            }).unwrap();
            prop_assert!((y1.0 - y2.0).abs() <= 1e-12);
        }

        #[test]
        fn monotone_in_every_rate(inputs in arb_inputs(), which in 0usize..8, bump in 0.0f64..0.1) {
            let base = classical_growth(&inputs).unwrap();
            let mut up = inputs;
            let field = match which {
                0 => &mut up.tfp_growth,
                1 => &mut up.labor_original_growth,
                2 => &mut up.labor_slack_growth,
                3 => &mut up.capital_original_growth,
                4 => &mut up.capital_slack_growth,
                5 => &mut up.land_original_growth,
                6 => &mut up.land_slack_growth,
                _ => &mut up.land_new_growth,
            };
            field.0 += bump;
            prop_assert!(classical_growth(&up).unwrap().0 >= base.0 - 1e-15);
        }

        #[test]
        fn decomposition_reconstructs(total in -0.1f64..0.2, base in -0.05f64..0.05) {
            let d = decompose_tfp(Rate(total), Rate(base));
            // Exact up to the rounding of one subtraction and one addition.
            let back = d.tech_baseline_growth.0 + d.reform_tfp_growth.0;
            prop_assert!((back - total).abs() <= 2.0 * f64::EPSILON * total.abs().max(base.abs()));
        }
    }
}
