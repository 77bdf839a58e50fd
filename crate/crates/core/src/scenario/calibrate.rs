use serde::Serialize;

use super::ScenarioError;
use crate::econ::{EconomyBaseline, Rate};
use crate::monetary::{asset_release, project_debt_money, CapitalizationLevel, CapitalizationScenario};

/// Projection parameters as published: GDP 6.10%, debt 10.00%, money 8.00%
/// per year over 15 years, and 6.70% annual release of the tradable anchor.
pub const LITERAL_G_GDP: f64 = 0.061;
pub const LITERAL_G_DEBT: f64 = 0.10;
pub const LITERAL_G_MONEY: f64 = 0.08;
pub const LITERAL_HORIZON: u32 = 15;
pub const LITERAL_RELEASE_RATE: f64 = 0.067;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    /// M2 / GDP after 15 years, free parameter `g_money`.
    M2Ratio2035,
    /// Debt / GDP after 15 years, free parameter `g_debt`.
    DebtRatio2035,
    /// Full-capitalization annual asset flow, free parameter `release_rate`.
    AssetFlow,
}

impl CalibrationTarget {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationTarget::M2Ratio2035 => "m2_ratio_2035",
            CalibrationTarget::DebtRatio2035 => "debt_ratio_2035",
            CalibrationTarget::AssetFlow => "asset_flow",
        }
    }

    pub fn parameter(self) -> &'static str {
        match self {
            CalibrationTarget::M2Ratio2035 => "g_money",
            CalibrationTarget::DebtRatio2035 => "g_debt",
            CalibrationTarget::AssetFlow => "release_rate",
        }
    }

    /// Published value (ratios as fractions, flows in trillion RMB).
    pub fn value(self) -> f64 {
        match self {
            CalibrationTarget::M2Ratio2035 => 3.27,
            CalibrationTarget::DebtRatio2035 => 4.65,
            CalibrationTarget::AssetFlow => 53.30,
        }
    }

    pub fn default_parameter(self) -> f64 {
        match self {
            CalibrationTarget::M2Ratio2035 => LITERAL_G_MONEY,
            CalibrationTarget::DebtRatio2035 => LITERAL_G_DEBT,
            CalibrationTarget::AssetFlow => LITERAL_RELEASE_RATE,
        }
    }

    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            CalibrationTarget::M2Ratio2035 => (0.06, 0.12),
            CalibrationTarget::DebtRatio2035 => (0.06, 0.14),
            CalibrationTarget::AssetFlow => (0.0, 0.2),
        }
    }

    /// Model value at parameter `x`.
    pub fn evaluate(self, base: &EconomyBaseline, x: f64) -> Result<f64, ScenarioError> {
        let g_gdp = Rate(LITERAL_G_GDP);
        Ok(match self {
            CalibrationTarget::M2Ratio2035 => {
                project_debt_money(base, g_gdp, Rate(LITERAL_G_DEBT), Rate(x), LITERAL_HORIZON)?.final_m2_ratio()
            }
            CalibrationTarget::DebtRatio2035 => {
                project_debt_money(base, g_gdp, Rate(x), Rate(LITERAL_G_MONEY), LITERAL_HORIZON)?.final_debt_ratio()
            }
            CalibrationTarget::AssetFlow => {
                let stock = base
                    .tradable_asset_stock
                    .ok_or_else(|| ScenarioError::Data("baseline lacks tradable_asset_stock".into()))?;
                let sc = CapitalizationScenario::new(CapitalizationLevel::Full, stock, Rate(x));
                asset_release(&sc)?.annual_flow.0
            }
        })
    }
}

impl std::str::FromStr for CalibrationTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        registered_targets()
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| format!("unknown calibration target `{s}`"))
    }
}

pub fn registered_targets() -> [CalibrationTarget; 3] {
    [CalibrationTarget::M2Ratio2035, CalibrationTarget::DebtRatio2035, CalibrationTarget::AssetFlow]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub target: CalibrationTarget,
    pub parameter: &'static str,
    pub value: f64,
    pub computed: f64,
    pub target_value: f64,
    /// `|computed - target|`.
    pub residual: f64,
    /// False when the best point in the bounds still misses the target.
    pub converged: bool,
}

/// Minimizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<E>(mut f: impl FnMut(f64) -> Result<f64, E>, lo: f64, hi: f64, tol: f64) -> Result<f64, E> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    Ok((a + b) / 2.0)
}

/// Fits the target's free parameter to its published value within `bounds`
/// (or the default bounds).
pub fn calibrate(
    target: CalibrationTarget,
    base: &EconomyBaseline,
    bounds: Option<(f64, f64)>,
) -> Result<Calibration, ScenarioError> {
    calibrate_to(target, target.value(), base, bounds)
}

/// As [`calibrate`] with an explicit goal. When the default parameter already
/// hits the goal it is returned as is.
pub fn calibrate_to(
    target: CalibrationTarget,
    goal: f64,
    base: &EconomyBaseline,
    bounds: Option<(f64, f64)>,
) -> Result<Calibration, ScenarioError> {
    let (lo, hi) = bounds.unwrap_or_else(|| target.default_bounds());
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(ScenarioError::invalid("bounds", format!("[{lo}, {hi}] is not a proper interval")));
    }
    let scale = goal.abs().max(1.0);
    let finish = |value: f64, computed: f64| {
        let residual = (computed - goal).abs();
        Calibration {
            target,
            parameter: target.parameter(),
            value,
            computed,
            target_value: goal,
            residual,
            converged: residual <= 1e-9 * scale,
        }
    };
    let default = target.default_parameter();
    let at_default = target.evaluate(base, default)?;
    if at_default == goal {
        return Ok(finish(default, at_default));
    }
    let x = golden_section(|x| target.evaluate(base, x).map(|v| (v - goal).abs()), lo, hi, 1e-13)?;
    Ok(finish(x, target.evaluate(base, x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::Money;
    use crate::monetary::solve_growth_for_ratio;

    fn base() -> EconomyBaseline {
        let mut b = EconomyBaseline::new(2020, Money(101.6));
        b.debt_stock = Some(Money(276.352));
        b.m2_stock = Some(Money(220.472));
        b.tradable_asset_stock = Some(Money(795.0));
        b
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|x| Ok::<_, ()>((x - 0.3) * (x - 0.3)), -1.0, 2.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn money_growth_matches_analytic_solution() {
        let c = calibrate(CalibrationTarget::M2Ratio2035, &base(), None).unwrap();
        let oracle = solve_growth_for_ratio(2.17, 3.27, Rate(LITERAL_G_GDP), 15);
        assert!((c.value - oracle).abs() < 1e-9, "{} vs {}", c.value, oracle);
        assert!(c.converged);
    }

    #[test]
    fn debt_growth_matches_analytic_solution() {
        let c = calibrate(CalibrationTarget::DebtRatio2035, &base(), None).unwrap();
        let oracle = solve_growth_for_ratio(2.72, 4.65, Rate(LITERAL_G_GDP), 15);
        assert!((c.value - oracle).abs() < 1e-9);
        assert!((c.value - 0.0996).abs() < 1e-4);
    }

    #[test]
    fn unreachable_target_reports_best() {
        let c = calibrate(CalibrationTarget::M2Ratio2035, &base(), Some((0.0, 0.02))).unwrap();
        assert!(!c.converged);
        assert!((c.value - 0.02).abs() < 1e-9);
    }

    #[test]
    fn met_target_returns_defaults() {
        for t in registered_targets() {
            let goal = t.evaluate(&base(), t.default_parameter()).unwrap();
            let c = calibrate_to(t, goal, &base(), None).unwrap();
            assert_eq!(c.value, t.default_parameter());
            assert_eq!(c.residual, 0.0);
        }
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(calibrate(CalibrationTarget::AssetFlow, &base(), Some((0.2, 0.1))).is_err());
    }
}
