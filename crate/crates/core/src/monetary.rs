//! Debt and money security model.
//!
//! Supply side: `a (GDP Pq) + b (A1 Pa1 + A2 Pa2) = M Vs`.
//! Demand side: `M Vd = D Pr`.
//! Coverage: supply-side value over debt service `D Pr Vf`; below 1 the debt
//! chain is not backed by output and tradable assets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{AnnualSeries, EconomyBaseline, Money, Rate, SeriesError};

pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Consecutive years below full coverage that count as a collapse.
pub const COLLAPSE_RUN: usize = 2;

#[derive(Debug, Error)]
pub enum MonetaryError {
    #[error("weights must lie in [0, 1] and sum to 1 (got a = {a}, b = {b})")]
    Weights { a: f64, b: f64 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be non-negative")]
    Negative(&'static str),
    #[error("cannot solve for {0}: its cofactor is zero")]
    ZeroCofactor(&'static str),
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error("solved {what} is negative ({value})")]
    NegativeSolution { what: &'static str, value: f64 },
    #[error("baseline lacks `{0}`")]
    MissingBaseline(&'static str),
    #[error("tradable fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Full symbol set of the three balance equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonetaryState {
    pub gdp: Money,
    /// GDP price factor `Pq` (1.0 = current prices).
    pub gdp_price_growth: f64,
    /// `A1`: land assets newly tradable this period.
    pub flow_land_assets: Money,
    pub flow_land_price: f64,
    /// `A2`: re-tradable land and house stock.
    pub stock_assets: Money,
    pub stock_asset_price: f64,
    pub money_supply: Money,
    pub velocity_supply: f64,
    pub velocity_demand: f64,
    pub debt_balance: Money,
    pub debt_interest: Rate,
    pub velocity_debt: f64,
    pub gdp_weight: f64,
    pub asset_weight: f64,
}

impl MonetaryState {
    pub fn validate(&self) -> Result<(), MonetaryError> {
        let (a, b) = (self.gdp_weight, self.asset_weight);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || (a + b - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(MonetaryError::Weights { a, b });
        }
        for (name, v) in [
            ("gdp", self.gdp.0),
            ("flow_land_assets", self.flow_land_assets.0),
            ("stock_assets", self.stock_assets.0),
            ("money_supply", self.money_supply.0),
            ("debt_balance", self.debt_balance.0),
            ("debt_interest", self.debt_interest.0),
        ] {
            if !(v >= 0.0) {
                return Err(MonetaryError::Negative(name));
            }
        }
        for (name, v) in [
            ("velocity_supply", self.velocity_supply),
            ("velocity_demand", self.velocity_demand),
            ("velocity_debt", self.velocity_debt),
        ] {
            if !(v > 0.0) {
                return Err(MonetaryError::NonPositive(name));
            }
        }
        Ok(())
    }

    /// Left side of the supply balance.
    pub fn supply_value(&self) -> f64 {
        self.gdp_weight * self.gdp.0 * self.gdp_price_growth
            + self.asset_weight
                * (self.flow_land_assets.0 * self.flow_land_price + self.stock_assets.0 * self.stock_asset_price)
    }

    pub fn debt_service(&self) -> f64 {
        self.debt_balance.0 * self.debt_interest.0 * self.velocity_debt
    }

    /// Supply total minus `Vs D Pr / Vd`; zero when the supply and demand
    /// balances imply the same money stock.
    pub fn joint_residual(&self) -> f64 {
        self.supply_value() - self.velocity_supply * self.debt_balance.0 * self.debt_interest.0 / self.velocity_demand
    }

    /// Multiplies every money-valued field by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            gdp: self.gdp * k,
            flow_land_assets: self.flow_land_assets * k,
            stock_assets: self.stock_assets * k,
            money_supply: self.money_supply * k,
            debt_balance: self.debt_balance * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupplyUnknown {
    MoneySupply,
    VelocitySupply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandUnknown {
    MoneySupply,
    VelocityDemand,
    Debt,
    Interest,
}

fn checked_solution(what: &'static str, value: f64) -> Result<f64, MonetaryError> {
    if value < 0.0 {
        Err(MonetaryError::NegativeSolution { what, value })
    } else {
        Ok(value)
    }
}

/// Value of `unknown` that makes the supply balance hold. The current value of
/// the unknown field is ignored.
pub fn supply_balance_solve(state: &MonetaryState, unknown: SupplyUnknown) -> Result<f64, MonetaryError> {
    let lhs = state.supply_value();
    let (what, cofactor) = match unknown {
        SupplyUnknown::MoneySupply => ("M", state.velocity_supply),
        SupplyUnknown::VelocitySupply => ("Vs", state.money_supply.0),
    };
    if cofactor == 0.0 {
        return Err(MonetaryError::ZeroCofactor(what));
    }
    checked_solution(what, lhs / cofactor)
}

/// Value of `unknown` that makes `M Vd = D Pr` hold.
pub fn demand_balance_solve(state: &MonetaryState, unknown: DemandUnknown) -> Result<f64, MonetaryError> {
    let m_side = state.money_supply.0 * state.velocity_demand;
    let d_side = state.debt_balance.0 * state.debt_interest.0;
    let (what, known_side, cofactor) = match unknown {
        DemandUnknown::MoneySupply => ("M", d_side, state.velocity_demand),
        DemandUnknown::VelocityDemand => ("Vd", d_side, state.money_supply.0),
        DemandUnknown::Debt => ("D", m_side, state.debt_interest.0),
        DemandUnknown::Interest => ("Pr", m_side, state.debt_balance.0),
    };
    if cofactor == 0.0 {
        if known_side != 0.0 {
            return Err(MonetaryError::Inconsistent(format!(
                "{what} has a zero cofactor but the other side of the demand balance is {known_side}"
            )));
        }
        return Err(MonetaryError::ZeroCofactor(what));
    }
    checked_solution(what, known_side / cofactor)
}

/// Supply-side value over debt service.
pub fn debt_coverage(state: &MonetaryState) -> Result<f64, MonetaryError> {
    let denom = state.debt_service();
    if !(denom > 0.0) {
        return Err(MonetaryError::NonPositive("debt service D Pr Vf"));
    }
    Ok(state.supply_value() / denom)
}

/// Velocities implied by a dated state with no tradable land.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkVelocities {
    pub velocity_supply: f64,
    pub velocity_demand: f64,
    pub velocity_debt: f64,
}

/// Inputs that are not in the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonetaryParams {
    #[serde(default = "default_weight")]
    pub gdp_weight: f64,
    #[serde(default = "default_price")]
    pub gdp_price_factor: f64,
    #[serde(default = "default_interest")]
    pub debt_interest: f64,
}

fn default_weight() -> f64 {
    0.5
}
fn default_price() -> f64 {
    1.0
}
fn default_interest() -> f64 {
    0.05
}

impl Default for MonetaryParams {
    fn default() -> Self {
        Self { gdp_weight: default_weight(), gdp_price_factor: default_price(), debt_interest: default_interest() }
    }
}

impl MonetaryParams {
    pub fn asset_weight(&self) -> f64 {
        1.0 - self.gdp_weight
    }

    pub fn validate(&self) -> Result<(), MonetaryError> {
        if !(0.0..=1.0).contains(&self.gdp_weight) {
            return Err(MonetaryError::Weights { a: self.gdp_weight, b: self.asset_weight() });
        }
        if !(self.gdp_price_factor > 0.0) {
            return Err(MonetaryError::NonPositive("gdp_price_factor"));
        }
        if !(self.debt_interest > 0.0) {
            return Err(MonetaryError::NonPositive("debt_interest"));
        }
        Ok(())
    }
}

/// Solves `Vs` from the supply balance and `Vd` from the demand balance for
/// the baseline year with `A1 = A2 = 0`, and sets `Vf = Vs / Vd` so the three
/// balances hold jointly (coverage 1).
pub fn benchmark_velocities(
    base: &EconomyBaseline,
    params: &MonetaryParams,
) -> Result<BenchmarkVelocities, MonetaryError> {
    params.validate()?;
    let m = base.m2_stock.ok_or(MonetaryError::MissingBaseline("m2_stock"))?;
    let d = base.debt_stock.ok_or(MonetaryError::MissingBaseline("debt_stock"))?;
    let mut state = baseline_state(base, params, 1.0, 1.0, 1.0)?;
    state.money_supply = m;
    state.debt_balance = d;
    let vs = supply_balance_solve(&state, SupplyUnknown::VelocitySupply)?;
    let vd = demand_balance_solve(&state, DemandUnknown::VelocityDemand)?;
    if vs <= 0.0 || vd <= 0.0 {
        return Err(MonetaryError::NonPositive("benchmark velocity"));
    }
    Ok(BenchmarkVelocities { velocity_supply: vs, velocity_demand: vd, velocity_debt: vs / vd })
}

fn baseline_state(
    base: &EconomyBaseline,
    p: &MonetaryParams,
    vs: f64,
    vd: f64,
    vf: f64,
) -> Result<MonetaryState, MonetaryError> {
    Ok(MonetaryState {
        gdp: base.gdp,
        gdp_price_growth: p.gdp_price_factor,
        flow_land_assets: Money::ZERO,
        flow_land_price: 1.0,
        stock_assets: Money::ZERO,
        stock_asset_price: 1.0,
        money_supply: base.m2_stock.ok_or(MonetaryError::MissingBaseline("m2_stock"))?,
        velocity_supply: vs,
        velocity_demand: vd,
        debt_balance: base.debt_stock.ok_or(MonetaryError::MissingBaseline("debt_stock"))?,
        debt_interest: Rate(p.debt_interest),
        velocity_debt: vf,
        gdp_weight: p.gdp_weight,
        asset_weight: p.asset_weight(),
    })
}

/// Baseline-year state at the benchmark velocities.
pub fn benchmark_state(base: &EconomyBaseline, params: &MonetaryParams) -> Result<MonetaryState, MonetaryError> {
    let v = benchmark_velocities(base, params)?;
    baseline_state(base, params, v.velocity_supply, v.velocity_demand, v.velocity_debt)
}

/// Debt, money and GDP paths from the baseline year (t = 0) onwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DebtMoneyProjection {
    pub gdp: AnnualSeries,
    pub debt: AnnualSeries,
    pub money: AnnualSeries,
    /// Debt / GDP, stepwise.
    pub debt_ratio: AnnualSeries,
    /// M2 / GDP, stepwise.
    pub m2_ratio: AnnualSeries,
    pub debt_ratio_closed: AnnualSeries,
    pub m2_ratio_closed: AnnualSeries,
}

impl DebtMoneyProjection {
    pub fn final_debt_ratio(&self) -> f64 {
        *self.debt_ratio.values().last().expect("projection has t = 0")
    }

    pub fn final_m2_ratio(&self) -> f64 {
        *self.m2_ratio.values().last().expect("projection has t = 0")
    }
}

/// `ratio0 ((1 + g_num) / (1 + g_gdp))^t`.
pub fn closed_form_ratio(ratio0: f64, g_num: Rate, g_gdp: Rate, t: u32) -> f64 {
    ratio0 * ((1.0 + g_num.0) / (1.0 + g_gdp.0)).powi(t as i32)
}

/// Constant-rate projection over `horizon` years.
pub fn project_debt_money(
    base: &EconomyBaseline,
    g_gdp: Rate,
    g_debt: Rate,
    g_money: Rate,
    horizon: u32,
) -> Result<DebtMoneyProjection, MonetaryError> {
    let path = AnnualSeries::constant((base.year + 1)..=(base.year + horizon as i32), g_gdp.0);
    match path {
        Ok(p) => project_with_gdp_path(base, &p, g_debt, g_money),
        Err(_) => project_with_gdp_path_inner(base, &[], g_debt, g_money),
    }
}

/// Projection along a GDP growth path starting the year after the baseline.
/// The closed-form series use the path's cumulative growth factor.
pub fn project_with_gdp_path(
    base: &EconomyBaseline,
    gdp_growth: &AnnualSeries,
    g_debt: Rate,
    g_money: Rate,
) -> Result<DebtMoneyProjection, MonetaryError> {
    if gdp_growth.start_year() != base.year + 1 {
        return Err(SeriesError::Mismatch(format!("GDP path must start in {}", base.year + 1)).into());
    }
    project_with_gdp_path_inner(base, gdp_growth.values(), g_debt, g_money)
}

fn project_with_gdp_path_inner(
    base: &EconomyBaseline,
    growth: &[f64],
    g_debt: Rate,
    g_money: Rate,
) -> Result<DebtMoneyProjection, MonetaryError> {
    let d0 = base.debt_stock.ok_or(MonetaryError::MissingBaseline("debt_stock"))?.0;
    let m0 = base.m2_stock.ok_or(MonetaryError::MissingBaseline("m2_stock"))?.0;
    let (mut gdp, mut debt, mut money) = (vec![base.gdp.0], vec![d0], vec![m0]);
    for g in growth {
        gdp.push(gdp.last().unwrap() * (1.0 + g));
        debt.push(debt.last().unwrap() * (1.0 + g_debt.0));
        money.push(money.last().unwrap() * (1.0 + g_money.0));
    }
    let ratio = |num: &[f64]| num.iter().zip(&gdp).map(|(n, y)| n / y).collect::<Vec<_>>();
    let (r_d0, r_m0) = (d0 / base.gdp.0, m0 / base.gdp.0);
    let mut gdp_factor = 1.0;
    let mut closed_d = vec![r_d0];
    let mut closed_m = vec![r_m0];
    for (i, g) in growth.iter().enumerate() {
        gdp_factor *= 1.0 + g;
        let t = (i + 1) as i32;
        closed_d.push(r_d0 * (1.0 + g_debt.0).powi(t) / gdp_factor);
        closed_m.push(r_m0 * (1.0 + g_money.0).powi(t) / gdp_factor);
    }
    let y0 = base.year;
    Ok(DebtMoneyProjection {
        debt_ratio: AnnualSeries::new(y0, ratio(&debt))?,
        m2_ratio: AnnualSeries::new(y0, ratio(&money))?,
        gdp: AnnualSeries::new(y0, gdp)?,
        debt: AnnualSeries::new(y0, debt)?,
        money: AnnualSeries::new(y0, money)?,
        debt_ratio_closed: AnnualSeries::new(y0, closed_d)?,
        m2_ratio_closed: AnnualSeries::new(y0, closed_m)?,
    })
}

/// Constant growth rate taking `ratio0` to `target` in `t` years against GDP
/// growth `g_gdp`.
pub fn solve_growth_for_ratio(ratio0: f64, target: f64, g_gdp: Rate, t: u32) -> f64 {
    (1.0 + g_gdp.0) * (target / ratio0).powf(1.0 / t as f64) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapitalizationLevel {
    None,
    Small,
    Half,
    Full,
}

impl CapitalizationLevel {
    pub const ALL: [CapitalizationLevel; 4] =
        [CapitalizationLevel::None, CapitalizationLevel::Small, CapitalizationLevel::Half, CapitalizationLevel::Full];

    /// Default tradable fraction; `small` is configurable elsewhere.
    pub fn default_fraction(self) -> f64 {
        match self {
            CapitalizationLevel::None => 0.0,
            CapitalizationLevel::Small => 0.15,
            CapitalizationLevel::Half => 0.5,
            CapitalizationLevel::Full => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CapitalizationLevel::None => "none",
            CapitalizationLevel::Small => "small",
            CapitalizationLevel::Half => "half",
            CapitalizationLevel::Full => "full",
        }
    }
}

impl std::str::FromStr for CapitalizationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.label() == s.trim())
            .ok_or_else(|| format!("unknown capitalization level `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalizationScenario {
    pub level: CapitalizationLevel,
    pub tradable_fraction: f64,
    pub asset_base: Money,
    pub release_rate: Rate,
    /// Newly created land released each year on top of the stock release.
    #[serde(default)]
    pub new_land_flow: Money,
}

impl CapitalizationScenario {
    pub fn new(level: CapitalizationLevel, asset_base: Money, release_rate: Rate) -> Self {
        Self {
            level,
            tradable_fraction: level.default_fraction(),
            asset_base,
            release_rate,
            new_land_flow: Money::ZERO,
        }
    }

    pub fn validate(&self) -> Result<(), MonetaryError> {
        if !(0.0..=1.0).contains(&self.tradable_fraction) {
            return Err(MonetaryError::Fraction(self.tradable_fraction));
        }
        if self.asset_base.0 < 0.0 {
            return Err(MonetaryError::Negative("asset_base"));
        }
        if !(0.0..=1.0).contains(&self.release_rate.0) {
            return Err(MonetaryError::Fraction(self.release_rate.0));
        }
        if self.new_land_flow.0 < 0.0 {
            return Err(MonetaryError::Negative("new_land_flow"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssetRelease {
    pub annual_flow: Money,
    pub anchor_total: Money,
}

/// Tradable anchor and the flow released from it each year.
pub fn asset_release(scenario: &CapitalizationScenario) -> Result<AssetRelease, MonetaryError> {
    scenario.validate()?;
    let anchor_total = scenario.asset_base * scenario.tradable_fraction;
    let annual_flow = anchor_total * scenario.release_rate.0 + scenario.new_land_flow * scenario.tradable_fraction;
    Ok(AssetRelease { annual_flow, anchor_total })
}

/// Projection parameters for the collapse scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub g_gdp: Rate,
    pub g_debt: Rate,
    pub g_money: Rate,
    pub monetary: MonetaryParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseScan {
    pub collapse_year: Option<i32>,
    /// Coverage from the baseline year.
    pub coverage: AnnualSeries,
    /// `A1` per year.
    pub flow_assets: AnnualSeries,
    /// `A2` per year.
    pub stock_assets: AnnualSeries,
    pub projection: DebtMoneyProjection,
}

/// First year of the first run of [`COLLAPSE_RUN`] consecutive coverage
/// values below 1.
pub fn first_collapse(coverage: &AnnualSeries) -> Option<i32> {
    let mut run = 0;
    for (year, c) in coverage.iter() {
        if c < 1.0 {
            run += 1;
            if run == COLLAPSE_RUN {
                return Some(year - COLLAPSE_RUN as i32 + 1);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Yearly coverage along a projection with capitalized land feeding the
/// supply side: each year releases `A1` from the anchor (until it is used
/// up) plus any new land, and everything released earlier stays tradable as
/// `A2`.
pub fn coverage_path(
    base: &EconomyBaseline,
    projection: &DebtMoneyProjection,
    scenario: &CapitalizationScenario,
    monetary: &MonetaryParams,
) -> Result<(AnnualSeries, AnnualSeries, AnnualSeries), MonetaryError> {
    let bench = benchmark_velocities(base, monetary)?;
    let release = asset_release(scenario)?;
    let mut state = benchmark_state(base, monetary)?;
    let (mut cov, mut flows, mut stocks) = (Vec::new(), Vec::new(), Vec::new());
    let anchor = release.anchor_total.0;
    let stock_release = anchor * scenario.release_rate.0;
    let new_land = scenario.new_land_flow.0 * scenario.tradable_fraction;
    let (mut released, mut released_stock) = (0.0f64, 0.0f64);
    for (i, ((gdp, debt), money)) in
        projection.gdp.values().iter().zip(projection.debt.values()).zip(projection.money.values()).enumerate()
    {
        let (a1, a2) = if i == 0 {
            (0.0, 0.0)
        } else {
            let from_stock = stock_release.min(anchor - released_stock);
            released_stock += from_stock;
            let flow = from_stock + new_land;
            let prior = released;
            released += flow;
            (flow, prior)
        };
        state.gdp = Money(*gdp);
        state.debt_balance = Money(*debt);
        state.money_supply = Money(*money);
        state.flow_land_assets = Money(a1);
        state.stock_assets = Money(a2);
        state.velocity_supply = bench.velocity_supply;
        state.velocity_demand = bench.velocity_demand;
        state.velocity_debt = bench.velocity_debt;
        cov.push(debt_coverage(&state)?);
        flows.push(a1);
        stocks.push(a2);
    }
    let y0 = projection.gdp.start_year();
    Ok((AnnualSeries::new(y0, cov)?, AnnualSeries::new(y0, flows)?, AnnualSeries::new(y0, stocks)?))
}

/// Projects debt and money, feeds the capitalization release into the supply
/// side, and reports the first collapse year within the horizon.
pub fn collapse_scan(
    base: &EconomyBaseline,
    scenario: &CapitalizationScenario,
    params: &ProjectionParams,
    horizon: u32,
) -> Result<CollapseScan, MonetaryError> {
    let projection = project_debt_money(base, params.g_gdp, params.g_debt, params.g_money, horizon)?;
    let (coverage, flow_assets, stock_assets) = coverage_path(base, &projection, scenario, &params.monetary)?;
    Ok(CollapseScan { collapse_year: first_collapse(&coverage), coverage, flow_assets, stock_assets, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base2020() -> EconomyBaseline {
        let mut b = EconomyBaseline::new(2020, Money(101.6));
        b.debt_stock = Some(Money(276.352));
        b.m2_stock = Some(Money(220.472));
        b
    }

    fn state() -> MonetaryState {
        MonetaryState {
            gdp: Money(100.0),
            gdp_price_growth: 1.0,
            flow_land_assets: Money(10.0),
            flow_land_price: 1.0,
            stock_assets: Money(40.0),
            stock_asset_price: 1.2,
            money_supply: Money(200.0),
            velocity_supply: 0.5,
            velocity_demand: 0.06,
            debt_balance: Money(250.0),
            debt_interest: Rate(0.05),
            velocity_debt: 0.9,
            gdp_weight: 0.6,
            asset_weight: 0.4,
        }
    }

    #[test]
    fn supply_solve_assets_absent() {
        let mut s = state();
        s.gdp_weight = 1.0;
        s.asset_weight = 0.0;
        s.velocity_supply = 2.0;
        assert_eq!(supply_balance_solve(&s, SupplyUnknown::MoneySupply).unwrap(), 50.0);
        let mut doubled = s.scaled(2.0);
        doubled.velocity_supply = 2.0;
        assert_eq!(supply_balance_solve(&doubled, SupplyUnknown::MoneySupply).unwrap(), 100.0);
        s.money_supply = Money(0.0);
        assert!(matches!(supply_balance_solve(&s, SupplyUnknown::VelocitySupply), Err(MonetaryError::ZeroCofactor(_))));
    }

    #[test]
    fn demand_solve_examples() {
        let mut s = state();
        s.money_supply = Money(100.0);
        s.velocity_demand = 1.0;
        s.debt_interest = Rate(0.05);
        assert_relative_eq!(demand_balance_solve(&s, DemandUnknown::Debt).unwrap(), 2000.0, max_relative = 1e-12);
        s.debt_balance = Money(0.0);
        assert!(matches!(demand_balance_solve(&s, DemandUnknown::Interest), Err(MonetaryError::Inconsistent(_))));
    }

    #[test]
    fn coverage_examples() {
        let mut s = state();
        s.velocity_debt = s.supply_value() / (s.debt_balance.0 * s.debt_interest.0);
        assert_relative_eq!(debt_coverage(&s).unwrap(), 1.0, max_relative = 1e-12);
        let mut only_assets = state();
        only_assets.gdp_weight = 0.0;
        only_assets.asset_weight = 1.0;
        let full = debt_coverage(&only_assets).unwrap();
        let mut halved = only_assets;
        halved.flow_land_assets = halved.flow_land_assets * 0.5;
        halved.stock_assets = halved.stock_assets * 0.5;
        assert_relative_eq!(debt_coverage(&halved).unwrap(), full / 2.0, max_relative = 1e-12);
        let mut zero = state();
        zero.debt_balance = Money::ZERO;
        assert!(debt_coverage(&zero).is_err());
    }

    #[test]
    fn benchmark_state_is_jointly_consistent() {
        let p = MonetaryParams::default();
        let v = benchmark_velocities(&base2020(), &p).unwrap();
        assert_relative_eq!(v.velocity_supply, 0.5 * 101.6 / 220.472, max_relative = 1e-12);
        assert_relative_eq!(v.velocity_demand, 276.352 * 0.05 / 220.472, max_relative = 1e-12);
        let s = benchmark_state(&base2020(), &p).unwrap();
        s.validate().unwrap();
        assert!(s.joint_residual().abs() < 1e-9);
        assert_relative_eq!(debt_coverage(&s).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn equal_growth_keeps_ratio() {
        let p = project_debt_money(&base2020(), Rate(0.061), Rate(0.061), Rate(0.061), 15).unwrap();
        for r in p.debt_ratio.values() {
            assert_relative_eq!(*r, 2.72, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_horizon_is_the_baseline() {
        let p = project_debt_money(&base2020(), Rate(0.061), Rate(0.1), Rate(0.08), 0).unwrap();
        assert_eq!(p.debt_ratio.len(), 1);
        assert_relative_eq!(p.final_debt_ratio(), 2.72, max_relative = 1e-12);
    }

    #[test]
    fn release_levels() {
        let none =
            asset_release(&CapitalizationScenario::new(CapitalizationLevel::None, Money(800.0), Rate(0.067))).unwrap();
        assert_eq!((none.annual_flow, none.anchor_total), (Money::ZERO, Money::ZERO));
        let half =
            asset_release(&CapitalizationScenario::new(CapitalizationLevel::Half, Money(800.0), Rate(0.067))).unwrap();
        assert_eq!(half.anchor_total, Money(400.0));
        let fracs: Vec<f64> = CapitalizationLevel::ALL.iter().map(|l| l.default_fraction()).collect();
        assert!(fracs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn collapse_needs_two_years() {
        let s = AnnualSeries::new(2020, vec![1.0, 0.9, 1.1, 0.9, 0.8, 0.7]).unwrap();
        assert_eq!(first_collapse(&s), Some(2023));
        let s = AnnualSeries::new(2020, vec![1.0, 0.9, 1.1]).unwrap();
        assert_eq!(first_collapse(&s), None);
    }

    #[test]
    fn no_debt_growth_full_capitalization_never_collapses() {
        let params = ProjectionParams {
            g_gdp: Rate(0.05),
            g_debt: Rate(0.0),
            g_money: Rate(0.05),
            monetary: MonetaryParams::default(),
        };
        let sc = CapitalizationScenario::new(CapitalizationLevel::Full, Money(795.0), Rate(0.067));
        let scan = collapse_scan(&base2020(), &sc, &params, 40).unwrap();
        assert_eq!(scan.collapse_year, None);
        assert!(scan.coverage.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    proptest! {
        #[test]
        fn closed_form_matches_stepwise(g in -0.05f64..0.20, d in -0.05f64..0.20, m in -0.05f64..0.20, h in 0u32..60) {
            let p = project_debt_money(&base2020(), Rate(g), Rate(d), Rate(m), h).unwrap();
            for t in 0..=h as usize {
                let closed_d = closed_form_ratio(2.72, Rate(d), Rate(g), t as u32);
                let closed_m = closed_form_ratio(2.17, Rate(m), Rate(g), t as u32);
                prop_assert!((p.debt_ratio.values()[t] / closed_d - 1.0).abs() < 1e-9);
                prop_assert!((p.m2_ratio.values()[t] / closed_m - 1.0).abs() < 1e-9);
                prop_assert!((p.debt_ratio_closed.values()[t] / closed_d - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn coverage_is_homogeneous(k in 1e-3f64..1e3) {
            let s = state();
            let a = debt_coverage(&s).unwrap();
            let b = debt_coverage(&s.scaled(k)).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn coverage_monotonicity(bump in 0.0f64..50.0) {
            let s = state();
            let c0 = debt_coverage(&s).unwrap();
            let mut up = s; up.flow_land_assets = up.flow_land_assets + Money(bump);
            prop_assert!(debt_coverage(&up).unwrap() >= c0);
            let mut up = s; up.stock_assets = up.stock_assets + Money(bump);
            prop_assert!(debt_coverage(&up).unwrap() >= c0);
            let mut up = s; up.gdp = up.gdp + Money(bump);
            prop_assert!(debt_coverage(&up).unwrap() >= c0);
            let mut down = s; down.debt_balance = down.debt_balance + Money(bump);
            prop_assert!(debt_coverage(&down).unwrap() <= c0);
            let mut down = s; down.debt_interest = Rate(down.debt_interest.0 + bump / 1000.0);
            prop_assert!(debt_coverage(&down).unwrap() <= c0);
            let mut down = s; down.velocity_debt += bump;
            prop_assert!(debt_coverage(&down).unwrap() <= c0);
        }

        #[test]
        fn collapse_years_weakly_increase(g in 0.0f64..0.10, d in 0.0f64..0.30, r in 0.01f64..0.15) {
            let params = ProjectionParams { g_gdp: Rate(g), g_debt: Rate(d), g_money: Rate(0.08), monetary: MonetaryParams::default() };
            let years: Vec<i32> = CapitalizationLevel::ALL
                .iter()
                .map(|l| {
                    let sc = CapitalizationScenario::new(*l, Money(795.0), Rate(r));
                    collapse_scan(&base2020(), &sc, &params, 30).unwrap().collapse_year.unwrap_or(i32::MAX)
                })
                .collect();
            prop_assert!(years.windows(2).all(|w| w[0] <= w[1]), "{:?}", years);
        }
    }
}
