//! The reproduction table: one row per published figure the model covers.

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use super::{Reference, ReportRow, ToleranceProfile};
use crate::data::BundledData;
use crate::demand::{
    cohort_contraction, consumption_contraction, export_dependence, export_shortfall, land_finance_transfer,
    reform_demand_release, DemandComponents, Orientation,
};
use crate::econ::{convert_units, Money, Rate, Unit};
use crate::growth::{
    classical_growth, decompose_tfp, episode_mean, natural_path, reform_tfp_integral, ClassicalGrowthInputs,
    Elasticities,
};
use crate::monetary::{
    asset_release, collapse_scan, project_debt_money, CapitalizationLevel, CapitalizationScenario, MonetaryParams,
    ProjectionParams,
};
use crate::scenario::{
    calibrate, preset, run_scenario, CalibrationTarget, ScenarioError, CAPITALIZATION_TFP, FACTOR_TARGET_HIGH,
    FACTOR_TARGET_LOW, INNOVATION_TFP_HIGH, INNOVATION_TFP_LOW, LITERAL_G_DEBT, LITERAL_G_GDP, LITERAL_G_MONEY,
    LITERAL_HORIZON, LITERAL_RELEASE_RATE,
};
use crate::slack::{
    aggregate_losses, difference_value, rate_gap_share, reform_growth_dividend, slack_from_share, Factor,
};

const PCT: &str = "%";
const TRN: &str = "trillion RMB";
const BLN: &str = "billion RMB";

// Tags rows added since `from` that carry no provenance yet.
fn tag(rows: &mut [ReportRow], from: usize, section: &str) {
    for r in &mut rows[from..] {
        if r.provenance.is_empty() {
            r.provenance = section.into();
        }
    }
}

fn data_err(what: &str) -> ScenarioError {
    ScenarioError::Data(format!("bundled data lacks {what}"))
}

/// Evaluates every registered figure against the bundled data. Row order is
/// fixed.
pub fn reproduce(data: &BundledData, profile: ToleranceProfile) -> Result<Vec<ReportRow>, ScenarioError> {
    let mut rows = Vec::new();
    let p = profile;
    let v = Reference::value;
    let base = &data.baseline;

    // Baseline.
    let fees = base.fiscal_land_transfer_fees.ok_or_else(|| data_err("land transfer fees"))?;
    rows.push(
        ReportRow::check("land transfer fees 2020", TRN, fees.0, v(8.4142, 4), None, p).with_provenance("demand"),
    );
    let converted = convert_units(Decimal::new(84142, 1), Unit::BillionRmb, Unit::TrillionRmb)
        .map_err(|e| ScenarioError::Data(e.to_string()))?
        .to_f64()
        .unwrap_or(f64::NAN);
    rows.push(
        ReportRow::check("8414.2 billion RMB in trillion RMB", TRN, converted, v(8.4142, 4), None, p)
            .with_provenance("demand"),
    );

    // Growth.
    let nat = &data.natural;
    let horizon = nat.horizon();
    let centre = natural_path(
        horizon.clone(),
        &nat.labor,
        &nat.capital_central(),
        nat.tech_growth,
        nat.labor_elasticity,
        nat.capital_elasticity,
    )?;
    let band = nat.band()?;
    let mid = band.midpoint().percent();
    let (lo_rate, hi_rate) =
        centre.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(*g), hi.max(*g)));
    // The binding rate is the one farthest from the band centre.
    let binding = if (mid - lo_rate * 100.0).abs() >= (hi_rate * 100.0 - mid).abs() { lo_rate } else { hi_rate };
    rows.push(
        ReportRow::check(
            "natural growth annual rates 2021-2035 (farthest from centre)",
            PCT,
            binding * 100.0,
            Reference::Range { lo: 1.81, hi: 3.31 },
            None,
            p,
        )
        .with_provenance("natural band")
        .with_note(format!("centre path annual rates span {:.4}..{:.4}", lo_rate * 100.0, hi_rate * 100.0)),
    );
    for (name, factor_term, innovation, want) in [
        ("growth, low-target component bundle", FACTOR_TARGET_LOW, INNOVATION_TFP_LOW, 5.25),
        ("growth, high-target component bundle", FACTOR_TARGET_HIGH, INNOVATION_TFP_HIGH, 6.30),
    ] {
        let e = Elasticities::default();
        let inputs = ClassicalGrowthInputs {
            tfp_growth: Rate(CAPITALIZATION_TFP + innovation),
            labor_original_growth: Rate(factor_term / e.labor),
            elasticities: e,
            ..Default::default()
        };
        let y = classical_growth(&inputs)?.percent();
        rows.push(ReportRow::check(name, PCT, y, v(want, 2), None, p).with_provenance("reform growth components"));
    }
    for (name, total, baseline, want) in [
        ("reform TFP, 3.10 total over 1.00 baseline", 3.10, 1.00, 2.10),
        ("reform TFP, 3.43 total over 1.20 baseline", 3.43, 1.20, 2.23),
    ] {
        let d = decompose_tfp(Rate(total), Rate(baseline));
        rows.push(
            ReportRow::check(name, PCT, d.reform_tfp_growth.0, v(want, 2), None, p)
                .with_provenance("TFP decomposition"),
        );
    }
    let area = reform_tfp_integral(&data.tfp, Rate(1.20))?;
    rows.push(
        ReportRow::check("reform TFP mean 1978-2018 over 1.20 baseline", PCT, area.mean, v(2.23, 2), None, p)
            .with_provenance("TFP series"),
    );
    for (years, want) in [(1981..=1985, 6.53), (1991..=1994, 6.65), (2001..=2005, 3.30)] {
        let name = format!("TFP episode mean {}-{}", years.start(), years.end());
        let m = episode_mean(&data.tfp, years)?;
        rows.push(ReportRow::check(&name, PCT, m, v(want, 2), Some(0.01), p).with_provenance("TFP series"));
    }
    rows.push(
        ReportRow::check("natural band low", PCT, band.low.percent(), v(1.81, 2), None, p)
            .with_provenance("natural band"),
    );
    rows.push(
        ReportRow::check("natural band high", PCT, band.high.percent(), v(3.31, 2), None, p)
            .with_provenance("natural band"),
    );
    rows.push(
        ReportRow::check("natural band midpoint", PCT, mid, v(2.5, 1), Some(0.1), p).with_provenance("natural band"),
    );

    // Slack.
    let record = |f: Factor| data.slack.iter().find(|r| r.factor == f).ok_or_else(|| data_err(&format!("{f} slack")));
    let capital = record(Factor::Capital)?;
    let (standard, distorted) = capital
        .standard_value
        .zip(capital.distortion_value)
        .ok_or_else(|| data_err("capital standard and distortion values"))?;
    rows.push(
        ReportRow::check(
            "return gap, private 6% vs state 2%",
            PCT,
            difference_value(standard, distorted).value.percent(),
            v(4.0, 0),
            None,
            p,
        )
        .with_provenance("slack"),
    );
    let quantity = |f: Factor| -> Result<f64, ScenarioError> {
        let r = record(f)?;
        Ok(slack_from_share(r.stock, r.slack_share)?)
    };
    rows.push(
        ReportRow::check("state capital slack", TRN, quantity(Factor::Capital)?, v(82.701, 3), None, p)
            .with_provenance("slack")
            .with_note(format!("implied state stock {:.2}", capital.stock)),
    );
    rows.push(
        ReportRow::check("construction-land slack", "million Mu", quantity(Factor::Land)?, v(151.89, 2), None, p)
            .with_provenance("slack"),
    );
    rows.push(
        ReportRow::check("idle labor", "million persons", quantity(Factor::Labor)?, v(175.0, 0), None, p)
            .with_provenance("slack"),
    );
    rows.push(
        ReportRow::check("labor output loss", TRN, record(Factor::Labor)?.output_loss.0, v(6.30, 2), None, p)
            .with_provenance("slack"),
    );
    rows.push(
        ReportRow::check(
            "land and buildings output loss",
            TRN,
            record(Factor::Land)?.output_loss.0,
            v(5.34, 2),
            None,
            p,
        )
        .with_provenance("slack"),
    );
    let agg = aggregate_losses(&data.slack, base.gdp)?;
    rows.push(
        ReportRow::check("total slack loss 2020", TRN, agg.total.0, v(17.19, 2), Some(0.01), p)
            .with_provenance("slack")
            .with_note("sum of labor, capital, land and fiscal-mismatch losses"),
    );
    rows.push(
        ReportRow::check("slack loss share of GDP 2020", PCT, agg.gdp_share * 100.0, v(16.92, 2), Some(0.02), p)
            .with_provenance("slack"),
    );
    let dividend = reform_growth_dividend(0.1692, 15)?;
    rows.push(
        ReportRow::check("reform growth dividend over 15 years", PCT, dividend.percent(), v(1.0, 0), Some(0.15), p)
            .with_provenance("slack"),
    );
    rows.push(ReportRow::quoted(
        "state capital idle share by 6% vs 2% return gap",
        PCT,
        Some(rate_gap_share(standard, distorted)? * 100.0),
        v(33.83, 2),
        "the return gap implies two thirds idle; the published share is 33.83% and is the one used",
    ));
    rows.push(ReportRow::quoted(
        "idle labor addends 160 + 150",
        "million persons",
        Some(310.0),
        v(175.0, 0),
        "published addends do not sum to the published total; the total is used",
    ));

    tag(&mut rows, 0, "slack");

    // Demand.
    let demand_from = rows.len();
    let cal = &data.demand;
    let years = cal.calibration_years();
    let ledger = cal.cohort_ledger(data.fertility.clone())?;
    let delta = cohort_contraction(&ledger, years.clone())?;
    let pcc = data.per_capita_consumption.window(years.clone())?;
    let (annual, cumulative) = consumption_contraction(&delta, &pcc)?;
    let (y0, y1) = (*years.start(), *years.end());
    let shrink0 = -delta.get(y0)?;
    let shrink_total = -delta.sum();
    rows.push(
        ReportRow::check("working-population contraction 2012", "million persons", shrink0, v(3.45, 2), None, p)
            .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check(
            "working-population contraction 2012-2020 cumulative",
            "million persons",
            shrink_total,
            v(39.83, 2),
            None,
            p,
        )
        .with_provenance("demand"),
    );
    let annual0 = annual.get(y0)? * 1000.0;
    let cum1 = cumulative.get(y1)? * 1000.0;
    rows.push(
        ReportRow::check("household consumption contraction 2012", BLN, annual0, v(766.34, 2), Some(766.34e-3), p)
            .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check(
            "household consumption contraction 2012-2020 cumulative",
            BLN,
            cum1,
            v(12774.41, 2),
            Some(12.77441),
            p,
        )
        .with_provenance("demand"),
    );
    let threshold = cal.exports.threshold;
    for (year, want) in [(1978, 4.56), (2006, 35.36), (2020, 17.65)] {
        let obs = data.export_observation(year).ok_or_else(|| data_err(&format!("{year} exports")))?;
        let dep = export_dependence(obs.exports, obs.gdp, threshold)?;
        let label = match dep.orientation {
            Orientation::ExportOriented => "export-oriented",
            Orientation::DomesticOriented => "domestic-oriented",
        };
        rows.push(
            ReportRow::check(&format!("export share of GDP {year}"), PCT, dep.share * 100.0, v(want, 2), None, p)
                .with_provenance("demand")
                .with_note(label),
        );
    }
    let transfer = land_finance_transfer(fees, cal.land_finance.farmer_share)?;
    rows.push(
        ReportRow::check("land-finance transfer from rural residents", TRN, transfer.0, v(4.2071, 4), None, p)
            .with_provenance("demand"),
    );
    let levers = cal.release_levers()?;
    let release = reform_demand_release(&levers)?;
    rows.push(
        ReportRow::check(
            "housing release, price-to-income 9.30 to 6.00",
            TRN,
            release.housing_release.0,
            Reference::Range { lo: 3.0, hi: 4.0 },
            None,
            p,
        )
        .with_provenance("demand"),
    );
    let exports20 = base.exports.ok_or_else(|| data_err("exports"))?;
    let components = DemandComponents {
        cohort_contraction: Money(annual.get(y1)?),
        export_shortfall: export_shortfall(exports20, base.gdp, threshold),
        land_finance_transfer: transfer,
        housing_crowd_out: Money(cal.housing.observed_squeeze),
    };
    let ledger20 = crate::demand::excess_capacity_ledger(
        y1,
        &components,
        Money(cumulative.get(y1)?),
        exports20.0 / base.gdp.0,
        &cal.excess,
    );
    rows.push(
        ReportRow::check("industrial output excess 2020", TRN, ledger20.excess_capacity.0, v(13.15, 2), None, p)
            .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check("consumer goods excess 2020", TRN, ledger20.consumer_goods_excess.0, v(6.58, 2), None, p)
            .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check("land-based business income", TRN, release.business_income.0, v(5.0, 0), None, p)
            .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check(
            "rural property income, present value after tax",
            TRN,
            release.property_income.0,
            v(4.5, 1),
            None,
            p,
        )
        .with_provenance("demand"),
    );
    rows.push(
        ReportRow::check("reform demand release", TRN, release.total.0, v(10.0, 0), Some(1.5), p)
            .with_provenance("demand")
            .with_note("rural consumption out of new income plus housing release"),
    );
    rows.push(ReportRow::quoted(
        "consumption contraction share of GDP 2012",
        PCT,
        None,
        v(0.15, 2),
        "no 2012 GDP is bundled; 766.34 billion is 0.15% only of a GDP near 511 trillion",
    ));
    rows.push(ReportRow::quoted(
        "consumption contraction share of GDP 2020",
        PCT,
        Some(cum1 / 1000.0 / base.gdp.0 * 100.0),
        v(1.25, 2),
        "cumulative contraction over 2020 GDP; the published share does not follow from the published levels",
    ));
    rows.push(ReportRow::quoted(
        "consumption capacity taken from rural residents",
        BLN,
        None,
        v(33675.7, 1),
        &format!(
            "not derivable from the annual transfer; it equals {:.2} years of it",
            33675.7 / (transfer.0 * 1000.0)
        ),
    ));
    rows.push(ReportRow::quoted(
        "rural consumption demand from reform",
        TRN,
        Some(release.rural_consumption.0),
        v(6.65, 2),
        &format!(
            "published income addends sum to {:.2}; the figure equals their consumption at a {:.2} share",
            (release.property_income + release.business_income).0,
            levers.rural_consumption_share
        ),
    ));

    tag(&mut rows, demand_from, "demand");

    // Monetary.
    let monetary_from = rows.len();
    let literal =
        project_debt_money(base, Rate(LITERAL_G_GDP), Rate(LITERAL_G_DEBT), Rate(LITERAL_G_MONEY), LITERAL_HORIZON)?;
    rows.push(
        ReportRow::check(
            "debt/GDP 2035 (literal params)",
            PCT,
            literal.final_debt_ratio() * 100.0,
            v(465.0, 2),
            Some(5.0),
            p,
        )
        .with_provenance("monetary")
        .with_note("GDP 6.10%, debt 10.00% per year from 272.00%"),
    );
    rows.push(ReportRow::quoted(
        "M2/GDP 2035 (literal params)",
        PCT,
        Some(literal.final_m2_ratio() * 100.0),
        v(327.0, 2),
        "8.00% money growth from 217.00% reaches about 283%; see the calibrated row",
    ));
    let m2 = calibrate(CalibrationTarget::M2Ratio2035, base, None)?;
    rows.push(
        ReportRow::check("M2/GDP 2035 (calibrated money growth)", PCT, m2.computed * 100.0, v(327.0, 2), Some(1.0), p)
            .with_provenance("monetary")
            .with_note(format!("money growth {:.4}%", m2.value * 100.0)),
    );
    rows.push(
        ReportRow::computed("money growth reproducing 327% M2/GDP", PCT, Some(m2.value * 100.0))
            .with_provenance("monetary")
            .with_note("analytic root of the 15-year ratio equation; the published rate is 8.00%"),
    );
    let debt_cal = calibrate(CalibrationTarget::DebtRatio2035, base, None)?;
    rows.push(
        ReportRow::computed("debt growth reproducing 465% debt/GDP", PCT, Some(debt_cal.value * 100.0))
            .with_provenance("monetary"),
    );
    let span = LITERAL_HORIZON as f64;
    for (name, series, want) in [
        ("average annual GDP increment", &literal.gdp, 6.80),
        ("average annual debt increment", &literal.debt, 57.60),
        ("average annual M2 increment", &literal.money, 31.70),
    ] {
        let first = series.values()[0];
        let last = *series.values().last().expect("projection is non-empty");
        rows.push(ReportRow::quoted(
            name,
            TRN,
            Some((last - first) / span),
            v(want, 2),
            "not reproducible from the published rates and 2020 levels; shown side by side",
        ));
    }
    let stock = base.tradable_asset_stock.ok_or_else(|| data_err("tradable asset stock"))?;
    rows.push(
        ReportRow::check("capitalizable asset anchor 500 + 150 + 145", TRN, stock.0, v(800.0, 0), Some(5.0), p)
            .with_provenance("monetary")
            .with_note("composition sums to 795; published total rounds to 800"),
    );
    let full =
        asset_release(&CapitalizationScenario::new(CapitalizationLevel::Full, stock, Rate(LITERAL_RELEASE_RATE)))?;
    rows.push(
        ReportRow::check(
            "annual tradable asset flow, full capitalization",
            TRN,
            full.annual_flow.0,
            v(53.30, 2),
            Some(0.5),
            p,
        )
        .with_provenance("monetary")
        .with_note("6.70% of the 795 anchor"),
    );
    let rounded = asset_release(&CapitalizationScenario::new(
        CapitalizationLevel::Full,
        Money(800.0),
        Rate(LITERAL_RELEASE_RATE),
    ))?;
    rows.push(
        ReportRow::check(
            "annual tradable asset flow on the rounded 800 anchor",
            TRN,
            rounded.annual_flow.0,
            v(53.30, 2),
            Some(0.5),
            p,
        )
        .with_provenance("monetary"),
    );
    let params = ProjectionParams {
        g_gdp: Rate(LITERAL_G_GDP),
        g_debt: Rate(LITERAL_G_DEBT),
        g_money: Rate(LITERAL_G_MONEY),
        monetary: MonetaryParams::default(),
    };
    let mut collapse = Vec::new();
    for level in CapitalizationLevel::ALL {
        let sc = CapitalizationScenario::new(level, stock, Rate(LITERAL_RELEASE_RATE));
        collapse.push((level, collapse_scan(base, &sc, &params, LITERAL_HORIZON)?.collapse_year));
    }
    let ordered = collapse.windows(2).all(|w| w[0].1.unwrap_or(i32::MAX) <= w[1].1.unwrap_or(i32::MAX));
    let detail: Vec<String> = collapse
        .iter()
        .map(|(l, y)| format!("{} {}", l.label(), y.map_or("never".to_string(), |y| y.to_string())))
        .collect();
    rows.push(
        ReportRow::check(
            "collapse years weakly later with more capitalization",
            "flag",
            if ordered { 1.0 } else { 0.0 },
            v(1.0, 0),
            None,
            p,
        )
        .with_provenance("monetary")
        .with_note(detail.join("; ")),
    );

    tag(&mut rows, monetary_from, "monetary");

    // Scenarios.
    let scenario_from = rows.len();
    let run = |name: &str| -> Result<_, ScenarioError> {
        let cfg = preset(name).ok_or_else(|| ScenarioError::Data(format!("no bundled scenario `{name}`")))?;
        run_scenario(&cfg, data)
    };
    let natural = run("natural")?;
    rows.push(
        ReportRow::check(
            "natural scenario 2021-2035 average growth",
            PCT,
            natural.horizon_average.percent(),
            Reference::Range { lo: 1.81, hi: 3.31 },
            None,
            p,
        )
        .with_provenance("scenario"),
    );
    let low = run("reform-low")?;
    let high = run("reform-high")?;
    for (r, want) in [(&low, 5.25), (&high, 6.30)] {
        rows.push(
            ReportRow::check(
                &format!("{} scenario 2021-2035 average growth", r.name),
                PCT,
                r.horizon_average.percent(),
                v(want, 2),
                Some(0.05),
                p,
            )
            .with_provenance("scenario")
            .with_note("geometric average of annual growth"),
        );
    }
    for (period, want) in low.period_averages.iter().zip([6.0, 5.0, 4.0]) {
        rows.push(
            ReportRow::check(
                &format!("reform-low average growth {}-{}", period.start, period.end),
                PCT,
                period.rate.percent(),
                v(want, 0),
                Some(0.5),
                p,
            )
            .with_provenance("scenario"),
        );
    }
    for (period, want) in high.period_averages.iter().zip([6.0, 5.0, 4.0]) {
        rows.push(ReportRow::quoted(
            &format!("reform-high average growth {}-{}", period.start, period.end),
            PCT,
            Some(period.rate.percent()),
            v(want, 0),
            "staged 6/5/4 cannot coexist with a 6.30% fifteen-year mean; checked on reform-low instead",
        ));
    }
    tag(&mut rows, scenario_from, "scenario");
    Ok(rows)
}
