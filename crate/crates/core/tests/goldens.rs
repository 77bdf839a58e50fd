use approx::assert_relative_eq;
use dualsim_core::data::BundledData;
use dualsim_core::demand::{export_dependence, Orientation};
use dualsim_core::econ::{Money, Rate};
use dualsim_core::growth::{episode_mean, reform_tfp_integral};
use dualsim_core::monetary::{
    benchmark_state, benchmark_velocities, debt_coverage, demand_balance_solve, project_debt_money,
    supply_balance_solve, DemandUnknown, MonetaryParams, SupplyUnknown,
};
use dualsim_core::report::{reproduce, Status, ToleranceProfile};
use dualsim_core::slack::{aggregate_losses, reform_growth_dividend, Factor};

fn data() -> BundledData {
    BundledData::load_default().unwrap()
}

#[test]
fn baseline_gdp_is_the_loss_quotient() {
    let d = data();
    assert_relative_eq!(17.19 / 0.1692, 101.596, epsilon = 1e-3);
    assert_eq!(d.baseline.gdp, Money(101.6));
    assert_relative_eq!(d.baseline.debt_ratio().unwrap(), 2.72, max_relative = 1e-12);
    assert_relative_eq!(d.baseline.m2_ratio().unwrap(), 2.17, max_relative = 1e-12);
}

#[test]
fn slack_losses() {
    let d = data();
    let loss = |f: Factor| d.slack.iter().find(|r| r.factor == f).unwrap().output_loss.0;
    assert_relative_eq!(loss(Factor::Labor), 6.30, max_relative = 1e-9);
    assert_relative_eq!(loss(Factor::Capital), 4.92, max_relative = 1e-9);
    assert_relative_eq!(loss(Factor::Land), 5.34, max_relative = 1e-9);
    assert_relative_eq!(loss(Factor::FiscalMismatch), 0.6266, max_relative = 1e-9);
    let agg = aggregate_losses(&d.slack, d.baseline.gdp).unwrap();
    assert_relative_eq!(agg.total.0, 17.1866, max_relative = 1e-9);
    let dividend = reform_growth_dividend(0.1692, 15).unwrap();
    assert_relative_eq!(dividend.0, 1.1692f64.powf(1.0 / 15.0) - 1.0, max_relative = 1e-12);
    assert!((dividend.percent() - 1.0476).abs() < 1e-4);
}

#[test]
fn tfp_series_means() {
    let d = data();
    assert_eq!(d.tfp.years(), 1978..=2018);
    assert!((d.tfp.mean() - 3.43).abs() < 1e-9);
    assert!((reform_tfp_integral(&d.tfp, Rate(1.20)).unwrap().mean - 2.23).abs() < 1e-9);
    assert!((episode_mean(&d.tfp, 1991..=1994).unwrap() - 6.65).abs() <= 0.01);
}

#[test]
fn export_history_classification() {
    let d = data();
    let want = [
        (1978, Orientation::DomesticOriented),
        (2006, Orientation::ExportOriented),
        (2020, Orientation::DomesticOriented),
    ];
    for (year, orientation) in want {
        let o = d.export_observation(year).unwrap();
        assert_eq!(
            export_dependence(o.exports, o.gdp, d.demand.exports.threshold).unwrap().orientation,
            orientation,
            "{year}"
        );
    }
}

#[test]
fn benchmark_velocities_are_frozen() {
    let d = data();
    let p = MonetaryParams::default();
    let v = benchmark_velocities(&d.baseline, &p).unwrap();
    assert_relative_eq!(v.velocity_supply, 0.23041474654377878, max_relative = 1e-12);
    assert_relative_eq!(v.velocity_demand, 0.06267281105990782, max_relative = 1e-12);
    assert_relative_eq!(v.velocity_debt, 3.6764705882352944, max_relative = 1e-12);
    let s = benchmark_state(&d.baseline, &p).unwrap();
    assert_relative_eq!(debt_coverage(&s).unwrap(), 1.0, max_relative = 1e-12);
    assert_relative_eq!(supply_balance_solve(&s, SupplyUnknown::MoneySupply).unwrap(), 220.472, max_relative = 1e-12);
    assert_relative_eq!(demand_balance_solve(&s, DemandUnknown::Debt).unwrap(), 276.352, max_relative = 1e-12);
}

#[test]
fn literal_projection_endpoints() {
    let d = data();
    let p = project_debt_money(&d.baseline, Rate(0.061), Rate(0.10), Rate(0.08), 15).unwrap();
    assert_eq!(p.gdp.years(), 2020..=2035);
    assert_relative_eq!(p.final_debt_ratio(), 2.72 * (1.10f64 / 1.061).powi(15), max_relative = 1e-12);
    assert!((p.final_debt_ratio() * 100.0 - 467.44).abs() < 0.01);
    assert!((p.final_m2_ratio() * 100.0 - 283.19).abs() < 0.01);
}

#[test]
fn reproduction_covers_every_section() {
    let rows = reproduce(&data(), ToleranceProfile::Default).unwrap();
    for section in ["slack", "demand", "monetary", "scenario", "natural band", "TFP series"] {
        assert!(rows.iter().any(|r| r.provenance == section), "{section}");
    }
    assert!(rows.iter().all(|r| !r.provenance.is_empty()));
    for r in rows.iter().filter(|r| r.status == Status::QuotedOnly) {
        assert!(!r.note.is_empty(), "{} lacks a note", r.metric);
    }
}
