//! Counterfactual slack accounting.
//!
//! A factor is compared against a competitive-market benchmark: the gap
//! between the benchmark ("standard") rate and the observed ("distortion")
//! rate measures how much of the stock sits idle or under-used, and the idle
//! quantity priced at a unit yield (wage, rent or profit) is the output loss.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::econ::{Money, Rate, Unit};

#[derive(Debug, Error)]
pub enum SlackError {
    #[error("standard value must be positive, got {0}")]
    NonPositiveStandard(f64),
    #[error("stock must be non-negative, got {0}")]
    NegativeStock(f64),
    #[error("slack share must lie in [0, 1], got {0}")]
    ShareOutOfRange(f64),
    #[error("unit yield must be non-negative, got {0}")]
    NegativeYield(f64),
    #[error("no slack records to aggregate")]
    NoRecords,
    #[error("GDP must be positive, got {0}")]
    NonPositiveGdp(f64),
    #[error("horizon must be at least one year")]
    Horizon,
    #[error("record {row}: {msg}")]
    Record { row: usize, msg: String },
    #[error("cannot read slack records {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factor {
    Labor,
    Capital,
    Land,
    FiscalMismatch,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::Labor => "labor",
            Factor::Capital => "capital",
            Factor::Land => "land",
            Factor::FiscalMismatch => "fiscal-mismatch",
        })
    }
}

impl FromStr for Factor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "labor" => Ok(Factor::Labor),
            "capital" => Ok(Factor::Capital),
            "land" => Ok(Factor::Land),
            "fiscal-mismatch" => Ok(Factor::FiscalMismatch),
            other => Err(format!("unknown factor `{other}`")),
        }
    }
}

/// Benchmark minus observed rate. `distorted` is false when the observed
/// rate is at or above the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferenceValue {
    pub value: Rate,
    pub distorted: bool,
}

pub fn difference_value(standard: Rate, distorted: Rate) -> DifferenceValue {
    let value = Rate(standard.0 - distorted.0);
    DifferenceValue { value, distorted: value.0 > 0.0 }
}

/// Idle fraction implied by a rate gap, `1 - distorted / standard`, held to
/// `[0, 1]`.
pub fn rate_gap_share(standard: Rate, distorted: Rate) -> Result<f64, SlackError> {
    if !(standard.0 > 0.0) {
        return Err(SlackError::NonPositiveStandard(standard.0));
    }
    Ok((1.0 - distorted.0 / standard.0).clamp(0.0, 1.0))
}

/// Slack from a rate gap: the under-yielding fraction of the stock is treated
/// as idle. No distortion (observed at or above benchmark) gives zero.
pub fn slack_from_rate_gap(stock: f64, standard: Rate, distorted: Rate) -> Result<f64, SlackError> {
    if stock < 0.0 {
        return Err(SlackError::NegativeStock(stock));
    }
    let share = rate_gap_share(standard, distorted)?;
    slack_from_share(stock, share)
}

pub fn slack_from_share(stock: f64, share: f64) -> Result<f64, SlackError> {
    if !(0.0..=1.0).contains(&share) {
        return Err(SlackError::ShareOutOfRange(share));
    }
    if stock < 0.0 {
        return Err(SlackError::NegativeStock(stock));
    }
    Ok(share * stock)
}

/// Slack quantity priced at its unit yield (trillion RMB per unit of stock).
pub fn output_loss(slack_quantity: f64, unit_yield: f64) -> Money {
    Money(slack_quantity * unit_yield)
}

/// One factor's counterfactual comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackRecord {
    pub factor: Factor,
    pub stock: f64,
    pub stock_unit: Unit,
    pub standard_value: Option<Rate>,
    pub distortion_value: Option<Rate>,
    pub slack_share: f64,
    pub slack_quantity: f64,
    /// Trillion RMB per unit of `stock_unit`.
    pub unit_yield: f64,
    pub output_loss: Money,
    /// Set when the observed rate is not below the benchmark.
    pub no_distortion: bool,
    pub provenance: String,
}

impl SlackRecord {
    /// Record built from a reported slack share (direct ingestion).
    pub fn from_share(
        factor: Factor,
        stock: f64,
        stock_unit: Unit,
        share: f64,
        unit_yield: f64,
    ) -> Result<Self, SlackError> {
        if unit_yield < 0.0 {
            return Err(SlackError::NegativeYield(unit_yield));
        }
        let slack_quantity = slack_from_share(stock, share)?;
        Ok(Self {
            factor,
            stock,
            stock_unit,
            standard_value: None,
            distortion_value: None,
            slack_share: share,
            slack_quantity,
            unit_yield,
            output_loss: output_loss(slack_quantity, unit_yield),
            no_distortion: share == 0.0,
            provenance: String::new(),
        })
    }

    /// Record estimated from a rate gap. A non-positive difference yields a
    /// flagged record with zero slack.
    pub fn from_rate_gap(
        factor: Factor,
        stock: f64,
        stock_unit: Unit,
        standard: Rate,
        distorted: Rate,
        unit_yield: f64,
    ) -> Result<Self, SlackError> {
        let share = rate_gap_share(standard, distorted)?;
        let mut rec = Self::from_share(factor, stock, stock_unit, share, unit_yield)?;
        rec.standard_value = Some(standard);
        rec.distortion_value = Some(distorted);
        rec.no_distortion = !difference_value(standard, distorted).distorted;
        Ok(rec)
    }

    pub fn difference(&self) -> Option<DifferenceValue> {
        Some(difference_value(self.standard_value?, self.distortion_value?))
    }

    /// Stock implied by the slack quantity and share (`quantity / share`).
    pub fn implied_stock(&self) -> Option<f64> {
        (self.slack_share > 0.0).then(|| self.slack_quantity / self.slack_share)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossAggregate {
    pub total: Money,
    pub gdp_share: f64,
}

pub fn aggregate_losses(records: &[SlackRecord], gdp: Money) -> Result<LossAggregate, SlackError> {
    if records.is_empty() {
        return Err(SlackError::NoRecords);
    }
    if !(gdp.0 > 0.0) {
        return Err(SlackError::NonPositiveGdp(gdp.0));
    }
    let total: Money = records.iter().map(|r| r.output_loss).sum();
    Ok(LossAggregate { total, gdp_share: total.0 / gdp.0 })
}

/// Constant annual growth increment equivalent to recovering a loss share of
/// GDP over `horizon_years`: `(1 + share)^(1 / horizon) - 1`.
pub fn reform_growth_dividend(total_loss_share_of_gdp: f64, horizon_years: u32) -> Result<Rate, SlackError> {
    if horizon_years < 1 {
        return Err(SlackError::Horizon);
    }
    Ok(Rate((1.0 + total_loss_share_of_gdp).powf(1.0 / horizon_years as f64) - 1.0))
}

/// Reads slack records from CSV
/// (`factor,stock,stock_unit,standard_value,distortion_value,slack_share,unit_yield,provenance`).
///
/// When `slack_share` is blank the share comes from the rate gap, which then
/// requires both rates.
pub fn load_slack_records(path: &Path) -> Result<Vec<SlackRecord>, SlackError> {
    let file = std::fs::File::open(path)
        .map_err(|e| SlackError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_slack_records(file)
}

pub fn parse_slack_records<R: std::io::Read>(reader: R) -> Result<Vec<SlackRecord>, SlackError> {
    const HEADER: [&str; 8] = [
        "factor",
        "stock",
        "stock_unit",
        "standard_value",
        "distortion_value",
        "slack_share",
        "unit_yield",
        "provenance",
    ];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| SlackError::Record { row: 0, msg: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(SlackError::Record { row: 0, msg: format!("expected header {}", HEADER.join(",")) });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let bad = |msg: String| SlackError::Record { row, msg };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |idx: usize, name: &str| -> Result<Option<f64>, SlackError> {
            let raw = rec.get(idx).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| bad(format!("{name}: cannot parse `{raw}`")))
        };
        let factor: Factor = rec.get(0).unwrap_or("").parse().map_err(bad)?;
        let stock = num(1, "stock")?.ok_or_else(|| bad("stock is required".into()))?;
        let unit: Unit = rec.get(2).unwrap_or("").parse().map_err(|e| bad(format!("{e}")))?;
        let standard = num(3, "standard_value")?.map(Rate);
        let distorted = num(4, "distortion_value")?.map(Rate);
        let share = num(5, "slack_share")?;
        let unit_yield = num(6, "unit_yield")?.ok_or_else(|| bad("unit_yield is required".into()))?;
        let mut record = match (share, standard, distorted) {
            (Some(share), s, d) => {
                let mut r =
                    SlackRecord::from_share(factor, stock, unit, share, unit_yield).map_err(|e| bad(e.to_string()))?;
                r.standard_value = s;
                r.distortion_value = d;
                if let (Some(s), Some(d)) = (s, d) {
                    r.no_distortion = !difference_value(s, d).distorted;
                }
                r
            }
            (None, Some(s), Some(d)) => {
                SlackRecord::from_rate_gap(factor, stock, unit, s, d, unit_yield).map_err(|e| bad(e.to_string()))?
            }
            _ => return Err(bad("either slack_share or both rates are required".into())),
        };
        record.provenance = rec.get(7).unwrap_or("").to_string();
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn difference_examples() {
        let d = difference_value(Rate(0.06), Rate(0.02));
        assert_relative_eq!(d.value.0, 0.04, max_relative = 1e-12);
        assert!(d.distorted);
        assert_eq!(difference_value(Rate(0.05), Rate(0.05)).value, Rate(0.0));
        let neg = difference_value(Rate(0.02), Rate(0.06));
        assert!(neg.value.0 < 0.0 && !neg.distorted);
    }

    #[test]
    fn rate_gap_examples() {
        assert_eq!(slack_from_rate_gap(100.0, Rate(0.06), Rate(0.06)).unwrap(), 0.0);
        assert_relative_eq!(slack_from_rate_gap(100.0, Rate(0.06), Rate(0.03)).unwrap(), 50.0, max_relative = 1e-12);
        assert_eq!(slack_from_rate_gap(100.0, Rate(0.06), Rate(0.0)).unwrap(), 100.0);
        assert!(matches!(slack_from_rate_gap(100.0, Rate(0.0), Rate(0.0)), Err(SlackError::NonPositiveStandard(_))));
    }

    #[test]
    fn negative_gap_gives_flagged_zero_slack() {
        let r = SlackRecord::from_rate_gap(Factor::Capital, 100.0, Unit::TrillionRmb, Rate(0.02), Rate(0.06), 0.06)
            .unwrap();
        assert!(r.no_distortion);
        assert_eq!(r.slack_quantity, 0.0);
        assert_eq!(r.output_loss, Money(0.0));
    }

    // Moving q units from the low yield to the benchmark yield recovers
    // q * (standard - distorted); pricing the rate-gap slack at the benchmark
    // yield must recover the same amount.
    fn reallocation_oracle(stock: u32, standard: f64, distorted: f64) -> f64 {
        let mut recovered = 0.0;
        for _ in 0..stock {
            recovered += standard - distorted;
        }
        recovered
    }

    #[test]
    fn rate_gap_matches_unit_reallocation_oracle() {
        for stock in [1u32, 7, 50, 100, 333] {
            for (s, d) in [(0.06, 0.03), (0.06, 0.02), (0.05, 0.0), (0.08, 0.079)] {
                let slack = slack_from_rate_gap(stock as f64, Rate(s), Rate(d)).unwrap();
                let loss = output_loss(slack, s);
                let oracle = reallocation_oracle(stock, s, d);
                assert_relative_eq!(loss.0, oracle, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn share_examples() {
        let stock = 82.701 / 0.3383;
        assert_relative_eq!(slack_from_share(stock, 0.3383).unwrap(), 82.701, max_relative = 1e-12);
        let land = 151.89 / 0.2511;
        assert_relative_eq!(slack_from_share(land, 0.2511).unwrap(), 151.89, max_relative = 1e-12);
        assert!(matches!(slack_from_share(1.0, 1.5), Err(SlackError::ShareOutOfRange(_))));
        assert!(matches!(slack_from_share(1.0, -0.1), Err(SlackError::ShareOutOfRange(_))));
    }

    #[test]
    fn labor_loss_from_unit_wage() {
        // 6.30 trillion / 175 million persons = 0.036 trillion per million = 36,000 RMB each.
        let loss = output_loss(175.0, 6.30 / 175.0);
        assert_relative_eq!(loss.0, 6.30, max_relative = 1e-12);
        assert_eq!(output_loss(0.0, 0.036), Money(0.0));
    }

    #[test]
    fn aggregate_examples() {
        let recs: Vec<_> = [6.30, 4.92, 5.34, 0.6266]
            .iter()
            .map(|l| SlackRecord::from_share(Factor::Labor, 1.0, Unit::MillionPersons, 1.0, *l).unwrap())
            .collect();
        let agg = aggregate_losses(&recs, Money(17.19 / 0.1692)).unwrap();
        assert_relative_eq!(agg.total.0, 17.1866, max_relative = 1e-12);
        let zero = SlackRecord::from_share(Factor::Land, 1.0, Unit::MillionMu, 0.0, 1.0).unwrap();
        let agg = aggregate_losses(&[zero], Money(100.0)).unwrap();
        assert_eq!((agg.total.0, agg.gdp_share), (0.0, 0.0));
        assert!(matches!(aggregate_losses(&[], Money(1.0)), Err(SlackError::NoRecords)));
    }

    #[test]
    fn dividend_examples() {
        // Independent route: solve (1 + g)^15 = 1.1692 by bisection.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (1.0 + mid).powi(15) < 1.1692 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let g = reform_growth_dividend(0.1692, 15).unwrap();
        assert_relative_eq!(g.0, lo, max_relative = 1e-12);
        assert!((g.percent() - 1.0476).abs() < 1e-3);
        assert_eq!(reform_growth_dividend(0.0, 15).unwrap(), Rate(0.0));
        assert_relative_eq!(reform_growth_dividend(0.10, 1).unwrap().0, 0.10, max_relative = 1e-12);
        assert!(matches!(reform_growth_dividend(0.1, 0), Err(SlackError::Horizon)));
    }

    #[test]
    fn parses_records_and_requires_inputs() {
        let csv = "factor,stock,stock_unit,standard_value,distortion_value,slack_share,unit_yield,provenance\n\
                   capital,100,trillion RMB,0.06,0.03,,0.06,gap\n\
                   labor,700,million persons,,,0.25,0.036,share\n";
        let recs = parse_slack_records(csv.as_bytes()).unwrap();
        assert_relative_eq!(recs[0].slack_quantity, 50.0, max_relative = 1e-12);
        assert_relative_eq!(recs[1].slack_quantity, 175.0, max_relative = 1e-12);
        assert_eq!(recs[0].provenance, "gap");
        let bad = "factor,stock,stock_unit,standard_value,distortion_value,slack_share,unit_yield,provenance\n\
                   land,1,million Mu,,,,0.1,x\n";
        assert!(parse_slack_records(bad.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn rate_gap_equals_share_route(stock in 0.0f64..1e4, standard in 1e-4f64..0.5, frac in 0.0f64..=1.0) {
            let distorted = standard * frac;
            let a = slack_from_rate_gap(stock, Rate(standard), Rate(distorted)).unwrap();
            let b = slack_from_share(stock, 1.0 - distorted / standard).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn dual_method_equivalence(stock in 1u32..200, standard in 0.01f64..0.2, frac in 0.0f64..1.0) {
            let distorted = standard * frac;
            let slack = slack_from_rate_gap(stock as f64, Rate(standard), Rate(distorted)).unwrap();
            let direct = output_loss(slack, standard).0;
            let gap = stock as f64 * (standard - distorted);
            prop_assert!((direct - gap).abs() <= 1e-9 * gap.abs().max(1e-12));
            prop_assert!((direct - reallocation_oracle(stock, standard, distorted)).abs() <= 1e-9 * gap.abs().max(1e-12));
        }

        #[test]
        fn loss_is_scale_invariant(q in 0.0f64..1e4, y in 0.0f64..10.0, k in 1e-3f64..1e3) {
            let a = output_loss(q, y).0;
            let b = output_loss(q * k, y / k).0;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }

        #[test]
        fn aggregation_is_additive(losses in prop::collection::vec(0.0f64..10.0, 1..20), split in 0usize..20) {
            let recs: Vec<_> = losses.iter()
                .map(|l| SlackRecord::from_share(Factor::Capital, 1.0, Unit::TrillionRmb, 1.0, *l).unwrap())
                .collect();
            let cut = split.min(recs.len() - 1).max(1).min(recs.len());
            let whole = aggregate_losses(&recs, Money(100.0)).unwrap().total.0;
            let (l, r) = recs.split_at(cut);
            let parts: f64 = [l, r].iter().filter(|p| !p.is_empty())
                .map(|p| aggregate_losses(p, Money(100.0)).unwrap().total.0).sum();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1.0));
        }
    }
}
