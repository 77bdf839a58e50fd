//! Deterministic simulation engine for growth accounting under a dual
//! (planned + market) allocation system.
//!
//! The crate is organised around the accounting chain it reproduces:
//!
//! - [`econ`]: canonical units, annual series and the 2020 baseline.
//! - [`growth`]: two-factor and land-inclusive growth accounting, TFP split.
//! - [`slack`]: counterfactual idle-factor (slack) quantities and output losses.
//! - [`demand`]: cohort-lagged consumption contraction, export dependence,
//!   land-finance transfer, housing crowd-out and the excess-capacity ledger.
//! - [`monetary`]: supply/demand money balances, debt coverage, ratio
//!   projections, land capitalization and collapse detection.
//! - [`scenario`]: lever-driven 2021+ projections, sweeps and calibration.
//! - [`report`]: golden-figure reproduction table and CSV emission.
//!
//! Money is always trillion RMB, population million persons, land million Mu,
//! and rates annual fractions (`0.061` is 6.1%/yr).

pub mod data;
pub mod demand;
pub mod econ;
pub mod growth;
pub mod monetary;
pub mod report;
pub mod scenario;
pub mod slack;

pub use econ::{AnnualSeries, EconomyBaseline, LandArea, Money, Population, Rate, Unit};
