use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{Reference, ReportRow, ToleranceProfile};
use crate::scenario::{ProjectionResult, ScenarioError};

/// Fixed-point formatting that never prints `-0`.
pub fn fmt_number(x: f64, decimals: u32) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{:.*}", decimals as usize, x);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

const PERCENT: u32 = 4;
const TRILLION: u32 = 2;

pub fn write_report_csv<W: Write>(rows: &[ReportRow], w: W) -> io::Result<()> {
    let mut out = writer(w);
    out.write_record(["metric", "unit", "computed", "reference", "tolerance", "status", "provenance", "note"])
        .map_err(csv_err)?;
    for r in rows {
        let d = r.computed_decimals();
        let computed = r.computed.map(|c| fmt_number(c, d)).unwrap_or_default();
        let reference = r.reference.as_ref().map(Reference::render).unwrap_or_default();
        let tolerance = r.tolerance.map(|t| fmt_number(t, d)).unwrap_or_default();
        out.write_record([
            r.metric.as_str(),
            r.unit,
            &computed,
            &reference,
            &tolerance,
            r.status.label(),
            &r.provenance,
            &r.note,
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

/// Yearly levels and ratios from the baseline year. Ratios are in percent.
pub fn write_projection_csv<W: Write>(result: &ProjectionResult, w: W) -> io::Result<()> {
    let mut out = writer(w);
    out.write_record(["year", "gdp", "growth", "debt_ratio", "m2_ratio", "coverage", "flow_assets", "event"])
        .map_err(csv_err)?;
    for (year, gdp) in result.gdp.iter() {
        let pct =
            |s: &crate::econ::AnnualSeries| s.get(year).map(|v| fmt_number(v * 100.0, PERCENT)).unwrap_or_default();
        let events: Vec<String> =
            result.events.iter().filter(|e| e.year == year).map(|e| format!("{}:{}", e.kind, e.detail)).collect();
        out.write_record([
            year.to_string(),
            fmt_number(gdp, TRILLION),
            result.growth.get(year).map(|g| fmt_number(g * 100.0, PERCENT)).unwrap_or_default(),
            pct(&result.debt_ratio),
            pct(&result.m2_ratio),
            result.coverage.get(year).map(|c| fmt_number(c, PERCENT)).unwrap_or_default(),
            result.flow_assets.get(year).map(|a| fmt_number(a, TRILLION)).unwrap_or_default(),
            events.join(";"),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

/// Long-format series for external plotting.
pub fn write_plotdata_csv<W: Write>(result: &ProjectionResult, w: W) -> io::Result<()> {
    let mut out = writer(w);
    out.write_record(["series", "year", "value"]).map_err(csv_err)?;
    let mut emit = |name: &str, year: i32, value: String| out.write_record([name, &year.to_string(), &value]);
    for (y, v) in result.growth.iter() {
        emit("growth_pct", y, fmt_number(v * 100.0, PERCENT)).map_err(csv_err)?;
    }
    for (y, v) in result.gdp.iter() {
        emit("gdp", y, fmt_number(v, TRILLION)).map_err(csv_err)?;
    }
    for (y, v) in result.debt_ratio.iter() {
        emit("debt_ratio_pct", y, fmt_number(v * 100.0, PERCENT)).map_err(csv_err)?;
    }
    for (y, v) in result.m2_ratio.iter() {
        emit("m2_ratio_pct", y, fmt_number(v * 100.0, PERCENT)).map_err(csv_err)?;
    }
    for (y, v) in result.coverage.iter() {
        emit("coverage", y, fmt_number(v, PERCENT)).map_err(csv_err)?;
    }
    for (y, v) in result.flow_assets.iter() {
        emit("flow_assets", y, fmt_number(v, TRILLION)).map_err(csv_err)?;
    }
    for l in &result.demand {
        emit("consumption_contraction", l.year, fmt_number(l.consumption_contraction_annual.0, TRILLION))
            .map_err(csv_err)?;
    }
    for l in &result.demand {
        emit("excess_capacity", l.year, fmt_number(l.excess_capacity.0, TRILLION)).map_err(csv_err)?;
    }
    for l in &result.demand {
        emit("consumer_goods_excess", l.year, fmt_number(l.consumer_goods_excess.0, TRILLION)).map_err(csv_err)?;
    }
    out.flush()
}

/// Summary rows for one scenario run. Bundled scenario names get their
/// published growth figure as a reference.
pub fn run_report(result: &ProjectionResult, profile: ToleranceProfile) -> Vec<ReportRow> {
    let avg = result.horizon_average.percent();
    let (start, end) = (*result.horizon.start(), *result.horizon.end());
    let avg_name = format!("{start}-{end} average growth");
    let reference = match result.name.as_str() {
        "natural" => Some((Reference::Range { lo: 1.81, hi: 3.31 }, None)),
        "reform-low" => Some((Reference::value(5.25, 2), Some(0.05))),
        "reform-high" => Some((Reference::value(6.30, 2), Some(0.05))),
        _ => None,
    };
    let mut rows = vec![match reference {
        Some((r, tol)) => ReportRow::check(&avg_name, "%", avg, r, tol, profile),
        None => ReportRow::computed(&avg_name, "%", Some(avg)),
    }
    .with_note("geometric average of annual growth")];
    for p in &result.period_averages {
        rows.push(ReportRow::computed(&format!("{}-{} average growth", p.start, p.end), "%", Some(p.rate.percent())));
    }
    let last = |s: &crate::econ::AnnualSeries| s.values().last().map(|v| v * 100.0);
    rows.push(ReportRow::computed(&format!("debt/GDP {end}"), "%", last(&result.debt_ratio)));
    rows.push(ReportRow::computed(&format!("M2/GDP {end}"), "%", last(&result.m2_ratio)));
    rows.push(ReportRow::computed(&format!("coverage {end}"), "ratio", result.coverage.values().last().copied()));
    rows.push(
        ReportRow::computed("collapse year", "year", result.collapse_year.map(f64::from))
            .with_note(format!("capitalization {}", result.capitalization.label())),
    );
    rows.push(ReportRow::computed("reform demand release", "trillion RMB", Some(result.reform_release.total.0)));
    if let Some(l) = result.demand.last() {
        rows.push(ReportRow::computed(
            &format!("industrial output excess {end}"),
            "trillion RMB",
            Some(l.excess_capacity.0),
        ));
    }
    rows
}

/// Writes `projection.csv`, `report.csv` and `plotdata.csv` into `dir`.
pub fn write_run_outputs(
    dir: &Path,
    result: &ProjectionResult,
    profile: ToleranceProfile,
) -> io::Result<Vec<ReportRow>> {
    fs::create_dir_all(dir)?;
    let rows = run_report(result, profile);
    write_projection_csv(result, fs::File::create(dir.join("projection.csv"))?)?;
    write_report_csv(&rows, fs::File::create(dir.join("report.csv"))?)?;
    write_plotdata_csv(result, fs::File::create(dir.join("plotdata.csv"))?)?;
    Ok(rows)
}

/// One line of a sweep summary.
pub struct SummaryLine<'a> {
    pub cell: &'a str,
    pub dir: &'a str,
    pub outcome: &'a Result<ProjectionResult, ScenarioError>,
}

pub fn write_summary_csv<W: Write>(lines: &[SummaryLine<'_>], w: W) -> io::Result<()> {
    let mut out = writer(w);
    out.write_record([
        "cell",
        "dir",
        "status",
        "capitalization",
        "average_growth",
        "collapse_year",
        "final_debt_ratio",
        "final_m2_ratio",
        "error",
    ])
    .map_err(csv_err)?;
    for l in lines {
        let record = match l.outcome {
            Ok(r) => [
                l.cell.to_string(),
                l.dir.to_string(),
                "ok".into(),
                r.capitalization.label().into(),
                fmt_number(r.horizon_average.percent(), PERCENT),
                r.collapse_year.map(|y| y.to_string()).unwrap_or_else(|| "none".into()),
                r.debt_ratio.values().last().map(|v| fmt_number(v * 100.0, PERCENT)).unwrap_or_default(),
                r.m2_ratio.values().last().map(|v| fmt_number(v * 100.0, PERCENT)).unwrap_or_default(),
                String::new(),
            ],
            Err(e) => [
                l.cell.to_string(),
                l.dir.to_string(),
                "error".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()
}
