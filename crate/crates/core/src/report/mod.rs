//! Report rows, the reproduction table and CSV output.

mod csv_out;
mod reproduce;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use csv_out::{
    fmt_number, run_report, write_plotdata_csv, write_projection_csv, write_report_csv, write_run_outputs,
    write_summary_csv, SummaryLine,
};
pub use reproduce::reproduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Match,
    Tolerance,
    Mismatch,
    /// Published figure kept for reference; never fails a run.
    QuotedOnly,
    /// Model output with no published counterpart.
    Computed,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Match => "match",
            Status::Tolerance => "tolerance",
            Status::Mismatch => "mismatch",
            Status::QuotedOnly => "quoted-only",
            Status::Computed => "computed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A published figure, either a point printed to `decimals` places or a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reference {
    Value { value: f64, decimals: u32 },
    Range { lo: f64, hi: f64 },
}

impl Reference {
    pub fn value(value: f64, decimals: u32) -> Self {
        Reference::Value { value, decimals }
    }

    fn decimals(&self) -> u32 {
        match self {
            Reference::Value { decimals, .. } => *decimals,
            Reference::Range { lo, hi } => fmt_decimals(*lo).max(fmt_decimals(*hi)),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Reference::Value { value, decimals } => fmt_number(*value, *decimals),
            Reference::Range { lo, hi } => {
                let d = self.decimals();
                let hi = if hi.is_finite() { fmt_number(*hi, d) } else { "inf".to_string() };
                format!("[{}, {}]", fmt_number(*lo, d), hi)
            }
        }
    }
}

// Shortest decimal count (up to 4) that prints `x` exactly.
fn fmt_decimals(x: f64) -> u32 {
    if !x.is_finite() {
        return 0;
    }
    (0..4).find(|d| ((x * 10f64.powi(*d as i32)).round() / 10f64.powi(*d as i32) - x).abs() < 1e-12).unwrap_or(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Rows that only pass within their registered tolerance count as mismatches.
    Strict,
}

impl FromStr for ToleranceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "default" => Ok(ToleranceProfile::Default),
            "strict" => Ok(ToleranceProfile::Strict),
            other => Err(format!("unknown tolerance profile `{other}` (expected default or strict)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub metric: String,
    pub unit: &'static str,
    pub computed: Option<f64>,
    pub reference: Option<Reference>,
    /// Registered absolute tolerance, in `unit`.
    pub tolerance: Option<f64>,
    pub status: Status,
    pub provenance: String,
    pub note: String,
}

impl ReportRow {
    /// A reproducible row; status follows from the numbers.
    pub fn check(
        metric: &str,
        unit: &'static str,
        computed: f64,
        reference: Reference,
        tolerance: Option<f64>,
        profile: ToleranceProfile,
    ) -> Self {
        let status = classify(computed, &reference, tolerance, profile);
        Self {
            metric: metric.into(),
            unit,
            computed: Some(computed),
            reference: Some(reference),
            tolerance,
            status,
            provenance: String::new(),
            note: String::new(),
        }
    }

    pub fn quoted(metric: &str, unit: &'static str, computed: Option<f64>, reference: Reference, note: &str) -> Self {
        Self {
            metric: metric.into(),
            unit,
            computed,
            reference: Some(reference),
            tolerance: None,
            status: Status::QuotedOnly,
            provenance: String::new(),
            note: note.into(),
        }
    }

    pub fn computed(metric: &str, unit: &'static str, computed: Option<f64>) -> Self {
        Self {
            metric: metric.into(),
            unit,
            computed,
            reference: None,
            tolerance: None,
            status: Status::Computed,
            provenance: String::new(),
            note: String::new(),
        }
    }

    pub fn with_provenance(mut self, provenance: &str) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Decimal places used when printing `computed`.
    pub fn computed_decimals(&self) -> u32 {
        let unit_default = match self.unit {
            "year" | "flag" => return 0,
            "%" | "ratio" => 4,
            _ => 2,
        };
        unit_default.max(self.reference.map_or(0, |r| (r.decimals() + 2).min(6)))
    }

    pub fn is_mismatch(&self) -> bool {
        self.status == Status::Mismatch
    }
}

/// Match when the gap is within half a unit of the published figure's last
/// printed decimal (and within the tolerance, if one is registered);
/// tolerance when within the registered tolerance; mismatch otherwise.
pub fn classify(computed: f64, reference: &Reference, tolerance: Option<f64>, profile: ToleranceProfile) -> Status {
    const SLOP: f64 = 1e-9;
    let gap = match *reference {
        Reference::Value { value, decimals } => {
            let gap = (computed - value).abs();
            let half = 0.5 * 10f64.powi(-(decimals as i32));
            let window = tolerance.map_or(half, |t| half.min(t));
            if gap <= window + SLOP {
                return Status::Match;
            }
            gap
        }
        Reference::Range { lo, hi } => {
            if computed >= lo - SLOP && computed <= hi + SLOP {
                return Status::Match;
            }
            (lo - computed).max(computed - hi)
        }
    };
    match tolerance {
        Some(t) if gap.is_finite() && gap <= t + SLOP => match profile {
            ToleranceProfile::Default => Status::Tolerance,
            ToleranceProfile::Strict => Status::Mismatch,
        },
        _ => Status::Mismatch,
    }
}
