use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use dualsim_core::data::{data_dir, BundledData};
use dualsim_core::report::{
    reproduce, write_report_csv, write_run_outputs, write_summary_csv, ReportRow, Status, SummaryLine, ToleranceProfile,
};
use dualsim_core::scenario::{
    calibrate, registered_targets, run_scenario, sweep, CalibrationTarget, LeverGrid, ScenarioConfig, ScenarioError,
};

/// Scenario engine for growth, slack, demand and debt/money projections.
#[derive(Parser)]
#[command(name = "dualsim", version)]
struct Cli {
    /// How tolerance rows count: `default` or `strict`.
    #[arg(long, global = true, default_value = "default")]
    tolerance_profile: ToleranceProfile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write projection.csv, report.csv and plotdata.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every cell of a lever grid, one directory per cell plus summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute every registered published figure and compare.
    Reproduce {
        /// Also write report.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a free parameter to a published figure.
    Calibrate {
        /// Target name; all registered targets when omitted.
        #[arg(long)]
        target: Option<CalibrationTarget>,
        /// Search interval as `lo,hi`.
        #[arg(long, value_parser = parse_bounds)]
        bounds: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", v.trim()));
    Ok((parse(lo)?, parse(hi)?))
}

enum Failure {
    /// Bad or missing configuration.
    Config(String),
    /// Bundled data missing or inconsistent.
    Data(String),
    /// Reproduction found mismatching rows.
    Mismatch(usize),
    Output(anyhow::Error),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        if e.is_validation() {
            Failure::Config(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Output(e)
    }
}

fn load_data() -> Result<BundledData, Failure> {
    BundledData::load(&data_dir()).map_err(|e| Failure::Data(e.to_string()))
}

fn print_rows(rows: &[ReportRow]) -> anyhow::Result<()> {
    let stdout = io::stdout();
    write_report_csv(rows, stdout.lock()).context("writing report to stdout")
}

fn cmd_run(config: &Path, out: &Path, profile: ToleranceProfile) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(config)?;
    let data = load_data()?;
    let result = run_scenario(&cfg, &data)?;
    let rows = write_run_outputs(out, &result, profile).with_context(|| format!("writing to {}", out.display()))?;
    print_rows(&rows)?;
    Ok(())
}

fn cell_dir(index: usize, name: &str) -> String {
    let clean: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{index:03}_{}", clean.trim_matches('_'))
}

fn cmd_sweep(grid: &Path, out: &Path, profile: ToleranceProfile) -> Result<(), Failure> {
    let grid = LeverGrid::load(grid)?;
    let configs = grid.expand()?;
    let data = load_data()?;
    let results = sweep(&configs, &data);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let dirs: Vec<String> = configs.iter().enumerate().map(|(i, c)| cell_dir(i, &c.scenario.name)).collect();
    for (dir, result) in dirs.iter().zip(&results) {
        if let Ok(r) = result {
            let path = out.join(dir);
            write_run_outputs(&path, r, profile).with_context(|| format!("writing to {}", path.display()))?;
        }
    }
    let lines: Vec<SummaryLine> = configs
        .iter()
        .zip(&dirs)
        .zip(&results)
        .map(|((c, dir), outcome)| SummaryLine { cell: &c.scenario.name, dir, outcome })
        .collect();
    let summary = out.join("summary.csv");
    let file = fs::File::create(&summary).with_context(|| format!("creating {}", summary.display()))?;
    write_summary_csv(&lines, file).with_context(|| format!("writing {}", summary.display()))?;
    write_summary_csv(&lines, io::stdout().lock()).context("writing summary to stdout")?;

    let failed: Vec<&ScenarioError> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    for (c, r) in configs.iter().zip(&results) {
        if let Err(e) = r {
            eprintln!("cell {}: {e}", c.scenario.name);
        }
    }
    if !results.is_empty() && failed.len() == results.len() {
        return Err(if failed.iter().all(|e| e.is_validation()) {
            Failure::Config("every grid cell failed".into())
        } else {
            Failure::Data("every grid cell failed".into())
        });
    }
    Ok(())
}

fn cmd_reproduce(out: Option<&Path>, profile: ToleranceProfile) -> Result<(), Failure> {
    let data = load_data()?;
    let rows = reproduce(&data, profile)?;
    print_rows(&rows)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("report.csv");
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_report_csv(&rows, file).with_context(|| format!("writing {}", path.display()))?;
    }
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    eprintln!(
        "{} rows: {} match, {} tolerance, {} quoted-only, {} computed, {} mismatch",
        rows.len(),
        count(Status::Match),
        count(Status::Tolerance),
        count(Status::QuotedOnly),
        count(Status::Computed),
        count(Status::Mismatch)
    );
    match count(Status::Mismatch) {
        0 => Ok(()),
        n => Err(Failure::Mismatch(n)),
    }
}

fn cmd_calibrate(
    target: Option<CalibrationTarget>,
    bounds: Option<(f64, f64)>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let data = load_data()?;
    let targets = match target {
        Some(t) => vec![t],
        None => registered_targets().to_vec(),
    };
    let mut text = String::from("target,parameter,value,computed,target_value,residual,converged\n");
    for t in targets {
        let c = calibrate(t, &data.baseline, bounds)?;
        text.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.3e},{}\n",
            t.name(),
            c.parameter,
            c.value,
            c.computed,
            c.target_value,
            c.residual,
            c.converged
        ));
    }
    io::stdout().lock().write_all(text.as_bytes()).context("writing to stdout")?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("calibration.csv"), &text).with_context(|| format!("writing to {}", dir.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let profile = cli.tolerance_profile;
    let outcome = match &cli.command {
        Command::Run { config, out } => cmd_run(config, out, profile),
        Command::Sweep { config, out } => cmd_sweep(config, out, profile),
        Command::Reproduce { out } => cmd_reproduce(out.as_deref(), profile),
        Command::Calibrate { target, bounds, out } => cmd_calibrate(*target, *bounds, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("data error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Mismatch(n)) => {
            eprintln!("{n} row(s) mismatch");
            ExitCode::from(1)
        }
        Err(Failure::Output(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
