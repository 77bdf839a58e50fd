use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::{run_scenario, LeverLevel, Levers, ProjectionResult, ScenarioConfig, ScenarioError};
use crate::data::BundledData;
use crate::monetary::CapitalizationLevel;

/// Axis name for the monetary capitalization-level override.
const CAP_AXIS: &str = "capitalization_level";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    base: String,
    #[serde(default)]
    grid: BTreeMap<String, Vec<String>>,
}

/// Cartesian grid of lever settings around a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverGrid {
    pub base: ScenarioConfig,
    /// Axes in expansion order; the last axis varies fastest.
    pub axes: Vec<(String, Vec<String>)>,
}

impl LeverGrid {
    /// Reads a grid file. `base` is resolved relative to the grid file.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let io = |e: std::io::Error| ScenarioError::Io { path: path.display().to_string(), msg: e.to_string() };
        let text = fs::read_to_string(path).map_err(io)?;
        let file: GridFile =
            toml::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string().trim_end().to_string()))?;
        let base_path = path.parent().unwrap_or(Path::new(".")).join(&file.base);
        let base = ScenarioConfig::load(&base_path)?;
        Self::new(base, file.grid)
    }

    pub fn new(base: ScenarioConfig, grid: BTreeMap<String, Vec<String>>) -> Result<Self, ScenarioError> {
        let mut axes = Vec::new();
        let order = Levers::NAMES.iter().copied().chain([CAP_AXIS]);
        for name in order {
            if let Some(values) = grid.get(name) {
                if values.is_empty() {
                    return Err(ScenarioError::invalid(&format!("grid.{name}"), "axis has no values"));
                }
                for v in values {
                    parse_axis_value(name, v)?;
                }
                axes.push((name.to_string(), values.clone()));
            }
        }
        if let Some(unknown) = grid.keys().find(|k| !Levers::NAMES.contains(&k.as_str()) && k.as_str() != CAP_AXIS) {
            return Err(ScenarioError::invalid(&format!("grid.{unknown}"), "unknown axis"));
        }
        Ok(Self { base, axes })
    }

    /// Configs for every cell, in row-major order. A grid with no axes is the
    /// base config alone.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>, ScenarioError> {
        let mut cells: Vec<(ScenarioConfig, Vec<String>)> = vec![(self.base.clone(), Vec::new())];
        for (axis, values) in &self.axes {
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for (cfg, tags) in &cells {
                for v in values {
                    let mut c = cfg.clone();
                    apply_axis(&mut c, axis, v)?;
                    let mut t = tags.clone();
                    t.push(format!("{axis}={v}"));
                    next.push((c, t));
                }
            }
            cells = next;
        }
        Ok(cells
            .into_iter()
            .map(|(mut c, tags)| {
                if !tags.is_empty() {
                    c.scenario.name = format!("{}[{}]", c.scenario.name, tags.join(","));
                }
                c
            })
            .collect())
    }
}

enum AxisValue {
    Lever(LeverLevel),
    Cap(CapitalizationLevel),
}

fn parse_axis_value(axis: &str, value: &str) -> Result<AxisValue, ScenarioError> {
    let path = format!("grid.{axis}");
    if axis == CAP_AXIS {
        return value.parse().map(AxisValue::Cap).map_err(|e: String| ScenarioError::invalid(&path, e));
    }
    LeverLevel::ALL
        .into_iter()
        .find(|l| l.label() == value)
        .map(AxisValue::Lever)
        .ok_or_else(|| ScenarioError::invalid(&path, format!("unknown level `{value}`")))
}

fn apply_axis(cfg: &mut ScenarioConfig, axis: &str, value: &str) -> Result<(), ScenarioError> {
    match parse_axis_value(axis, value)? {
        AxisValue::Cap(level) => cfg.monetary.capitalization_level = Some(level),
        AxisValue::Lever(level) => {
            cfg.levers.set(axis, level);
        }
    }
    Ok(())
}

/// Runs every config, possibly in parallel. Results keep the input order and
/// failures are returned per config.
pub fn sweep(configs: &[ScenarioConfig], data: &BundledData) -> Vec<Result<ProjectionResult, ScenarioError>> {
    configs.par_iter().map(|c| run_scenario(c, data)).collect()
}
