//! Map and sweep specifications in JSON.
//!
//! A map is `{"c": .., "alpha": .., "beta": .., "v1": .., "v0": ..}` with an
//! optional `"tolerances"` object overriding any of `eps_point`,
//! `eps_critical`, `eps_value` and `max_bisect`. Unknown keys are rejected.

use std::path::Path;

use lorenz_core::{MapParams, StandardLorenzMap, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub eps_point: Option<f64>,
    pub eps_critical: Option<f64>,
    pub eps_value: Option<f64>,
    pub max_bisect: Option<u32>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            eps_point: self.eps_point.unwrap_or(base.eps_point),
            eps_critical: self.eps_critical.unwrap_or(base.eps_critical),
            eps_value: self.eps_value.unwrap_or(base.eps_value),
            max_bisect: self.max_bisect.unwrap_or(base.max_bisect),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v1: f64,
    pub v0: f64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

impl MapConfig {
    pub fn params(&self) -> MapParams {
        MapParams::new(self.c, self.alpha, self.beta, self.v1, self.v0)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.apply(Tolerances::default())
    }

    pub fn build(&self) -> Result<StandardLorenzMap> {
        Ok(StandardLorenzMap::with_tolerances(self.params(), self.tolerances())?)
    }
}

/// Text of an argument that is either inline JSON or a path to a file.
fn load(arg: &str) -> Result<(String, String)> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(("inline config".to_string(), arg.to_string()));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|source| ToolError::Read { path: path.to_path_buf(), source })?;
    Ok((path.display().to_string(), text))
}

pub fn parse_map(arg: &str) -> Result<MapConfig> {
    let (name, text) = load(arg)?;
    serde_json::from_str(&text).map_err(|e| ToolError::from_json(&name, e))
}

/// A parameter axis: a fixed value or `steps` evenly spaced values from `lo`
/// to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Fixed(f64),
    Range { lo: f64, hi: f64, steps: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Range { lo, steps: 1, .. } => vec![lo],
            Axis::Range { lo, hi, steps } => {
                (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Axis::Fixed(_) => 1,
            Axis::Range { steps, .. } => steps,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Analysis settings a sweep may override; unset fields keep the classifier
/// defaults or the command-line flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub max_period: Option<usize>,
    pub grid: Option<usize>,
    pub horizon: Option<usize>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub rotation_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub c: Axis,
    pub alpha: Axis,
    pub beta: Axis,
    pub v1: Axis,
    pub v0: Axis,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub settings: SweepSettings,
}

impl SweepSpec {
    pub fn grid_size(&self) -> usize {
        [self.c, self.alpha, self.beta, self.v1, self.v0].iter().map(Axis::len).product()
    }

    /// Grid points in row-major order over `(c, alpha, beta, v1, v0)`.
    pub fn points(&self) -> Vec<MapParams> {
        let mut out = Vec::with_capacity(self.grid_size());
        for &c in &self.c.values() {
            for &alpha in &self.alpha.values() {
                for &beta in &self.beta.values() {
                    for &v1 in &self.v1.values() {
                        for &v0 in &self.v0.values() {
                            out.push(MapParams::new(c, alpha, beta, v1, v0));
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn parse_sweep(arg: &str) -> Result<SweepSpec> {
    let (name, text) = load(arg)?;
    let spec: SweepSpec = serde_json::from_str(&text).map_err(|e| ToolError::from_json(&name, e))?;
    for (axis, name) in [(spec.c, "c"), (spec.alpha, "alpha"), (spec.beta, "beta"), (spec.v1, "v1"), (spec.v0, "v0")] {
        if axis.is_empty() {
            return Err(ToolError::Invalid(format!("sweep axis {name} has zero steps")));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_map_with_overrides() {
        let m = parse_map(r#"{"c":0.5,"alpha":2,"beta":2,"v1":1,"v0":0,"tolerances":{"eps_value":1e-8}}"#).unwrap();
        assert_eq!(m.params(), MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0));
        assert_eq!(m.tolerances().eps_value, 1e-8);
        assert_eq!(m.tolerances().eps_point, Tolerances::default().eps_point);
    }

    #[test]
    fn malformed_map_reports_position_and_field() {
        let e = parse_map("{\"c\":0.5,\n\"alpha\":2,\"beta\":2,\"v1\":1,\"vzero\":0}").unwrap_err();
        let ToolError::Config { line, message, .. } = &e else { panic!("{e:?}") };
        assert_eq!(*line, 2);
        assert!(message.contains("vzero"), "{message}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn missing_field_is_named() {
        let e = parse_map(r#"{"c":0.5,"alpha":2,"beta":2,"v1":1}"#).unwrap_err();
        assert!(e.to_string().contains("v0"), "{e}");
    }

    #[test]
    fn axes() {
        assert_eq!(Axis::Fixed(0.3).values(), vec![0.3]);
        assert_eq!(Axis::Range { lo: 0.0, hi: 1.0, steps: 5 }.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Axis::Range { lo: 0.2, hi: 1.0, steps: 1 }.values(), vec![0.2]);
    }

    #[test]
    fn sweep_grid_size_is_the_product_of_steps() {
        let s = parse_sweep(
            r#"{"c":0.5,"alpha":2,"beta":{"lo":2,"hi":3,"steps":2},
                "v1":{"lo":0.5,"hi":1,"steps":10},"v0":{"lo":0,"hi":0.4,"steps":10}}"#,
        )
        .unwrap();
        assert_eq!(s.grid_size(), 200);
        assert_eq!(s.points().len(), 200);
        assert_eq!(s.points()[1], MapParams::new(0.5, 2.0, 2.0, 0.5, 0.4 / 9.0));
    }
}
