//! Run configuration: per-command defaults, JSON file, dotted overrides.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::commands::Command;
use crate::error::{LabError, Result};
use crate::evolve::StepperConfig;
use crate::gauge::EquationSpec;
use crate::spectral::{Field, Grid1D};

/// Environment variable that overrides `output_dir`.
pub const OUT_DIR_ENV: &str = "KDVLAB_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-length of the window `[−L, L)`.
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid1D> {
        Grid1D::new(self.half_length, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `A e^{−((x−c)/w)²}`
    Gaussian,
    /// `A ∂_y e^{−y²}` with `y = (x−c)/w`; zero mass.
    GaussianDerivative,
    /// `A sech²((x−c)/w)`
    Sech2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub shape: Shape,
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn gaussian(amplitude: f64) -> Self {
        Self { shape: Shape::Gaussian, amplitude, width: 1.0, center: 0.0 }
    }

    pub fn value(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        self.amplitude
            * match self.shape {
                Shape::Gaussian => (-y * y).exp(),
                Shape::GaussianDerivative => -2.0 * y * (-y * y).exp(),
                Shape::Sech2 => 1.0 / y.cosh().powi(2),
            }
    }

    pub fn sample(&self, grid: Grid1D) -> Result<Field> {
        if !(self.width > 0.0 && self.amplitude.is_finite() && self.center.is_finite()) {
            return Err(LabError::Config(format!(
                "profile needs width > 0 and finite amplitude/center, got {:?}",
                self
            )));
        }
        Ok(Field::from_fn(grid, |x| self.value(x)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub equation: EquationSpec,
    pub grid: GridConfig,
    pub stepper: StepperConfig,
    pub data: Profile,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub seed: u64,
    pub output_dir: String,
    /// Command-specific settings, checked against the command's own schema.
    pub params: Value,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let grid = |half_length: f64, n: usize| GridConfig { half_length, n };
        let mut c = Self {
            command,
            equation: EquationSpec::direct(1.0, 0.0),
            grid: grid(16.0 * PI, 512),
            stepper: StepperConfig::new(0.0025, 0.025),
            data: Profile::gaussian(0.1),
            t_final: 0.5,
            seed: 7,
            output_dir: "out".into(),
            params: command.default_params(),
        };
        match command {
            Command::Simulate | Command::Lipschitz | Command::Apriori => {}
            Command::Picard => {
                c.equation = EquationSpec::coupled(1.0, 0.0);
                c.t_final = 0.8;
            }
            Command::GaugeCheck => {
                c.equation = EquationSpec::coupled(1.0, 0.5);
                c.grid = grid(16.0 * PI, 1024);
                c.stepper = StepperConfig::new(0.0003125, 0.0125);
                c.data = Profile { shape: Shape::GaussianDerivative, amplitude: 0.1, width: 1.0, center: 0.0 };
            }
            Command::Estimates => c.grid = grid(8.0 * PI, 256),
            Command::IllposedA | Command::IllposedB => {}
        }
        c
    }

    /// Defaults for `command`, then the file, then the overrides, each
    /// merged key by key. Unknown keys anywhere are rejected.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self> {
        let mut value = serde_json::to_value(Self::defaults(command))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
            let file_value: Value = serde_json::from_str(&text)
                .map_err(|e| LabError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
            if let Some(c) = file_value.get("command") {
                if c != &serde_json::to_value(command)? {
                    return Err(LabError::Config(format!(
                        "config file is for command {c}, but {} was requested",
                        command.name()
                    )));
                }
            }
            merge(&mut value, file_value);
        }
        for (key, v) in overrides {
            if key == "command" {
                return Err(LabError::Config("the command is chosen on the command line, not by override".into()));
            }
            set_path(&mut value, key, v.clone())?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| LabError::Config(format!("bad configuration: {e}")))?;
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = dir;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.equation.validate()?;
        self.grid.build()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(LabError::Config(format!("T must be positive, got {}", self.t_final)));
        }
        if self.output_dir.is_empty() {
            return Err(LabError::Config("output_dir is empty".into()));
        }
        Ok(())
    }
}

/// Recursive object merge; anything that is not an object on both sides is
/// replaced.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Sets `a.b.0.c`; numeric segments index arrays.
pub fn set_path(root: &mut Value, key: &str, v: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(LabError::Config(format!("malformed key `{key}`")));
    }
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| LabError::Config(format!("`{key}`: `{part}` indexes a list and must be a number")))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| LabError::Config(format!("`{key}`: index {idx} out of range (length {len})")))?
            }
            Value::Object(map) => {
                if !map.contains_key(*part) {
                    map.insert(part.to_string(), if last { Value::Null } else { Value::Object(Map::new()) });
                }
                map.get_mut(*part).expect("inserted")
            }
            _ => return Err(LabError::Config(format!("`{key}`: `{part}` is below a scalar"))),
        };
    }
    *cur = v;
    Ok(())
}

/// JSON if it parses, a bare string otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_paths_reach_lists() {
        let mut v = json!({"a": {"b": [1, {"c": 2}]}});
        set_path(&mut v, "a.b.1.c", json!(5)).unwrap();
        set_path(&mut v, "a.d", json!("x")).unwrap();
        assert_eq!(v, json!({"a": {"b": [1, {"c": 5}], "d": "x"}}));
        assert!(set_path(&mut v, "a.b.7", json!(0)).is_err());
        assert!(set_path(&mut v, "a..b", json!(0)).is_err());
    }

    #[test]
    fn merge_keeps_untouched_keys() {
        let mut v = json!({"grid": {"L": 1.0, "n": 8}, "T": 1});
        merge(&mut v, json!({"grid": {"n": 16}}));
        assert_eq!(v, json!({"grid": {"L": 1.0, "n": 16}, "T": 1}));
    }

    #[test]
    fn values_fall_back_to_strings() {
        assert_eq!(parse_value("512"), json!(512));
        assert_eq!(parse_value("coupled"), json!("coupled"));
        assert_eq!(parse_value("[1,2]"), json!([1, 2]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = [("grid.m".to_string(), json!(3))];
        assert!(matches!(RunConfig::resolve(Command::Simulate, None, &bad), Err(LabError::Config(_))));
        let good = [("grid.n".to_string(), json!(256))];
        assert_eq!(RunConfig::resolve(Command::Simulate, None, &good).unwrap().grid.n, 256);
    }

    #[test]
    fn defaults_round_trip_through_json() {
        for c in Command::ALL {
            let d = RunConfig::defaults(c);
            let back: RunConfig = serde_json::from_value(serde_json::to_value(&d).unwrap()).unwrap();
            assert_eq!(back, d);
        }
    }
}
