//! Time integration, the Duhamel operator and the Picard harness.

mod duhamel;
mod picard;
mod rhs;
mod stepper;

use serde::{Deserialize, Serialize};

pub use duhamel::{cumulative_weights, duhamel, duhamel_series, Quadrature};
pub use picard::{picard, proxy_norm, PicardConfig, PicardResult};
pub use rhs::{rhs, RhsEngine};
pub use stepper::{cfl_proxy, evolve, Scheme, StepperConfig, BLOWUP_FACTOR, CFL_LIMIT};

use crate::error::{LabError, Result};
use crate::gauge::EquationSpec;
use crate::spectral::{Field, Grid1D};

/// Named fields at one time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub names: Vec<String>,
    pub fields: Vec<Field>,
}

impl State {
    pub fn new(pairs: Vec<(&str, Field)>) -> Result<Self> {
        let grid = pairs
            .first()
            .map(|(_, f)| *f.grid())
            .ok_or_else(|| LabError::State("empty state".into()))?;
        if pairs.iter().any(|(_, f)| *f.grid() != grid) {
            return Err(LabError::GridMismatch);
        }
        Ok(Self {
            names: pairs.iter().map(|(n, _)| n.to_string()).collect(),
            fields: pairs.into_iter().map(|(_, f)| f).collect(),
        })
    }

    pub fn single(name: &str, field: Field) -> Self {
        Self {
            names: vec![name.to_string()],
            fields: vec![field],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.fields[0].grid()
    }

    pub fn get(&self, name: &str) -> Result<&Field> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.fields[i])
            .ok_or_else(|| LabError::UnknownField(name.to_string()))
    }

    /// Check that names match the state layout of `spec.variant`.
    pub fn check_layout(&self, spec: &EquationSpec) -> Result<()> {
        let want = spec.variant.state_names();
        if self.names.len() != want.len() || self.names.iter().zip(want).any(|(a, b)| a != b) {
            return Err(LabError::State(format!(
                "variant {:?} expects fields {:?}, got {:?}",
                spec.variant, want, self.names
            )));
        }
        Ok(())
    }
}

/// Snapshots of named fields on a uniform time grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `series[k][j]` is field `names[k]` at `times[j]`, in physical space.
    pub series: Vec<Vec<Field>>,
    pub spec: Option<EquationSpec>,
    /// Largest edge ratio seen over all snapshots and fields.
    pub edge_drift: f64,
}

/// Summary of a trajectory without the field data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub names: Vec<String>,
    pub snapshots: usize,
    pub final_time: f64,
    pub edge_drift: f64,
}

impl Trajectory {
    pub fn new(grid: Grid1D, names: &[&str], spec: Option<EquationSpec>) -> Self {
        Self {
            grid,
            times: Vec::new(),
            names: names.iter().map(|s| s.to_string()).collect(),
            series: vec![Vec::new(); names.len()],
            spec,
            edge_drift: 0.0,
        }
    }

    /// Build from per-snapshot closures, e.g. an exact solution.
    pub fn from_fn(grid: Grid1D, name: &str, times: &[f64], f: impl Fn(f64) -> Field) -> Result<Self> {
        let mut t = Self::new(grid, &[name], None);
        for &s in times {
            t.push(s, vec![f(s)])?;
        }
        Ok(t)
    }

    pub fn push(&mut self, t: f64, fields: Vec<Field>) -> Result<()> {
        if fields.len() != self.names.len() {
            return Err(LabError::State(format!(
                "expected {} fields, got {}",
                self.names.len(),
                fields.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(LabError::State(format!("snapshot time {t} does not increase past {last}")));
            }
        }
        for (k, f) in fields.into_iter().enumerate() {
            if *f.grid() != self.grid {
                return Err(LabError::GridMismatch);
            }
            let f = f.to_physical();
            self.edge_drift = self.edge_drift.max(f.edge_ratio());
            self.series[k].push(f);
        }
        self.times.push(t);
        Ok(())
    }

    /// Add a derived series on the same time grid.
    pub fn add_series(&mut self, name: &str, fields: Vec<Field>) -> Result<()> {
        if fields.len() != self.times.len() {
            return Err(LabError::State("derived series length differs from snapshot count".into()));
        }
        if self.names.iter().any(|n| n == name) {
            return Err(LabError::State(format!("field `{name}` already present")));
        }
        self.names.push(name.to_string());
        self.series.push(fields.into_iter().map(|f| f.to_physical()).collect());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn dt_snap(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn field(&self, name: &str) -> Result<&[Field]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.series[i].as_slice())
            .ok_or_else(|| LabError::UnknownField(name.to_string()))
    }

    pub fn last(&self, name: &str) -> Result<&Field> {
        self.field(name)?
            .last()
            .ok_or_else(|| LabError::State("empty trajectory".into()))
    }

    pub fn state_at(&self, j: usize) -> State {
        State {
            names: self.names.clone(),
            fields: self.series.iter().map(|s| s[j].clone()).collect(),
        }
    }

    /// Keep only the first `count` snapshots.
    pub fn truncated(&self, count: usize) -> Self {
        let mut t = self.clone();
        t.times.truncate(count);
        for s in &mut t.series {
            s.truncate(count);
        }
        t
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            names: self.names.clone(),
            snapshots: self.len(),
            final_time: self.final_time(),
            edge_drift: self.edge_drift,
        }
    }
}
