use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rhs::{sup_of_coefs, RhsEngine};
use super::{State, Trajectory};
use crate::error::{LabError, Result};
use crate::gauge::{EquationSpec, EDGE_TOLERANCE};
use crate::spectral::{Field, Grid1D, MultiplierSpec};

/// Upper bound on `dt · Σ|c_i| · ‖state‖_∞ · ξ_max²` at the start of a run.
pub const CFL_LIMIT: f64 = 0.5;
/// A run aborts once the sup norm exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Lawson integrating-factor Runge–Kutta of order four.
    #[default]
    IfRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperConfig {
    pub dt: f64,
    pub dt_snap: f64,
    #[serde(default = "default_pad")]
    pub pad_factor: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

fn default_pad() -> usize {
    3
}

fn integer_ratio(a: f64, b: f64, what: &str) -> Result<usize> {
    let r = a / b;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * k.max(1.0) {
        return Err(LabError::Invalid(format!("{what} must be a positive integer, got {r}")));
    }
    Ok(k as usize)
}

impl StepperConfig {
    pub fn new(dt: f64, dt_snap: f64) -> Self {
        Self {
            dt,
            dt_snap,
            pad_factor: default_pad(),
            scheme: Scheme::IfRk4,
        }
    }

    pub fn with_pad(self, pad_factor: usize) -> Self {
        Self { pad_factor, ..self }
    }

    /// Steps per snapshot and snapshot count for a run to `t_final`.
    pub fn layout(&self, t_final: f64) -> Result<(usize, usize)> {
        if !(self.dt > 0.0 && self.dt_snap > 0.0 && t_final > 0.0) {
            return Err(LabError::Invalid(format!(
                "dt, dt_snap and T must be positive (dt = {}, dt_snap = {}, T = {t_final})",
                self.dt, self.dt_snap
            )));
        }
        if self.dt > self.dt_snap * (1.0 + 1e-12) {
            return Err(LabError::Invalid(format!("dt = {} exceeds dt_snap = {}", self.dt, self.dt_snap)));
        }
        let per = integer_ratio(self.dt_snap, self.dt, "dt_snap / dt")?;
        let snaps = integer_ratio(t_final, self.dt_snap, "T / dt_snap")?;
        Ok((per, snaps))
    }
}

/// `dt · Σ|c_i| · max_k ‖state_k‖_∞ · ξ_max²`.
pub fn cfl_proxy(state: &State, spec: &EquationSpec, dt: f64) -> f64 {
    let sup = state.fields.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let xmax = state.grid().nyquist();
    dt * spec.coefficient_sum() * sup * xmax * xmax
}

fn symbols(grid: &Grid1D, t: f64) -> Vec<Complex64> {
    let nyq = grid.nyquist_slot();
    let mut s = MultiplierSpec::airy(t).symbols(grid).expect("unimodular");
    s[nyq] = Complex64::new(0.0, 0.0);
    s
}

fn mul(e: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    e.iter().zip(v).map(|(a, b)| a * b).collect()
}

fn axpy(a: &[Complex64], h: f64, b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y * h).collect()
}

struct Stepper<'a> {
    engine: &'a RhsEngine,
    h: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl Stepper<'_> {
    fn step(&self, v: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let (h, eh, ef) = (self.h, &self.half, &self.full);
        let k1 = self.engine.eval_coefs(v)?;
        let s2: Vec<_> = v.iter().zip(&k1).map(|(a, k)| mul(eh, &axpy(a, h / 2.0, k))).collect();
        let k2 = self.engine.eval_coefs(&s2)?;
        let vh: Vec<_> = v.iter().map(|a| mul(eh, a)).collect();
        let s3: Vec<_> = vh.iter().zip(&k2).map(|(a, k)| axpy(a, h / 2.0, k)).collect();
        let k3 = self.engine.eval_coefs(&s3)?;
        let s4: Vec<_> = v
            .iter()
            .zip(&k3)
            .map(|(a, k)| axpy(&mul(ef, a), h, &mul(eh, k)))
            .collect();
        let k4 = self.engine.eval_coefs(&s4)?;
        Ok((0..v.len())
            .map(|c| {
                (0..v[c].len())
                    .map(|j| {
                        ef[j] * v[c][j]
                            + (ef[j] * k1[c][j] + eh[j] * (k2[c][j] + k3[c][j]) * 2.0 + k4[c][j]) * (h / 6.0)
                    })
                    .collect()
            })
            .collect())
    }
}

/// Integrate `ℒ(state) = N(state)` from `t = 0` to `t_final`.
///
/// The linear part is propagated exactly; the Nyquist coefficient of the
/// data is dropped since products never populate it.
pub fn evolve(u0: &State, t_final: f64, cfg: &StepperConfig, spec: &EquationSpec) -> Result<Trajectory> {
    spec.validate()?;
    u0.check_layout(spec)?;
    let (per, snaps) = cfg.layout(t_final)?;
    let grid = *u0.grid();
    if !spec.is_linear() {
        let cfl = cfl_proxy(u0, spec, cfg.dt);
        if cfl > CFL_LIMIT {
            return Err(LabError::Invalid(format!(
                "CFL proxy {cfl:.3} exceeds {CFL_LIMIT}; reduce dt"
            )));
        }
    }
    if spec.variant.is_gauged() {
        let mass = u0.fields[0].total_integral();
        if mass.abs() >= EDGE_TOLERANCE {
            return Err(LabError::GaugePrecondition(format!(
                "gauged systems need zero-mass data, window integral is {mass:.3e}"
            )));
        }
    }
    let engine = RhsEngine::new(grid, *spec, cfg.pad_factor)?;
    let nyq = grid.nyquist_slot();
    let mut v: Vec<Vec<Complex64>> = u0
        .fields
        .iter()
        .map(|f| {
            let mut c = f.coefs();
            c[nyq] = Complex64::new(0.0, 0.0);
            c
        })
        .collect();
    let names: Vec<&str> = u0.names.iter().map(|s| s.as_str()).collect();
    let mut traj = Trajectory::new(grid, &names, Some(*spec));
    let to_fields = |v: &[Vec<Complex64>]| -> Vec<Field> {
        v.iter()
            .map(|c| Field::spectral(grid, c.clone()).expect("grid length"))
            .collect()
    };
    traj.push(0.0, to_fields(&v))?;
    let sup0 = v.iter().map(|c| sup_of_coefs(&grid, c)).fold(0.0, f64::max);
    let threshold = BLOWUP_FACTOR * sup0;
    let stepper = Stepper {
        engine: &engine,
        h: cfg.dt,
        half: symbols(&grid, cfg.dt / 2.0),
        full: symbols(&grid, cfg.dt),
    };
    let linear = spec.is_linear();
    let full_snap = symbols(&grid, cfg.dt_snap);
    for j in 1..=snaps {
        if linear {
            v = v.iter().map(|c| mul(&full_snap, c)).collect();
        } else {
            for _ in 0..per {
                v = stepper.step(&v)?;
            }
        }
        let t = j as f64 * cfg.dt_snap;
        let sup = v
            .iter()
            .map(|c| sup_of_coefs(&grid, c))
            .fold(0.0, |m: f64, s| if s.is_nan() || m.is_nan() { f64::NAN } else { m.max(s) });
        if !sup.is_finite() || sup > threshold {
            return Err(LabError::BlowUp {
                time: t,
                sup,
                threshold,
                partial: Box::new(traj),
            });
        }
        traj.push(t, to_fields(&v))?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::airy_propagate;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid1D::new(4.0 * PI, 128).unwrap();
        let s = State::single("u", Field::zeros(g));
        let t = evolve(&s, 0.1, &StepperConfig::new(0.01, 0.05), &EquationSpec::direct(1.0, 1.0)).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.last("u").unwrap().sup_norm() == 0.0);
    }

    #[test]
    fn linear_flow_matches_propagator() {
        let g = Grid1D::new(4.0 * PI, 128).unwrap();
        let u0 = Field::from_fn(g, |x| (-x * x).exp());
        let s = State::single("u", u0.clone());
        let t = evolve(&s, 0.3, &StepperConfig::new(0.01, 0.1), &EquationSpec::direct(0.0, 0.0)).unwrap();
        for (j, f) in t.field("u").unwrap().iter().enumerate() {
            let exact = airy_propagate(&u0, t.times[j]);
            assert!(f.rel_l2_error(&exact).unwrap() < 1e-12);
        }
    }

    #[test]
    fn layout_validation() {
        assert!(StepperConfig::new(0.02, 0.01).layout(1.0).is_err());
        assert!(StepperConfig::new(0.003, 0.01).layout(1.0).is_err());
        assert_eq!(StepperConfig::new(0.0025, 0.01).layout(0.5).unwrap(), (4, 50));
    }

    #[test]
    fn cfl_guard() {
        let g = Grid1D::new(4.0 * PI, 256).unwrap();
        let s = State::single("u", Field::from_fn(g, |x| 5.0 * (-x * x).exp()));
        let err = evolve(&s, 0.1, &StepperConfig::new(0.05, 0.05), &EquationSpec::direct(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, LabError::Invalid(_)));
    }

    #[test]
    fn gauged_runs_need_zero_mass() {
        let g = Grid1D::new(8.0 * PI, 256).unwrap();
        let u = Field::from_fn(g, |x| 0.1 * (-x * x).exp());
        let s = State::new(vec![("u", u.clone()), ("vf", u)]).unwrap();
        let err = evolve(&s, 0.1, &StepperConfig::new(0.01, 0.05), &EquationSpec::coupled(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, LabError::GaugePrecondition(_)));
    }
}
