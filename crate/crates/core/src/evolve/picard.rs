use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::duhamel::{duhamel_series, Quadrature};
use super::rhs::RhsEngine;
use super::{State, Trajectory};
use crate::error::{LabError, Result};
use crate::gauge::{make_gauge_bundle, EquationSpec, Variant};
use crate::spectral::{airy_propagate, derivative, Field};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub t_final: f64,
    /// Number of snapshot intervals on `[0, T]`.
    pub intervals: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default = "default_pad")]
    pub pad_factor: usize,
    #[serde(default = "default_rule")]
    pub rule: Quadrature,
}

fn default_pad() -> usize {
    3
}

fn default_rule() -> Quadrature {
    Quadrature::Cubic
}

impl PicardConfig {
    pub fn new(t_final: f64, intervals: usize, tol: f64, max_iter: usize) -> Self {
        Self {
            t_final,
            intervals,
            tol,
            max_iter,
            pad_factor: default_pad(),
            rule: default_rule(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    /// Last iterate, fields `u` and `vf`.
    pub trajectory: Trajectory,
    /// `r_k = ‖z^{(k+1)} − z^{(k)}‖` in the proxy norm.
    pub diffs: Vec<f64>,
    /// `r_{k+1} / r_k`
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// `‖f‖_{L_T^∞ L_x²}` and `‖∂f‖_{L_x^∞ L_T²}` of one series, with the time
/// integral by the trapezoid rule over the snapshots.
fn proxy_parts(series: &[Field], times: &[f64]) -> (f64, f64) {
    let sup_l2 = series.iter().map(|f| f.l2_norm()).fold(0.0, f64::max);
    if series.len() < 2 {
        let d = derivative(&series[0], 1).sup_norm();
        return (sup_l2, d);
    }
    let ders: Vec<Vec<f64>> = series.iter().map(|f| derivative(f, 1).samples()).collect();
    let n = ders[0].len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..ders.len() - 1 {
            let h = times[j + 1] - times[j];
            acc += 0.5 * h * (ders[j][i].powi(2) + ders[j + 1][i].powi(2));
        }
        best = best.max(acc.sqrt());
    }
    (sup_l2, best)
}

/// Sum over fields of `max(‖f‖_{L_T^∞L_x²}, ‖∂f‖_{L_x^∞L_T²})`.
pub fn proxy_norm(traj: &Trajectory) -> f64 {
    traj.series
        .iter()
        .map(|s| {
            let (a, b) = proxy_parts(s, &traj.times);
            a.max(b)
        })
        .sum()
}

fn difference(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    let names: Vec<&str> = a.names.iter().map(|s| s.as_str()).collect();
    let mut d = Trajectory::new(a.grid, &names, None);
    for j in 0..a.len() {
        let fields = a
            .series
            .iter()
            .zip(&b.series)
            .map(|(x, y)| x[j].sub(&y[j]))
            .collect::<Result<Vec<_>>>()?;
        d.push(a.times[j], fields)?;
    }
    Ok(d)
}

/// Iterate the Duhamel map of the gauged pair `(u, 𝔳)` on a fixed snapshot grid,
/// starting from the free evolution of `(u0, e^{−Λ0}∂u0)`.
///
/// Non-convergence is reported through `converged = false`, not as an error.
pub fn picard(u0: &Field, cfg: &PicardConfig, spec: &EquationSpec) -> Result<PicardResult> {
    if spec.variant != Variant::Coupled {
        return Err(LabError::Invalid("the Picard harness runs the coupled variant only".into()));
    }
    if cfg.intervals < 1 || !(cfg.t_final > 0.0) || !(cfg.tol > 0.0) || cfg.max_iter < 1 {
        return Err(LabError::Invalid("Picard needs T > 0, tol > 0, intervals >= 1, max_iter >= 1".into()));
    }
    let bundle = make_gauge_bundle(u0, spec)?;
    let vf0 = bundle.vf.expect("coupled bundle carries vf");
    let grid = *u0.grid();
    let h = cfg.t_final / cfg.intervals as f64;
    let times: Vec<f64> = (0..=cfg.intervals).map(|j| j as f64 * h).collect();
    let u0s = u0.to_spectral();
    let v0s = vf0.to_spectral();
    let mut free = Trajectory::new(grid, &["u", "vf"], Some(*spec));
    for &t in &times {
        free.push(t, vec![airy_propagate(&u0s, t), airy_propagate(&v0s, t)])?;
    }
    let engine = RhsEngine::new(grid, *spec, cfg.pad_factor)?;
    let mut current = free.clone();
    let mut diffs = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let forcing: Vec<State> = (0..current.len())
            .into_par_iter()
            .map(|j| engine.eval(&current.state_at(j)))
            .collect::<Result<Vec<_>>>()?;
        let mut ftraj = Trajectory::new(grid, &["u", "vf"], None);
        for (j, s) in forcing.into_iter().enumerate() {
            ftraj.push(times[j], s.fields)?;
        }
        let du = duhamel_series(&ftraj, "u", cfg.rule)?;
        let dv = duhamel_series(&ftraj, "vf", cfg.rule)?;
        let mut next = Trajectory::new(grid, &["u", "vf"], Some(*spec));
        for j in 0..times.len() {
            let fu = free.series[0][j].axpby(1.0, &du[j], 1.0)?;
            let fv = free.series[1][j].axpby(1.0, &dv[j], 1.0)?;
            next.push(times[j], vec![fu, fv])?;
        }
        let r = proxy_norm(&difference(&next, &current)?);
        diffs.push(r);
        current = next;
        if !r.is_finite() {
            break;
        }
        if r < cfg.tol {
            converged = true;
            break;
        }
    }
    let ratios = diffs.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(PicardResult {
        trajectory: current,
        diffs,
        ratios,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_converges_at_once() {
        let g = Grid1D::new(8.0 * PI, 128).unwrap();
        let r = picard(&Field::zeros(g), &PicardConfig::new(0.1, 10, 1e-10, 5), &EquationSpec::coupled(1.0, 0.0)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.diffs, vec![0.0]);
    }

    #[test]
    fn rejects_other_variants() {
        let g = Grid1D::new(8.0 * PI, 128).unwrap();
        assert!(picard(&Field::zeros(g), &PicardConfig::new(0.1, 10, 1e-10, 5), &EquationSpec::direct(1.0, 0.0)).is_err());
    }
}
