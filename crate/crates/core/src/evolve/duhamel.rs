use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{LabError, Result};
use crate::spectral::{airy_propagate, Field};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Piecewise cubic interpolation through four neighbouring nodes;
    /// one-sided stencils on the first and last interval.
    Cubic,
}

/// Weights of the integral over each interval `[t_i, t_{i+1}]`,
/// `interval[i] = Σ_k w[i][k]·g_k`, for `nodes` equispaced samples.
fn interval_weights(nodes: usize, h: f64, rule: Quadrature) -> Vec<Vec<(usize, f64)>> {
    let last = nodes - 1;
    (0..last)
        .map(|i| {
            if rule == Quadrature::Trapezoid || nodes < 4 {
                vec![(i, h / 2.0), (i + 1, h / 2.0)]
            } else if i == 0 {
                let c = [9.0, 19.0, -5.0, 1.0];
                (0..4).map(|k| (k, h * c[k] / 24.0)).collect()
            } else if i == last - 1 {
                let c = [1.0, -5.0, 19.0, 9.0];
                (0..4).map(|k| (last - 3 + k, h * c[k] / 24.0)).collect()
            } else {
                let c = [-1.0, 13.0, 13.0, -1.0];
                (0..4).map(|k| (i - 1 + k, h * c[k] / 24.0)).collect()
            }
        })
        .collect()
}

/// Cumulative weights: row `j` integrates from `t_0` to `t_j`.
pub fn cumulative_weights(nodes: usize, h: f64, rule: Quadrature) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; nodes]];
    let iw = interval_weights(nodes.max(1), h, rule);
    for row in iw {
        let mut next = out.last().unwrap().clone();
        for (k, w) in row {
            next[k] += w;
        }
        out.push(next);
    }
    out
}

/// Interaction-picture samples `𝒰(−t_i) F(t_i)` as coefficient vectors.
fn pulled_back(forcing: &Trajectory, name: &str) -> Result<Vec<Vec<Complex64>>> {
    let series = forcing.field(name)?;
    Ok(series
        .iter()
        .zip(&forcing.times)
        .map(|(f, &t)| airy_propagate(&f.to_spectral(), -t).coefs())
        .collect())
}

fn accumulate(g: &[Vec<Complex64>], weights: &[(usize, f64)], into: &mut [Complex64]) {
    for &(k, w) in weights {
        for (a, b) in into.iter_mut().zip(&g[k]) {
            *a += b * w;
        }
    }
}

/// `∫_0^{t_j} 𝒰(t_j − t') F(t') dt'` at every snapshot time `t_j`.
pub fn duhamel_series(forcing: &Trajectory, name: &str, rule: Quadrature) -> Result<Vec<Field>> {
    let g = pulled_back(forcing, name)?;
    let grid = forcing.grid;
    let h = forcing.dt_snap();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.n()];
    let mut out = vec![Field::zeros(grid)];
    for (i, row) in interval_weights(g.len(), h, rule).iter().enumerate() {
        accumulate(&g, row, &mut acc);
        let f = Field::spectral(grid, acc.clone())?;
        out.push(airy_propagate(&f, forcing.times[i + 1]).to_physical());
    }
    Ok(out)
}

/// `∫_0^t 𝒰(t − t') F(t') dt'` for any `t` inside the trajectory.
///
/// Whole intervals use `rule`; a trailing partial interval uses the
/// trapezoid rule on the linearly interpolated interaction-picture integrand.
pub fn duhamel(forcing: &Trajectory, name: &str, t: f64, rule: Quadrature) -> Result<Field> {
    let end = forcing.final_time();
    let tol = 1e-12 * end.max(1.0);
    if !(t >= -tol && t <= end + tol) || forcing.is_empty() {
        return Err(LabError::TimeOutOfRange { t, end });
    }
    let grid = forcing.grid;
    if t.abs() <= tol || forcing.len() < 2 {
        return Ok(Field::zeros(grid));
    }
    let g = pulled_back(forcing, name)?;
    let h = forcing.dt_snap();
    let k = ((t / h + 1e-9).floor() as usize).min(g.len() - 1);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.n()];
    for row in interval_weights(g.len(), h, rule).iter().take(k) {
        accumulate(&g, row, &mut acc);
    }
    let rem = t - forcing.times[k];
    if rem > tol && k + 1 < g.len() {
        let theta = rem / h;
        for j in 0..grid.n() {
            let end_val = g[k][j] * (1.0 - theta) + g[k + 1][j] * theta;
            acc[j] += (g[k][j] + end_val) * (rem / 2.0);
        }
    }
    Ok(airy_propagate(&Field::spectral(grid, acc)?, t).to_physical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    fn traj(g: Grid1D, f: impl Fn(f64) -> Field) -> Trajectory {
        let times: Vec<f64> = (0..=20).map(|j| j as f64 * 0.025).collect();
        Trajectory::from_fn(g, "F", &times, f).unwrap()
    }

    #[test]
    fn zero_forcing() {
        let g = Grid1D::new(4.0 * PI, 64).unwrap();
        let t = traj(g, |_| Field::zeros(g));
        assert_eq!(duhamel(&t, "F", 0.5, Quadrature::Trapezoid).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn free_forcing_integrates_to_t_times_flow() {
        let g = Grid1D::new(4.0 * PI, 128).unwrap();
        let g0 = Field::from_fn(g, |x| (-x * x).exp());
        let t = traj(g, |s| airy_propagate(&g0, s));
        for &s in &[0.5, 0.3, 0.2625] {
            let d = duhamel(&t, "F", s, Quadrature::Trapezoid).unwrap();
            let want = airy_propagate(&g0, s).scale(s);
            assert!(d.rel_l2_error(&want).unwrap() < 1e-12, "t = {s}");
        }
    }

    #[test]
    fn out_of_range() {
        let g = Grid1D::new(4.0 * PI, 64).unwrap();
        let t = traj(g, |_| Field::zeros(g));
        assert!(matches!(duhamel(&t, "F", 0.6, Quadrature::Trapezoid), Err(LabError::TimeOutOfRange { .. })));
    }

    #[test]
    fn cubic_rule_is_exact_for_cubics() {
        let w = cumulative_weights(7, 0.5, Quadrature::Cubic);
        for (j, row) in w.iter().enumerate() {
            let t = j as f64 * 0.5;
            let val: f64 = row.iter().enumerate().map(|(k, c)| c * (k as f64 * 0.5).powi(3)).sum();
            assert!((val - t.powi(4) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_pointwise() {
        let g = Grid1D::new(4.0 * PI, 64).unwrap();
        let t = traj(g, |s| Field::from_fn(g, |x| (-(x - s) * (x - s)).exp() * (1.0 + s)));
        let series = duhamel_series(&t, "F", Quadrature::Cubic).unwrap();
        let d = duhamel(&t, "F", t.times[13], Quadrature::Cubic).unwrap();
        assert!(series[13].rel_l2_error(&d).unwrap() < 1e-13);
    }
}
