//! Difference quotients of the data-to-solution map.

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::evolve::{evolve, State, StepperConfig};
use crate::gauge::{xs_norm, EquationSpec};
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::{sobolev_norm, Field};

/// Largest allowed spread `max/min` of the ratios across perturbation sizes.
pub const LIPSCHITZ_SPREAD: f64 = 2.0;
/// Deviation of the ratio from 1 tolerated for the linear flow.
pub const LINEAR_RATIO_TOL: f64 = 1e-9;

/// Evolves `u0` and `u0 + δg` for every `δ` and reports
/// `‖u_δ(T) − u(T)‖ / ‖δg‖` in the discrete `𝒳¹` norm (`H¹` plus the sup of
/// the window primitive) and in `H¹` alone. `δ = 0` is skipped.
pub fn lipschitz_probe(
    u0: &Field,
    g: &Field,
    deltas: &[f64],
    t_final: f64,
    spec: &EquationSpec,
    cfg: &StepperConfig,
) -> Result<ExperimentReport> {
    if spec.variant.state_names().len() != 1 {
        return Err(LabError::Invalid("the Lipschitz probe evolves single-component variants only".into()));
    }
    let name = spec.variant.state_names()[0];
    let run = |f: &Field| -> Result<Field> {
        let traj = evolve(&State::single(name, f.clone()), t_final, cfg, spec)?;
        Ok(traj.last(name)?.clone())
    };
    let base = run(u0)?;
    let active: Vec<f64> = deltas.iter().copied().filter(|d| *d != 0.0).collect();
    let finals: Vec<Field> = active
        .par_iter()
        .map(|&d| run(&u0.axpby(1.0, g, d)?))
        .collect::<Result<_>>()?;

    let mut rep = ExperimentReport::new("lipschitz", &["delta", "ratio_x1", "ratio_h1"]);
    rep.scalar("T", t_final);
    rep.scalar("linear", if spec.is_linear() { 1.0 } else { 0.0 });
    if active.len() < deltas.len() {
        rep.notes.push("δ = 0 skipped: the difference quotient is undefined".into());
    }
    let mut x1 = Vec::with_capacity(active.len());
    let mut h1 = Vec::with_capacity(active.len());
    for (&d, f) in active.iter().zip(&finals) {
        let diff = f.sub(&base)?;
        let dg = g.scale(d);
        let rx = xs_norm(&diff, 1.0).total / xs_norm(&dg, 1.0).total;
        let rh = sobolev_norm(&diff, 1.0) / sobolev_norm(&dg, 1.0);
        x1.push(rx);
        h1.push(rh);
        rep.row(vec![d, rx, rh]);
    }
    if x1.len() >= 2 {
        let spread = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min);
        rep.scalar("spread_h1", spread(&h1));
        rep.check(Check::at_most("spread_x1", spread(&x1), LIPSCHITZ_SPREAD, Source::Literature));
    }
    if spec.is_linear() && !x1.is_empty() {
        let dev = |v: &[f64]| v.iter().fold(0.0_f64, |m, r| m.max((r - 1.0).abs()));
        rep.scalar("linear_deviation_h1", dev(&h1));
        rep.check(Check::at_most("linear_deviation_x1", dev(&x1), LINEAR_RATIO_TOL, Source::Identity));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn zero_delta_is_skipped() {
        let g = Grid1D::new(8.0 * PI, 128).unwrap();
        let u0 = Field::from_fn(g, |x| 0.1 * (-x * x).exp());
        let p = Field::from_fn(g, |x| (-(x - 1.0).powi(2)).exp());
        let rep = lipschitz_probe(&u0, &p, &[0.0, 1e-3], 0.1, &EquationSpec::direct(1.0, 0.0), &StepperConfig::new(0.01, 0.05))
            .unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.notes.len(), 1);
    }
}
