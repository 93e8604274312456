//! Solver checks: the linear flow against the exact propagator and the
//! self-convergence order under step halving.

use crate::error::{LabError, Result};
use crate::evolve::{evolve, State, StepperConfig};
use crate::gauge::EquationSpec;
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::{airy_propagate, Field};

/// Relative `L²` gap tolerated between the stepped linear flow and `𝒰(T)u0`.
pub const LINEAR_EXACTNESS_TOL: f64 = 1e-11;
pub const ORDER_TARGET: f64 = 4.0;
pub const ORDER_TOL: f64 = 0.2;

/// Final state of the linear flow against `airy_propagate`.
pub fn linear_exactness(u0: &Field, t_final: f64, cfg: &StepperConfig) -> Result<ExperimentReport> {
    let spec = EquationSpec::direct(0.0, 0.0);
    let traj = evolve(&State::single("u", u0.clone()), t_final, cfg, &spec)?;
    let exact = airy_propagate(u0, t_final);
    let mut rep = ExperimentReport::new("linear_exactness", &["t", "rel_l2"]);
    let mut worst = 0.0_f64;
    for (t, f) in traj.times.iter().zip(traj.field("u")?) {
        let e = f.rel_l2_error(&airy_propagate(u0, *t))?;
        worst = worst.max(e);
        rep.row(vec![*t, e]);
    }
    let last = traj.last("u")?.rel_l2_error(&exact)?;
    rep.scalar("final_rel_l2", last);
    rep.scalar("max_rel_l2", worst);
    rep.check(Check::at_most("final_rel_l2", last, LINEAR_EXACTNESS_TOL, Source::Identity));
    Ok(rep)
}

/// Runs with steps `4h, 2h, h` and estimates the order from the two
/// successive differences of the final states.
pub fn self_convergence(u0: &Field, t_final: f64, h: f64, spec: &EquationSpec, cfg: &StepperConfig) -> Result<ExperimentReport> {
    let names = spec.variant.state_names();
    if names.len() != 1 {
        return Err(LabError::Invalid("self-convergence runs single-component variants only".into()));
    }
    let run = |dt: f64| -> Result<Field> {
        let c = StepperConfig { dt, dt_snap: t_final, ..*cfg };
        Ok(evolve(&State::single(names[0], u0.clone()), t_final, &c, spec)?.last(names[0])?.clone())
    };
    let (a, b, c) = (run(4.0 * h)?, run(2.0 * h)?, run(h)?);
    let d1 = a.sub(&b)?.l2_norm();
    let d2 = b.sub(&c)?.l2_norm();
    let mut rep = ExperimentReport::new("self_convergence", &["dt", "diff_to_next"]);
    rep.row(vec![4.0 * h, d1]);
    rep.row(vec![2.0 * h, d2]);
    rep.scalar("h", h);
    if d2 == 0.0 {
        rep.notes.push("successive runs agree exactly: no order to measure".into());
        return Ok(rep);
    }
    let order = (d1 / d2).log2();
    rep.scalar("order", order);
    rep.check(Check::around("order", order, ORDER_TARGET, ORDER_TOL, Source::Oracle));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn linear_flow_is_exact() {
        let g = Grid1D::new(8.0 * PI, 256).unwrap();
        let u0 = Field::from_fn(g, |x| (-x * x).exp() * (3.0 * x).cos());
        let rep = linear_exactness(&u0, 0.5, &StepperConfig::new(0.05, 0.25)).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
    }
}
