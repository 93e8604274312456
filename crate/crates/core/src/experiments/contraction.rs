//! Contraction of the Duhamel map on one time window and on its half.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolve::{picard, PicardConfig, PicardResult};
use crate::gauge::EquationSpec;
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::Field;

/// Every successive-difference ratio must stay below this.
pub const CONTRACTION_BOUND: f64 = 0.9;
/// Accepted range for `ratio_1(T) / ratio_1(T/2)`.
pub const HALVING_RANGE: (f64, f64) = (1.2, 1.7);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionParams {
    /// Quadrature intervals on `[0, T]`; the half window gets half of them.
    pub intervals: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ContractionParams {
    fn default() -> Self {
        Self {
            intervals: 160,
            tol: 1e-10,
            max_iter: 40,
        }
    }
}

fn run(u0: &Field, t: f64, intervals: usize, p: &ContractionParams, spec: &EquationSpec) -> Result<PicardResult> {
    picard(u0, &PicardConfig::new(t, intervals, p.tol, p.max_iter), spec)
}

/// Runs the iteration on `[0, T]` and `[0, T/2]` at the same step and
/// records both ratio sequences.
pub fn contraction_run(
    u0: &Field,
    t_final: f64,
    spec: &EquationSpec,
    p: &ContractionParams,
) -> Result<(ExperimentReport, PicardResult)> {
    if p.intervals < 2 || !p.intervals.is_multiple_of(2) {
        return Err(LabError::Invalid("intervals must be even and at least 2".into()));
    }
    let full = run(u0, t_final, p.intervals, p, spec)?;
    let half = run(u0, 0.5 * t_final, p.intervals / 2, p, spec)?;

    let mut rep = ExperimentReport::new("picard", &["k", "diff", "ratio", "diff_half", "ratio_half"]);
    let len = full.diffs.len().max(half.diffs.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(f64::NAN);
    for k in 0..len {
        rep.row(vec![
            k as f64,
            at(&full.diffs, k),
            if k == 0 { f64::NAN } else { at(&full.ratios, k - 1) },
            at(&half.diffs, k),
            if k == 0 { f64::NAN } else { at(&half.ratios, k - 1) },
        ]);
    }
    rep.scalar("T", t_final);
    rep.scalar("iterations", full.iterations as f64);
    rep.scalar("iterations_half", half.iterations as f64);
    rep.scalar("converged", if full.converged { 1.0 } else { 0.0 });
    rep.check(Check::within(
        "converged",
        if full.converged && half.converged { 1.0 } else { 0.0 },
        1.0,
        1.0,
        Source::Identity,
    ));
    let worst = full.ratios.iter().chain(&half.ratios).copied().fold(0.0, f64::max);
    rep.check(Check::at_most("max_ratio", worst, CONTRACTION_BOUND, Source::Literature));
    match (full.ratios.first(), half.ratios.first()) {
        (Some(&a), Some(&b)) if b > 0.0 => {
            rep.check(Check::within(
                "first_ratio_halving_factor",
                a / b,
                HALVING_RANGE.0,
                HALVING_RANGE.1,
                Source::Literature,
            ));
        }
        _ => rep.notes.push("fewer than two differences: no ratio to compare".into()),
    }
    Ok((rep, full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn odd_intervals_rejected() {
        let g = Grid1D::new(8.0 * PI, 64).unwrap();
        let p = ContractionParams { intervals: 5, ..Default::default() };
        assert!(contraction_run(&Field::zeros(g), 0.8, &EquationSpec::coupled(1.0, 0.0), &p).is_err());
    }

    #[test]
    fn ratios_shrink_for_small_data() {
        let g = Grid1D::new(8.0 * PI, 128).unwrap();
        let u0 = Field::from_fn(g, |x| 0.05 * (-x * x).exp());
        let p = ContractionParams { intervals: 20, ..Default::default() };
        let (rep, _) = contraction_run(&u0, 0.2, &EquationSpec::coupled(1.0, 0.0), &p).unwrap();
        assert!(rep.checks.iter().find(|c| c.name == "max_ratio").unwrap().passed);
    }
}
