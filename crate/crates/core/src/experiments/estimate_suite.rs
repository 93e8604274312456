//! Grid-refinement stability of every measured estimate ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gauge::EquationSpec;
use crate::norms::{
    check_linear_estimates, check_product_estimate, check_unbound_lemma, free_trajectory, prolong, seeded_samples,
    LinearEstimateParams, REFINEMENT_TOLERANCE,
};
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::{Field, Grid1D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateParams {
    pub samples: usize,
    /// Set by the caller; the CLI takes it from the run-level seed.
    #[serde(skip)]
    pub seed: u64,
    pub linear: LinearEstimateParams,
    /// Regularities for the product estimate.
    pub product_orders: Vec<f64>,
    /// Regularities for the primitive-weighted maximal estimate.
    pub unbound_orders: Vec<f64>,
    /// Sample amplitude used for the nonlinear bound.
    pub unbound_amplitude: f64,
    pub c1: f64,
    pub eps: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            samples: 6,
            seed: 7,
            linear: LinearEstimateParams::default(),
            product_orders: vec![0.5, 1.5],
            unbound_orders: vec![0.0, 0.5],
            unbound_amplitude: 0.1,
            c1: 1.0,
            eps: 0.01,
        }
    }
}

fn change(coarse: f64, fine: f64) -> f64 {
    if coarse == 0.0 && fine == 0.0 {
        0.0
    } else {
        (fine - coarse).abs() / coarse.abs()
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Linear estimates, the product estimate and the nonlinear maximal bound
/// over one seeded sample set, each on the grid and on its refinement.
pub fn estimate_suite(grid: Grid1D, p: &EstimateParams) -> Result<Vec<ExperimentReport>> {
    let samples = seeded_samples(grid, p.samples, p.seed);
    let linear = check_linear_estimates(&samples, &p.linear)?;

    let mut rep = ExperimentReport::new("nonlinear_estimates", &["estimate", "order", "max", "max_refined"]);
    rep.scalar("seed", p.seed as f64);
    let fine: Vec<Field> = samples.iter().map(prolong).collect();
    let pairs = |set: &[Field]| -> Vec<(Field, Field)> {
        (0..set.len()).map(|i| (set[i].clone(), set[(i + 1) % set.len()].clone())).collect()
    };
    let (pc, pf) = (pairs(&samples), pairs(&fine));
    for &r in &p.product_orders {
        let eval = |v: &[(Field, Field)]| -> Result<f64> {
            let ratios: Vec<f64> = v.par_iter().map(|(f, g)| check_product_estimate(f, g, r)).collect::<Result<_>>()?;
            Ok(max_of(&ratios))
        };
        let (a, b) = (eval(&pc)?, eval(&pf)?);
        rep.row(vec![0.0, r, a, b]);
        rep.check(Check::at_most(
            format!("product(r={r}) refinement change"),
            change(a, b),
            REFINEMENT_TOLERANCE,
            Source::Measurement,
        ));
    }
    let spec = EquationSpec::coupled(p.c1, 0.0);
    let t = p.linear.t_final;
    let m = p.linear.intervals;
    for &r in &p.unbound_orders {
        let eval = |set: &[Field], intervals: usize| -> Result<f64> {
            let ratios: Vec<f64> = set
                .par_iter()
                .map(|u| {
                    let mut traj = free_trajectory(&u.scale(p.unbound_amplitude), t, intervals)?;
                    traj.spec = Some(spec);
                    Ok(check_unbound_lemma(&traj, r, p.eps)?.ratio)
                })
                .collect::<Result<_>>()?;
            Ok(max_of(&ratios))
        };
        let (a, b) = (eval(&samples, m)?, eval(&fine, 2 * m)?);
        rep.row(vec![1.0, r, a, b]);
        rep.check(Check::at_most(
            format!("unbound(r={r}) refinement change"),
            change(a, b),
            REFINEMENT_TOLERANCE,
            Source::Measurement,
        ));
    }
    Ok(vec![linear, rep])
}
