//! T-sweeps of the composite solution norms against the data norm.

use serde::{Deserialize, Serialize};

use super::fit::fit_loglog;
use crate::error::{LabError, Result};
use crate::evolve::{evolve, State, StepperConfig, Trajectory};
use crate::gauge::{xs_norm, EquationSpec, Variant};
use crate::norms::{composite_norm, free_trajectory, Composite, NormParams};
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::Field;

/// Target exponent of the nonlinear excess and the allowed deviation.
pub const EXCESS_EXPONENT: f64 = 0.5;
pub const EXCESS_EXPONENT_TOL: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AprioriVariant {
    /// `Z_T` for the direct equation with `c2 = 0`.
    Z,
    /// `Z̃_T` for the direct equation.
    ZTilde,
    /// `𝒵_T` for the quadratic equation.
    ZCal,
    /// `𝒵'_T` for the quadratic equation with `c4 = 0`.
    ZCalPrime,
}

impl AprioriVariant {
    fn composite(self) -> Composite {
        match self {
            AprioriVariant::Z => Composite::Z,
            AprioriVariant::ZTilde => Composite::ZTilde,
            AprioriVariant::ZCal => Composite::ZCal,
            AprioriVariant::ZCalPrime => Composite::ZCalPrime,
        }
    }

    fn flow(self, spec: &EquationSpec) -> Result<EquationSpec> {
        match self {
            AprioriVariant::Z => {
                if spec.c2 != 0.0 {
                    return Err(LabError::Invalid("the Z_T sweep needs c2 = 0".into()));
                }
                Ok(spec.with_variant(Variant::DirectKdv))
            }
            AprioriVariant::ZTilde => Ok(spec.with_variant(Variant::DirectKdv)),
            AprioriVariant::ZCal => Ok(spec.with_variant(Variant::Quadratic)),
            AprioriVariant::ZCalPrime => {
                if spec.c4 != 0.0 {
                    return Err(LabError::Invalid("the 𝒵'_T sweep needs c4 = 0".into()));
                }
                Ok(spec.with_variant(Variant::Quadratic))
            }
        }
    }

    /// `e^{a·Z} Z (1 + Z^p)` from the matching a-priori inequality; `c3`
    /// stands in for the unspecified exponential rate of the quadratic case.
    fn growth(self, z: f64, spec: &EquationSpec, c3: f64) -> f64 {
        let (a, p) = match self {
            AprioriVariant::Z => (2.5 * spec.c1.abs(), 3),
            AprioriVariant::ZTilde => (5.0 * (spec.c1.abs() + spec.c2.abs()), 4),
            AprioriVariant::ZCal | AprioriVariant::ZCalPrime => (c3, 4),
        };
        (a * z).exp() * z * (1.0 + z.powi(p))
    }
}

/// Sweep settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AprioriParams {
    pub variant: AprioriVariant,
    /// Sweep times, each a multiple of the snapshot spacing.
    pub times: Vec<f64>,
    #[serde(default = "default_rate")]
    pub exp_rate: f64,
    #[serde(default)]
    pub norm: NormParams,
}

fn default_rate() -> f64 {
    1.0
}

impl AprioriParams {
    pub fn new(variant: AprioriVariant, times: Vec<f64>) -> Self {
        Self {
            variant,
            times,
            exp_rate: default_rate(),
            norm: NormParams::default(),
        }
    }
}

fn snapshots_until(traj: &Trajectory, t: f64) -> Result<usize> {
    let h = traj.dt_snap();
    let k = (t / h).round();
    if (k * h - t).abs() > 1e-9 * t.max(1.0) || k as usize >= traj.len() {
        return Err(LabError::Invalid(format!("sweep time {t} is not a snapshot time of the run")));
    }
    Ok(k as usize + 1)
}

/// Measures the left-hand norm on `[0, T]` for the nonlinear flow and for the
/// free evolution of the same data. Their difference is the nonlinear
/// excess, the part the a-priori inequality charges to its `T^{1/2}` term.
///
/// `C1` is the largest ratio of free-evolution norm to `‖u0‖_{𝒳¹}`; `C2` the
/// smallest constant making the inequality hold at every sweep point with
/// that `C1`.
pub fn apriori_diagnostic(
    u0: &Field,
    spec: &EquationSpec,
    params: &AprioriParams,
    cfg: &StepperConfig,
) -> Result<ExperimentReport> {
    let times = &params.times;
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Invalid("sweep times must be positive and increasing".into()));
    }
    let flow = params.variant.flow(spec)?;
    let t_max = *times.last().expect("nonempty");
    let mut nonlinear = evolve(&State::single("u", u0.clone()), t_max, cfg, &flow)?;
    let steps = ((t_max / cfg.dt_snap).round() as usize).max(1);
    let mut free = free_trajectory(u0, t_max, steps)?;
    free.spec = Some(flow);
    nonlinear.spec = Some(flow);
    let which = params.variant.composite();
    let norm = |traj: &Trajectory, count: usize| -> Result<f64> {
        Ok(composite_norm(&traj.truncated(count), which, &params.norm)?.total)
    };
    let data = xs_norm(u0, 1.0).total;
    let left0 = norm(&nonlinear, 1)?;

    let mut rep = ExperimentReport::new(
        "apriori",
        &["T", "left", "free", "excess", "left_minus_start"],
    );
    rep.scalar("data_x1", data);
    rep.scalar("left_at_zero", left0);
    rep.scalar("edge_drift", nonlinear.edge_drift);
    let mut excess = Vec::with_capacity(times.len());
    let mut offset = Vec::with_capacity(times.len());
    let mut lefts = Vec::with_capacity(times.len());
    let mut frees = Vec::with_capacity(times.len());
    for &t in times {
        let k = snapshots_until(&nonlinear, t)?;
        let l = norm(&nonlinear, k)?;
        let f = norm(&free, k)?;
        rep.row(vec![t, l, f, l - f, l - left0]);
        excess.push((l - f).abs());
        offset.push((l - left0).abs());
        lefts.push(l);
        frees.push(f);
    }
    let c1 = if data > 0.0 {
        frees.iter().copied().fold(0.0, f64::max) / data
    } else {
        0.0
    };
    let c2 = times
        .iter()
        .zip(&lefts)
        .map(|(&t, &l)| {
            let g = params.variant.growth(l, spec, params.exp_rate);
            let over = (l - c1 * data).max(0.0);
            if over == 0.0 {
                0.0
            } else {
                over / (t.sqrt() * g)
            }
        })
        .fold(0.0, f64::max);
    rep.scalar("C1", c1);
    rep.scalar("C2", c2);
    if data == 0.0 {
        rep.notes.push("zero data: both sides vanish".into());
        return Ok(rep);
    }
    if times.len() >= 4 && excess.iter().all(|e| *e > 0.0) {
        let fit = fit_loglog(times, &excess)?;
        rep.check(Check::around(
            "excess_exponent",
            fit.slope,
            EXCESS_EXPONENT,
            EXCESS_EXPONENT_TOL,
            Source::Literature,
        ));
        rep.fits.insert("excess".into(), fit);
    }
    if times.len() >= 4 && offset.iter().all(|e| *e > 0.0) {
        rep.fits.insert("left_minus_start".into(), fit_loglog(times, &offset)?);
    }
    Ok(rep)
}
