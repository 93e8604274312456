use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolve::Trajectory;
use crate::spectral::{apply_multiplier, Field, MultiplierSpec};

/// Which variable the outer norm is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outer {
    /// `L_x^p L_T^q`
    X,
    /// `L_T^p L_x^q`
    T,
}

/// `‖M f‖_{L^p_{outer} L^q_{inner}}`; exponents may be `f64::INFINITY`.
#[derive(Clone, Debug)]
pub struct MixedNormSpec {
    pub outer: Outer,
    pub p: f64,
    pub q: f64,
    pub multiplier: Option<MultiplierSpec>,
}

impl MixedNormSpec {
    pub fn new(outer: Outer, p: f64, q: f64) -> Self {
        Self {
            outer,
            p,
            q,
            multiplier: None,
        }
    }

    /// `L_T^p L_x^q`
    pub fn tx(p: f64, q: f64) -> Self {
        Self::new(Outer::T, p, q)
    }

    /// `L_x^p L_T^q`
    pub fn xt(p: f64, q: f64) -> Self {
        Self::new(Outer::X, p, q)
    }

    pub fn with(mut self, m: MultiplierSpec) -> Self {
        self.multiplier = Some(m);
        self
    }

    fn validate(&self) -> Result<()> {
        for e in [self.p, self.q] {
            if !(e >= 1.0) {
                return Err(LabError::Invalid(format!("mixed-norm exponent must be >= 1 or infinite, got {e}")));
            }
        }
        Ok(())
    }
}

/// Trapezoid weights over possibly non-uniform nodes.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for j in 0..n.saturating_sub(1) {
        let h = times[j + 1] - times[j];
        w[j] += h / 2.0;
        w[j + 1] += h / 2.0;
    }
    w
}

/// Weighted `ℓ^p` norm of `|values|`; `p = ∞` is the maximum.
fn lp<I: Iterator<Item = (f64, f64)>>(pairs: I, p: f64) -> f64 {
    if p.is_infinite() {
        pairs.fold(0.0, |m, (v, _)| m.max(v.abs()))
    } else {
        pairs.map(|(v, w)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Mixed norm of a time series of fields sampled at `times` on `[0, T]`.
///
/// Time integrals use trapezoid weights over the snapshots, space integrals
/// the Riemann weight `dx`. A single snapshot is a degenerate interval: every
/// finite time exponent integrates to 0, while `L_T^∞` returns the snapshot.
pub fn mixed_norm_series(series: &[Field], times: &[f64], spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    if series.is_empty() {
        return Err(LabError::State("empty series".into()));
    }
    let dx = series[0].grid().dx();
    let rows: Vec<Vec<f64>> = match &spec.multiplier {
        Some(m) => series
            .iter()
            .map(|f| apply_multiplier(f, m).map(|g| g.samples()))
            .collect::<Result<_>>()?,
        None => series.iter().map(|f| f.samples()).collect(),
    };
    let wt = trapezoid_weights(times);
    let nx = rows[0].len();
    Ok(match spec.outer {
        Outer::T => {
            let inner: Vec<f64> = rows.iter().map(|r| lp(r.iter().map(|&v| (v, dx)), spec.q)).collect();
            lp(inner.into_iter().zip(wt.iter().copied()), spec.p)
        }
        Outer::X => {
            let inner: Vec<f64> = (0..nx)
                .map(|i| lp(rows.iter().zip(&wt).map(|(r, &w)| (r[i], w)), spec.q))
                .collect();
            lp(inner.into_iter().map(|v| (v, dx)), spec.p)
        }
    })
}

pub fn mixed_norm(traj: &Trajectory, name: &str, spec: &MixedNormSpec) -> Result<f64> {
    mixed_norm_series(traj.field(name)?, &traj.times, spec)
}
