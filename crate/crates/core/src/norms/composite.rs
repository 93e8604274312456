use serde::{Deserialize, Serialize};

use super::mixed::{mixed_norm_series, MixedNormSpec};
use crate::error::{LabError, Result};
use crate::evolve::Trajectory;
use crate::gauge::{primitive, weighted, EquationSpec};
use crate::report::NormReport;
use crate::spectral::{apply_multiplier, derivative, Field, MultiplierSpec};

/// Default `ε` in the `⟨∂⟩^{−3/4−ε}` component.
pub const DEFAULT_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composite {
    X,
    Y,
    Z,
    YTilde,
    ZTilde,
    Xr,
    Zs,
    ZCal,
    ZCalPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormParams {
    pub eps: f64,
    /// `r` for `X^r_T`, `s` for `Z^s_T`; ignored otherwise.
    pub order: f64,
    /// Base field name in the trajectory.
    pub field: String,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            order: 0.0,
            field: "u".into(),
        }
    }
}

impl NormParams {
    pub fn order(order: f64) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }
}

const INF: f64 = f64::INFINITY;

/// The four components of `‖f‖_{X_T}`.
pub fn x_norm(series: &[Field], times: &[f64], eps: f64) -> Result<NormReport> {
    let a = mixed_norm_series(series, times, &MixedNormSpec::tx(INF, 2.0))?;
    let b = mixed_norm_series(series, times, &MixedNormSpec::tx(6.0, INF))?;
    let c = mixed_norm_series(series, times, &MixedNormSpec::xt(INF, 2.0).with(MultiplierSpec::derivative(1)))?;
    let d = mixed_norm_series(
        series,
        times,
        &MixedNormSpec::xt(2.0, INF).with(MultiplierSpec::bessel(-0.75 - eps)),
    )?;
    Ok(NormReport::new("X_T")
        .param("eps", eps)
        .param("T", times.last().copied().unwrap_or(0.0))
        .with("LinfT_L2x", a)
        .with("L6T_Linfx", b)
        .with("Linfx_L2T[D]", c)
        .with("L2x_LinfT[<D>^(-3/4-eps)]", d))
}

fn x_total(series: &[Field], times: &[f64], eps: f64) -> Result<f64> {
    Ok(x_norm(series, times, eps)?.total)
}

fn map_series(series: &[Field], f: impl Fn(&Field) -> Result<Field>) -> Result<Vec<Field>> {
    series.iter().map(f).collect()
}

fn bessel_series(series: &[Field], s: f64) -> Result<Vec<Field>> {
    let m = MultiplierSpec::bessel(s);
    map_series(series, |f| apply_multiplier(f, &m))
}

/// `‖f‖_{X^r_T}`: `‖⟨∂⟩^r f‖_X + ‖|∂|^{r+1/8} f‖_{L_T^8 L_x^4}` plus, for
/// non-integer `r` with `k < r ≤ k+1`, `‖∂^{k+1} f‖_{L_x^{4/(r−k)} L_T^{4/(2−(r−k))}}`.
pub fn xr_norm(series: &[Field], times: &[f64], r: f64, eps: f64) -> Result<NormReport> {
    if !(r >= 0.0) {
        return Err(LabError::Invalid(format!("X^r needs r >= 0, got {r}")));
    }
    let mut rep = NormReport::new("X^r_T").param("r", r).param("eps", eps);
    rep.push("X[<D>^r f]", x_total(&bessel_series(series, r)?, times, eps)?);
    rep.push(
        "L8T_L4x[|D|^(r+1/8) f]",
        mixed_norm_series(series, times, &MixedNormSpec::tx(8.0, 4.0).with(MultiplierSpec::riesz(r + 0.125)))?,
    );
    if r.fract() != 0.0 {
        let k = r.ceil() - 1.0;
        let theta = r - k;
        let spec = MixedNormSpec::xt(4.0 / theta, 4.0 / (2.0 - theta)).with(MultiplierSpec::derivative(k as u32 + 1));
        rep.push("fractional[D^(k+1) f]", mixed_norm_series(series, times, &spec)?);
    }
    Ok(rep)
}

/// Per-snapshot primitives `∫_{−L}^x u`.
fn primitives(u: &[Field]) -> Vec<Field> {
    u.iter().map(|f| primitive(f).field).collect()
}

fn sup_all(series: &[Field]) -> f64 {
    series.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

/// `e^{−a·phase} ∂f` snapshot by snapshot.
fn gauged_derivative(phase: &[Field], a: f64, f: &[Field]) -> Vec<Field> {
    phase
        .iter()
        .zip(f)
        .map(|(p, g)| weighted(&p.scale(a), -1.0, &derivative(g, 1)))
        .collect()
}

fn weighted_series(phase: &[Field], a: f64, f: &[Field]) -> Vec<Field> {
    phase.iter().zip(f).map(|(p, g)| weighted(&p.scale(a), -1.0, g)).collect()
}

fn coefficients(traj: &Trajectory) -> Result<EquationSpec> {
    traj.spec
        .ok_or_else(|| LabError::GaugePrecondition("trajectory carries no equation coefficients".into()))
}

pub fn composite_norm(traj: &Trajectory, which: Composite, params: &NormParams) -> Result<NormReport> {
    let u = traj.field(&params.field)?;
    let t = &traj.times;
    let eps = params.eps;
    let name = format!("{which:?}");
    let mut rep = NormReport::new(name).param("eps", eps).param("T", traj.final_time());
    match which {
        Composite::X => return x_norm(u, t, eps),
        Composite::Xr => return xr_norm(u, t, params.order, eps),
        _ => {}
    }
    let spec = coefficients(traj)?;
    let (c1, c2, c3, c4) = (spec.c1, spec.c2, spec.c3, spec.c4);
    let prim = primitives(u);
    let sup_i = sup_all(&prim);
    match which {
        Composite::Y => {
            let vf = match traj.field("vf") {
                Ok(v) => v.to_vec(),
                Err(_) => gauged_derivative(&prim, c1, u),
            };
            rep.push("X[<D>u]", x_total(&bessel_series(u, 1.0)?, t, eps)?);
            rep.push("X[<D>vf]", x_total(&bessel_series(&vf, 1.0)?, t, eps)?);
            rep.push("sup|I|", sup_i);
        }
        Composite::Z | Composite::YTilde => {
            let g = gauged_derivative(&prim, c1, u);
            rep.push("X[u]", x_total(u, t, eps)?);
            rep.push("X[e^(-c1 I) Du]", x_total(&g, t, eps)?);
            rep.push("sup|I|", sup_i);
            if which == Composite::YTilde {
                rep.push("X[<D>(e^(-c1 I) Du)]", x_total(&bessel_series(&g, 1.0)?, t, eps)?);
            }
        }
        Composite::ZTilde => {
            let uf = weighted_series(&prim, c2, u);
            let vf = gauged_derivative(&prim, c1 - c2, &uf);
            rep.push("X[e^(-c2 I) u]", x_total(&uf, t, eps)?);
            rep.push("X[e^(-(c1-c2) I) D(e^(-c2 I) u)]", x_total(&vf, t, eps)?);
            rep.push("sup|I|", sup_i);
        }
        Composite::Zs => {
            let r = params.order - 1.0;
            let g = gauged_derivative(&prim, c1, u);
            rep.push("X^r[u]", xr_norm(u, t, r, eps)?.total);
            rep.push("X^r[e^(-c1 I) Du]", xr_norm(&g, t, r, eps)?.total);
            rep.push("sup|I|", sup_i);
            rep.params.insert("s".into(), params.order);
        }
        Composite::ZCal => {
            let du: Vec<Field> = u.iter().map(|f| derivative(f, 1)).collect();
            let w: Vec<Field> = u
                .iter()
                .zip(&du)
                .map(|(f, d)| weighted(&d.scale(c4), -1.0, &derivative(f, 2)))
                .collect();
            let k: Vec<Field> = prim
                .iter()
                .zip(u)
                .map(|(p, f)| p.axpby(c1, f, c3))
                .collect::<Result<_>>()?;
            let wf = gauged_derivative(&k, 1.0, &w);
            rep.push("X[u]", x_total(u, t, eps)?);
            rep.push("X[Du]", x_total(&du, t, eps)?);
            rep.push("X[e^(-c4 Du) D^2u]", x_total(&w, t, eps)?);
            rep.push("X[e^(-c1 I - c3 u) D(e^(-c4 Du) D^2u)]", x_total(&wf, t, eps)?);
            rep.push("sup|c1 I|", c1.abs() * sup_i);
        }
        Composite::ZCalPrime => {
            let g: Vec<Field> = u.iter().map(|f| weighted(&f.scale(c3), -1.0, &derivative(f, 1))).collect();
            let h = gauged_derivative(&prim, c1, &g);
            rep.push("X[u]", x_total(u, t, eps)?);
            rep.push("X[e^(-c3 u) Du]", x_total(&g, t, eps)?);
            rep.push("X[e^(-c1 I) D(e^(-c3 u) Du)]", x_total(&h, t, eps)?);
            rep.push("sup|c1 I|", c1.abs() * sup_i);
        }
        Composite::X | Composite::Xr => unreachable!(),
    }
    Ok(rep)
}

/// `‖u‖_{X̃^r_T} = ‖u‖_{X^r_T} + ‖e^{−c1 ∫u} ∂u‖_{X^r_T}`.
pub fn xr_tilde(u: &[Field], times: &[f64], c1: f64, r: f64, eps: f64) -> Result<f64> {
    let prim = primitives(u);
    let g = gauged_derivative(&prim, c1, u);
    Ok(xr_norm(u, times, r, eps)?.total + xr_norm(&g, times, r, eps)?.total)
}
