use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::composite::{x_norm, xr_tilde};
use super::mixed::{mixed_norm_series, MixedNormSpec};
use crate::error::{LabError, Result};
use crate::evolve::Trajectory;
use crate::gauge::{primitive, weighted};
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::{
    airy_propagate, apply_multiplier, derivative, fft, homogeneous_sobolev_norm, product, sobolev_norm, Field,
    Grid1D, MultiplierSpec,
};

/// Largest admissible relative growth of a max ratio under 2× refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.2;
const ADMISSIBILITY_TOL: f64 = 1e-12;

/// Exponent triple `(q, r, s)` of `‖|∂|^s 𝒰(t)u0‖_{L_t^q L_x^r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzTriple {
    #[serde(with = "crate::report::extended")]
    pub q: f64,
    #[serde(with = "crate::report::extended")]
    pub r: f64,
    pub s: f64,
}

/// `2 ≤ q, r ≤ ∞`, `0 ≤ s ≤ 1/q` and `−s + 3/q + 1/r = 1/2`.
pub fn check_admissible(t: StrichartzTriple) -> Result<()> {
    let StrichartzTriple { q, r, s } = t;
    let fail = |reason: String| Err(LabError::Inadmissible { q, r, s, reason });
    if !(q >= 2.0 && r >= 2.0) {
        return fail("q and r must lie in [2, ∞]".into());
    }
    if !(s >= 0.0 && s <= 1.0 / q + ADMISSIBILITY_TOL) {
        return fail(format!("s must lie in [0, 1/q] = [0, {}]", 1.0 / q));
    }
    let lhs = -s + 3.0 / q + 1.0 / r;
    if (lhs - 0.5).abs() > ADMISSIBILITY_TOL {
        return fail(format!("-s + 3/q + 1/r = {lhs} differs from 1/2"));
    }
    Ok(())
}

/// Snapshots of the free evolution `𝒰(t)u0` on `[0, T]`.
pub fn free_trajectory(u0: &Field, t_final: f64, intervals: usize) -> Result<Trajectory> {
    let h = t_final / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|j| j as f64 * h).collect();
    let s = u0.to_spectral();
    Trajectory::from_fn(*u0.grid(), "u", &times, |t| airy_propagate(&s, t).to_physical())
}

/// Spectral prolongation to the grid with twice the points.
pub fn prolong(f: &Field) -> Field {
    let fine = f.grid().refined();
    let c = fft::pad(&f.coefs(), fine.n());
    Field::spectral(fine, c).expect("refined length").to_physical()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn strichartz_ratio(u0: &Field, t_final: f64, intervals: usize, triple: StrichartzTriple) -> Result<f64> {
    check_admissible(triple)?;
    let tr = free_trajectory(u0, t_final, intervals)?;
    let spec = MixedNormSpec::tx(triple.q, triple.r).with(MultiplierSpec::riesz(triple.s));
    Ok(ratio(mixed_norm_series(tr.field("u")?, &tr.times, &spec)?, u0.l2_norm()))
}

/// `‖∂𝒰(t)u0‖_{L_x^∞ L_T²} / ‖u0‖_{L²}`.
pub fn kato_ratio(u0: &Field, t_final: f64, intervals: usize) -> Result<f64> {
    let tr = free_trajectory(u0, t_final, intervals)?;
    let spec = MixedNormSpec::xt(f64::INFINITY, 2.0).with(MultiplierSpec::derivative(1));
    Ok(ratio(mixed_norm_series(tr.field("u")?, &tr.times, &spec)?, u0.l2_norm()))
}

/// `‖𝒰(t)u0‖_{L_x² L_T^∞} / (⟨T⟩^ρ ‖u0‖_{H^s})`.
pub fn maximal_ratio(u0: &Field, t_final: f64, intervals: usize, s: f64, rho: f64) -> Result<f64> {
    if !(s > 0.75 && rho > 0.75) {
        return Err(LabError::Invalid(format!("maximal estimate needs s > 3/4 and rho > 3/4, got {s}, {rho}")));
    }
    let tr = free_trajectory(u0, t_final, intervals)?;
    let lhs = mixed_norm_series(tr.field("u")?, &tr.times, &MixedNormSpec::xt(2.0, f64::INFINITY))?;
    let bracket = (1.0 + t_final * t_final).sqrt().powf(rho);
    Ok(ratio(lhs, bracket * sobolev_norm(u0, s)))
}

/// `‖fg‖_{H^r} / (‖f‖_{H^r}‖g‖_∞ + ‖f‖_{H^{r−[r]}}‖g‖_{Ḣ^{[r]+1}})`.
pub fn check_product_estimate(f: &Field, g: &Field, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(LabError::Invalid(format!("product estimate needs r >= 0, got {r}")));
    }
    let fg = product(&[f, g], 2)?;
    let fl = r.floor();
    let rhs = sobolev_norm(f, r) * g.sup_norm() + sobolev_norm(f, r - fl) * homogeneous_sobolev_norm(g, fl + 1.0);
    Ok(ratio(sobolev_norm(&fg, r), rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundRatio {
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Both sides vanish; the ratio is reported as 0.
    pub degenerate: bool,
}

/// Ratio of `‖⟨∂⟩^r u‖_{L_x²L_T^∞}` to the gauge-side bound.
///
/// `r = 0`: `e^{(3/2)‖Λ‖}(‖u‖_X + ‖u‖_X² + ‖𝔳‖_X²)`;
/// `r > 0`: `e^{2‖Λ‖}(A + A^{[r]+3})` with `A = ‖u‖_{X̃^{max(r−1/4+2ε, 0)}}`.
pub fn check_unbound_lemma(traj: &Trajectory, r: f64, eps: f64) -> Result<UnboundRatio> {
    let spec = traj
        .spec
        .ok_or_else(|| LabError::GaugePrecondition("trajectory carries no equation coefficients".into()))?;
    let u = traj.field("u")?;
    let c1 = spec.c1;
    let prim: Vec<Field> = u.iter().map(|f| primitive(f).field).collect();
    let lam = c1.abs() * prim.iter().map(|p| p.sup_norm()).fold(0.0, f64::max);
    let lhs_series: Vec<Field> = if r == 0.0 {
        u.to_vec()
    } else {
        let m = MultiplierSpec::bessel(r);
        u.iter().map(|f| apply_multiplier(f, &m)).collect::<Result<_>>()?
    };
    let lhs = mixed_norm_series(&lhs_series, &traj.times, &MixedNormSpec::xt(2.0, f64::INFINITY))?;
    let rhs = if r == 0.0 {
        let vf: Vec<Field> = match traj.field("vf") {
            Ok(v) => v.to_vec(),
            Err(_) => prim
                .iter()
                .zip(u)
                .map(|(p, f)| weighted(&p.scale(c1), -1.0, &derivative(f, 1)))
                .collect(),
        };
        let xu = x_norm(u, &traj.times, eps)?.total;
        let xv = x_norm(&vf, &traj.times, eps)?.total;
        (1.5 * lam).exp() * (xu + xu * xu + xv * xv)
    } else {
        let a = xr_tilde(u, &traj.times, c1, (r - 0.25 + 2.0 * eps).max(0.0), eps)?;
        (2.0 * lam).exp() * (a + a.powi(r.floor() as i32 + 3))
    };
    let degenerate = lhs == 0.0 && rhs == 0.0;
    Ok(UnboundRatio {
        ratio: ratio(lhs, rhs),
        lhs,
        rhs,
        degenerate,
    })
}

/// Three random Gaussian wave packets per sample, fixed by `seed`.
pub fn seeded_samples(grid: Grid1D, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let packets: Vec<[f64; 5]> = (0..3)
                .map(|_| {
                    [
                        rng.gen_range(0.5..1.0),
                        rng.gen_range(-4.0..4.0),
                        rng.gen_range(0.8..2.0),
                        rng.gen_range(0.0..3.0),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    ]
                })
                .collect();
            Field::from_fn(grid, |x| {
                packets
                    .iter()
                    .map(|[a, c, w, k, ph]| a * (-((x - c) / w).powi(2)).exp() * (k * x + ph).cos())
                    .sum()
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearEstimateParams {
    pub t_final: f64,
    pub intervals: usize,
    pub triples: Vec<StrichartzTriple>,
    pub maximal_s: f64,
    pub maximal_rho: f64,
}

impl Default for LinearEstimateParams {
    fn default() -> Self {
        Self {
            t_final: 0.25,
            intervals: 50,
            triples: vec![
                StrichartzTriple { q: 6.0, r: f64::INFINITY, s: 0.0 },
                StrichartzTriple { q: 8.0, r: 4.0, s: 1.0 / 8.0 },
                StrichartzTriple { q: f64::INFINITY, r: 2.0, s: 0.0 },
            ],
            maximal_s: 0.8,
            maximal_rho: 0.8,
        }
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn median(v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    w.sort_by(|a, b| a.total_cmp(b));
    if w.is_empty() {
        0.0
    } else if w.len() % 2 == 1 {
        w[w.len() / 2]
    } else {
        0.5 * (w[w.len() / 2 - 1] + w[w.len() / 2])
    }
}

/// Ratios of the linear estimates over a sample set, on the given grid and
/// on its 2× refinement (samples prolonged spectrally, snapshot spacing halved).
pub fn check_linear_estimates(samples: &[Field], params: &LinearEstimateParams) -> Result<ExperimentReport> {
    for t in &params.triples {
        check_admissible(*t)?;
    }
    let mut rep = ExperimentReport::new("linear_estimates", &["estimate", "refined", "max", "median"]);
    let fine: Vec<Field> = samples.iter().map(prolong).collect();
    let mut run = |label: String, id: f64, f: &(dyn Fn(&Field, usize) -> Result<f64> + Sync)| -> Result<()> {
        let coarse: Vec<f64> = samples
            .par_iter()
            .map(|u| f(u, params.intervals))
            .collect::<Result<_>>()?;
        let refined: Vec<f64> = fine
            .par_iter()
            .map(|u| f(u, 2 * params.intervals))
            .collect::<Result<_>>()?;
        let (mc, mf) = (max_of(&coarse), max_of(&refined));
        rep.row(vec![id, 0.0, mc, median(&coarse)]);
        rep.row(vec![id, 1.0, mf, median(&refined)]);
        rep.scalar(format!("{label}.max"), mc);
        rep.scalar(format!("{label}.max_refined"), mf);
        rep.check(Check::at_most(
            format!("{label} refinement change"),
            ratio((mf - mc).abs(), mc),
            REFINEMENT_TOLERANCE,
            Source::Measurement,
        ));
        Ok(())
    };
    let t = params.t_final;
    for (i, tr) in params.triples.iter().enumerate() {
        let tr = *tr;
        run(format!("strichartz(q={},r={},s={})", tr.q, tr.r, tr.s), i as f64, &|u, m| {
            strichartz_ratio(u, t, m, tr)
        })?;
    }
    let base = params.triples.len() as f64;
    run("kato".into(), base, &|u, m| kato_ratio(u, t, m))?;
    let (s, rho) = (params.maximal_s, params.maximal_rho);
    run(format!("maximal(s={s},rho={rho})"), base + 1.0, &|u, m| maximal_ratio(u, t, m, s, rho))?;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn admissibility_gate() {
        assert!(check_admissible(StrichartzTriple { q: 6.0, r: f64::INFINITY, s: 0.0 }).is_ok());
        assert!(check_admissible(StrichartzTriple { q: 8.0, r: 4.0, s: 0.125 }).is_ok());
        assert!(matches!(
            check_admissible(StrichartzTriple { q: 2.0, r: 2.0, s: 0.0 }),
            Err(LabError::Inadmissible { .. })
        ));
        assert!(check_admissible(StrichartzTriple { q: 6.0, r: 1e6, s: 0.0 }).is_err());
    }

    #[test]
    fn constant_g_gives_unit_ratio() {
        let g = Grid1D::new(8.0 * PI, 256).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp() * (2.0 * x).cos());
        let one = Field::from_fn(g, |_| 1.0);
        let r = check_product_estimate(&f, &one, 1.5).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn product_ratio_scale_invariant_in_g() {
        let g = Grid1D::new(8.0 * PI, 256).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp());
        let h = Field::from_fn(g, |x| (-(x - 1.0) * (x - 1.0) / 4.0).exp());
        let a = check_product_estimate(&f, &h, 1.5).unwrap();
        let b = check_product_estimate(&f, &h.scale(-3.7), 1.5).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn unbound_on_zero_is_degenerate() {
        let g = Grid1D::new(4.0 * PI, 64).unwrap();
        let mut t = free_trajectory(&Field::zeros(g), 0.1, 5).unwrap();
        t.spec = Some(crate::gauge::EquationSpec::coupled(1.0, 0.0));
        let r = check_unbound_lemma(&t, 0.0, 0.01).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn samples_are_deterministic() {
        let g = Grid1D::new(8.0 * PI, 256).unwrap();
        assert_eq!(seeded_samples(g, 3, 7), seeded_samples(g, 3, 7));
        assert_ne!(seeded_samples(g, 1, 7), seeded_samples(g, 1, 8));
    }
}
