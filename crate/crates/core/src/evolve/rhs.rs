use num_complex::Complex64;

use super::State;
use crate::error::{LabError, Result};
use crate::gauge::{EquationSpec, Variant, OVERFLOW_LIMIT};
use crate::spectral::{check_padding, fft, sup, Field, Grid1D, PaddedGrid};

/// Evaluates nonlinear right-hand sides `N` in `ℒ(state) = N(state)` with
/// `ℒ = ∂_t + ∂³/3`.
///
/// Every term, including exponential weights and nonlocal primitives, is
/// formed pointwise on a zero-padded grid and truncated back, so polynomial
/// parts are alias-free up to degree `2·pad − 1`.
#[derive(Clone, Debug)]
pub struct RhsEngine {
    spec: EquationSpec,
    padded: PaddedGrid,
    ik: Vec<Complex64>,
}

fn overflow(exponent: &[f64]) -> Result<()> {
    let s = exponent.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) });
    if !(s <= OVERFLOW_LIMIT) {
        return Err(LabError::GaugeOverflow {
            sup: s,
            limit: OVERFLOW_LIMIT,
        });
    }
    Ok(())
}

impl RhsEngine {
    pub fn new(grid: Grid1D, spec: EquationSpec, pad_factor: usize) -> Result<Self> {
        spec.validate()?;
        check_padding(pad_factor, 2)?;
        let nyq = grid.nyquist_slot();
        let ik = (0..grid.n())
            .map(|j| if j == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, grid.frequency(j)) })
            .collect();
        Ok(Self {
            spec,
            padded: PaddedGrid::new(grid, pad_factor)?,
            ik,
        })
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid1D {
        self.padded.grid()
    }

    fn deriv(&self, c: &[Complex64], k: u32) -> Vec<Complex64> {
        c.iter().zip(&self.ik).map(|(a, b)| a * b.powu(k)).collect()
    }

    /// Padded samples of `∂^k` of the field with coefficients `c`.
    fn lift(&self, c: &[Complex64], k: u32) -> Vec<f64> {
        if k == 0 {
            self.padded.lift_coefs(c)
        } else {
            self.padded.lift_coefs(&self.deriv(c, k))
        }
    }

    /// Padded samples of `∫_{−L}^x` of the field with coefficients `c`.
    fn lift_primitive(&self, c: &[Complex64]) -> Vec<f64> {
        fft::primitive_from_coefs(self.grid().half_length(), c, self.padded.len())
    }

    fn project(&self, v: &[f64]) -> Vec<Complex64> {
        self.padded.project_coefs(v)
    }

    /// Right-hand sides for a state given as coefficient vectors in layout order.
    pub fn eval_coefs(&self, state: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let want = self.spec.variant.state_names().len();
        if state.len() != want {
            return Err(LabError::State(format!("expected {want} components, got {}", state.len())));
        }
        let EquationSpec { c1, c2, c3, c4, .. } = self.spec;
        let m = self.padded.len();
        match self.spec.variant {
            Variant::DirectKdv | Variant::Quadratic => {
                let u = self.lift(&state[0], 0);
                let ux = self.lift(&state[0], 1);
                let uxx = self.lift(&state[0], 2);
                let out: Vec<f64> = (0..m)
                    .map(|i| c1 * u[i] * uxx[i] + c2 * ux[i] * ux[i] + c3 * ux[i] * uxx[i] + c4 * uxx[i] * uxx[i])
                    .collect();
                Ok(vec![self.project(&out)])
            }
            Variant::Kdv => {
                let v = self.lift(&state[0], 0);
                let vx = self.lift(&state[0], 1);
                let out: Vec<f64> = (0..m).map(|i| 2.0 * c2 * v[i] * vx[i]).collect();
                Ok(vec![self.project(&out)])
            }
            Variant::Coupled => self.coupled(&state[0], &state[1]),
            Variant::DoubleGauged => self.double_gauged(&state[0], &state[1]),
            Variant::QuadraticGauged => self.quadratic_gauged(&state[0], &state[1], &state[2]),
        }
    }

    fn coupled(&self, cu: &[Complex64], cv: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let EquationSpec { c1, c2, .. } = self.spec;
        let m = self.padded.len();
        let u = self.lift(cu, 0);
        let v = self.lift(cv, 0);
        let vx = self.lift(cv, 1);
        let lambda: Vec<f64> = self.lift_primitive(cu).into_iter().map(|p| c1 * p).collect();
        overflow(&lambda)?;
        let e: Vec<f64> = lambda.iter().map(|l| l.exp()).collect();
        let dens: Vec<f64> = (0..m).map(|i| e[i] * e[i] * v[i] * v[i]).collect();
        let prim = if c1 * (c1 - c2) != 0.0 { self.padded.primitive(&dens) } else { vec![0.0; m] };
        let mut nu = vec![0.0; m];
        let mut nv = vec![0.0; m];
        for i in 0..m {
            let inner = vx[i] + c1 * u[i] * v[i];
            nu[i] = c1 * e[i] * u[i] * inner + c2 * dens[i];
            nv[i] = 2.0 * c2 * e[i] * v[i] * inner
                + c1 * c1 * u[i] * u[i] * vx[i]
                + c1 * (c1 - c2) * v[i] * prim[i]
                + 2.0 / 3.0 * c1.powi(3) * u[i].powi(3) * v[i];
        }
        Ok(vec![self.project(&nu), self.project(&nv)])
    }

    fn double_gauged(&self, cu: &[Complex64], cv: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let EquationSpec { c1, c2, .. } = self.spec;
        let m = self.padded.len();
        let uf = self.lift(cu, 0);
        let v = self.lift(cv, 0);
        let vx = self.lift(cv, 1);
        let pu = self.lift_primitive(cu);
        // ∂Ξ = c2 e^Ξ 𝔲 integrates to e^{−Ξ} = 1 − c2 ∫𝔲
        let mut xi = vec![0.0; m];
        let mut prim_u = vec![0.0; m];
        for i in 0..m {
            let base = 1.0 - c2 * pu[i];
            if !(base > 0.0) {
                return Err(LabError::GaugeOverflow {
                    sup: f64::INFINITY,
                    limit: OVERFLOW_LIMIT,
                });
            }
            xi[i] = -base.ln();
            prim_u[i] = if c2 != 0.0 { xi[i] / c2 } else { pu[i] };
        }
        overflow(&xi)?;
        let theta: Vec<f64> = prim_u.iter().map(|p| (c1 - c2) * p).collect();
        overflow(&theta)?;
        let du: Vec<f64> = (0..m)
            .map(|i| (xi[i] + theta[i]).exp() * v[i] + c2 * (2.0 * xi[i]).exp() * uf[i] * uf[i])
            .collect();
        let jint = self.padded.primitive(&du.iter().map(|d| d * d).collect::<Vec<_>>());
        let a_uv = 4.0 * c1 * c2 - 2.0 * c2 * c2;
        let a_u3v = 2.0 / 3.0 * c1.powi(3) + 8.0 * c1 * c2 * c2 - 4.0 * c2.powi(3);
        let a_u5 = 4.0 * c1 * c2.powi(3) - 2.0 * c2.powi(4);
        let mut nu = vec![0.0; m];
        let mut nv = vec![0.0; m];
        for i in 0..m {
            let (x, t, w, q, qx) = (xi[i], theta[i], uf[i], v[i], vx[i]);
            nu[i] = (c1 - c2) * (x + t).exp() * w * qx
                + c1 * c1 * (2.0 * x + t).exp() * w * w * q
                + (c1 - c2) * c2 * w * jint[i]
                + (c1 - c2 / 3.0) * c2 * c2 * (3.0 * x).exp() * w.powi(4);
            nv[i] = c1 * c1 * (2.0 * x).exp() * w * w * qx
                + a_uv * (2.0 * x + t).exp() * w * q * q
                + a_u3v * (3.0 * x).exp() * w.powi(3) * q
                + c1 * (c1 - c2) * q * jint[i]
                + a_u5 * (4.0 * x - t).exp() * w.powi(5);
        }
        Ok(vec![self.project(&nu), self.project(&nv)])
    }

    fn quadratic_gauged(
        &self,
        cu: &[Complex64],
        cux: &[Complex64],
        cw: &[Complex64],
    ) -> Result<Vec<Vec<Complex64>>> {
        let EquationSpec { c1, c2, c3, c4, .. } = self.spec;
        let m = self.padded.len();
        let u = self.lift(cu, 0);
        let ux = self.lift(cux, 0);
        let w = self.lift(cw, 0);
        let wx = self.lift(cw, 1);
        let wxx = self.lift(cw, 2);
        let jf: Vec<f64> = ux.iter().map(|a| 2.0 * c4 * a).collect();
        overflow(&jf)?;
        let mut nu = vec![0.0; m];
        let mut nux = vec![0.0; m];
        let mut nw = vec![0.0; m];
        for i in 0..m {
            let ej = jf[i].exp();
            let u2 = ej * w[i];
            let u3 = ej * wx[i] + 2.0 * c4 * u2 * u2;
            let a = c1 * u[i] + c3 * ux[i];
            nu[i] = c1 * u[i] * u2 + c2 * ux[i] * ux[i] + c3 * ux[i] * u2 + c4 * u2 * u2;
            nux[i] = (c1 + 2.0 * c2) * ux[i] * u2 + a * u3 + c3 * u2 * u2 + 2.0 * c4 * u2 * u3;
            let grad = 2.0 * (c1 + c2) * ux[i]
                + 3.0 * c3 * u2
                + 4.0 * c1 * c4 * u[i] * u2
                + 4.0 * c3 * c4 * ux[i] * u2
                + 4.0 * c4 * c4 * u2 * u2;
            let pot = (c1 + 2.0 * c2) * u2 * u2
                + 2.0 * c1 * c4 * ux[i] * u2 * u2
                + 4.0 * c3 * c4 * u2.powi(3)
                + 4.0 * c1 * c4 * c4 * u[i] * u2.powi(3)
                + 4.0 * c3 * c4 * c4 * ux[i] * u2.powi(3)
                + 16.0 / 3.0 * c4.powi(3) * u2.powi(4);
            nw[i] = a * wxx[i] + wx[i] * grad + pot / ej;
        }
        Ok(vec![self.project(&nu), self.project(&nux), self.project(&nw)])
    }

    /// Right-hand sides as named physical fields.
    pub fn eval(&self, state: &State) -> Result<State> {
        state.check_layout(&self.spec)?;
        if *state.grid() != *self.grid() {
            return Err(LabError::GridMismatch);
        }
        let coefs: Vec<Vec<Complex64>> = state.fields.iter().map(|f| f.coefs()).collect();
        let out = self.eval_coefs(&coefs)?;
        Ok(State {
            names: state.names.clone(),
            fields: out
                .into_iter()
                .map(|c| Field::spectral(*self.grid(), c).expect("grid length").to_physical())
                .collect(),
        })
    }
}

/// One-shot right-hand side evaluation.
pub fn rhs(state: &State, spec: &EquationSpec, pad_factor: usize) -> Result<State> {
    RhsEngine::new(*state.grid(), *spec, pad_factor)?.eval(state)
}

pub(crate) fn sup_of_coefs(grid: &Grid1D, c: &[Complex64]) -> f64 {
    sup(&fft::inverse(grid.half_length(), c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn constant_state_has_zero_rhs() {
        let g = Grid1D::new(PI, 32).unwrap();
        let s = State::single("u", Field::from_fn(g, |_| 0.7));
        let r = rhs(&s, &EquationSpec::direct(1.0, 2.0), 3).unwrap();
        assert!(r.fields[0].sup_norm() < 1e-14);
    }

    #[test]
    fn cosine_rhs_is_minus_cos_squared() {
        let g = Grid1D::new(PI, 32).unwrap();
        let s = State::single("u", Field::from_fn(g, f64::cos));
        let r = rhs(&s, &EquationSpec::direct(1.0, 0.0), 3).unwrap();
        let want: Vec<f64> = g.nodes().iter().map(|x| -x.cos().powi(2)).collect();
        assert!(max_diff(&r.fields[0].samples(), &want) < 1e-13);
    }

    #[test]
    fn coupled_rhs_without_u_keeps_only_the_nonlocal_term() {
        // with u ≡ 0 and c2 = 0 every term carries a factor u except
        // c1²·𝔳·∫𝔳², which survives for an (incompatible) nonzero 𝔳
        let g = Grid1D::new(8.0 * PI, 512).unwrap();
        let c1 = 1.3;
        let s = State::new(vec![
            ("u", Field::zeros(g)),
            ("vf", Field::from_fn(g, |x| (-x * x).exp())),
        ])
        .unwrap();
        let r = rhs(&s, &EquationSpec::coupled(c1, 0.0), 3).unwrap();
        assert!(r.get("u").unwrap().sup_norm() < 1e-15);
        // ∫_{−∞}^x e^{−2y²} dy = √(π/8)·(1 + erf(√2 x))
        let want: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| c1 * c1 * (-x * x).exp() * (PI / 8.0).sqrt() * (1.0 + erf(2f64.sqrt() * x)))
            .collect();
        let md = max_diff(&r.get("vf").unwrap().samples(), &want);
        assert!(md < 1e-12, "{md}");

        let compatible = State::new(vec![("u", Field::zeros(g)), ("vf", Field::zeros(g))]).unwrap();
        let r = rhs(&compatible, &EquationSpec::coupled(c1, 0.0), 3).unwrap();
        assert_eq!(r.get("vf").unwrap().sup_norm(), 0.0);
    }

    fn erf(x: f64) -> f64 {
        // composite Simpson, accurate to ~1e-15 for |x| ≤ 40
        let n = 100000;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0 * 2.0 / PI.sqrt()
    }

    #[test]
    fn wrong_layout_is_rejected() {
        let g = Grid1D::new(PI, 32).unwrap();
        let s = State::single("v", Field::zeros(g));
        assert!(matches!(rhs(&s, &EquationSpec::direct(1.0, 0.0), 3), Err(LabError::State(_))));
    }
}
