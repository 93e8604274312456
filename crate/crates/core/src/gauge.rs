//! Primitives `∫_{−L}^x`, exponential gauge weights and the bounded-primitive
//! data norm.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::report::NormReport;
use crate::spectral::{derivative, edge_ratio, fft, sobolev_norm, sup, Field};

/// Edge samples must sit below this fraction of the sup norm.
pub const EDGE_TOLERANCE: f64 = 1e-8;
/// Largest admissible sup of any gauge exponent.
pub const OVERFLOW_LIMIT: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `ℒu = c1 u ∂²u + c2 (∂u)²`, state `u`.
    DirectKdv,
    /// `ℒv = 2 c2 v ∂v`, state `v`; the equation satisfied by `∂u` when `c1 = 0`.
    Kdv,
    /// Gauged pair `(u, 𝔳)` with `𝔳 = e^{−Λ}∂u`, `Λ = c1 ∫u`.
    Coupled,
    /// Doubly gauged pair `(𝔲, 𝔳)` with `u = e^Ξ 𝔲`, `∂𝔲 = e^Θ 𝔳`.
    DoubleGauged,
    /// `ℒu = c1 u ∂²u + c2 (∂u)² + c3 ∂u ∂²u + c4 (∂²u)²`, state `u`.
    Quadratic,
    /// Triple `(u, ∂u, w)` with `w = e^{−2c4 ∂u} ∂²u`.
    QuadraticGauged,
}

impl Variant {
    pub fn state_names(&self) -> &'static [&'static str] {
        match self {
            Variant::DirectKdv | Variant::Quadratic => &["u"],
            Variant::Kdv => &["v"],
            Variant::Coupled => &["u", "vf"],
            Variant::DoubleGauged => &["uf", "vf"],
            Variant::QuadraticGauged => &["u", "ux", "w"],
        }
    }

    /// Whether the right-hand side carries exponential weights of primitives.
    pub fn is_gauged(&self) -> bool {
        matches!(self, Variant::Coupled | Variant::DoubleGauged)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
    #[serde(default)]
    pub c4: f64,
    pub variant: Variant,
}

impl EquationSpec {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, variant: Variant) -> Result<Self> {
        let s = Self { c1, c2, c3, c4, variant };
        s.validate()?;
        Ok(s)
    }

    pub fn direct(c1: f64, c2: f64) -> Self {
        Self { c1, c2, c3: 0.0, c4: 0.0, variant: Variant::DirectKdv }
    }

    pub fn kdv(c2: f64) -> Self {
        Self { c1: 0.0, c2, c3: 0.0, c4: 0.0, variant: Variant::Kdv }
    }

    pub fn coupled(c1: f64, c2: f64) -> Self {
        Self { c1, c2, c3: 0.0, c4: 0.0, variant: Variant::Coupled }
    }

    pub fn double_gauged(c1: f64, c2: f64) -> Self {
        Self { c1, c2, c3: 0.0, c4: 0.0, variant: Variant::DoubleGauged }
    }

    pub fn quadratic(c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Self { c1, c2, c3, c4, variant: Variant::Quadratic }
    }

    pub fn quadratic_gauged(c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Self { c1, c2, c3, c4, variant: Variant::QuadraticGauged }
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        Self { variant, ..self }
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.c1.abs() + self.c2.abs() + self.c3.abs() + self.c4.abs()
    }

    pub fn is_linear(&self) -> bool {
        self.coefficient_sum() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let cs = [self.c1, self.c2, self.c3, self.c4];
        if cs.iter().any(|c| !c.is_finite()) {
            return Err(LabError::Invalid("coefficients must be finite".into()));
        }
        match self.variant {
            Variant::DirectKdv | Variant::Kdv | Variant::Coupled | Variant::DoubleGauged => {
                if self.c3 != 0.0 || self.c4 != 0.0 {
                    return Err(LabError::Invalid(format!(
                        "variant {:?} has no c3/c4 terms, got c3 = {}, c4 = {}",
                        self.variant, self.c3, self.c4
                    )));
                }
            }
            Variant::Quadratic | Variant::QuadraticGauged => {}
        }
        if self.variant == Variant::Kdv && self.c1 != 0.0 {
            return Err(LabError::Invalid("the derivative equation is only defined for c1 = 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    /// `max(|u(−L)|, |u(L − dx)|) / ‖u‖_∞`
    pub edge_ratio: f64,
    pub tolerance: f64,
    pub ok: bool,
}

impl BoundaryCheck {
    pub fn of(field: &Field) -> Self {
        Self::from_samples(&field.samples())
    }

    pub fn from_samples(v: &[f64]) -> Self {
        let r = edge_ratio(v);
        Self {
            edge_ratio: r,
            tolerance: EDGE_TOLERANCE,
            ok: r <= EDGE_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub field: Field,
    pub boundary: BoundaryCheck,
}

/// `∫_{−L}^x u`, vanishing at the left edge.
///
/// The window mean is integrated as an exact ramp and the remainder
/// spectrally, so the result is exact for trigonometric polynomials and
/// spectrally accurate for data that decays towards the window edges. Unlike
/// a division by `iξ`, a nonzero total mass is kept, giving the whole-line
/// reading `∫_{−∞}^x` whenever the integrand is negligible outside the window.
pub fn primitive(u: &Field) -> Primitive {
    let g = *u.grid();
    let values = fft::primitive_from_coefs(g.half_length(), &u.coefs(), g.n());
    Primitive {
        field: Field::physical(g, values).expect("grid length"),
        boundary: BoundaryCheck::of(u),
    }
}

/// Cumulative trapezoid rule from the left edge; second order in `dx`.
pub fn primitive_trapezoid(u: &Field) -> Primitive {
    let g = *u.grid();
    let v = u.samples();
    let dx = g.dx();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    Primitive {
        field: Field::physical(g, out).expect("grid length"),
        boundary: BoundaryCheck::from_samples(&v),
    }
}

/// All gauge variables of a snapshot, as applicable to its variant.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeBundle {
    pub variant: Variant,
    pub u: Field,
    /// `∫_{−L}^x u`
    pub i_u: Field,
    /// `c1 ∫u`
    pub lambda: Option<Field>,
    /// `c2 ∫u`
    pub xi: Option<Field>,
    /// `(c1 − c2) ∫u`
    pub theta: Option<Field>,
    /// `2 c4 ∂u`
    pub jfrak: Option<Field>,
    /// `c1 ∫u + c3 u`
    pub kfrak: Option<Field>,
    /// `e^{−Λ}∂u` (coupled) or `e^{−Θ}∂𝔲` (double gauge)
    pub vf: Option<Field>,
    /// `e^{−Ξ} u`
    pub uf: Option<Field>,
    /// `e^{−𝔍} ∂²u`
    pub w: Option<Field>,
    /// `e^{−𝔎} ∂w`
    pub wf: Option<Field>,
    pub boundary: BoundaryCheck,
}

fn guard(f: &Field) -> Result<()> {
    let s = f.sup_norm();
    if !(s <= OVERFLOW_LIMIT) {
        return Err(LabError::GaugeOverflow {
            sup: s,
            limit: OVERFLOW_LIMIT,
        });
    }
    Ok(())
}

/// Pointwise `e^{sign·phase} · f`.
pub fn weighted(phase: &Field, sign: f64, f: &Field) -> Field {
    let p = phase.samples();
    let v = f.samples();
    let out = p.iter().zip(&v).map(|(a, b)| (sign * a).exp() * b).collect();
    Field::physical(*f.grid(), out).expect("grid length")
}

/// Whole-line preconditions for building exponential weights from `u`.
pub fn check_gauge_precondition(u: &Field) -> Result<BoundaryCheck> {
    let b = BoundaryCheck::of(u);
    let mass = u.total_integral().abs();
    if !b.ok && mass >= EDGE_TOLERANCE {
        return Err(LabError::GaugePrecondition(format!(
            "edge ratio {:.3e} exceeds {EDGE_TOLERANCE:e} and the window mass {mass:.3e} is not negligible",
            b.edge_ratio
        )));
    }
    Ok(b)
}

pub fn make_gauge_bundle(u: &Field, spec: &EquationSpec) -> Result<GaugeBundle> {
    spec.validate()?;
    let boundary = check_gauge_precondition(u)?;
    let u = u.to_physical();
    let i_u = primitive(&u).field;
    let mut b = GaugeBundle {
        variant: spec.variant,
        u: u.clone(),
        i_u: i_u.clone(),
        lambda: None,
        xi: None,
        theta: None,
        jfrak: None,
        kfrak: None,
        vf: None,
        uf: None,
        w: None,
        wf: None,
        boundary,
    };
    let lambda = i_u.scale(spec.c1);
    guard(&lambda)?;
    match spec.variant {
        Variant::DirectKdv | Variant::Coupled | Variant::Kdv => {
            let du = derivative(&u, 1);
            b.vf = Some(weighted(&lambda, -1.0, &du));
            b.lambda = Some(lambda);
        }
        Variant::DoubleGauged => {
            let xi = i_u.scale(spec.c2);
            let theta = i_u.scale(spec.c1 - spec.c2);
            guard(&xi)?;
            guard(&theta)?;
            let uf = weighted(&xi, -1.0, &u);
            let duf = derivative(&uf, 1);
            b.vf = Some(weighted(&theta, -1.0, &duf));
            b.uf = Some(uf);
            b.xi = Some(xi);
            b.theta = Some(theta);
            b.lambda = Some(lambda);
        }
        Variant::Quadratic | Variant::QuadraticGauged => {
            let du = derivative(&u, 1);
            let d2u = derivative(&u, 2);
            let jfrak = du.scale(2.0 * spec.c4);
            let kfrak = lambda.axpby(1.0, &u, spec.c3)?;
            guard(&jfrak)?;
            guard(&kfrak)?;
            let w = weighted(&jfrak, -1.0, &d2u);
            let dw = derivative(&w, 1);
            b.wf = Some(weighted(&kfrak, -1.0, &dw));
            b.w = Some(w);
            b.jfrak = Some(jfrak);
            b.kfrak = Some(kfrak);
            b.lambda = Some(lambda);
        }
    }
    Ok(b)
}

/// `‖f‖_{H^s} + sup_x |∫_{−L}^x f|`.
pub fn xs_norm(u: &Field, s: f64) -> NormReport {
    let hs = sobolev_norm(u, s);
    let p = primitive(u).field;
    NormReport::new("X^s")
        .param("s", s)
        .with("H^s", hs)
        .with("sup_primitive", sup(&p.samples()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    fn gauss_grid() -> Grid1D {
        Grid1D::new(8.0 * PI, 512).unwrap()
    }

    #[test]
    fn primitive_of_zero() {
        let g = gauss_grid();
        let p = primitive(&Field::zeros(g));
        assert!(p.field.sup_norm() == 0.0);
        assert!(p.boundary.ok);
    }

    #[test]
    fn unit_mass_bump_reaches_one() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| (-(x - 1.0) * (x - 1.0)).exp() / PI.sqrt());
        let p = primitive(&u).field.samples();
        let last = *p.last().unwrap() + u.samples().last().unwrap() * g.dx();
        assert!((last - 1.0).abs() < 1e-12);
        let t = primitive_trapezoid(&u).field.samples();
        // trapezoid oracle agrees with the exact error function up to O(dx²)
        for (j, x) in g.nodes().iter().enumerate() {
            let exact = 0.5 * (1.0 + erf(x - 1.0));
            assert!((p[j] - exact).abs() < 1e-12, "spectral at {x}");
            assert!((t[j] - exact).abs() < g.dx() * g.dx());
        }
    }

    fn erf(x: f64) -> f64 {
        // Simpson on [0, x] with many panels; accurate well below 1e-13 here
        let n = 20000;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0 * 2.0 / PI.sqrt()
    }

    #[test]
    fn derivative_inverts_primitive() {
        let g = gauss_grid();
        // zero total mass keeps the primitive periodic on the window
        let u = Field::from_fn(g, |x| x * (-x * x).exp() * (3.0 * x).cos());
        let back = derivative(&primitive(&u).field, 1);
        assert!(back.rel_l2_error(&u).unwrap() < 1e-6);
    }

    #[test]
    fn edge_warning_raised() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| 1.0 / (1.0 + x * x));
        assert!(!primitive(&u).boundary.ok);
    }

    #[test]
    fn c1_zero_gives_plain_derivative() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| -0.2 * x * (-x * x).exp());
        let b = make_gauge_bundle(&u, &EquationSpec::coupled(0.0, 1.0)).unwrap();
        assert_eq!(b.lambda.as_ref().unwrap().sup_norm(), 0.0);
        assert_eq!(b.vf.unwrap(), derivative(&u, 1).to_physical());
    }

    #[test]
    fn c4_zero_gives_second_derivative() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| 0.1 * (-x * x).exp());
        let b = make_gauge_bundle(&u, &EquationSpec::quadratic_gauged(1.0, 0.5, 0.3, 0.0)).unwrap();
        assert_eq!(b.jfrak.unwrap().sup_norm(), 0.0);
        assert_eq!(b.w.unwrap(), derivative(&u, 2).to_physical());
    }

    #[test]
    fn reconstruction_of_derivative() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| (-x * x).exp());
        let b = make_gauge_bundle(&u, &EquationSpec::coupled(1.0, 0.0)).unwrap();
        let rec = weighted(b.lambda.as_ref().unwrap(), 1.0, b.vf.as_ref().unwrap());
        assert!(rec.rel_l2_error(&derivative(&u, 1)).unwrap() < 1e-10);
    }

    #[test]
    fn double_gauge_chain() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| 0.3 * (-x * x).exp());
        let b = make_gauge_bundle(&u, &EquationSpec::double_gauged(1.0, 0.4)).unwrap();
        let xi = b.xi.as_ref().unwrap();
        let theta = b.theta.as_ref().unwrap();
        let lambda = b.lambda.as_ref().unwrap();
        let sum = xi.axpby(1.0, theta, 1.0).unwrap();
        assert!(sum.sub(lambda).unwrap().sup_norm() < 1e-12);
        let duf = derivative(b.uf.as_ref().unwrap(), 1);
        let rec = weighted(theta, 1.0, b.vf.as_ref().unwrap());
        assert!(rec.rel_l2_error(&duf).unwrap() < 1e-10);
    }

    #[test]
    fn overflow_is_reported() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| 40.0 * (-x * x).exp());
        let err = make_gauge_bundle(&u, &EquationSpec::coupled(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, LabError::GaugeOverflow { sup, .. } if sup > 30.0));
    }

    #[test]
    fn precondition_rejects_massive_nondecaying_data() {
        let g = gauss_grid();
        let u = Field::from_fn(g, |x| 0.1 / (1.0 + x * x));
        assert!(matches!(
            make_gauge_bundle(&u, &EquationSpec::coupled(1.0, 0.0)),
            Err(LabError::GaugePrecondition(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(EquationSpec::new(1.0, 0.0, 0.5, 0.0, Variant::Coupled).is_err());
        assert!(EquationSpec::new(1.0, 0.0, 0.5, 0.2, Variant::Quadratic).is_ok());
        assert!(EquationSpec::new(1.0, 1.0, 0.0, 0.0, Variant::Kdv).is_err());
    }

    #[test]
    fn xs_norm_of_zero() {
        assert_eq!(xs_norm(&Field::zeros(gauss_grid()), 1.0).total, 0.0);
    }
    /// `Si(x)` by composite Simpson.
    fn si(x: f64) -> f64 {
        let m = 20_000;
        let h = x / m as f64;
        let f = |y: f64| if y == 0.0 { 1.0 } else { y.sin() / y };
        let inner: f64 = (1..m).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h)).sum();
        (f(0.0) + inner + f(x)) * h / 3.0
    }

    #[test]
    fn sinc_primitive_peaks_past_the_dirichlet_integral() {
        // ∫_{−L}^x sin y / y dy is largest at x = π, where it equals
        // Si(π) + Si(L) → π/2 + Si(π) ≈ 3.4227, about 9% above π.
        for half in [16.0 * PI, 64.0 * PI] {
            let g = Grid1D::new(half, 4096).unwrap();
            let u = Field::from_fn(g, |x| if x == 0.0 { 1.0 } else { x.sin() / x });
            let r = xs_norm(&u, 0.0);
            assert!(r.total.is_finite() && xs_norm(&u, 1.0).total.is_finite());
            let sup = r.get("sup_primitive").unwrap();
            assert!((sup - (si(PI) + si(half))).abs() < 2e-3, "L = {half}: {sup}");
            assert!(sup > 1.08 * PI);
        }
    }
}
