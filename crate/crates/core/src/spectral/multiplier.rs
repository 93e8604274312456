use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{Field, Values};
use super::grid::Grid1D;
use crate::error::{LabError, Result};

type Symbol = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Fourier multiplier `m(ξ)` acting diagonally on coefficients.
///
/// Symbols should satisfy `m(−ξ) = conj m(ξ)` so that real fields stay real.
/// At the unpaired Nyquist slot only `Re m` is applied, which is the exact
/// action on the sampled mode `cos(ξ_nyq x)`.
#[derive(Clone)]
pub struct MultiplierSpec {
    pub label: String,
    symbol: Symbol,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec").field("label", &self.label).finish()
    }
}

impl MultiplierSpec {
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            symbol: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        Self::custom("1", |_| Complex64::new(1.0, 0.0))
    }

    /// `⟨∂⟩^s`, symbol `(1 + ξ²)^{s/2}`.
    pub fn bessel(s: f64) -> Self {
        Self::custom(format!("<D>^{s}"), move |xi| Complex64::new((1.0 + xi * xi).powf(s / 2.0), 0.0))
    }

    /// `|∂|^s`, symbol `|ξ|^s` with the value 0 at `ξ = 0`.
    pub fn riesz(s: f64) -> Self {
        Self::custom(format!("|D|^{s}"), move |xi| {
            if xi == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(xi.abs().powf(s), 0.0)
            }
        })
    }

    /// `∂^k`, symbol `(iξ)^k`.
    pub fn derivative(k: u32) -> Self {
        Self::custom(format!("D^{k}"), move |xi| Complex64::new(0.0, xi).powu(k))
    }

    /// Airy propagator `e^{itξ³/3}`.
    pub fn airy(t: f64) -> Self {
        Self::custom(format!("U({t})"), move |xi| Complex64::from_polar(1.0, t * xi * xi * xi / 3.0))
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        (self.symbol)(xi)
    }

    /// Symbol on every FFT slot of `grid`, evaluated once per frequency.
    pub fn symbols(&self, grid: &Grid1D) -> Result<Vec<Complex64>> {
        let nyq = grid.nyquist_slot();
        (0..grid.n())
            .map(|j| {
                let xi = grid.frequency(j);
                let m = self.eval(xi);
                if !(m.re.is_finite() && m.im.is_finite()) {
                    return Err(LabError::NonFiniteSymbol {
                        label: self.label.clone(),
                        xi,
                    });
                }
                Ok(if j == nyq { Complex64::new(m.re, 0.0) } else { m })
            })
            .collect()
    }
}

pub fn apply_multiplier(field: &Field, m: &MultiplierSpec) -> Result<Field> {
    let sym = m.symbols(field.grid())?;
    Ok(apply_symbols(field, &sym))
}

pub(crate) fn apply_symbols(field: &Field, sym: &[Complex64]) -> Field {
    let c: Vec<Complex64> = field.coefs().iter().zip(sym).map(|(a, b)| a * b).collect();
    let out = Field::spectral(*field.grid(), c).expect("length preserved");
    match field.values() {
        Values::Physical(_) => out.to_physical(),
        Values::Spectral(_) => out,
    }
}

/// Spectral derivative `∂^k`.
pub fn derivative(field: &Field, k: u32) -> Field {
    let sym = MultiplierSpec::derivative(k).symbols(field.grid()).expect("polynomial symbol");
    apply_symbols(field, &sym)
}

/// `H^s` norm `(∫ ⟨ξ⟩^{2s} |û|² dξ)^{1/2}`.
pub fn sobolev_norm(field: &Field, s: f64) -> f64 {
    let g = field.grid();
    let c = field.coefs();
    let sum: f64 = (0..g.n())
        .map(|j| {
            let xi = g.frequency(j);
            (1.0 + xi * xi).powf(s) * c[j].norm_sqr()
        })
        .sum();
    (g.dxi() * sum).sqrt()
}

/// Homogeneous `Ḣ^s` norm with weight `|ξ|^{2s}` (zero at `ξ = 0`).
pub fn homogeneous_sobolev_norm(field: &Field, s: f64) -> f64 {
    let g = field.grid();
    let c = field.coefs();
    let sum: f64 = (0..g.n())
        .filter(|&j| g.wavenumber(j) != 0)
        .map(|j| g.frequency(j).abs().powf(2.0 * s) * c[j].norm_sqr())
        .sum();
    (g.dxi() * sum).sqrt()
}

/// Exact linear flow `e^{−(t/3)∂³}` over a time offset `t`.
pub fn airy_propagate(field: &Field, t: f64) -> Field {
    if t == 0.0 {
        return field.clone();
    }
    let sym = MultiplierSpec::airy(t).symbols(field.grid()).expect("unimodular symbol");
    apply_symbols(field, &sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (Grid1D, f64) {
        let g = Grid1D::new(PI, 64).unwrap();
        (g, 5.0)
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn identity_multiplier() {
        let (g, _) = setup();
        let f = Field::from_fn(g, |x| (-x * x).exp() * x);
        let h = apply_multiplier(&f, &MultiplierSpec::identity()).unwrap();
        assert!(max_diff(&f.samples(), &h.samples()) < 1e-14);
        assert!(h.is_physical());
    }

    #[test]
    fn riesz_and_bessel_on_cosine() {
        let (g, k) = setup();
        let f = Field::from_fn(g, |x| (k * x).cos());
        let r = apply_multiplier(&f, &MultiplierSpec::riesz(1.0)).unwrap();
        let want: Vec<f64> = g.nodes().iter().map(|x| k * (k * x).cos()).collect();
        assert!(max_diff(&r.samples(), &want) < 1e-12);
        let s = 0.7;
        let b = apply_multiplier(&f, &MultiplierSpec::bessel(s)).unwrap();
        let want: Vec<f64> = g.nodes().iter().map(|x| (1.0 + k * k).powf(s / 2.0) * (k * x).cos()).collect();
        assert!(max_diff(&b.samples(), &want) < 1e-12);
    }

    #[test]
    fn riesz_kills_constants() {
        let (g, _) = setup();
        let f = Field::from_fn(g, |_| 2.0);
        let r = apply_multiplier(&f, &MultiplierSpec::riesz(0.5)).unwrap();
        assert!(r.sup_norm() < 1e-14);
    }

    #[test]
    fn non_finite_symbol_is_reported() {
        let (g, _) = setup();
        let bad = MultiplierSpec::custom("1/xi", |xi| Complex64::new(1.0 / xi, 0.0));
        let err = apply_multiplier(&Field::zeros(g), &bad).unwrap_err();
        assert!(matches!(err, LabError::NonFiniteSymbol { xi, .. } if xi == 0.0));
    }

    #[test]
    fn airy_on_cosine_is_a_phase_shift() {
        let (g, k) = setup();
        let t = 0.37;
        let f = Field::from_fn(g, |x| (k * x).cos());
        let p = airy_propagate(&f, t);
        let want: Vec<f64> = g.nodes().iter().map(|x| (k * x + t * k.powi(3) / 3.0).cos()).collect();
        assert!(max_diff(&p.samples(), &want) < 1e-12);
        assert_eq!(airy_propagate(&f, 0.0), f);
    }

    #[test]
    fn derivative_of_sine() {
        let (g, k) = setup();
        let f = Field::from_fn(g, |x| (k * x).sin());
        let d = apply_multiplier(&f, &MultiplierSpec::derivative(3)).unwrap();
        let want: Vec<f64> = g.nodes().iter().map(|x| -k.powi(3) * (k * x).cos()).collect();
        assert!(max_diff(&d.samples(), &want) < 1e-10);
    }
}
