//! Frequency-localized data families and the quadratic second iterate.
//!
//! The data are sums of indicator functions in frequency, so everything
//! here works on a sparse list of occupied bins. A [`Grid1D`] only fixes the
//! bin spacing `dξ = π/L` and the Nyquist limit; dense fields are built on
//! request and only make sense for small `N`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::fit_loglog;
use crate::error::{LabError, Result};
use crate::evolve::{duhamel, Quadrature, Trajectory};
use crate::report::{Check, ExperimentReport, Source};
use crate::spectral::{airy_propagate, derivative, product, sobolev_norm, Field, Grid1D};

/// Bins closer than this fraction of `dξ` to an indicator edge get weight ½.
const EDGE_SNAP: f64 = 1e-9;
/// Bins per indicator half-width on the default scan grid.
pub const BINS_PER_WIDTH: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Low bump of height `N` plus side bumps of height `N^{1−s}` at `±N`,
    /// all of half-width `N^{−2}`.
    Pilod,
    /// Side bumps of height `N^{a/2−s}` and half-width `N^{−a}` at `±N`.
    BoundedPrimitive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposedDataSpec {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: u64,
    pub s: f64,
    #[serde(default = "default_a")]
    pub a: f64,
}

fn default_a() -> f64 {
    1.0
}

impl IllposedDataSpec {
    pub fn pilod(n: u64, s: f64) -> Self {
        Self {
            family: Family::Pilod,
            n,
            s,
            a: default_a(),
        }
    }

    pub fn bounded_primitive(n: u64, s: f64, a: f64) -> Self {
        Self {
            family: Family::BoundedPrimitive,
            n,
            s,
            a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(LabError::Invalid(format!("N must be a power of two ≥ 2, got {}", self.n)));
        }
        if !self.s.is_finite() {
            return Err(LabError::Invalid("s must be finite".into()));
        }
        if self.family == Family::BoundedPrimitive && !(self.a > 0.0 && self.a.is_finite()) {
            return Err(LabError::Invalid(format!("width exponent a must be positive, got {}", self.a)));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.n as f64
    }

    /// Half-width `δ` of every indicator.
    pub fn width(&self) -> f64 {
        match self.family {
            Family::Pilod => self.scale().powi(-2),
            Family::BoundedPrimitive => self.scale().powf(-self.a),
        }
    }

    /// Heights of the bump at zero and of the bumps at `±N`.
    fn heights(&self) -> (f64, f64) {
        let n = self.scale();
        match self.family {
            Family::Pilod => (n, n.powf(1.0 - self.s)),
            Family::BoundedPrimitive => (0.0, n.powf(self.a / 2.0 - self.s)),
        }
    }

    /// Smallest grid with `dξ = δ/(8·window_factor)` and Nyquist ≥ 2(N + 2).
    pub fn grid(&self, window_factor: u32) -> Result<Grid1D> {
        self.validate()?;
        if window_factor == 0 {
            return Err(LabError::Invalid("window factor must be ≥ 1".into()));
        }
        let dxi = self.width() / (BINS_PER_WIDTH * window_factor as f64);
        let need = (4.0 * (self.scale() + 2.0) / dxi).ceil();
        if !(need < 2f64.powi(52)) {
            return Err(LabError::Resolution(format!("N = {} needs more than 2^52 grid points", self.n)));
        }
        let n = (need as u64).max(16).next_power_of_two() as usize;
        Grid1D::new(PI / dxi, n)
    }

    /// Whole-line closed form of the physical data.
    pub fn physical(&self, x: f64) -> f64 {
        let n = self.scale();
        let d = self.width();
        let sinc = if x == 0.0 { d } else { (d * x).sin() / x };
        match self.family {
            Family::Pilod => (2.0 / PI).sqrt() * (1.0 + 2.0 * n.powf(-self.s) * (n * x).cos()) * n * sinc,
            Family::BoundedPrimitive => {
                2.0 * (2.0 / PI).sqrt() * n.powf(self.a / 2.0 - self.s) * sinc * (n * x).cos()
            }
        }
    }

    /// The same data as seen on a periodic grid: each trapezoid-weighted
    /// indicator sums to a Dirichlet-type kernel `dξ·sin(δx)·cot(dξ·x/2)`
    /// in place of `2 sin(δx)/x`. Requires `δ` and `N` to sit on bins.
    pub fn periodic(&self, x: f64, grid: &Grid1D) -> Result<f64> {
        let dxi = grid.dxi();
        let on_bin = |v: f64| ((v / dxi) - (v / dxi).round()).abs() < EDGE_SNAP;
        if !on_bin(self.width()) || !on_bin(self.scale()) {
            return Err(LabError::Resolution("indicator edges are not grid frequencies".into()));
        }
        let d = self.width();
        let half = 0.5 * dxi * x;
        let kernel = if half.sin().abs() < 1e-300 {
            2.0 * d
        } else {
            dxi * (d * x).sin() * half.cos() / half.sin()
        };
        let (h0, h1) = self.heights();
        Ok((h0 + 2.0 * h1 * (self.scale() * x).cos()) * kernel / (2.0 * PI).sqrt())
    }
}

/// Occupied frequency bins `(k, û_k)` with `ξ = k·dξ`, sorted by `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    pub grid: Grid1D,
    pub entries: Vec<(i64, Complex64)>,
}

impl SparseSpectrum {
    /// Nonzero coefficients of a dense field; entries below
    /// `rel_cutoff·max|û|` are dropped.
    pub fn from_field(field: &Field, rel_cutoff: f64) -> Self {
        let grid = *field.grid();
        let c = field.coefs();
        let peak = c.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let mut entries: Vec<(i64, Complex64)> = c
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > rel_cutoff * peak && z.norm() > 0.0)
            .map(|(j, z)| (grid.wavenumber(j), *z))
            .collect();
        entries.sort_by_key(|e| e.0);
        Self { grid, entries }
    }

    pub fn frequency(&self, k: i64) -> f64 {
        k as f64 * self.grid.dxi()
    }

    pub fn max_wavenumber(&self) -> i64 {
        self.entries.iter().map(|e| e.0.abs()).max().unwrap_or(0)
    }

    pub fn coef(&self, k: i64) -> Complex64 {
        self.entries
            .binary_search_by_key(&k, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or_default()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            entries: self.entries.iter().map(|&(k, c)| (k, c * a)).collect(),
        }
    }

    /// `‖⟨ξ⟩^s û‖_{L²_ξ}` by the bin Riemann sum.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let dxi = self.grid.dxi();
        let sum: f64 = self
            .entries
            .iter()
            .map(|&(k, c)| {
                let xi = self.frequency(k);
                (1.0 + xi * xi).powf(s) * c.norm_sqr()
            })
            .sum();
        (dxi * sum).sqrt()
    }

    /// `∫u = √(2π)·û(0)`.
    pub fn total_integral(&self) -> f64 {
        (2.0 * PI).sqrt() * self.coef(0).re
    }

    /// Physical value at an arbitrary `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let dxi = self.grid.dxi();
        let sum: Complex64 = self
            .entries
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, self.frequency(k) * x))
            .sum();
        sum.re * dxi / (2.0 * PI).sqrt()
    }

    /// Whole-line primitive `∫_{−∞}^x u` at `x`; needs `û(0) = 0`.
    pub fn primitive_at(&self, x: f64) -> Result<f64> {
        if self.coef(0).norm() != 0.0 {
            return Err(LabError::Invalid("primitive of data with nonzero mean grows linearly".into()));
        }
        let dxi = self.grid.dxi();
        let sum: Complex64 = self
            .entries
            .iter()
            .map(|&(k, c)| {
                let xi = self.frequency(k);
                c * Complex64::from_polar(1.0, xi * x) / Complex64::new(0.0, xi)
            })
            .sum();
        Ok(sum.re * dxi / (2.0 * PI).sqrt())
    }

    /// `max |∫_{−∞}^x u|` over `x = j·step`, `|x| ≤ reach`.
    pub fn sup_primitive(&self, reach: f64, step: f64) -> Result<f64> {
        if !(step > 0.0 && reach >= 0.0) {
            return Err(LabError::Invalid("sup_primitive needs step > 0 and reach ≥ 0".into()));
        }
        self.primitive_at(0.0)?;
        let m = (reach / step).floor() as i64;
        let best = (-m..=m)
            .into_par_iter()
            .map(|j| self.primitive_at(j as f64 * step).map(f64::abs).unwrap_or(f64::NAN))
            .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
        Ok(best)
    }

    /// Dense field on the carrying grid.
    pub fn to_field(&self) -> Result<Field> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.grid.n()];
        for &(k, z) in &self.entries {
            let j = self.grid.slot(k).filter(|&j| j != self.grid.nyquist_slot()).ok_or_else(|| {
                LabError::Resolution(format!("wavenumber {k} is not representable on n = {}", self.grid.n()))
            })?;
            c[j] = z;
        }
        Field::spectral(self.grid, c)
    }
}

fn indicator_weight(xi: f64, centre: f64, half_width: f64, dxi: f64) -> f64 {
    let d = (xi - centre).abs() - half_width;
    if d.abs() <= EDGE_SNAP * dxi {
        0.5
    } else if d < 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Sparse frequency-space construction on `grid`.
pub fn illposed_spectrum(spec: &IllposedDataSpec, grid: &Grid1D) -> Result<SparseSpectrum> {
    spec.validate()?;
    let n = spec.scale();
    let d = spec.width();
    let dxi = grid.dxi();
    if !(grid.nyquist() > n + 2.0) {
        return Err(LabError::Resolution(format!(
            "Nyquist {} does not exceed N + 2 = {}",
            grid.nyquist(),
            n + 2.0
        )));
    }
    if dxi > d / 4.0 {
        return Err(LabError::Resolution(format!("dξ = {dxi:e} does not resolve half-width {d:e} (need ≤ δ/4)")));
    }
    let (h0, h1) = spec.heights();
    let mut bumps = vec![(-n, h1), (n, h1)];
    if h0 != 0.0 {
        bumps.push((0.0, h0));
    }
    let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
    for (centre, height) in bumps {
        let lo = ((centre - d) / dxi).floor() as i64 - 1;
        let hi = ((centre + d) / dxi).ceil() as i64 + 1;
        for k in lo..=hi {
            let w = indicator_weight(k as f64 * dxi, centre, d, dxi);
            if w > 0.0 {
                *acc.entry(k).or_insert(0.0) += w * height;
            }
        }
    }
    Ok(SparseSpectrum {
        grid: *grid,
        entries: acc.into_iter().map(|(k, v)| (k, Complex64::new(v, 0.0))).collect(),
    })
}

/// Dense version of [`illposed_spectrum`].
pub fn make_illposed_data(spec: &IllposedDataSpec, grid: &Grid1D) -> Result<Field> {
    illposed_spectrum(spec, grid)?.to_field()
}

/// `(1 − e^{−iθ})/(iθ)`, equal to 1 at `θ = 0`.
fn resonance_factor(theta: f64) -> Complex64 {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        Complex64::new(1.0 - t2 / 6.0, -theta / 2.0 + theta * t2 / 24.0)
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -theta)) / Complex64::new(0.0, theta)
    }
}

/// `∫_0^t 𝒰(t−t')(𝒰(t')u0 · 𝒰(t')∂²u0) dt'` evaluated bin by bin.
///
/// With `Ω = 3ξξ₁(ξ−ξ₁)` the time integral is explicit, so the output at `ξ`
/// is the bin sum over `ξ₁` of
/// `û0(ξ−ξ₁)(−ξ₁²)û0(ξ₁)·e^{itξ³/3}·t·(1−e^{−itΩ/3})/(itΩ/3)`.
pub fn second_iterate_sparse(u0: &SparseSpectrum, t: f64) -> Result<SparseSpectrum> {
    let grid = u0.grid;
    let half = (grid.n() / 2) as i64;
    if 2 * u0.max_wavenumber() >= half {
        return Err(LabError::Resolution(format!(
            "second iterate reaches wavenumber {} beyond Nyquist slot {half}",
            2 * u0.max_wavenumber()
        )));
    }
    let dxi = grid.dxi();
    let norm = dxi / (2.0 * PI).sqrt();
    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    if t == 0.0 {
        return Ok(SparseSpectrum { grid, entries: vec![] });
    }
    for &(ka, a) in &u0.entries {
        for &(kb, b) in &u0.entries {
            let k = ka + kb;
            let xi = k as f64 * dxi;
            let xi1 = kb as f64 * dxi;
            let omega = 3.0 * xi * xi1 * (xi - xi1);
            let phase = Complex64::from_polar(1.0, t * xi.powi(3) / 3.0);
            let term = a * b * (-xi1 * xi1) * phase * resonance_factor(t * omega / 3.0) * (t * norm);
            *out.entry(k).or_default() += term;
        }
    }
    Ok(SparseSpectrum {
        grid,
        entries: out.into_iter().collect(),
    })
}

/// Dense wrapper of [`second_iterate_sparse`]; coefficients of `u0` below
/// `1e−14` of the peak are treated as zero.
pub fn second_iterate(u0: &Field, t: f64) -> Result<Field> {
    second_iterate_sparse(&SparseSpectrum::from_field(u0, 1e-14), t)?.to_field()
}

/// Independent route: sample the forcing `𝒰(t')u0·𝒰(t')∂²u0` on `nodes`
/// equispaced times and apply the quadrature Duhamel integral.
pub fn second_iterate_duhamel(u0: &Field, t: f64, nodes: usize) -> Result<Field> {
    if nodes < 2 {
        return Err(LabError::Invalid("Duhamel oracle needs ≥ 2 time nodes".into()));
    }
    let u0 = u0.to_spectral();
    let u0xx = derivative(&u0, 2);
    let times: Vec<f64> = (0..nodes).map(|i| t * i as f64 / (nodes - 1) as f64).collect();
    let forcing: Vec<Field> = times
        .par_iter()
        .map(|&tau| product(&[&airy_propagate(&u0, tau), &airy_propagate(&u0xx, tau)], 2))
        .collect::<Result<_>>()?;
    let mut traj = Trajectory::new(*u0.grid(), &["f"], None);
    for (tau, f) in times.iter().zip(forcing) {
        traj.push(*tau, vec![f])?;
    }
    duhamel(&traj, "f", t, Quadrature::Cubic)
}

/// Parameters of a dyadic scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    pub family: Family,
    pub s: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    pub scales: Vec<u64>,
    pub t: f64,
    /// Multiplies the window length at fixed bin count per width.
    #[serde(default = "default_window")]
    pub window_factor: u32,
    /// Slope tolerance against the target exponent.
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
}

fn default_window() -> u32 {
    1
}

fn default_slope_tol() -> f64 {
    0.1
}

impl ScanParams {
    pub fn pilod(s: f64) -> Self {
        Self {
            family: Family::Pilod,
            s,
            a: default_a(),
            scales: vec![8, 16, 32, 64, 128],
            t: 0.01,
            window_factor: 1,
            slope_tol: 0.1,
        }
    }

    pub fn bounded_primitive(s: f64, a: f64) -> Self {
        Self {
            family: Family::BoundedPrimitive,
            s,
            a,
            scales: vec![8, 16, 32, 64, 128],
            t: 0.01,
            window_factor: 1,
            slope_tol: 0.15,
        }
    }

    fn data(&self, n: u64) -> IllposedDataSpec {
        IllposedDataSpec {
            family: self.family,
            n,
            s: self.s,
            a: self.a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.len() < 4 {
            return Err(LabError::Invalid(format!("scan needs ≥ 4 scales, got {}", self.scales.len())));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Invalid("scales must be strictly increasing".into()));
        }
        for &n in &self.scales {
            self.data(n).validate()?;
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(LabError::Invalid(format!("scan time must be positive, got {}", self.t)));
        }
        if !(self.slope_tol > 0.0) {
            return Err(LabError::Invalid("slope tolerance must be positive".into()));
        }
        Ok(())
    }
}

struct Cell {
    scale: f64,
    data_norm: f64,
    iterate_norm: f64,
    zero_freq: f64,
    sup_primitive: f64,
    total_integral: f64,
}

fn scan_cell(p: &ScanParams, n: u64) -> Result<Cell> {
    let spec = p.data(n);
    let grid = spec.grid(p.window_factor)?;
    let u0 = illposed_spectrum(&spec, &grid)?;
    let second = second_iterate_sparse(&u0, p.t)?;
    let sup_primitive = match p.family {
        Family::Pilod => f64::NAN,
        Family::BoundedPrimitive => u0.sup_primitive(PI / spec.width(), PI / (16.0 * n as f64))?,
    };
    Ok(Cell {
        scale: n as f64,
        data_norm: u0.sobolev_norm(p.s),
        iterate_norm: second.sobolev_norm(p.s),
        zero_freq: second.coef(0).norm(),
        sup_primitive,
        total_integral: u0.total_integral(),
    })
}

/// Dyadic scan of the second iterate with log-log slope fits.
pub fn illposed_scan(p: &ScanParams) -> Result<ExperimentReport> {
    p.validate()?;
    let cells: Vec<Cell> = p.scales.par_iter().map(|&n| scan_cell(p, n)).collect::<Result<_>>()?;
    let name = match p.family {
        Family::Pilod => "illposed_pilod",
        Family::BoundedPrimitive => "illposed_bounded_primitive",
    };
    let mut rep = ExperimentReport::new(
        name,
        &["N", "data_hs", "second_iterate_hs", "zero_frequency", "sup_primitive", "total_integral"],
    );
    for c in &cells {
        rep.row(vec![c.scale, c.data_norm, c.iterate_norm, c.zero_freq, c.sup_primitive, c.total_integral]);
    }
    rep.scalar("s", p.s);
    rep.scalar("t", p.t);
    rep.scalar("window_factor", p.window_factor as f64);
    let ns: Vec<f64> = cells.iter().map(|c| c.scale).collect();
    let col = |f: fn(&Cell) -> f64| cells.iter().map(f).collect::<Vec<f64>>();
    match p.family {
        Family::Pilod => {
            rep.scalar("a", f64::NAN);
            let fit = fit_loglog(&ns, &col(|c| c.iterate_norm))?;
            rep.check(Check::around("second_iterate_hs_slope", fit.slope, 1.0, p.slope_tol, Source::Literature));
            rep.fits.insert("second_iterate_hs".into(), fit);
            let worst = cells
                .iter()
                .map(|c| (c.total_integral / ((2.0 * PI).sqrt() * c.scale) - 1.0).abs())
                .fold(0.0, f64::max);
            rep.check(Check::at_most("total_integral_rel_error", worst, 1e-12, Source::Literature));
            let spread = col(|c| c.data_norm).iter().fold(0.0_f64, |m, &v| m.max(v))
                / col(|c| c.data_norm).iter().fold(f64::INFINITY, |m, &v| m.min(v));
            rep.scalar("data_hs_spread", spread);
        }
        Family::BoundedPrimitive => {
            rep.scalar("a", p.a);
            let fit = fit_loglog(&ns, &col(|c| c.sup_primitive))?;
            let target = -p.s - p.a / 2.0 - 1.0;
            rep.check(Check::around("sup_primitive_slope", fit.slope, target, p.slope_tol, Source::Literature));
            rep.fits.insert("sup_primitive".into(), fit);
            let fit = fit_loglog(&ns, &col(|c| c.zero_freq))?;
            rep.check(Check::around("zero_frequency_slope", fit.slope, 2.0 - 2.0 * p.s, p.slope_tol, Source::Literature));
            rep.fits.insert("zero_frequency".into(), fit);
        }
    }
    Ok(rep)
}

/// Closed-form frequency evaluation against the time-quadrature Duhamel
/// route, on the dense grid of each scale. The quadrature has to resolve
/// phases up to `3ξξ₁(ξ−ξ₁)·t`, so this is only affordable at small `N`.
pub fn iterate_oracle_report(family: Family, scales: &[u64], s: f64, t: f64, nodes: usize) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("second_iterate_oracle", &["N", "rel_l2", "closed_hs", "quadrature_hs"]);
    let mut worst = 0.0_f64;
    for &n in scales {
        let spec = IllposedDataSpec { family, n, s, a: default_a() };
        let grid = spec.grid(1)?;
        let u0 = make_illposed_data(&spec, &grid)?;
        let closed = second_iterate(&u0, t)?;
        let quad = second_iterate_duhamel(&u0, t, nodes)?;
        let rel = quad.rel_l2_error(&closed)?;
        worst = worst.max(rel);
        rep.row(vec![n as f64, rel, sobolev_norm(&closed, s), sobolev_norm(&quad, s)]);
    }
    rep.scalar("t", t);
    rep.scalar("nodes", nodes as f64);
    rep.check(Check::at_most("closed_vs_quadrature_rel_l2", worst, 0.01, Source::Oracle));
    Ok(rep)
}

/// Trapezoid integral of the whole-line closed form over `[−L, L]` with
/// spacing close to `dx`.
pub fn window_integral(spec: &IllposedDataSpec, half_length: f64, dx: f64) -> Result<f64> {
    spec.validate()?;
    if !(half_length > 0.0 && dx > 0.0) {
        return Err(LabError::Invalid("window integral needs L > 0 and dx > 0".into()));
    }
    let m = (2.0 * half_length / dx).ceil() as i64;
    let h = 2.0 * half_length / m as f64;
    // terms in parallel, summed in index order so reruns agree bitwise
    let terms: Vec<f64> = (0..=m)
        .into_par_iter()
        .map(|j| {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            w * spec.physical(-half_length + j as f64 * h)
        })
        .collect();
    Ok(terms.iter().sum::<f64>() * h)
}

/// Window quadrature of the total integral against `√(2π)·û(0)`, for
/// windows `L = m·2π/δ`.
pub fn total_integral_report(spec: &IllposedDataSpec, multiples: &[u32]) -> Result<ExperimentReport> {
    let grid = spec.grid(1)?;
    let exact = illposed_spectrum(spec, &grid)?.total_integral();
    let reference = match spec.family {
        Family::Pilod => (2.0 * PI).sqrt() * spec.scale(),
        Family::BoundedPrimitive => 0.0,
    };
    let mut rep = ExperimentReport::new("total_integral", &["half_length", "window_integral", "abs_error"]);
    rep.scalar("frequency_space", exact);
    rep.scalar("reference", reference);
    let dx = PI / (8.0 * (spec.scale() + spec.width()));
    let mut errors = Vec::new();
    for &m in multiples {
        let l = m as f64 * 2.0 * PI / spec.width();
        let q = window_integral(spec, l, dx)?;
        errors.push((q - exact).abs());
        rep.row(vec![l, q, (q - exact).abs()]);
    }
    let scale = reference.abs().max(1.0);
    rep.check(Check::at_most(
        "frequency_space_rel_error",
        (exact - reference).abs() / scale,
        1e-12,
        Source::Literature,
    ));
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    rep.check(Check::within(
        "window_error_decreasing",
        if decreasing { 1.0 } else { 0.0 },
        1.0,
        1.0,
        Source::Measurement,
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pilod_grid_resolves_widths() {
        let spec = IllposedDataSpec::pilod(8, 0.0);
        let g = spec.grid(1).unwrap();
        assert!((g.dxi() - 1.0 / 512.0).abs() < 1e-18);
        assert!(g.nyquist() >= 20.0);
        let u = illposed_spectrum(&spec, &g).unwrap();
        // 17 bins per bump, edges at half weight
        assert_eq!(u.entries.len(), 51);
        assert_eq!(u.coef(8), Complex64::new(4.0, 0.0));
        assert_eq!(u.coef(4104), Complex64::new(4.0, 0.0));
        assert_eq!(u.coef(4103), Complex64::new(8.0, 0.0));
        assert_eq!(u.coef(0), Complex64::new(8.0, 0.0));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = IllposedDataSpec::pilod(8, 0.0);
        let g = Grid1D::new(PI * 64.0, 1 << 12).unwrap();
        assert!(matches!(illposed_spectrum(&spec, &g), Err(LabError::Resolution(_))));
        let g = Grid1D::new(PI * 512.0, 1 << 12).unwrap();
        assert!(matches!(illposed_spectrum(&spec, &g), Err(LabError::Resolution(_))));
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(IllposedDataSpec::pilod(1, 0.0).validate().is_err());
        assert!(IllposedDataSpec::pilod(12, 0.0).validate().is_err());
        assert!(IllposedDataSpec::bounded_primitive(8, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn periodic_closed_form_matches_fft() {
        for spec in [IllposedDataSpec::pilod(4, 0.5), IllposedDataSpec::bounded_primitive(4, 0.5, 1.0)] {
            let g = spec.grid(1).unwrap();
            let f = make_illposed_data(&spec, &g).unwrap();
            let oracle = Field::from_fn(g, |x| spec.periodic(x, &g).unwrap());
            assert!(f.rel_l2_error(&oracle).unwrap() < 1e-8);
        }
    }

    #[test]
    fn sparse_eval_matches_dense() {
        let spec = IllposedDataSpec::bounded_primitive(4, 0.0, 1.0);
        let g = spec.grid(1).unwrap();
        let u = illposed_spectrum(&spec, &g).unwrap();
        let f = u.to_field().unwrap().samples();
        for j in [0, 17, g.n() / 2, g.n() - 3] {
            assert!((u.eval(g.x(j)) - f[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn second_iterate_vanishes_at_time_zero() {
        let spec = IllposedDataSpec::pilod(4, 0.0);
        let g = spec.grid(1).unwrap();
        let u = illposed_spectrum(&spec, &g).unwrap();
        assert!(second_iterate_sparse(&u, 0.0).unwrap().entries.is_empty());
    }

    #[test]
    fn resonant_pair_gives_factor_t() {
        // ξ₁ = 0 or ξ = ξ₁ makes Ω vanish; with u0 at ±k only the
        // outputs 0 and ±2k appear, and at ξ = 0 the phase is 1.
        let g = Grid1D::new(PI * 8.0, 256).unwrap();
        let u = SparseSpectrum {
            grid: g,
            entries: vec![(-3, Complex64::new(1.0, 0.0)), (3, Complex64::new(1.0, 0.0))],
        };
        let t = 0.37;
        let out = second_iterate_sparse(&u, t).unwrap();
        let xi1 = 3.0 * g.dxi();
        let expect = 2.0 * (-xi1 * xi1) * t * g.dxi() / (2.0 * PI).sqrt();
        assert!((out.coef(0) - Complex64::new(expect, 0.0)).norm() < 1e-15);
        assert!((resonance_factor(0.0) - Complex64::new(1.0, 0.0)).norm() == 0.0);
        let th = 0.99e-4;
        let direct = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -th)) / Complex64::new(0.0, th);
        assert!((resonance_factor(th) - direct).norm() < 1e-11);
    }

    #[test]
    fn bounded_primitive_has_no_mass() {
        let spec = IllposedDataSpec::bounded_primitive(16, 0.5, 1.0);
        let g = spec.grid(1).unwrap();
        let u = illposed_spectrum(&spec, &g).unwrap();
        assert_eq!(u.total_integral(), 0.0);
        assert!(u.primitive_at(0.0).is_ok());
    }
}
