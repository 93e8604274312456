use num_complex::Complex64;

use super::fft;
use super::field::{Field, Values};
use super::grid::Grid1D;
use crate::error::{LabError, Result};

/// Largest product degree a pad factor keeps alias-free: `2·pad − 1`.
pub fn max_degree(pad_factor: usize) -> usize {
    (2 * pad_factor).saturating_sub(1)
}

pub fn check_padding(pad_factor: usize, degree: usize) -> Result<()> {
    if pad_factor < 1 || 2 * pad_factor < degree + 1 {
        return Err(LabError::InsufficientPadding {
            pad: pad_factor,
            degree,
            needed: (degree as f64 + 1.0) / 2.0,
        });
    }
    Ok(())
}

/// Spectral truncation to `|k| < n / (2·pad)`.
///
/// After this filter, unpadded pointwise products of degree up to
/// `2·pad − 1` alias only into the discarded band.
pub fn dealias(field: &Field, pad_factor: usize) -> Result<Field> {
    if pad_factor < 2 {
        return Err(LabError::InsufficientPadding {
            pad: pad_factor,
            degree: 2,
            needed: 1.5,
        });
    }
    let g = *field.grid();
    let cut = (g.n() / (2 * pad_factor)) as i64;
    let c: Vec<Complex64> = field
        .coefs()
        .into_iter()
        .enumerate()
        .map(|(j, c)| if g.wavenumber(j).abs() < cut { c } else { Complex64::new(0.0, 0.0) })
        .collect();
    let out = Field::spectral(g, c)?;
    Ok(match field.values() {
        Values::Physical(_) => out.to_physical(),
        Values::Spectral(_) => out,
    })
}

/// Zero-padded evaluation grid with `pad·n` nodes over the same window.
///
/// Fields are lifted by spectral interpolation, combined pointwise, and
/// projected back by truncation. The Nyquist slot is discarded on both ways.
#[derive(Clone, Copy, Debug)]
pub struct PaddedGrid {
    grid: Grid1D,
    m: usize,
}

impl PaddedGrid {
    pub fn new(grid: Grid1D, pad_factor: usize) -> Result<Self> {
        check_padding(pad_factor, 2)?;
        Ok(Self {
            grid,
            m: pad_factor * grid.n(),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Frequencies of the coarse grid slots.
    pub fn frequencies(&self) -> Vec<f64> {
        self.grid.frequencies()
    }

    /// Padded-grid node positions.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.grid.length() / self.m as f64;
        (0..self.m).map(|j| -self.grid.half_length() + j as f64 * dx).collect()
    }

    pub fn lift_coefs(&self, coefs: &[Complex64]) -> Vec<f64> {
        fft::inverse(self.grid.half_length(), &fft::pad(coefs, self.m))
    }

    pub fn lift(&self, field: &Field) -> Vec<f64> {
        self.lift_coefs(&field.coefs())
    }

    /// Coarse coefficients of padded samples, truncated to the coarse band.
    pub fn project_coefs(&self, values: &[f64]) -> Vec<Complex64> {
        fft::truncate(&fft::forward(self.grid.half_length(), values), self.grid.n())
    }

    /// Forward transform on the padded grid (no truncation).
    pub fn forward_padded(&self, values: &[f64]) -> Vec<Complex64> {
        fft::forward(self.grid.half_length(), values)
    }

    pub fn project(&self, values: &[f64]) -> Field {
        Field::spectral(self.grid, self.project_coefs(values)).expect("coarse length")
    }

    /// `∫_{−L}^x` of padded samples, evaluated on the padded nodes.
    pub fn primitive(&self, values: &[f64]) -> Vec<f64> {
        fft::primitive(self.grid.half_length(), values)
    }
}

/// Alias-free product of all `fields`, truncated back to their grid.
pub fn product(fields: &[&Field], pad_factor: usize) -> Result<Field> {
    let first = fields
        .first()
        .ok_or_else(|| LabError::Invalid("product of no fields".into()))?;
    let grid = *first.grid();
    if fields.iter().any(|f| *f.grid() != grid) {
        return Err(LabError::GridMismatch);
    }
    check_padding(pad_factor, fields.len())?;
    let pg = PaddedGrid {
        grid,
        m: pad_factor * grid.n(),
    };
    let mut acc = pg.lift(first);
    for f in &fields[1..] {
        for (a, b) in acc.iter_mut().zip(pg.lift(f)) {
            *a *= b;
        }
    }
    let out = pg.project(&acc);
    Ok(if first.is_physical() { out.to_physical() } else { out })
}
