use num_complex::Complex64;

use super::fft;
use super::grid::Grid1D;
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

impl Values {
    fn tag(&self) -> &'static str {
        match self {
            Values::Physical(_) => "physical",
            Values::Spectral(_) => "spectral",
        }
    }
}

/// A real function on a [`Grid1D`], held either as samples or as coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Values,
}

impl Field {
    pub fn physical(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self {
            grid,
            values: Values::Physical(values),
        })
    }

    pub fn spectral(grid: Grid1D, coefs: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, coefs.len())?;
        Ok(Self {
            grid,
            values: Values::Spectral(coefs),
        })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: Values::Physical(vec![0.0; grid.n()]),
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: Values::Physical(grid.nodes().into_iter().map(f).collect()),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.values, Values::Physical(_))
    }

    /// Switch representation; `direction` must match the current one.
    pub fn transform(&self, direction: Direction) -> Result<Field> {
        match (direction, &self.values) {
            (Direction::Forward, Values::Physical(_)) => Ok(self.to_spectral()),
            (Direction::Inverse, Values::Spectral(_)) => Ok(self.to_physical()),
            (Direction::Forward, v) => Err(LabError::Representation {
                expected: "physical",
                found: v.tag(),
            }),
            (Direction::Inverse, v) => Err(LabError::Representation {
                expected: "spectral",
                found: v.tag(),
            }),
        }
    }

    pub fn to_spectral(&self) -> Field {
        Field {
            grid: self.grid,
            values: Values::Spectral(self.coefs()),
        }
    }

    pub fn to_physical(&self) -> Field {
        Field {
            grid: self.grid,
            values: Values::Physical(self.samples()),
        }
    }

    /// Physical samples (transforming if needed).
    pub fn samples(&self) -> Vec<f64> {
        match &self.values {
            Values::Physical(v) => v.clone(),
            Values::Spectral(c) => fft::inverse(self.grid.half_length(), c),
        }
    }

    /// Spectral coefficients in FFT slot order (transforming if needed).
    pub fn coefs(&self) -> Vec<Complex64> {
        match &self.values {
            Values::Physical(v) => fft::forward(self.grid.half_length(), v),
            Values::Spectral(c) => c.clone(),
        }
    }

    pub fn physical_values(&self) -> Result<&[f64]> {
        match &self.values {
            Values::Physical(v) => Ok(v),
            v => Err(LabError::Representation {
                expected: "physical",
                found: v.tag(),
            }),
        }
    }

    /// `(∫ |u|² dx)^{1/2}`, as a Riemann sum or via Parseval with weight `dξ`.
    pub fn l2_norm(&self) -> f64 {
        match &self.values {
            Values::Physical(v) => (self.grid.dx() * v.iter().map(|a| a * a).sum::<f64>()).sqrt(),
            Values::Spectral(c) => (self.grid.dxi() * c.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.samples())
    }

    /// `∫ u dx` over the window, read off the zero mode.
    pub fn total_integral(&self) -> f64 {
        let c0 = match &self.values {
            Values::Physical(v) => return self.grid.dx() * v.iter().sum::<f64>(),
            Values::Spectral(c) => c[0].re,
        };
        (2.0 * std::f64::consts::PI).sqrt() * c0
    }

    /// Largest edge sample relative to the sup norm (0 for the zero field).
    pub fn edge_ratio(&self) -> f64 {
        edge_ratio(&self.samples())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: Values::Physical(self.samples().into_iter().map(f).collect()),
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        match &self.values {
            Values::Physical(v) => Field {
                grid: self.grid,
                values: Values::Physical(v.iter().map(|x| a * x).collect()),
            },
            Values::Spectral(c) => Field {
                grid: self.grid,
                values: Values::Spectral(c.iter().map(|x| x * a).collect()),
            },
        }
    }

    /// `a·self + b·other`, in the representation of `self`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        Ok(match &self.values {
            Values::Physical(v) => {
                let w = other.samples();
                Field {
                    grid: self.grid,
                    values: Values::Physical(v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect()),
                }
            }
            Values::Spectral(c) => {
                let d = other.coefs();
                Field {
                    grid: self.grid,
                    values: Values::Spectral(c.iter().zip(&d).map(|(x, y)| x * a + y * b).collect()),
                }
            }
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpby(1.0, other, -1.0)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖` (absolute if `other` vanishes).
    pub fn rel_l2_error(&self, reference: &Field) -> Result<f64> {
        let diff = self.sub(reference)?.l2_norm();
        let r = reference.l2_norm();
        Ok(if r > 0.0 { diff / r } else { diff })
    }
}

fn check_len(grid: &Grid1D, len: usize) -> Result<()> {
    if len != grid.n() {
        return Err(LabError::Grid(format!("expected {} values, got {len}", grid.n())));
    }
    Ok(())
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub(crate) fn edge_ratio(v: &[f64]) -> f64 {
    let s = sup(v);
    if s == 0.0 {
        return 0.0;
    }
    v[0].abs().max(v[v.len() - 1].abs()) / s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::new(4.0, 64).unwrap()
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let f = Field::zeros(grid()).transform(Direction::Forward).unwrap();
        assert!(f.coefs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn direction_must_match() {
        let f = Field::zeros(grid());
        assert!(matches!(
            f.transform(Direction::Inverse),
            Err(LabError::Representation { .. })
        ));
        let s = f.to_spectral();
        assert!(s.transform(Direction::Forward).is_err());
    }

    #[test]
    fn lowest_cosine_has_two_coefficients() {
        let g = grid();
        let l = g.half_length();
        let f = Field::from_fn(g, |x| (PI * x / l).cos()).to_spectral();
        let c = f.coefs();
        for (j, cj) in c.iter().enumerate() {
            let k = g.wavenumber(j);
            if k.abs() == 1 {
                // (2π)^{-1/2} ∫ cos(ξ₁x) e^{∓iξ₁x} dx = L/√(2π)
                assert!((cj.re - l / (2.0 * PI).sqrt()).abs() < 1e-13);
                assert!(cj.im.abs() < 1e-13);
            } else {
                assert!(cj.norm() < 1e-13, "slot {j}: {cj}");
            }
        }
    }

    #[test]
    fn total_integral_matches_zero_mode() {
        let g = grid();
        let f = Field::from_fn(g, |x| (-x * x).exp());
        let a = f.total_integral();
        let b = f.to_spectral().total_integral();
        assert!((a - b).abs() < 1e-13);
        assert!((a - PI.sqrt()).abs() < 1e-6);
    }
}
