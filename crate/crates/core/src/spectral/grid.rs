use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Periodic window `[-L, L)` sampled at `n` equispaced nodes.
///
/// Frequencies follow FFT ordering: index `j` carries the signed wavenumber
/// `j` for `j < n/2` and `j - n` otherwise, i.e. `ξ = π k / L` with
/// `k = -n/2 .. n/2 - 1`. The single Nyquist mode `k = -n/2` has no partner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_length: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(LabError::Grid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(LabError::Grid(format!(
                "point count must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { half_length, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Frequency spacing `π / L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed wavenumber of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        signed_index(j, self.n)
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.wavenumber(j) as f64 * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.frequency(j)).collect()
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// Absolute value of the Nyquist frequency.
    pub fn nyquist(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi()
    }

    /// FFT slot holding signed wavenumber `k`, if it is representable.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    /// Same window, twice the points.
    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            n: 2 * self.n,
        }
    }
}

pub(crate) fn signed_index(j: usize, m: usize) -> i64 {
    if j < m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}
