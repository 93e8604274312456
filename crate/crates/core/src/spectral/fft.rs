//! Raw transforms on arbitrary even sizes with the continuous-transform
//! normalization `û(ξ) ≈ (2π)^{-1/2} ∫ u(x) e^{-iξx} dx`.
//!
//! With this scaling, coefficient values do not depend on the number of
//! points, so zero padding is a plain copy and `√(2π) û(0)` is the total
//! integral of `u` over the window.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::signed_index;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

#[inline]
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}


pub(crate) fn forward(half_length: f64, values: &[f64]) -> Vec<Complex64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(m, false).process(&mut buf);
    let scale = 2.0 * half_length / m as f64 / (2.0 * PI).sqrt();
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= scale * parity(signed_index(j, m));
    }
    buf
}

pub(crate) fn inverse(half_length: f64, coefs: &[Complex64]) -> Vec<f64> {
    let m = coefs.len();
    let mut buf: Vec<Complex64> = coefs
        .iter()
        .enumerate()
        .map(|(j, &c)| c * parity(signed_index(j, m)))
        .collect();
    plan(m, true).process(&mut buf);
    let scale = (2.0 * PI).sqrt() / (2.0 * half_length);
    buf.iter().map(|c| c.re * scale).collect()
}

/// Copy an `n`-slot spectrum into `m >= n` slots; the Nyquist slot is dropped.
pub(crate) fn pad(coefs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coefs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (j, &c) in coefs.iter().enumerate() {
        let k = signed_index(j, n);
        if k == -((n / 2) as i64) {
            continue;
        }
        out[k.rem_euclid(m as i64) as usize] = c;
    }
    out
}

/// Keep the `|k| < n/2` part of an `m`-slot spectrum; the Nyquist slot is zero.
pub(crate) fn truncate(coefs: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = coefs.len();
    (0..n)
        .map(|j| {
            let k = signed_index(j, n);
            if k == -((n / 2) as i64) {
                Complex64::new(0.0, 0.0)
            } else {
                coefs[k.rem_euclid(m as i64) as usize]
            }
        })
        .collect()
}

/// Antiderivative coefficients of the zero-mean part; mean and Nyquist slots are zero.
pub(crate) fn antiderivative(half_length: f64, coefs: &[Complex64]) -> Vec<Complex64> {
    let m = coefs.len();
    let dxi = PI / half_length;
    (0..m)
        .map(|j| {
            let k = signed_index(j, m);
            if k == 0 || k == -((m / 2) as i64) {
                Complex64::new(0.0, 0.0)
            } else {
                coefs[j] / Complex64::new(0.0, k as f64 * dxi)
            }
        })
        .collect()
}

/// `∫_{-L}^{x_j} u` from spectral coefficients, sampled on `m` nodes.
///
/// The mean contributes the ramp `mean·(x + L)`; the zero-mean remainder is
/// integrated spectrally. Exact for trigonometric polynomials.
pub(crate) fn primitive_from_coefs(half_length: f64, coefs: &[Complex64], m: usize) -> Vec<f64> {
    let n = coefs.len();
    let mean = coefs[0].re * (2.0 * PI).sqrt() / (2.0 * half_length);
    let anti = antiderivative(half_length, coefs);
    let periodic = if m == n { inverse(half_length, &anti) } else { inverse(half_length, &pad(&anti, m)) };
    let dx = 2.0 * half_length / m as f64;
    let p0 = periodic[0];
    periodic
        .iter()
        .enumerate()
        .map(|(j, &p)| mean * j as f64 * dx + p - p0)
        .collect()
}

pub(crate) fn primitive(half_length: f64, values: &[f64]) -> Vec<f64> {
    let coefs = forward(half_length, values);
    primitive_from_coefs(half_length, &coefs, values.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_then_truncate_is_identity_off_nyquist() {
        let c: Vec<Complex64> = (0..16).map(|j| Complex64::new(j as f64, -(j as f64))).collect();
        let back = truncate(&pad(&c, 48), 16);
        for j in 0..16 {
            if j == 8 {
                assert_eq!(back[j], Complex64::new(0.0, 0.0));
            } else {
                assert_eq!(back[j], c[j]);
            }
        }
    }

    #[test]
    fn padded_inverse_interpolates() {
        let l = PI;
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|j| -l + j as f64 * 2.0 * l / n as f64).collect();
        let u: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin() + 0.5 * (x).cos()).collect();
        let fine = inverse(l, &pad(&forward(l, &u), 3 * n));
        for (j, v) in fine.iter().enumerate() {
            let x = -l + j as f64 * 2.0 * l / (3 * n) as f64;
            assert!((v - ((3.0 * x).sin() + 0.5 * x.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn primitive_of_trig_polynomial_with_mean() {
        let l = PI;
        let n = 64;
        let u: Vec<f64> = (0..n)
            .map(|j| {
                let x = -l + j as f64 * 2.0 * l / n as f64;
                1.0 + (2.0 * x).cos()
            })
            .collect();
        let p = primitive(l, &u);
        for (j, v) in p.iter().enumerate() {
            let x = -l + j as f64 * 2.0 * l / n as f64;
            let exact = (x + l) + ((2.0 * x).sin() - (-2.0 * l).sin()) / 2.0;
            assert!((v - exact).abs() < 1e-12, "{j}: {v} vs {exact}");
        }
    }
}
