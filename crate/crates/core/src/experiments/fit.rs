use crate::error::{LabError, Result};
use crate::report::SlopeFit;

/// Ordinary least squares `y ≈ slope·x + intercept` with the standard
/// error of the slope (zero when only two points are given).
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(LabError::Invalid(format!("line fit needs ≥ 2 paired points, got {} and {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(LabError::Invalid("line fit on non-finite data".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::Invalid("line fit with constant abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

/// Fit on `(ln x, ln y)`; every value must be positive.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(LabError::Invalid("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn stderr_matches_hand_value() {
        // residuals (+1, −2, +1) around y = x: ssr = 6, sxx = 2
        let f = fit_line(&[0.0, 1.0, 2.0], &[1.0, -1.0, 3.0]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-15);
        assert!((f.stderr - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_fail() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
