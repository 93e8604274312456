use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::multiplier::apply_symbols;
use crate::error::{LabError, Result};

/// Sharp inhomogeneous dyadic block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    /// `|ξ| ≤ 1`
    Low,
    /// `N/2 < |ξ| ≤ N`, `N ∈ {2, 4, 8, ...}`
    Dyadic(u64),
}

impl Block {
    pub fn contains(&self, xi: f64) -> bool {
        let a = xi.abs();
        match *self {
            Block::Low => a <= 1.0,
            Block::Dyadic(n) => {
                let n = n as f64;
                a > n / 2.0 && a <= n
            }
        }
    }
}

/// Every block that sees some frequency of the grid, in increasing order.
pub fn admissible_blocks(nyquist: f64) -> Vec<Block> {
    let mut out = vec![Block::Low];
    let mut n = 2u64;
    while (n as f64) / 2.0 < nyquist {
        out.push(Block::Dyadic(n));
        n *= 2;
    }
    out
}

pub fn littlewood_paley(field: &Field, block: Block) -> Result<Field> {
    let grid = field.grid();
    if let Block::Dyadic(n) = block {
        if n < 2 || !n.is_power_of_two() {
            return Err(LabError::Invalid(format!("dyadic block must be a power of two >= 2, got {n}")));
        }
        if n as f64 / 2.0 >= grid.nyquist() {
            return Err(LabError::BlockAboveNyquist(n));
        }
    }
    let mask: Vec<Complex64> = (0..grid.n())
        .map(|j| {
            if block.contains(grid.frequency(j)) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(apply_symbols(field, &mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;

    #[test]
    fn mode_three_sits_in_block_four() {
        let g = Grid1D::new(std::f64::consts::PI, 64).unwrap();
        let f = Field::from_fn(g, |x| (3.0 * x).cos());
        let p4 = littlewood_paley(&f, Block::Dyadic(4)).unwrap();
        assert!(p4.sub(&f).unwrap().l2_norm() < 1e-13);
        for b in admissible_blocks(g.nyquist()) {
            if b != Block::Dyadic(4) {
                assert!(littlewood_paley(&f, b).unwrap().l2_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn block_above_nyquist_rejected() {
        let g = Grid1D::new(std::f64::consts::PI, 16).unwrap();
        assert!(littlewood_paley(&Field::zeros(g), Block::Dyadic(8)).is_ok());
        assert!(matches!(
            littlewood_paley(&Field::zeros(g), Block::Dyadic(16)),
            Err(LabError::BlockAboveNyquist(16))
        ));
        assert!(littlewood_paley(&Field::zeros(g), Block::Dyadic(3)).is_err());
    }
}
