//! Fourier representation on a periodic window standing in for the line.

mod dealias;
pub(crate) mod fft;
mod field;
mod grid;
mod littlewood_paley;
mod multiplier;

pub use dealias::{check_padding, dealias, max_degree, product, PaddedGrid};
pub use field::{Direction, Field, Values};
pub(crate) use field::{edge_ratio, sup};
pub use grid::Grid1D;
pub use littlewood_paley::{admissible_blocks, littlewood_paley, Block};
pub use multiplier::{
    airy_propagate, apply_multiplier, derivative, homogeneous_sobolev_norm, sobolev_norm, MultiplierSpec,
};

pub fn transform(field: &Field, direction: Direction) -> crate::error::Result<Field> {
    field.transform(direction)
}
