//! Pseudo-spectral laboratory for KdV-type equations with derivative
//! nonlinearities, their exponential gauge transforms, and the mixed
//! space-time norms used to control them.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod gauge;
pub mod norms;
pub mod report;
pub mod spectral;
