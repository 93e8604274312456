//! Scripted reproductions that combine the solver, gauge and norm layers.

pub mod apriori;
pub mod contraction;
pub mod estimate_suite;
pub mod fit;
pub mod gauge_check;
pub mod illposed;
pub mod lipschitz;
pub mod solver;

pub use gauge_check::{
    conjugation_order, conjugation_residual, double_gauge_run, gauge_consistency_run, quadratic_chain_run, reduction_run,
    undo_double_gauge,
};
pub use fit::{fit_line, fit_loglog};
pub use illposed::{
    illposed_scan, illposed_spectrum, iterate_oracle_report, make_illposed_data, second_iterate, second_iterate_duhamel, second_iterate_sparse,
    total_integral_report, window_integral, Family, IllposedDataSpec, ScanParams, SparseSpectrum,
};
pub use lipschitz::{lipschitz_probe, LINEAR_RATIO_TOL, LIPSCHITZ_SPREAD};
pub use apriori::{apriori_diagnostic, AprioriParams, AprioriVariant, EXCESS_EXPONENT, EXCESS_EXPONENT_TOL};
pub use estimate_suite::{estimate_suite, EstimateParams};
pub use contraction::{contraction_run, ContractionParams, CONTRACTION_BOUND, HALVING_RANGE};
pub use solver::{linear_exactness, self_convergence, LINEAR_EXACTNESS_TOL, ORDER_TARGET, ORDER_TOL};
