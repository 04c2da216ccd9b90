//! n-widths of Sobolev balls: finite-dimensional closed forms, upper
//! certificates from spectral tails and allocation schedules, lower
//! certificates from bump systems, and rate fitting.

mod bumps;
mod chain;
mod ellipsoid;
mod exponents;
mod report;
mod schedule;
mod sequence;
mod tail;

pub use bumps::{
    bump_count, bump_system, lower_bound_certificate, lower_bound_on, measure_support_constant, BumpNorms,
    BumpOptions, BumpSystem, LowerBound, SynthesisEntry, DISJOINT_TOL, LEAK_LIMIT,
};
pub use chain::{discretization_chain, product_band, ChainOptions, ChainReport};
pub use ellipsoid::{ellipsoid_widths, EllipsoidWidth};
pub use exponents::{basic_exponent, conjugate, predicted_exponent, rate_fit, Prediction, RateFit, WidthKind, WidthQuery};
pub use report::{exponent_serde, write_sweep_csv, FitSummary, QueryKey, SweepRow, WidthReport};
pub use schedule::{allocation_schedule, linear_width_pipeline, linear_width_pipeline_with, PipelineBound, Schedule};
pub use sequence::{
    brute_sequence_width, brute_sequence_width_scaled, gluskin_upper, sequence_width, BruteWidth, CLOSED_FORMS,
};
pub use tail::{eta_tail_bound, eta_tail_bound_with, TailBound, DEFAULT_EXTRA_BLOCKS};
