//! Band-limited functions, spectral filters F(t^2 L), their kernels and norms.

mod bandlimited;
mod block;
mod kernel;
mod norms;
pub mod profile;
mod wave;

pub use bandlimited::{synthesis_matrix, BandlimitedFunction, GridFunction};
pub use block::{block_band, block_exact_l2, block_norm, block_upper, BlockNorm, BlockNormOptions};
pub use kernel::{kernel_direct, kernel_eval, ZonalKernel};
pub use norms::{
    alpha_label, alpha_norm, alpha_norm_on, band_project, band_project_grid, grid_lp_norm, kernel_grid,
    localization_stat, lp_norm, lp_norm_on, norm_grid, rand_band, sample_pairs, seq_lp, weighted_lp, young_alpha,
    young_bound, KernelStat,
};
pub use profile::{filter_bank, filter_bank_companion, FilterProfile};
pub use wave::{wave_support_radius, wave_support_radius_with, WaveSupport};
