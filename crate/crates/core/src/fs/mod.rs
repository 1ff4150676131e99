//! The Ferrari–Spohn diffusion: Airy numerics, the stationary law
//! `Ai(2^{1/3} x - omega_1)^2 / Z`, exact stationary sampling and an
//! Euler–Maruyama path simulator, with its tail probabilities.

pub mod airy;
mod process;

pub use airy::{airy_ai, airy_ai_checked, airy_ai_prime, airy_first_zero, airy_log_derivative, AiryTable};
pub use process::{
    fs_cdf, fs_density, fs_drift, fs_ground_state, fs_lower_tail, fs_lower_tail_mc, fs_max_tail, fs_mean,
    fs_normalization, fs_path_maxima, fs_quantile, fs_sample_stationary, fs_sf, fs_simulate_path,
    fs_stationary_draws, write_cdf_table, FsPath, FsTable, CBRT_2, EPS_WALL,
};
