//! Band-limited mollifiers and the smoothed counting functions `N ∗ ρ_T`.
//!
//! Fourier convention: `ρ̂(ξ) = ∫ ρ(t) e^{−itξ} dt`, so
//! `ρ(t) = (2π)⁻¹ ∫ ρ̂(ξ) e^{itξ} dξ`. Scaling `ρ_T(t) = T ρ(Tt)` stretches the
//! Fourier support to `[−T, T]`; the reach of `ρ_T` in `t` is `t_cut / T`.

mod convolve;
mod jet;
mod kernel;

pub(crate) use kernel::plateau_hat;

pub use convolve::{convolve_counting, convolve_counting_series, convolve_density, tauberian_gap_check, Smoothed};
pub use kernel::{
    build_nonneg_kernel, build_plateau_kernel, tauberian_kernel, Kernel, KernelKind, ScaledKernel,
    DEFAULT_GRID_SPACING, DEFAULT_NONNEG_CUTOFF, DEFAULT_PLATEAU_CUTOFF,
};
