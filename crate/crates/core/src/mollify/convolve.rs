use rayon::prelude::*;

use super::kernel::ScaledKernel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectrum::Spectrum;
use crate::sum::NeumaierSum;

/// A smoothed value together with whether the spectrum covered the kernel's reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothed {
    pub value: f64,
    /// False when `λ + reach` passes `lambda_max`: eigenvalues that were never
    /// computed could still contribute.
    pub complete: bool,
}

fn check_point(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::validation(format!("evaluation point {lambda} is not finite")));
    }
    Ok(())
}

/// Entries below `λ − reach` and the half-open window `[λ − reach, λ + reach)`.
fn window(spectrum: &Spectrum, lambda: f64, reach: f64) -> (usize, usize) {
    (spectrum.index_below(lambda - reach), spectrum.index_below(lambda + reach))
}

/// `N ∗ ρ_T(λ) = Σ mult_i Φ_T(λ − λ_i)`.
pub fn convolve_counting(spectrum: &Spectrum, kernel: &ScaledKernel<'_>, lambda: f64) -> Result<Smoothed> {
    check_point(lambda)?;
    let reach = kernel.reach();
    let (lo, hi) = window(spectrum, lambda, reach);
    let entries = spectrum.entries();
    let saturated: u64 = entries[..lo].iter().map(|e| e.multiplicity).sum();
    let mut acc = NeumaierSum::new();
    acc.add(saturated as f64 * kernel.mass());
    for e in &entries[lo..hi] {
        acc.add(e.multiplicity as f64 * kernel.phi(lambda - e.frequency));
    }
    Ok(Smoothed {
        value: acc.value(),
        complete: lambda + reach <= spectrum.lambda_max(),
    })
}

/// `N′ ∗ κ_T(λ) = Σ mult_i κ_T(λ − λ_i)`.
pub fn convolve_density(spectrum: &Spectrum, kernel: &ScaledKernel<'_>, lambda: f64) -> Result<Smoothed> {
    check_point(lambda)?;
    let reach = kernel.reach();
    let (lo, hi) = window(spectrum, lambda, reach);
    let value = spectrum.entries()[lo..hi]
        .iter()
        .map(|e| e.multiplicity as f64 * kernel.rho(lambda - e.frequency))
        .collect::<NeumaierSum>()
        .value();
    Ok(Smoothed {
        value,
        complete: lambda + reach <= spectrum.lambda_max(),
    })
}

/// `(λ, N ∗ ρ_T(λ))` over a set of points. Fails on the first incomplete point.
pub fn convolve_counting_series(
    spectrum: &Spectrum,
    kernel: &ScaledKernel<'_>,
    points: &[f64],
) -> Result<Vec<(f64, Smoothed)>> {
    points
        .par_iter()
        .map(|&lambda| Ok((lambda, convolve_counting(spectrum, kernel, lambda)?)))
        .collect()
}

/// `(λ, ∫_{−∞}^λ (N − N∗ρ_T) dμ)` on the grid.
///
/// The integral is evaluated in closed form from the second antiderivative
/// `Ψ_T` of the kernel: each eigenvalue contributes
/// `(λ − λ_i)_+ − Ψ_T(λ − λ_i)`, and eigenvalues further than the reach below
/// `λ` contribute `(1 − m)(λ − λ_i)` with `m = ∫ρ`.
pub fn tauberian_gap_check(spectrum: &Spectrum, kernel: &ScaledKernel<'_>, grid: &Grid) -> Result<Vec<(f64, f64)>> {
    let reach = kernel.reach();
    let needed = grid.stop + reach;
    if needed > spectrum.lambda_max() {
        return Err(Error::Completeness {
            query: needed,
            lambda_max: spectrum.lambda_max(),
        });
    }
    let entries = spectrum.entries();
    // Prefix count and first moment for the saturated part.
    let mut counts = Vec::with_capacity(entries.len() + 1);
    let mut moments = Vec::with_capacity(entries.len() + 1);
    let mut count = 0u64;
    let mut moment = NeumaierSum::new();
    counts.push(0u64);
    moments.push((0.0, 0.0));
    for e in entries {
        count += e.multiplicity;
        moment.add(e.multiplicity as f64 * e.frequency);
        counts.push(count);
        moments.push(moment.parts());
    }
    let deficit = 1.0 - kernel.mass();

    Ok(grid
        .points()
        .par_iter()
        .map(|&lambda| {
            let (lo, hi) = window(spectrum, lambda, reach);
            let mut acc = NeumaierSum::new();
            if deficit != 0.0 {
                let (m_hi, m_lo) = moments[lo];
                acc.add(deficit * counts[lo] as f64 * lambda);
                acc.add(-deficit * m_hi);
                acc.add(-deficit * m_lo);
            }
            for e in &entries[lo..hi] {
                let s = lambda - e.frequency;
                acc.add(e.multiplicity as f64 * (s.max(0.0) - kernel.psi(s)));
            }
            (lambda, acc.value())
        })
        .collect())
}
