//! Windowed wave traces `F(t) = Σ mult_i w(λ_i) cos(tλ_i)` and peak picking.
//!
//! On a flat torus `F` concentrates near the lengths of closed geodesics, and
//! nothing appears below the shortest one.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mollify::plateau_hat;
use crate::spectrum::Spectrum;
use crate::sum::NeumaierSum;

/// Largest fraction of window mass allowed beyond the completeness bound.
pub const WINDOW_MASS_TOLERANCE: f64 = 1e-8;

/// Spectral weight applied before summing cosines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `exp(−(λ − center)² / 2σ²)`.
    Gaussian { center: f64, sigma: f64 },
    /// Plateau profile `ρ̂((λ − center) / halfwidth)`, supported in `[center ± halfwidth]`.
    Plateau { center: f64, halfwidth: f64 },
}

impl Window {
    fn validate(&self) -> Result<()> {
        let (c, w) = match *self {
            Window::Gaussian { center, sigma } => (center, sigma),
            Window::Plateau { center, halfwidth } => (center, halfwidth),
        };
        if !(c.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(Error::validation(format!("invalid window {self:?}")));
        }
        Ok(())
    }

    pub fn weight(&self, lambda: f64) -> f64 {
        match *self {
            Window::Gaussian { center, sigma } => {
                let z = (lambda - center) / sigma;
                (-0.5 * z * z).exp()
            }
            Window::Plateau { center, halfwidth } => plateau_hat((lambda - center) / halfwidth),
        }
    }

    /// Fraction of the window's mass on `λ >= 0` that lies above `lambda_max`.
    pub fn mass_above(&self, lambda_max: f64) -> f64 {
        match *self {
            Window::Gaussian { center, sigma } => {
                let s = sigma * std::f64::consts::SQRT_2;
                erfc((lambda_max - center) / s) / erfc(-center / s)
            }
            Window::Plateau { center, halfwidth } => {
                if center + halfwidth <= lambda_max {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Window::Gaussian { center, sigma } => format!("gaussian center={center} sigma={sigma}"),
            Window::Plateau { center, halfwidth } => format!("plateau center={center} halfwidth={halfwidth}"),
        }
    }
}

/// `F` sampled on a uniform grid of `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub window: Window,
}

impl TraceSeries {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.grid.points().into_iter().zip(self.values.iter().copied()).collect()
    }
}

/// Computes `F(t)` on `t_grid`, one independent compensated sum per point.
pub fn spectral_wave_trace(spectrum: &Spectrum, window: Window, t_grid: &Grid) -> Result<TraceSeries> {
    window.validate()?;
    let above = window.mass_above(spectrum.lambda_max());
    if above > WINDOW_MASS_TOLERANCE {
        return Err(Error::Completeness {
            query: match window {
                Window::Gaussian { center, .. } | Window::Plateau { center, .. } => center,
            },
            lambda_max: spectrum.lambda_max(),
        });
    }
    let weighted: Vec<(f64, f64)> = spectrum
        .entries()
        .iter()
        .map(|e| (e.frequency, e.multiplicity as f64 * window.weight(e.frequency)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let values = t_grid
        .points()
        .par_iter()
        .map(|&t| {
            weighted
                .iter()
                .map(|&(f, w)| w * (t * f).cos())
                .collect::<NeumaierSum>()
                .value()
        })
        .collect();
    Ok(TraceSeries {
        grid: *t_grid,
        values,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub height: f64,
}

/// Relative height difference below which two peaks count as equally tall.
const TIE_RELATIVE: f64 = 1e-6;

/// Tallest local maxima of `|F|` at `t >= min_separation`, at least `min_separation` apart.
///
/// Each grid maximum is refined by a parabola through `log|F|` at it and its
/// two neighbours. Peaks whose heights agree to within `1e-6` of the tallest
/// are ordered by `t`.
pub fn detect_length_peaks(trace: &TraceSeries, min_separation: f64, count: usize) -> Result<Vec<Peak>> {
    if count == 0 {
        return Err(Error::validation("peak count must be at least 1"));
    }
    if !(min_separation >= 0.0) {
        return Err(Error::validation("minimum separation must be non-negative"));
    }
    let a: Vec<f64> = trace.values.iter().map(|v| v.abs()).collect();
    let h = trace.grid.step;
    let mut candidates = Vec::new();
    for i in 1..a.len().saturating_sub(1) {
        let t = trace.grid.point(i);
        if t < min_separation || !(a[i] > a[i - 1] && a[i] >= a[i + 1]) {
            continue;
        }
        candidates.push(refine(a[i - 1], a[i], a[i + 1], t, h));
    }
    let top = candidates.iter().fold(0.0f64, |m, p| m.max(p.height));
    if top == 0.0 {
        return Ok(Vec::new());
    }
    let bucket = |p: &Peak| (p.height / (TIE_RELATIVE * top)).round() as i64;
    candidates.sort_by(|x, y| bucket(y).cmp(&bucket(x)).then(x.t.total_cmp(&y.t)));

    let mut chosen: Vec<Peak> = Vec::new();
    for p in candidates {
        if chosen.iter().all(|q| (q.t - p.t).abs() >= min_separation) {
            chosen.push(p);
            if chosen.len() == count {
                break;
            }
        }
    }
    Ok(chosen)
}

fn refine(left: f64, mid: f64, right: f64, t: f64, h: f64) -> Peak {
    if left > 0.0 && right > 0.0 {
        let (l, m, r) = (left.ln(), mid.ln(), right.ln());
        let curvature = l - 2.0 * m + r;
        if curvature < 0.0 {
            let offset = 0.5 * (l - r) / curvature;
            let height = m - 0.25 * (l - r) * offset;
            return Peak {
                t: t + offset * h,
                height: height.exp(),
            };
        }
    }
    Peak { t, height: mid }
}
