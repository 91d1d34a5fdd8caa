//! Model manifolds with exactly known spectra: flat tori and round spheres.

mod lattice;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectrum::{Entry, Provenance, Spectrum};

/// Default cap on enumerated lattice candidates.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;

/// Relative merge tolerance for lattices without an integer Gram matrix.
pub const FLOAT_MERGE_RELATIVE: f64 = 1e-9;

/// Flat torus `Rᵈ / L Zᵈ`, the lattice `L` generated by the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatTorus {
    basis: DMatrix<f64>,
}

impl FlatTorus {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 || basis.nrows() != basis.ncols() {
            return Err(Error::validation("torus basis must be a non-empty square matrix"));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("torus basis has non-finite entries"));
        }
        let det = basis.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::validation("torus basis is singular"));
        }
        Ok(Self { basis })
    }

    /// Basis given as columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        if columns.iter().any(|c| c.len() != d) {
            return Err(Error::validation("torus basis must be square"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| columns[j][i]))
    }

    /// `side · Identity`.
    pub fn cubic(dimension: usize, side: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::validation("torus dimension must be at least 1"));
        }
        Self::new(DMatrix::identity(dimension, dimension) * side)
    }

    pub fn rectangular(sides: &[f64]) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::validation("torus dimension must be at least 1"));
        }
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sides)))
    }

    pub fn dimension(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn volume(&self) -> f64 {
        self.basis.determinant().abs()
    }

    /// Gram matrix `LᵀL` of the lattice itself (closed-geodesic lengths).
    pub fn gram(&self) -> DMatrix<f64> {
        self.basis.transpose() * &self.basis
    }

    /// Gram matrix `4π² (LᵀL)⁻¹` of the dual lattice `2π L⁻ᵀ Zᵈ` (frequencies).
    pub fn dual_gram(&self) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || self.basis[(i, j)] == 0.0));
        if diagonal {
            // Keeps (2π/side)² exact when side is the float nearest 2π.
            return Ok(DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    (2.0 * PI / self.basis[(i, i)]).powi(2)
                } else {
                    0.0
                }
            }));
        }
        let inv = self
            .gram()
            .try_inverse()
            .ok_or_else(|| Error::validation("torus basis is singular"))?;
        Ok(inv * (4.0 * PI * PI))
    }
}

/// Complete spectrum of the flat torus below `lambda_max`.
pub fn torus_spectrum(torus: &FlatTorus, lambda_max: f64) -> Result<Spectrum> {
    torus_spectrum_with_budget(torus, lambda_max, DEFAULT_POINT_BUDGET)
}

pub fn torus_spectrum_with_budget(torus: &FlatTorus, lambda_max: f64, point_budget: u64) -> Result<Spectrum> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::validation(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let norms = lattice::norms_below(
        &torus.dual_gram()?,
        lambda_max,
        true,
        point_budget,
        FLOAT_MERGE_RELATIVE * lambda_max,
    )?;
    let entries = norms
        .into_iter()
        .map(|(frequency, multiplicity)| Entry {
            frequency,
            multiplicity,
        })
        .collect();
    let label = format!(
        "flat torus d={} volume={} basis(columns)={:?}",
        torus.dimension(),
        torus.volume(),
        torus.basis.as_slice()
    );
    Ok(Spectrum::from_sorted_entries(entries, lambda_max)
        .with_label(label)
        .with_provenance(Provenance {
            dimension: Some(torus.dimension() as u32),
            volume: Some(torus.volume()),
        }))
}

/// Distinct closed-geodesic lengths `|L m| < length_max`, `m ≠ 0`, with counts.
pub fn torus_geodesic_lengths(torus: &FlatTorus, length_max: f64) -> Result<Vec<(f64, u64)>> {
    if !(length_max > 0.0 && length_max.is_finite()) {
        return Err(Error::validation(format!("length_max must be positive, got {length_max}")));
    }
    lattice::norms_below(
        &torus.gram(),
        length_max,
        false,
        DEFAULT_POINT_BUDGET,
        FLOAT_MERGE_RELATIVE * length_max,
    )
}

/// Unit round sphere `Sᵈ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundSphere {
    dimension: u32,
}

impl RoundSphere {
    pub fn new(dimension: u32) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::validation("sphere dimension must be at least 2"));
        }
        Ok(Self { dimension })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Riemannian volume of the unit `Sᵈ`, i.e. `(d+1) ω_{d+1}`.
    pub fn volume(&self) -> f64 {
        let d = self.dimension;
        (d + 1) as f64 * crate::weyl::unit_ball_volume(d + 1).expect("d + 1 >= 1")
    }

    /// Frequency `√(l(l+d−1))` and multiplicity of the degree-`l` harmonics.
    pub fn mode(&self, l: u64) -> Result<(f64, u64)> {
        let d = self.dimension as u128;
        let l128 = l as u128;
        // C(l+d-2, d-2) built up incrementally; each partial product is itself a binomial.
        let mut binom: u128 = 1;
        for j in 1..=(d - 2) {
            binom = binom
                .checked_mul(l128 + j)
                .ok_or_else(|| Error::Resource("sphere multiplicity overflow".into()))?
                / j;
        }
        let numerator = binom
            .checked_mul(2 * l128 + d - 1)
            .ok_or_else(|| Error::Resource("sphere multiplicity overflow".into()))?;
        debug_assert_eq!(numerator % (d - 1), 0);
        let mult = u64::try_from(numerator / (d - 1))
            .map_err(|_| Error::Resource("sphere multiplicity overflow".into()))?;
        let eig = l128 * (l128 + d - 1);
        Ok(((eig as f64).sqrt(), mult))
    }
}

/// Complete spectrum of the round unit sphere below `lambda_max`.
pub fn sphere_spectrum(sphere: &RoundSphere, lambda_max: f64) -> Result<Spectrum> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::validation(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let mut entries = Vec::new();
    for l in 0u64.. {
        let (frequency, multiplicity) = sphere.mode(l)?;
        if frequency >= lambda_max {
            break;
        }
        entries.push(Entry {
            frequency,
            multiplicity,
        });
    }
    Ok(Spectrum::from_sorted_entries(entries, lambda_max)
        .with_label(format!("round unit sphere d={}", sphere.dimension))
        .with_provenance(Provenance {
            dimension: Some(sphere.dimension),
            volume: Some(sphere.volume()),
        }))
}
