//! Integrated expansion coefficients `A_i = ∫_M a_i` and the asymptotic
//! polynomials they predict for `N` and its Riesz means.
//!
//! Coefficient `A_i` multiplies `λ^{d−i}`. The `k`-th Riesz mean of that
//! monomial is `k!(d−i)!/(d−i+k)! · λ^{d−i}`, so a Riesz prediction is the
//! same polynomial with rescaled coefficients.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::counting::{riesz_mean, PrefixPowerSums, RieszQuery};
use crate::error::{Error, Result};
use crate::output::write_atomic;
use crate::spectrum::Spectrum;

/// Volume `π^{d/2}/Γ(d/2+1)` of the unit ball in `R^d`.
pub fn unit_ball_volume(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::validation("unit ball volume needs d >= 1"));
    }
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut n = start;
    while n <= d {
        v *= 2.0 * PI / n as f64;
        n += 2;
    }
    Ok(v)
}

/// `A_0 = Vol(M) ω_d / (2π)^d`.
pub fn leading_coefficient(d: u32, volume: f64) -> Result<f64> {
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::validation(format!("volume must be positive, got {volume}")));
    }
    Ok(volume * unit_ball_volume(d)? / (2.0 * PI).powi(d as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientStatus {
    Known,
    /// Not yet determined; contributes nothing to predictions.
    Unknown,
    /// Estimated by [`fit_unknown_coefficients`].
    Fitted,
}

/// Integrated coefficients `A_0..A_m`, `m <= d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylCoefficients {
    dimension: u32,
    values: Vec<f64>,
    status: Vec<CoefficientStatus>,
    closed: bool,
}

impl WeylCoefficients {
    /// `closed` asserts a manifold without boundary, for which `A_1` vanishes.
    pub fn new(dimension: u32, values: Vec<f64>, status: Vec<CoefficientStatus>, closed: bool) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::validation("dimension must be at least 1"));
        }
        if values.len() != status.len() {
            return Err(Error::validation("one status per coefficient is required"));
        }
        if values.is_empty() || values.len() > dimension as usize + 1 {
            return Err(Error::validation(format!(
                "between 1 and {} coefficients are allowed in dimension {dimension}",
                dimension + 1
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("coefficients must be finite"));
        }
        if closed && values.len() > 1 && status[1] != CoefficientStatus::Unknown && values[1] != 0.0 {
            return Err(Error::validation("A_1 must vanish on a closed manifold"));
        }
        Ok(Self {
            dimension,
            values,
            status,
            closed,
        })
    }

    /// Flat torus: `A_0` from the volume, every other coefficient zero.
    pub fn flat_torus(dimension: u32, volume: f64) -> Result<Self> {
        let mut values = vec![0.0; dimension as usize + 1];
        values[0] = leading_coefficient(dimension, volume)?;
        Self::new(dimension, values, vec![CoefficientStatus::Known; dimension as usize + 1], true)
    }

    /// Unit sphere `Sᵈ`: `A_0` and `A_1 = 0` known, the rest left to fit.
    pub fn round_sphere(dimension: u32) -> Result<Self> {
        let sphere = crate::models::RoundSphere::new(dimension)?;
        let n = dimension as usize + 1;
        let mut values = vec![0.0; n];
        values[0] = leading_coefficient(dimension, sphere.volume())?;
        let mut status = vec![CoefficientStatus::Unknown; n];
        status[0] = CoefficientStatus::Known;
        status[1] = CoefficientStatus::Known;
        Self::new(dimension, values, status, true)
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn status(&self) -> &[CoefficientStatus] {
        &self.status
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Power of `λ` multiplying `A_i`.
    pub fn exponent(&self, i: usize) -> i32 {
        self.dimension as i32 - i as i32
    }

    pub fn unknown_indices(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.status[i] == CoefficientStatus::Unknown)
            .collect()
    }

    /// Marks coefficient `i` unknown so it is dropped from predictions and can be fitted.
    pub fn with_unknown(mut self, i: usize) -> Result<Self> {
        if i >= self.values.len() {
            return Err(Error::validation(format!("no coefficient A_{i}")));
        }
        self.values[i] = 0.0;
        self.status[i] = CoefficientStatus::Unknown;
        Ok(self)
    }

    pub fn to_toml_string(&self) -> String {
        let file = CoefficientFile {
            dimension: self.dimension,
            closed: self.closed,
            coefficient: (0..self.values.len())
                .map(|i| CoefficientRecord {
                    index: i as u32,
                    exponent: self.exponent(i),
                    value: self.values[i],
                    status: self.status[i],
                })
                .collect(),
        };
        toml::to_string(&file).expect("coefficient records always serialize")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CoefficientFile =
            toml::from_str(text).map_err(|e| Error::validation(format!("coefficient file: {e}")))?;
        let n = file.coefficient.len();
        let mut values = vec![f64::NAN; n];
        let mut status = vec![CoefficientStatus::Unknown; n];
        for rec in &file.coefficient {
            let i = rec.index as usize;
            if i >= n || !values[i].is_nan() {
                return Err(Error::validation(format!(
                    "coefficient indices must be 0..{} without repeats",
                    n.saturating_sub(1)
                )));
            }
            if rec.exponent != file.dimension as i32 - i as i32 {
                return Err(Error::validation(format!(
                    "A_{i} must carry exponent {}, found {}",
                    file.dimension as i32 - i as i32,
                    rec.exponent
                )));
            }
            values[i] = rec.value;
            status[i] = rec.status;
        }
        Self::new(file.dimension, values, status, file.closed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_toml_string().as_bytes())
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientFile {
    dimension: u32,
    #[serde(default)]
    closed: bool,
    coefficient: Vec<CoefficientRecord>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientRecord {
    index: u32,
    exponent: i32,
    value: f64,
    status: CoefficientStatus,
}

/// `k!(d−i)!/(d−i+k)!` as an exact fraction.
pub fn riesz_factor_exact(d: u32, k: u32, i: u32) -> Result<Ratio<u128>> {
    if i > d {
        return Err(Error::validation(format!("index {i} exceeds dimension {d}")));
    }
    // k!(d−i)!/(d−i+k)! = 1 / C(d−i+k, k)
    let n = (d - i) as u128;
    let mut binom: u128 = 1;
    for j in 1..=k as u128 {
        binom = binom
            .checked_mul(n + j)
            .ok_or_else(|| Error::Resource("Riesz factor overflow".into()))?
            / j;
    }
    Ok(Ratio::new(1, binom))
}

/// `k!(d−i)!/(d−i+k)!` in floating point.
pub fn riesz_factor(d: u32, k: u32, i: u32) -> Result<f64> {
    let r = riesz_factor_exact(d, k, i)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Polynomial `Σ c_j λ^{e_j}` predicted for `R_k N`, exponents decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszPrediction {
    k: u32,
    terms: Vec<(i32, f64)>,
}

impl RieszPrediction {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn terms(&self) -> &[(i32, f64)] {
        &self.terms
    }
}

/// Term-wise Riesz transform of the coefficients; unknown coefficients are skipped.
pub fn riesz_transform_coeffs(coeffs: &WeylCoefficients, k: u32) -> RieszPrediction {
    let terms = (0..coeffs.values.len())
        .filter(|&i| coeffs.status[i] != CoefficientStatus::Unknown)
        .map(|i| {
            let f = riesz_factor(coeffs.dimension, k, i as u32).expect("i <= d by construction");
            (coeffs.exponent(i), f * coeffs.values[i])
        })
        .collect();
    RieszPrediction { k, terms }
}

/// Horner evaluation of the prediction polynomial.
pub fn predict_riesz(prediction: &RieszPrediction, lambda: f64) -> f64 {
    let Some(&(top, _)) = prediction.terms.first() else {
        return 0.0;
    };
    let bottom = prediction.terms.last().map_or(top, |t| t.0);
    let mut acc = 0.0;
    let mut next = 0;
    for e in (bottom..=top).rev() {
        acc *= lambda;
        if next < prediction.terms.len() && prediction.terms[next].0 == e {
            acc += prediction.terms[next].1;
            next += 1;
        }
    }
    acc * lambda.powi(bottom)
}

/// Weyl prediction for `N(λ)` itself.
pub fn predict_counting(coeffs: &WeylCoefficients, lambda: f64) -> f64 {
    predict_riesz(&riesz_transform_coeffs(coeffs, 0), lambda)
}

/// Least-squares estimate of the unknown coefficients from `R_k N` on `lambda_grid`.
///
/// Known and previously fitted coefficients are held fixed. The estimates
/// come back with status [`CoefficientStatus::Fitted`].
pub fn fit_unknown_coefficients(
    spectrum: &Spectrum,
    coeffs: &WeylCoefficients,
    k: u32,
    lambda_grid: &[f64],
) -> Result<WeylCoefficients> {
    let unknown = coeffs.unknown_indices();
    if unknown.is_empty() {
        return Ok(coeffs.clone());
    }
    if lambda_grid.len() < unknown.len() {
        return Err(Error::DegenerateGrid(format!(
            "{} grid points cannot determine {} unknowns",
            lambda_grid.len(),
            unknown.len()
        )));
    }
    let prefix = PrefixPowerSums::build(spectrum, k);
    let fixed = riesz_transform_coeffs(coeffs, k);

    let rows = lambda_grid.len();
    let mut design = DMatrix::<f64>::zeros(rows, unknown.len());
    let mut rhs = DVector::<f64>::zeros(rows);
    for (r, &lambda) in lambda_grid.iter().enumerate() {
        let observed = riesz_mean(&prefix, RieszQuery::new(k, lambda)?)?;
        rhs[r] = observed - predict_riesz(&fixed, lambda);
        for (c, &i) in unknown.iter().enumerate() {
            let f = riesz_factor(coeffs.dimension, k, i as u32)?;
            design[(r, c)] = f * lambda.powi(coeffs.exponent(i));
        }
    }

    // Equilibrate columns so the rank test is scale free.
    let norms: Vec<f64> = (0..unknown.len()).map(|c| design.column(c).norm()).collect();
    if norms.contains(&0.0) {
        return Err(Error::RankDeficient("a design column vanishes on the grid".into()));
    }
    for (c, &n) in norms.iter().enumerate() {
        design.column_mut(c).unscale_mut(n);
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(Error::RankDeficient(format!(
            "singular values span {smax:e}..{smin:e}"
        )));
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;

    let mut out = coeffs.clone();
    for (c, &i) in unknown.iter().enumerate() {
        out.values[i] = solution[c] / norms[c];
        out.status[i] = CoefficientStatus::Fitted;
    }
    Ok(out)
}
