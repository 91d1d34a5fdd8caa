//! Counting function `N(λ) = #{λ_i < λ}` and Riesz means
//! `R_k N(λ) = Σ_{λ_i<λ} (1 − λ_i/λ)^k`.
//!
//! [`riesz_mean`] answers queries in `O(log n)` from prefix power sums through
//! the binomial expansion
//! `R_k N(λ) = Σ_j C(k,j) (−1)^j λ^{−j} S_j(λ)`, `S_j(λ) = Σ_{λ_i<λ} λ_i^j`.
//! [`riesz_direct`] and [`riesz_via_integral`] are slower, independent routes
//! used to check it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use crate::sum::NeumaierSum;

/// Largest order served from the prefix table. Higher orders cancel too badly
/// in the binomial expansion and fall back to direct summation.
pub const FAST_PATH_MAX_ORDER: u32 = 8;

fn check_complete(spectrum: &Spectrum, lambda: f64) -> Result<()> {
    if lambda > spectrum.lambda_max() {
        return Err(Error::Completeness {
            query: lambda,
            lambda_max: spectrum.lambda_max(),
        });
    }
    Ok(())
}

/// `N(λ)`: total multiplicity strictly below `lambda`.
pub fn counting_function(spectrum: &Spectrum, lambda: f64) -> Result<u64> {
    if lambda.is_nan() {
        return Err(Error::validation("counting query is NaN"));
    }
    check_complete(spectrum, lambda)?;
    let idx = spectrum.index_below(lambda);
    Ok(spectrum.entries()[..idx].iter().map(|e| e.multiplicity).sum())
}

/// Order `k` and evaluation point `λ > 0` of a Riesz mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszQuery {
    k: u32,
    lambda: f64,
}

impl RieszQuery {
    pub fn new(k: u32, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::validation(format!(
                "Riesz means need a positive evaluation point, got {lambda}"
            )));
        }
        Ok(Self { k, lambda })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Cumulative compensated power sums `S_j` over entry prefixes.
///
/// Row `i` holds the sums over the first `i` entries, so row `0` is all
/// zeros and row `len` covers the whole spectrum. Each sum is kept as a
/// `(hi, lo)` pair.
#[derive(Debug, Clone)]
pub struct PrefixPowerSums<'a> {
    spectrum: &'a Spectrum,
    k_max: u32,
    orders: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl<'a> PrefixPowerSums<'a> {
    pub fn build(spectrum: &'a Spectrum, k_max: u32) -> Self {
        let orders = k_max.min(FAST_PATH_MAX_ORDER) as usize + 1;
        let n = spectrum.len();
        let mut hi = vec![0.0; (n + 1) * orders];
        let mut lo = vec![0.0; (n + 1) * orders];
        let mut acc = vec![NeumaierSum::new(); orders];
        for (i, e) in spectrum.entries().iter().enumerate() {
            let m = e.multiplicity as f64;
            let mut power = 1.0;
            for (j, a) in acc.iter_mut().enumerate() {
                if j > 0 {
                    power *= e.frequency;
                }
                a.add(m * power);
                let (h, l) = a.parts();
                hi[(i + 1) * orders + j] = h;
                lo[(i + 1) * orders + j] = l;
            }
        }
        Self {
            spectrum,
            k_max,
            orders,
            hi,
            lo,
        }
    }

    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// `S_j` over the first `prefix` entries, as `(hi, lo)`.
    pub fn power_sum(&self, j: usize, prefix: usize) -> (f64, f64) {
        let at = prefix * self.orders + j;
        (self.hi[at], self.lo[at])
    }

    /// Highest order stored in the table.
    pub fn table_order(&self) -> u32 {
        self.orders as u32 - 1
    }
}

/// `R_k N(λ)` from the prefix table.
pub fn riesz_mean(prefix: &PrefixPowerSums<'_>, query: RieszQuery) -> Result<f64> {
    let RieszQuery { k, lambda } = query;
    if k > prefix.k_max {
        return Err(Error::UnsupportedOrder {
            k,
            reason: format!("prefix table built for k <= {}", prefix.k_max),
        });
    }
    check_complete(prefix.spectrum, lambda)?;
    if k > prefix.table_order() {
        return riesz_direct(prefix.spectrum, query);
    }
    let idx = prefix.spectrum.index_below(lambda);
    let mut acc = NeumaierSum::new();
    let mut binom = 1.0f64;
    for j in 0..=k as usize {
        if j > 0 {
            binom = binom * (k as usize - j + 1) as f64 / j as f64;
        }
        let (h, l) = prefix.power_sum(j, idx);
        let mut th = h;
        let mut tl = l;
        for _ in 0..j {
            th /= lambda;
            tl /= lambda;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binom * th);
        acc.add(sign * binom * tl);
    }
    Ok(acc.value())
}

/// `R_k N(λ)` by summing `(1 − λ_i/λ)^k` over every entry below `λ`.
pub fn riesz_direct(spectrum: &Spectrum, query: RieszQuery) -> Result<f64> {
    let RieszQuery { k, lambda } = query;
    check_complete(spectrum, lambda)?;
    let idx = spectrum.index_below(lambda);
    Ok(spectrum.entries()[..idx]
        .iter()
        .map(|e| e.multiplicity as f64 * (1.0 - e.frequency / lambda).powi(k as i32))
        .collect::<NeumaierSum>()
        .value())
}

/// `R_k N(λ) = k λ⁻¹ ∫_0^λ (1 − τ/λ)^{k−1} N(τ) dτ`, `k >= 1`.
///
/// `N` is constant between consecutive frequencies, so the integral is a
/// finite sum of polynomial integrals. Each piece is done with a
/// Gauss–Legendre rule exact for the degree; the same sum with one more
/// node must agree to within `quadrature_tol`, otherwise an error is raised.
pub fn riesz_via_integral(spectrum: &Spectrum, query: RieszQuery, quadrature_tol: f64) -> Result<f64> {
    let RieszQuery { k, lambda } = query;
    if k == 0 {
        return Err(Error::UnsupportedOrder {
            k,
            reason: "the integral representation needs k >= 1".into(),
        });
    }
    check_complete(spectrum, lambda)?;
    let nodes = (k as usize).div_ceil(2);
    let exact = integrate_counting(spectrum, k, lambda, &gauss_legendre(nodes));
    let refined = integrate_counting(spectrum, k, lambda, &gauss_legendre(nodes + 1));
    let gap = (exact - refined).abs();
    if gap > quadrature_tol {
        return Err(Error::validation(format!(
            "quadrature did not settle: rules differ by {gap:e} > {quadrature_tol:e}"
        )));
    }
    Ok(exact)
}

fn integrate_counting(spectrum: &Spectrum, k: u32, lambda: f64, rule: &[(f64, f64)]) -> f64 {
    let idx = spectrum.index_below(lambda);
    let entries = &spectrum.entries()[..idx];
    let mut acc = NeumaierSum::new();
    let mut count = 0u64;
    for (i, e) in entries.iter().enumerate() {
        count += e.multiplicity;
        let a = e.frequency;
        let b = entries.get(i + 1).map_or(lambda, |n| n.frequency);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut piece = NeumaierSum::new();
        for &(x, w) in rule {
            let tau = mid + half * x;
            piece.add(w * (1.0 - tau / lambda).powi(k as i32 - 1));
        }
        acc.add(count as f64 * k as f64 / lambda * half * piece.value());
    }
    acc.value()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Both sides of `λ^{−k} k! (χ_+^{k−1} ∗ N)(λ) = R_k N(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiderivativeCheck {
    /// Repeated-integration side.
    pub lhs: f64,
    /// Direct jump sum.
    pub rhs: f64,
    pub deviation: f64,
}

/// Checks the Riesz mean against `k`-fold integration of `N` from 0.
///
/// `(χ_+^{k−1} ∗ N)(λ)` is the `k`-th iterated antiderivative of `N`. The
/// first antiderivative `Σ mult (τ − λ_i)_+` is evaluated exactly on the
/// grid; the remaining `k − 1` integrations use the trapezoidal rule, so the
/// deviation falls off as `grid_step²`.
pub fn repeated_antiderivative_check(
    spectrum: &Spectrum,
    k: u32,
    lambda: f64,
    grid_step: f64,
) -> Result<AntiderivativeCheck> {
    if k == 0 {
        return Err(Error::UnsupportedOrder {
            k,
            reason: "repeated integration needs k >= 1".into(),
        });
    }
    if !(grid_step > 0.0) {
        return Err(Error::validation(format!("grid step {grid_step} must be positive")));
    }
    let query = RieszQuery::new(k, lambda)?;
    let rhs = riesz_direct(spectrum, query)?;

    let n = (lambda / grid_step).ceil().max(1.0) as usize;
    let h = lambda / n as f64;
    let entries = spectrum.entries();

    // First antiderivative: count(τ)·τ − S_1(τ), swept over the grid.
    let mut level = Vec::with_capacity(n + 1);
    let mut next = 0;
    let mut count = 0u64;
    let mut first_moment = NeumaierSum::new();
    for j in 0..=n {
        let tau = j as f64 * h;
        while next < entries.len() && entries[next].frequency < tau {
            count += entries[next].multiplicity;
            first_moment.add(entries[next].multiplicity as f64 * entries[next].frequency);
            next += 1;
        }
        let mut v = NeumaierSum::new();
        v.add(count as f64 * tau);
        let (s_hi, s_lo) = first_moment.parts();
        v.add(-s_hi);
        v.add(-s_lo);
        level.push(v.value());
    }

    for _ in 1..k {
        let mut acc = NeumaierSum::new();
        let mut integrated = Vec::with_capacity(n + 1);
        integrated.push(0.0);
        for j in 1..=n {
            acc.add(0.5 * h * (level[j - 1] + level[j]));
            integrated.push(acc.value());
        }
        level = integrated;
    }

    let factorial: f64 = (1..=k).map(f64::from).product();
    let lhs = level[n] * factorial / lambda.powi(k as i32);
    Ok(AntiderivativeCheck {
        lhs,
        rhs,
        deviation: (lhs - rhs).abs(),
    })
}

/// `(λ, R_k N(λ))` over a set of points, evaluated independently per point.
pub fn riesz_series(prefix: &PrefixPowerSums<'_>, k: u32, points: &[f64]) -> Result<Vec<(f64, f64)>> {
    points
        .par_iter()
        .map(|&lambda| Ok((lambda, riesz_mean(prefix, RieszQuery::new(k, lambda)?)?)))
        .collect()
}

/// `(λ, N(λ))` over a set of points.
pub fn counting_series(spectrum: &Spectrum, points: &[f64]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&lambda| Ok((lambda, counting_function(spectrum, lambda)? as f64)))
        .collect()
}
