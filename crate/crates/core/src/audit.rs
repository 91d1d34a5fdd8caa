//! Completeness auditing of eigenvalue lists from Riesz-mean residuals.
//!
//! A missing eigenvalue at `μ` lowers `R_k N(λ)` by exactly `(1 − μ/λ)^k` for
//! every `λ > μ`. The residual `r = R_k N − prediction` is scanned with that
//! ramp as a matched filter. Slow trends from unknown coefficients are
//! projected out of both residual and template first.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{riesz_mean, PrefixPowerSums, RieszQuery};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectrum::Spectrum;
use crate::sum::NeumaierSum;
use crate::weyl::{predict_riesz, riesz_transform_coeffs, CoefficientStatus, WeylCoefficients};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Candidates stop this many grid steps short of the end of the grid, at least.
pub const MIN_MARGIN_STEPS: f64 = 10.0;
/// Default candidates cover this fraction of the grid, leaving room for the ramp to grow.
const DEFAULT_CANDIDATE_FRACTION: f64 = 0.75;
/// Ranges narrower than this many steps are too short to audit.
pub const MIN_RANGE_STEPS: f64 = 20.0;
const MAX_DEFECTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub k: u32,
    pub grid: Grid,
    pub candidates: Grid,
    pub threshold: f64,
    pub coeffs: WeylCoefficients,
    /// `k = 0` is rejected unless this is set.
    pub allow_order_zero: bool,
}

impl AuditConfig {
    /// Order 1, threshold 0.5, candidates over the first three quarters of the grid.
    pub fn new(coeffs: WeylCoefficients, grid: Grid) -> Result<Self> {
        let step = grid.step;
        let stop = (grid.start + DEFAULT_CANDIDATE_FRACTION * grid.width()).min(grid.stop - MIN_MARGIN_STEPS * step);
        let start = grid.start + step;
        if stop < start {
            return Err(Error::DegenerateGrid(format!("grid {grid} leaves no room for candidates")));
        }
        Ok(Self {
            k: 1,
            grid,
            candidates: Grid::new(start, stop, step)?,
            threshold: DEFAULT_THRESHOLD,
            coeffs,
            allow_order_zero: false,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 && !self.allow_order_zero {
            return Err(Error::UnsupportedOrder {
                k: 0,
                reason: "order 0 residuals carry the full lattice noise; pass allow_order_zero to force".into(),
            });
        }
        if !(self.threshold > 0.0) {
            return Err(Error::validation("threshold must be positive"));
        }
        let g = &self.grid;
        let c = &self.candidates;
        if c.start <= g.start || c.stop > g.stop - MIN_MARGIN_STEPS * g.step {
            return Err(Error::DegenerateGrid(format!(
                "candidates {c} must lie inside ({}, {}]",
                g.start,
                g.stop - MIN_MARGIN_STEPS * g.step
            )));
        }
        if g.start <= 0.0 {
            return Err(Error::DegenerateGrid("the audit grid must start above 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectSign {
    Missing,
    Extra,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anomaly {
    /// Estimated location of the defect.
    pub mu: f64,
    pub sign: DefectSign,
    /// Least-squares size of the jump, ±1 for a single eigenvalue.
    pub amplitude: f64,
    /// Filter output in residual units: `|⟨r, g⟩| / ‖g‖`.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Clean,
    AnomaliesFound,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Clean => "clean",
            Verdict::AnomaliesFound => "anomalies-found",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub residual: Vec<(f64, f64)>,
    pub max_abs_residual: f64,
    /// Median of `|r|` after the detected defects are subtracted.
    pub median_abs_residual: f64,
    /// Unit-jump response at the end of the grid for a defect at the grid midpoint.
    pub noise_limit: f64,
    pub anomalies: Vec<Anomaly>,
    pub verdict: Verdict,
}

/// `r(λ_j) = R_k N(λ_j) − prediction(λ_j)`.
pub fn residual_series(spectrum: &Spectrum, coeffs: &WeylCoefficients, k: u32, grid: &Grid) -> Result<Vec<(f64, f64)>> {
    let prefix = PrefixPowerSums::build(spectrum, k);
    let prediction = riesz_transform_coeffs(coeffs, k);
    grid.points()
        .par_iter()
        .map(|&lambda| {
            let observed = riesz_mean(&prefix, RieszQuery::new(k, lambda)?)?;
            Ok((lambda, observed - predict_riesz(&prediction, lambda)))
        })
        .collect()
}

/// Orthonormal basis of the trend space on the grid, one column per unknown coefficient.
fn trend_basis(coeffs: &WeylCoefficients, lambdas: &[f64]) -> Result<Option<DMatrix<f64>>> {
    let exps: Vec<i32> = (0..coeffs.values().len())
        .filter(|&i| coeffs.status()[i] == CoefficientStatus::Unknown)
        .map(|i| coeffs.exponent(i))
        .collect();
    if exps.is_empty() {
        return Ok(None);
    }
    if lambdas.len() < exps.len() + 2 {
        return Err(Error::DegenerateGrid(format!(
            "{} grid points cannot carry {} trend terms",
            lambdas.len(),
            exps.len()
        )));
    }
    let top = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let m = DMatrix::from_fn(lambdas.len(), exps.len(), |r, c| (lambdas[r] / top).powi(exps[c]));
    let qr = m.qr();
    let rdiag = qr.r().diagonal();
    let rmax = rdiag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if rdiag.iter().any(|v| v.abs() <= 1e-12 * rmax) {
        return Err(Error::RankDeficient("trend terms are linearly dependent on the grid".into()));
    }
    Ok(Some(qr.q()))
}

fn project_out(basis: Option<&DMatrix<f64>>, v: &mut [f64]) {
    let Some(q) = basis else { return };
    for c in 0..q.ncols() {
        let col = q.column(c);
        let dot = col.iter().zip(v.iter()).map(|(a, b)| a * b).collect::<NeumaierSum>().value();
        for (x, a) in v.iter_mut().zip(col.iter()) {
            *x -= dot * a;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).collect::<NeumaierSum>().value()
}

/// Template `g_μ(λ) = −(1 − μ/λ)^k` for `λ > μ`, trend-projected.
fn template(lambdas: &[f64], mu: f64, k: u32, basis: Option<&DMatrix<f64>>) -> Vec<f64> {
    let mut g: Vec<f64> = lambdas
        .iter()
        .map(|&l| if l > mu { -(1.0 - mu / l).powi(k as i32) } else { 0.0 })
        .collect();
    project_out(basis, &mut g);
    g
}

/// Matched-filter response of a residual to a defect at `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterResponse {
    /// `⟨r, g⟩ / ‖g‖²`: the jump size that best explains the residual.
    pub amplitude: f64,
    /// `⟨r, g⟩ / ‖g‖`.
    pub evidence: f64,
}

fn respond(r: &[f64], g: &[f64]) -> FilterResponse {
    let gg = dot(g, g);
    if gg == 0.0 {
        return FilterResponse {
            amplitude: 0.0,
            evidence: 0.0,
        };
    }
    let rg = dot(r, g);
    FilterResponse {
        amplitude: rg / gg,
        evidence: rg / gg.sqrt(),
    }
}

/// Response of `residual` to a defect at `mu`, after removing the trends of unknown coefficients.
pub fn matched_filter(residual: &[(f64, f64)], coeffs: &WeylCoefficients, k: u32, mu: f64) -> Result<FilterResponse> {
    let lambdas: Vec<f64> = residual.iter().map(|p| p.0).collect();
    let basis = trend_basis(coeffs, &lambdas)?;
    let mut r: Vec<f64> = residual.iter().map(|p| p.1).collect();
    project_out(basis.as_ref(), &mut r);
    let g = template(&lambdas, mu, k, basis.as_ref());
    Ok(respond(&r, &g))
}

fn median_abs(v: &[f64]) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    match a.len() {
        0 => 0.0,
        n if n % 2 == 1 => a[n / 2],
        n => 0.5 * (a[n / 2 - 1] + a[n / 2]),
    }
}

/// Greedy matched-filter scan for missing or extra eigenvalues.
///
/// The candidate with the strongest evidence is accepted when its amplitude
/// reaches the threshold; its template is then subtracted and the scan
/// repeats on what is left.
pub fn detect_defects(spectrum: &Spectrum, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let residual = residual_series(spectrum, &config.coeffs, config.k, &config.grid)?;
    let lambdas: Vec<f64> = residual.iter().map(|p| p.0).collect();
    let basis = trend_basis(&config.coeffs, &lambdas)?;
    let mut r: Vec<f64> = residual.iter().map(|p| p.1).collect();
    project_out(basis.as_ref(), &mut r);

    let max_abs = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mid = 0.5 * (config.grid.start + config.grid.stop);
    let noise_limit = (1.0 - mid / config.grid.stop).powi(config.k as i32);

    let mus = config.candidates.points();
    let templates: Vec<Vec<f64>> = mus
        .par_iter()
        .map(|&mu| template(&lambdas, mu, config.k, basis.as_ref()))
        .collect();

    let mut anomalies = Vec::new();
    for _ in 0..MAX_DEFECTS {
        let responses: Vec<FilterResponse> = templates.par_iter().map(|g| respond(&r, g)).collect();
        let mut best = 0;
        for (i, resp) in responses.iter().enumerate() {
            if resp.evidence.abs() > responses[best].evidence.abs() {
                best = i;
            }
        }
        let hit = responses[best];
        if hit.amplitude.abs() < config.threshold {
            break;
        }
        let mut mu = mus[best];
        if best > 0 && best + 1 < mus.len() {
            let (l, m, u) = (
                responses[best - 1].evidence.abs(),
                hit.evidence.abs(),
                responses[best + 1].evidence.abs(),
            );
            let curvature = l - 2.0 * m + u;
            if curvature < 0.0 {
                mu += 0.5 * (l - u) / curvature * config.candidates.step;
            }
        }
        anomalies.push(Anomaly {
            mu,
            sign: if hit.amplitude > 0.0 {
                DefectSign::Missing
            } else {
                DefectSign::Extra
            },
            amplitude: hit.amplitude.abs(),
            score: hit.evidence.abs(),
        });
        for (x, g) in r.iter_mut().zip(&templates[best]) {
            *x -= hit.amplitude * g;
        }
    }
    anomalies.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.mu.total_cmp(&b.mu)));
    // Noise floor of what the detected defects leave behind.
    let median = median_abs(&r);

    let verdict = if median > noise_limit {
        Verdict::Inconclusive
    } else if anomalies.is_empty() {
        Verdict::Clean
    } else {
        Verdict::AnomaliesFound
    };
    Ok(AuditReport {
        config: config.clone(),
        residual,
        max_abs_residual: max_abs,
        median_abs_residual: median,
        noise_limit,
        anomalies,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub summary: String,
    pub report: Option<AuditReport>,
}

/// Runs [`detect_defects`] with the default configuration over `range`.
pub fn completeness_certificate(spectrum: &Spectrum, coeffs: &WeylCoefficients, range: &Grid) -> Result<Certificate> {
    if range.width() < MIN_RANGE_STEPS * range.step {
        return Ok(Certificate {
            verdict: Verdict::Inconclusive,
            summary: format!(
                "range {range} spans fewer than {MIN_RANGE_STEPS} steps; nothing can be certified"
            ),
            report: None,
        });
    }
    let config = AuditConfig::new(coeffs.clone(), *range)?;
    let report = detect_defects(spectrum, &config)?;
    let summary = match report.verdict {
        Verdict::Clean => format!(
            "no missing or extra eigenvalues detected on {range} (median |r| = {:.3e})",
            report.median_abs_residual
        ),
        Verdict::AnomaliesFound => {
            let list: Vec<String> = report
                .anomalies
                .iter()
                .map(|a| format!("{} near {:.3} (amplitude {:.3})", sign_word(a.sign), a.mu, a.amplitude))
                .collect();
            format!("{} anomal{}: {}", list.len(), if list.len() == 1 { "y" } else { "ies" }, list.join("; "))
        }
        Verdict::Inconclusive => format!(
            "residual noise (median |r| = {:.3e}) exceeds the unit-jump response {:.3e}",
            report.median_abs_residual, report.noise_limit
        ),
    };
    Ok(Certificate {
        verdict: report.verdict,
        summary,
        report: Some(report),
    })
}

fn sign_word(sign: DefectSign) -> &'static str {
    match sign {
        DefectSign::Missing => "missing",
        DefectSign::Extra => "extra",
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: ConfigSection,
    residual: ResidualSection,
    anomalies: &'a [Anomaly],
    verdict: VerdictSection,
}

#[derive(Serialize)]
struct ConfigSection {
    k: u32,
    grid: String,
    candidates: String,
    threshold: f64,
    dimension: u32,
    coefficients: Vec<f64>,
    coefficient_status: Vec<CoefficientStatus>,
}

#[derive(Serialize)]
struct ResidualSection {
    points: usize,
    max_abs: f64,
    median_abs: f64,
    noise_limit: f64,
}

#[derive(Serialize)]
struct VerdictSection {
    status: Verdict,
    anomalies: usize,
}

impl AuditReport {
    /// Sections `config`, `residual`, `anomalies` and `verdict` as TOML.
    pub fn to_toml_string(&self) -> String {
        let c = &self.config;
        let file = ReportFile {
            config: ConfigSection {
                k: c.k,
                grid: c.grid.to_string(),
                candidates: c.candidates.to_string(),
                threshold: c.threshold,
                dimension: c.coeffs.dimension(),
                coefficients: c.coeffs.values().to_vec(),
                coefficient_status: c.coeffs.status().to_vec(),
            },
            residual: ResidualSection {
                points: self.residual.len(),
                max_abs: self.max_abs_residual,
                median_abs: self.median_abs_residual,
                noise_limit: self.noise_limit,
            },
            anomalies: &self.anomalies,
            verdict: VerdictSection {
                status: self.verdict,
                anomalies: self.anomalies.len(),
            },
        };
        toml::to_string(&file).expect("report sections always serialize")
    }
}
