use std::f64::consts::PI;

use rayon::prelude::*;

use super::jet::Jet;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

pub const DEFAULT_GRID_SPACING: f64 = 1e-3;
/// Below this the plateau kernel's fifth moment stays under `1e-8`.
pub const DEFAULT_PLATEAU_CUTOFF: f64 = 3200.0;
pub const DEFAULT_NONNEG_CUTOFF: f64 = 1500.0;

const MAX_TABLE_POINTS: usize = 100_000_000;
const MASS_TOL: f64 = 1e-8;
const MOMENT_TOL: f64 = 1e-8;
const EVEN_TOL: f64 = 1e-12;
/// Half-width of the bump whose square gives the nonnegative kernel.
const BUMP_HALFWIDTH: f64 = 0.25;
const CONVOLUTION_INTERVALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `ρ̂ = 1` on `[−1/2, 1/2]`, `supp ρ̂ ⊂ [−1, 1]`; all moments above the zeroth vanish.
    Plateau,
    /// `ρ̃ ≥ 0` with `supp ρ̂̃ ⊂ [−1/2, 1/2]`.
    Nonneg,
    /// `ρ_{1,0}(t) = ∫_t^∞ τ ρ̃(τ) dτ`.
    Tauberian,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Plateau => "plateau",
            KernelKind::Nonneg => "nonneg",
            KernelKind::Tauberian => "tauberian",
        }
    }

    pub fn fourier_support_halfwidth(self) -> f64 {
        match self {
            KernelKind::Plateau => 1.0,
            KernelKind::Nonneg | KernelKind::Tauberian => 0.5,
        }
    }

    pub fn plateau_halfwidth(self) -> Option<f64> {
        match self {
            KernelKind::Plateau => Some(0.5),
            _ => None,
        }
    }
}

/// Band-limited even kernel stored as a table on `t ∈ [0, t_cut]`.
///
/// Values at negative `t` come from evenness, so the kernel is exactly even.
/// Alongside `ρ` the table carries `ρ'` (for cubic Hermite interpolation),
/// `Φ(t) = ∫_{−∞}^t ρ` and `Q(t) = ∫_t^∞ (m − Φ)` where `m = ∫ρ`.
#[derive(Debug, Clone)]
pub struct Kernel {
    kind: KernelKind,
    h: f64,
    t_cut: f64,
    rho: Vec<f64>,
    drho: Vec<f64>,
    phi: Vec<f64>,
    q: Vec<f64>,
    mass: f64,
    tail_bound: f64,
    /// `ρ̂` of this table is the base transform evaluated at `ξ / dilation`.
    dilation: f64,
    /// Normalizing constant of `ρ̃ = c g²` (nonneg and tauberian kinds).
    square_norm: f64,
}

// Closed-form Fourier profiles.

/// `b(u) = B(1−u)/(B(u)+B(1−u))` with `B(u) = exp(−1/u)`.
pub(crate) fn plateau_hat(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * (a - 0.5);
    1.0 / (1.0 + (1.0 / (1.0 - u) - 1.0 / u).exp())
}

fn plateau_hat_jet<const N: usize>(xi: f64) -> Jet<N> {
    if xi <= 0.5 {
        return Jet::constant(1.0);
    }
    if xi >= 1.0 {
        return Jet::constant(0.0);
    }
    let u = Jet::<N>::variable(xi).scale(2.0) + (-1.0);
    let g = (-u + 1.0).recip() - u.recip();
    if g.value() > 700.0 {
        return Jet::constant(0.0);
    }
    if g.value() < -700.0 {
        return Jet::constant(1.0);
    }
    (g.exp() + 1.0).recip()
}

/// `ĝ(ξ) = exp(−1/(1 − 16ξ²))` on `|ξ| < 1/4`.
fn bump_hat(xi: f64) -> f64 {
    let y = 1.0 - 16.0 * xi * xi;
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

fn bump_hat_jet<const N: usize>(xi: f64) -> Jet<N> {
    let x = Jet::<N>::variable(xi);
    let y = (x * x).scale(-16.0) + 1.0;
    if y.value() <= 0.0 {
        return Jet::constant(0.0);
    }
    let phi = -y.recip();
    if phi.value() < -700.0 {
        return Jet::constant(0.0);
    }
    phi.exp()
}

/// `∫ ĝ(η) ĝ^{(n)}(ξ − η) dη`, `n <= 2`.
fn bump_autoconvolution(xi: f64, n: usize) -> f64 {
    let lo = (-BUMP_HALFWIDTH).max(xi - BUMP_HALFWIDTH);
    let hi = BUMP_HALFWIDTH.min(xi + BUMP_HALFWIDTH);
    if hi <= lo {
        return 0.0;
    }
    let delta = (hi - lo) / CONVOLUTION_INTERVALS as f64;
    // Both ends are zeros of infinite order, so the trapezoid rule is spectrally accurate.
    let mut acc = NeumaierSum::new();
    for i in 1..CONVOLUTION_INTERVALS {
        let eta = lo + i as f64 * delta;
        let other = if n == 0 {
            bump_hat(xi - eta)
        } else {
            bump_hat_jet::<3>(xi - eta).derivative(n)
        };
        acc.add(bump_hat(eta) * other);
    }
    acc.value() * delta
}

// Trigonometric sums over uniform nodes `x_i = start + i·delta`.

const RESYNC: usize = 64;

fn cos_sum(start: f64, delta: f64, coeffs: &[f64], t: f64) -> f64 {
    let (rs, rc) = (t * delta).sin_cos();
    let mut acc = 0.0;
    for (b, block) in coeffs.chunks(RESYNC).enumerate() {
        let (mut s, mut c) = (t * (start + (b * RESYNC) as f64 * delta)).sin_cos();
        for &w in block {
            acc += w * c;
            let next = c * rc - s * rs;
            s = s * rc + c * rs;
            c = next;
        }
    }
    acc
}

fn cos_sin_sums(start: f64, delta: f64, a: &[f64], b: &[f64], t: f64) -> (f64, f64) {
    let (rs, rc) = (t * delta).sin_cos();
    let (mut ca, mut sb) = (0.0, 0.0);
    for (blk, (ab, bb)) in a.chunks(RESYNC).zip(b.chunks(RESYNC)).enumerate() {
        let (mut s, mut c) = (t * (start + (blk * RESYNC) as f64 * delta)).sin_cos();
        for (&wa, &wb) in ab.iter().zip(bb) {
            ca += wa * c;
            sb += wb * s;
            let next = c * rc - s * rs;
            s = s * rc + c * rs;
            c = next;
        }
    }
    (ca, sb)
}

fn table_size(h: f64, t_cut: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation(format!("grid spacing {h} must be positive")));
    }
    if !(t_cut > 0.0 && t_cut.is_finite()) {
        return Err(Error::validation(format!("cutoff {t_cut} must be positive")));
    }
    let n = (t_cut / h * (1.0 - 1e-12)).ceil();
    if n > MAX_TABLE_POINTS as f64 {
        return Err(Error::Resource(format!("kernel table would need {n:.3e} points")));
    }
    Ok((n as usize).max(4))
}

/// Fourth-order central differences; the two points past the end are supplied by the caller
/// and the two before zero come from evenness.
fn even_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 2;
    let at = |j: isize| values[j.unsigned_abs()];
    (0..n)
        .map(|j| {
            let j = j as isize;
            (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h)
        })
        .collect()
}

/// Trapezoid step with the end-point derivative correction; exact for cubics.
#[inline]
fn corrected_step(h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1)
}

#[inline]
fn hermite(f0: f64, f1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * h * d1
}

/// Quadrature data for `ρ(t) = π⁻¹ ∫_0^1 ρ̂(ξ) cos(tξ) dξ`.
///
/// For large `t` the integral is integrated by parts `p` times,
/// `ρ(t) = π⁻¹ t^{−p} ∫_{1/2}^1 ρ̂^{(p)}(ξ) cos(tξ) dξ` for `p ≡ 0 mod 4`, so
/// round-off in the tail shrinks like `t^{−p}`.
struct PlateauQuadrature {
    full_delta: f64,
    full: Vec<f64>,
    edge_delta: f64,
    edge4: Vec<f64>,
    edge8: Vec<f64>,
    noise: [f64; 3],
}

impl PlateauQuadrature {
    fn new(t_cut: f64) -> Self {
        // Aliased frequencies must land well beyond the cutoff.
        let full_intervals = ((t_cut + 2000.0) / (2.0 * PI)).ceil().max(1024.0) as usize;
        let full_delta = 1.0 / full_intervals as f64;
        let full: Vec<f64> = (0..full_intervals)
            .map(|i| {
                let w = if i == 0 { 0.5 } else { 1.0 };
                w * full_delta * plateau_hat(i as f64 * full_delta)
            })
            .collect();

        let edge_intervals = (((t_cut + 2000.0) / (4.0 * PI)).ceil() as usize).max(256).next_multiple_of(64);
        let edge_delta = 0.5 / edge_intervals as f64;
        let mut edge4 = Vec::with_capacity(edge_intervals - 1);
        let mut edge8 = Vec::with_capacity(edge_intervals - 1);
        for i in 1..edge_intervals {
            let jet = plateau_hat_jet::<9>(0.5 + i as f64 * edge_delta);
            edge4.push(edge_delta * jet.derivative(4));
            edge8.push(edge_delta * jet.derivative(8));
        }
        let abs_sum = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let noise = [abs_sum(&full), abs_sum(&edge4), abs_sum(&edge8)];
        Self {
            full_delta,
            full,
            edge_delta,
            edge4,
            edge8,
            noise,
        }
    }

    fn rho(&self, t: f64) -> f64 {
        let t4 = t.powi(4);
        let candidates = [
            self.noise[0],
            if t > 0.0 { self.noise[1] / t4 } else { f64::INFINITY },
            if t > 0.0 { self.noise[2] / (t4 * t4) } else { f64::INFINITY },
        ];
        let best = (0..3)
            .min_by(|&a, &b| candidates[a].total_cmp(&candidates[b]))
            .unwrap_or(0);
        let start = 0.5 + self.edge_delta;
        match best {
            0 => cos_sum(0.0, self.full_delta, &self.full, t) / PI,
            1 => cos_sum(start, self.edge_delta, &self.edge4, t) / (PI * t4),
            _ => cos_sum(start, self.edge_delta, &self.edge8, t) / (PI * t4 * t4),
        }
    }
}

/// Builds the plateau kernel `ρ` with `ρ̂ = 1` on `[−1/2, 1/2]` and `supp ρ̂ = [−1, 1]`.
pub fn build_plateau_kernel(grid_spacing: f64, t_cut: f64) -> Result<Kernel> {
    let n = table_size(grid_spacing, t_cut)?;
    let h = grid_spacing;
    let quad = PlateauQuadrature::new(n as f64 * h);
    let values: Vec<f64> = (0..n + 3).into_par_iter().map(|j| quad.rho(j as f64 * h)).collect();
    let drho = even_derivative(&values, h);
    let mut rho = values;
    rho.truncate(n + 1);
    let kernel = Kernel::from_half_table(KernelKind::Plateau, h, rho, drho, 1.0);
    kernel.verify()?;
    Ok(kernel)
}

/// Builds `ρ̃ = c g²` where `ĝ` is the standard bump on `[−1/4, 1/4]`.
pub fn build_nonneg_kernel(grid_spacing: f64, t_cut: f64) -> Result<Kernel> {
    let n = table_size(grid_spacing, t_cut)?;
    let h = grid_spacing;
    let intervals = ((n as f64 * h + 2000.0) / (8.0 * PI)).ceil().max(256.0) as usize;
    let delta = BUMP_HALFWIDTH / intervals as f64;
    let mut a = Vec::with_capacity(intervals);
    let mut b = Vec::with_capacity(intervals);
    for i in 0..intervals {
        let xi = i as f64 * delta;
        let w = if i == 0 { 0.5 } else { 1.0 } * delta / PI;
        a.push(w * bump_hat(xi));
        b.push(-w * xi * bump_hat(xi));
    }
    let norm = 2.0 * PI / bump_autoconvolution(0.0, 0);
    let (rho, drho): (Vec<f64>, Vec<f64>) = (0..=n)
        .into_par_iter()
        .map(|j| {
            let (g, dg) = cos_sin_sums(0.0, delta, &a, &b, j as f64 * h);
            (norm * g * g, 2.0 * norm * g * dg)
        })
        .unzip();
    let kernel = Kernel::from_half_table(KernelKind::Nonneg, h, rho, drho, norm);
    kernel.verify()?;
    Ok(kernel)
}

/// `ρ_{1,0}(t) = ∫_t^∞ τ ρ̃(τ) dτ`, by backward quadrature on the table of `ρ̃`.
pub fn tauberian_kernel(nonneg: &Kernel) -> Result<Kernel> {
    if nonneg.kind != KernelKind::Nonneg || nonneg.dilation != 1.0 {
        return Err(Error::validation("the tauberian kernel is built from an unscaled nonneg kernel"));
    }
    let h = nonneg.h;
    let n = nonneg.rho.len() - 1;
    let f: Vec<f64> = (0..=n).map(|j| j as f64 * h * nonneg.rho[j]).collect();
    let df: Vec<f64> = (0..=n)
        .map(|j| nonneg.rho[j] + j as f64 * h * nonneg.drho[j])
        .collect();
    let mut rho = vec![0.0; n + 1];
    let mut acc = NeumaierSum::new();
    for j in (0..n).rev() {
        acc.add(corrected_step(h, f[j], f[j + 1], df[j], df[j + 1]));
        rho[j] = acc.value();
    }
    let drho: Vec<f64> = f.iter().map(|v| -v).collect();
    let kernel = Kernel::from_half_table(KernelKind::Tauberian, h, rho, drho, nonneg.square_norm);
    kernel.verify()?;
    Ok(kernel)
}

impl Kernel {
    /// Plateau kernel with the default spacing and cutoff.
    pub fn plateau() -> Result<Self> {
        build_plateau_kernel(DEFAULT_GRID_SPACING, DEFAULT_PLATEAU_CUTOFF)
    }

    /// Nonnegative kernel with the default spacing and cutoff.
    pub fn nonneg() -> Result<Self> {
        build_nonneg_kernel(DEFAULT_GRID_SPACING, DEFAULT_NONNEG_CUTOFF)
    }

    fn from_half_table(kind: KernelKind, h: f64, rho: Vec<f64>, drho: Vec<f64>, square_norm: f64) -> Self {
        let n = rho.len() - 1;
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = NeumaierSum::new();
        cumulative.push(0.0);
        for j in 0..n {
            acc.add(corrected_step(h, rho[j], rho[j + 1], drho[j], drho[j + 1]));
            cumulative.push(acc.value());
        }
        let mass = 2.0 * cumulative[n];
        let phi: Vec<f64> = cumulative.iter().map(|c| 0.5 * mass + c).collect();

        let mut q = vec![0.0; n + 1];
        let mut acc = NeumaierSum::new();
        for j in (0..n).rev() {
            acc.add(corrected_step(h, mass - phi[j], mass - phi[j + 1], -rho[j], -rho[j + 1]));
            q[j] = acc.value();
        }

        let t_cut = n as f64 * h;
        let tail_start = (0.9 * n as f64) as usize;
        let tail_max = rho[tail_start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            kind,
            h,
            t_cut,
            rho,
            drho,
            phi,
            q,
            mass,
            tail_bound: 2.0 * t_cut * tail_max,
            dilation: 1.0,
            square_norm,
        }
    }

    fn verify(&self) -> Result<()> {
        let even = (0..1000)
            .map(|i| {
                let t = self.t_cut * (i as f64 + 0.37) / 1000.0;
                (self.rho(t) - self.rho(-t)).abs()
            })
            .fold(0.0, f64::max);
        if even > EVEN_TOL {
            return Err(Error::KernelInvariant {
                invariant: "even",
                detail: format!("|ρ(t) − ρ(−t)| reaches {even:e}"),
            });
        }
        match self.kind {
            KernelKind::Plateau | KernelKind::Nonneg => {
                let total = self.phi(self.t_cut) - self.phi(-self.t_cut);
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::KernelInvariant {
                        invariant: "unit mass",
                        detail: format!("∫ρ = {total:.15} (grid too coarse or cutoff too small)"),
                    });
                }
            }
            KernelKind::Tauberian => {}
        }
        if self.kind == KernelKind::Plateau {
            for k in 1..=5 {
                let m = self.moment(k);
                if m.abs() > MOMENT_TOL {
                    return Err(Error::KernelInvariant {
                        invariant: "vanishing moments",
                        detail: format!("∫ρ(t) t^{k} dt = {m:e} (cutoff too small)"),
                    });
                }
            }
        }
        if matches!(self.kind, KernelKind::Nonneg | KernelKind::Tauberian) {
            if let Some((j, v)) = self.rho.iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::KernelInvariant {
                    invariant: "nonnegative",
                    detail: format!("ρ({}) = {v:e}", j as f64 * self.h),
                });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn grid_spacing(&self) -> f64 {
        self.h
    }

    pub fn t_cut(&self) -> f64 {
        self.t_cut
    }

    /// `∫ρ` over the table.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Rough size of `∫_{|t|>t_cut} |ρ|`, from the largest values in the last tenth of the table.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Fourier support half-width of this table.
    pub fn fourier_support_halfwidth(&self) -> f64 {
        self.kind.fourier_support_halfwidth() * self.dilation
    }

    /// The stored samples `(t_j, ρ(t_j))`, `t_j >= 0`, every `stride`-th point.
    pub fn samples(&self, stride: usize) -> Vec<(f64, f64)> {
        let stride = stride.max(1);
        (0..self.rho.len())
            .step_by(stride)
            .map(|j| (j as f64 * self.h, self.rho[j]))
            .collect()
    }

    #[inline]
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = t / self.h;
        let j = (x.floor() as usize).min(self.rho.len() - 2);
        (j, x - j as f64)
    }

    /// `ρ(t)`; zero beyond the cutoff.
    pub fn rho(&self, t: f64) -> f64 {
        let a = t.abs();
        if a > self.t_cut {
            return 0.0;
        }
        let (j, s) = self.locate(a);
        hermite(self.rho[j], self.rho[j + 1], self.drho[j], self.drho[j + 1], self.h, s)
    }

    /// `Φ(t) = ∫_{−∞}^t ρ`.
    pub fn phi(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.mass - self.phi(-t);
        }
        if t >= self.t_cut {
            return self.mass;
        }
        let (j, s) = self.locate(t);
        hermite(self.phi[j], self.phi[j + 1], self.rho[j], self.rho[j + 1], self.h, s)
    }

    /// `Ψ(s) = ∫_{−∞}^s Φ`.
    pub fn psi(&self, s: f64) -> f64 {
        if s >= 0.0 {
            self.mass * s + self.q(s)
        } else {
            self.q(-s)
        }
    }

    fn q(&self, s: f64) -> f64 {
        if s >= self.t_cut {
            return 0.0;
        }
        let (j, x) = self.locate(s);
        hermite(
            self.q[j],
            self.q[j + 1],
            self.phi[j] - self.mass,
            self.phi[j + 1] - self.mass,
            self.h,
            x,
        )
    }

    /// `∫ ρ(t) t^k dt` over the table. Odd moments vanish identically by evenness.
    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let mut acc = NeumaierSum::new();
        let f = |j: usize| {
            let t = j as f64 * self.h;
            let tk = t.powi(k as i32);
            let dtk = if k == 0 { 0.0 } else { k as f64 * t.powi(k as i32 - 1) };
            (tk * self.rho[j], dtk * self.rho[j] + tk * self.drho[j])
        };
        for j in 0..self.rho.len() - 1 {
            let (f0, d0) = f(j);
            let (f1, d1) = f(j + 1);
            acc.add(corrected_step(self.h, f0, f1, d0, d1));
        }
        2.0 * acc.value()
    }

    /// Analytic `ρ̂(ξ)`.
    pub fn fourier(&self, xi: f64) -> f64 {
        let x = xi / self.dilation;
        match self.kind {
            KernelKind::Plateau => plateau_hat(x),
            KernelKind::Nonneg => self.nonneg_hat(x, 0),
            KernelKind::Tauberian => {
                if x.abs() >= 0.5 {
                    0.0
                } else if x.abs() < 1e-6 {
                    -self.nonneg_hat(x, 2)
                } else {
                    -self.nonneg_hat(x, 1) / x
                }
            }
        }
    }

    /// `n`-th derivative of `ρ̂̃` for the nonneg family, `n <= 2`.
    fn nonneg_hat(&self, x: f64, n: usize) -> f64 {
        if x.abs() >= 2.0 * BUMP_HALFWIDTH {
            return 0.0;
        }
        self.square_norm / (2.0 * PI) * bump_autoconvolution(x, n)
    }

    /// `∫ ρ(t) e^{−itξ} dt` computed from the table.
    pub fn fourier_from_table(&self, xi: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        let f = |j: usize| {
            let t = j as f64 * self.h;
            let (s, c) = (xi * t).sin_cos();
            (self.rho[j] * c, self.drho[j] * c - xi * self.rho[j] * s)
        };
        let (mut f0, mut d0) = f(0);
        for j in 0..self.rho.len() - 1 {
            let (f1, d1) = f(j + 1);
            acc.add(corrected_step(self.h, f0, f1, d0, d1));
            (f0, d0) = (f1, d1);
        }
        2.0 * acc.value()
    }

    /// Table of `ρ_T(t) = T ρ(Tt)` sampled at spacing `h/T`.
    pub fn prescaled(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::validation(format!("scale {scale} must be positive")));
        }
        Ok(Self {
            kind: self.kind,
            h: self.h / scale,
            t_cut: self.t_cut / scale,
            rho: self.rho.iter().map(|v| v * scale).collect(),
            drho: self.drho.iter().map(|v| v * scale * scale).collect(),
            phi: self.phi.clone(),
            q: self.q.iter().map(|v| v / scale).collect(),
            mass: self.mass,
            tail_bound: self.tail_bound,
            dilation: self.dilation * scale,
            square_norm: self.square_norm,
        })
    }
}

/// A kernel dilated to `ρ_T(t) = T ρ(Tt)`, Fourier support `[−T a, T a]`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledKernel<'a> {
    kernel: &'a Kernel,
    scale: f64,
}

impl<'a> ScaledKernel<'a> {
    pub fn new(kernel: &'a Kernel, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::validation(format!("scale {scale} must be positive")));
        }
        Ok(Self { kernel, scale })
    }

    pub fn kernel(&self) -> &'a Kernel {
        self.kernel
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Half-width of the support of the stored table after scaling.
    pub fn reach(&self) -> f64 {
        self.kernel.t_cut / self.scale
    }

    pub fn mass(&self) -> f64 {
        self.kernel.mass
    }

    #[inline]
    pub fn rho(&self, t: f64) -> f64 {
        self.scale * self.kernel.rho(self.scale * t)
    }

    #[inline]
    pub fn phi(&self, s: f64) -> f64 {
        self.kernel.phi(self.scale * s)
    }

    #[inline]
    pub fn psi(&self, s: f64) -> f64 {
        self.kernel.psi(self.scale * s) / self.scale
    }

    pub fn fourier(&self, xi: f64) -> f64 {
        self.kernel.fourier(xi / self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn plateau() -> &'static Kernel {
        static K: OnceLock<Kernel> = OnceLock::new();
        K.get_or_init(|| Kernel::plateau().unwrap())
    }

    fn nonneg() -> &'static Kernel {
        static K: OnceLock<Kernel> = OnceLock::new();
        K.get_or_init(|| Kernel::nonneg().unwrap())
    }

    /// Direct inverse transform with a much finer rule, no integration by parts.
    fn plateau_oracle(t: f64) -> f64 {
        let m = 20_000;
        let d = 1.0 / m as f64;
        let mut acc = NeumaierSum::new();
        for i in 0..m {
            let xi = i as f64 * d;
            let w = if i == 0 { 0.5 } else { 1.0 };
            acc.add(w * plateau_hat(xi) * (t * xi).cos());
        }
        acc.value() * d / PI
    }

    #[test]
    fn profile_examples() {
        assert_eq!(plateau_hat(0.25), 1.0);
        assert_eq!(plateau_hat(0.5), 1.0);
        assert_eq!(plateau_hat(1.2), 0.0);
        assert!((plateau_hat(0.75) - 0.5).abs() < 1e-15);
        assert!(plateau_hat(0.6) > plateau_hat(0.9));
        let j = plateau_hat_jet::<3>(0.8);
        assert!((j.value() - plateau_hat(0.8)).abs() < 1e-15);
        let fd = (plateau_hat(0.8 + 1e-6) - plateau_hat(0.8 - 1e-6)) / 2e-6;
        assert!((j.derivative(1) - fd).abs() < 1e-6);
    }

    #[test]
    fn plateau_table_matches_direct_transform() {
        let k = plateau();
        assert!((k.rho(0.0) - 0.75 / PI).abs() < 1e-12);
        for t in [0.0, 0.3, 1.7, 5.0, 12.25, 40.0, 97.3, 250.0] {
            let a = k.rho(t);
            let b = plateau_oracle(t);
            assert!((a - b).abs() < 1e-12, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn plateau_contract() {
        let k = plateau();
        assert!((k.mass() - 1.0).abs() < 1e-8);
        for m in 1..=5 {
            assert!(k.moment(m).abs() < 1e-8, "moment {m} = {}", k.moment(m));
        }
        assert_eq!(k.phi(0.0), 0.5 * k.mass());
        assert_eq!(k.phi(1e9), k.mass());
        assert_eq!(k.phi(-1e9), 0.0);
        assert!((k.fourier_from_table(0.25) - 1.0).abs() < 1e-8);
        assert!(k.fourier_from_table(1.2).abs() < 1e-8);
        assert!(k.tail_bound() < 1e-12);
    }

    #[test]
    fn short_cutoff_is_rejected() {
        assert!(matches!(
            build_plateau_kernel(1e-2, 100.0),
            Err(Error::KernelInvariant { .. })
        ));
        assert!(build_plateau_kernel(0.0, 10.0).is_err());
    }

    #[test]
    fn psi_matches_integrated_phi() {
        let k = plateau();
        // Ψ(s) − Ψ(−s) = ∫_{−s}^{s} Φ = m s since Φ(t) + Φ(−t) = m.
        for s in [0.5, 3.0, 17.0] {
            assert!((k.psi(s) - k.psi(-s) - k.mass() * s).abs() < 1e-12);
        }
        // Ψ(b) − Ψ(a) against a fine trapezoid of Φ.
        let (a, b) = (-4.0, 6.0);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut acc = NeumaierSum::new();
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc.add(w * k.phi(a + i as f64 * h));
        }
        assert!((acc.value() * h - (k.psi(b) - k.psi(a))).abs() < 1e-9);
        // Ψ(s) ≈ s for s ≫ 1 because the first moment vanishes.
        assert!((k.psi(5000.0) - 5000.0 * k.mass()).abs() < 1e-9);
    }

    #[test]
    fn nonneg_contract() {
        let k = nonneg();
        assert!((k.mass() - 1.0).abs() < 1e-8);
        assert!(k.samples(1).iter().all(|&(_, v)| v >= 0.0));
        assert_eq!(k.fourier(0.6), 0.0);
        assert!((k.fourier(0.0) - 1.0).abs() < 1e-13);
        assert!((k.fourier_from_table(0.2) - k.fourier(0.2)).abs() < 1e-8);
    }

    #[test]
    fn reproducing_identity_is_exact() {
        let p = plateau();
        let n = nonneg();
        for i in -700..=700 {
            let xi = i as f64 * 1e-3;
            assert_eq!(p.fourier(xi) * n.fourier(xi), n.fourier(xi));
        }
    }

    #[test]
    fn tauberian_fourier_identity() {
        let n = nonneg();
        let t = tauberian_kernel(n).unwrap();
        assert!(t.samples(1).iter().all(|&(_, v)| v >= 0.0));
        assert!(t.rho(t.t_cut()) <= t.tail_bound() + 1e-300);
        for xi in [0.1, 0.2, 0.3] {
            let d = 1e-4;
            let deriv = (-n.fourier(xi + 2.0 * d) + 8.0 * n.fourier(xi + d) - 8.0 * n.fourier(xi - d)
                + n.fourier(xi - 2.0 * d))
                / (12.0 * d);
            let from_table = t.fourier_from_table(xi);
            assert!((from_table + deriv / xi).abs() < 1e-6, "ξ={xi}");
            assert!((t.fourier(xi) - from_table).abs() < 1e-6, "ξ={xi}");
        }
        assert!((t.fourier(0.0) - t.mass()).abs() < 1e-8);
        assert!(tauberian_kernel(plateau()).is_err());
    }

    #[test]
    fn prescaled_table_matches_scaled_view() {
        let k = plateau();
        let pre = k.prescaled(4.0).unwrap();
        let view = ScaledKernel::new(k, 4.0).unwrap();
        for t in [0.0, 0.013, 0.5, 2.2, 100.0] {
            assert!((pre.rho(t) - view.rho(t)).abs() < 1e-12);
            assert!((pre.phi(t) - view.phi(t)).abs() < 1e-12);
            assert!((pre.psi(t) - view.psi(t)).abs() < 1e-12);
        }
        assert_eq!(pre.fourier(1.0), view.fourier(1.0));
        assert_eq!(pre.fourier_support_halfwidth(), 4.0);
    }
}
