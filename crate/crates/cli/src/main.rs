//! `weylscope` command-line front end.
//!
//! Exit status: 0 on success, 1 on validation errors (bad flags, malformed
//! files, broken invariants), 2 when a query reaches past a spectrum's
//! completeness bound.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use weylscope::audit::{detect_defects, AuditConfig};
use weylscope::counting::{counting_series, riesz_series, PrefixPowerSums};
use weylscope::mollify::{
    build_nonneg_kernel, build_plateau_kernel, convolve_counting, convolve_density, tauberian_gap_check,
    tauberian_kernel, Kernel, ScaledKernel, DEFAULT_GRID_SPACING, DEFAULT_NONNEG_CUTOFF, DEFAULT_PLATEAU_CUTOFF,
};
use weylscope::models::{sphere_spectrum, torus_spectrum, FlatTorus, RoundSphere};
use weylscope::output::{columns, two_columns, write_atomic};
use weylscope::spectrum::{load_auto, to_structured_string, LoadOptions, Unit};
use weylscope::wavetrace::{detect_length_peaks, spectral_wave_trace, Window};
use weylscope::weyl::WeylCoefficients;
use weylscope::{Grid, Perturbation, Spectrum};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "WEYLSCOPE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "weylscope", version, about = "Counting functions, Riesz means and audits of Laplace spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an exact model spectrum.
    Gen(GenArgs),
    /// Tabulate N(λ).
    Count(CountArgs),
    /// Tabulate the Riesz mean R_k N(λ).
    Riesz(RieszArgs),
    /// Smooth N with a band-limited kernel.
    Mollify(MollifyArgs),
    /// Windowed wave trace and length-spectrum peaks.
    Wavetrace(WavetraceArgs),
    /// Look for missing or extra eigenvalues.
    Audit(AuditArgs),
    /// Export a kernel table.
    Kernel(KernelArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Spectrum file (structured or plain).
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Completeness bound for plain files without a header.
    #[arg(long = "input-lmax")]
    input_lmax: Option<f64>,
    /// Plain files hold Laplace eigenvalues rather than frequencies.
    #[arg(long)]
    eigenvalues: bool,
    /// Merge frequencies closer than this on input.
    #[arg(long, default_value_t = 0.0)]
    merge_tol: f64,
}

impl InputArgs {
    fn load(&self) -> Result<Spectrum> {
        let options = LoadOptions {
            lambda_max: self.input_lmax,
            merge_tol: self.merge_tol,
            unit: if self.eigenvalues { Unit::Eigenvalue } else { Unit::Frequency },
        };
        Ok(load_auto(&self.input, &options)?)
    }

    fn describe(&self) -> String {
        format!("input={}", self.input.display())
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    Torus,
    Sphere,
}

#[derive(Args, Debug)]
struct GenArgs {
    model: Model,
    #[arg(long)]
    dim: Option<usize>,
    /// Side length of a cubic torus.
    #[arg(long)]
    side: Option<f64>,
    /// Torus lattice basis, columns separated by ';' and entries by ','.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    lmax: f64,
    /// Remove one multiplicity at this frequency (repeatable).
    #[arg(long = "remove")]
    remove: Vec<f64>,
    /// Add one eigenvalue at this frequency (repeatable).
    #[arg(long = "add")]
    add: Vec<f64>,
    /// Distance within which --remove/--add match an existing frequency.
    #[arg(long, default_value_t = 1e-9)]
    perturb_tol: f64,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    grid: Grid,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RieszArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    grid: Grid,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum KernelChoice {
    Plateau,
    Nonneg,
    Tauberian,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MollifyMode {
    /// N ∗ ρ_T
    Counting,
    /// N′ ∗ ρ_T
    Density,
    /// ∫ (N − N ∗ ρ_T)
    Gap,
}

#[derive(Args, Debug)]
struct KernelSpec {
    #[arg(long, value_enum, default_value_t = KernelChoice::Plateau)]
    kernel: KernelChoice,
    /// Table spacing.
    #[arg(long, default_value_t = DEFAULT_GRID_SPACING)]
    h: f64,
    /// Table cutoff; defaults depend on the kernel.
    #[arg(long)]
    tcut: Option<f64>,
}

impl KernelSpec {
    fn build(&self) -> Result<Kernel> {
        let kernel = match self.kernel {
            KernelChoice::Plateau => build_plateau_kernel(self.h, self.tcut.unwrap_or(DEFAULT_PLATEAU_CUTOFF))?,
            KernelChoice::Nonneg => build_nonneg_kernel(self.h, self.tcut.unwrap_or(DEFAULT_NONNEG_CUTOFF))?,
            KernelChoice::Tauberian => {
                tauberian_kernel(&build_nonneg_kernel(self.h, self.tcut.unwrap_or(DEFAULT_NONNEG_CUTOFF))?)?
            }
        };
        Ok(kernel)
    }

    fn describe(&self, kernel: &Kernel) -> String {
        format!("kernel={} h={} tcut={}", kernel.kind().name(), self.h, kernel.t_cut())
    }
}

#[derive(Args, Debug)]
struct MollifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelSpec,
    /// Scale T of ρ_T(t) = T ρ(Tt).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_enum, default_value_t = MollifyMode::Counting)]
    mode: MollifyMode,
    #[arg(long)]
    grid: Grid,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum WindowShape {
    Gaussian,
    Plateau,
}

#[derive(Args, Debug)]
struct WavetraceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = WindowShape::Gaussian)]
    window: WindowShape,
    #[arg(long)]
    center: f64,
    /// Gaussian width σ.
    #[arg(long)]
    sigma: Option<f64>,
    /// Plateau window half-width.
    #[arg(long)]
    halfwidth: Option<f64>,
    #[arg(long, default_value = "0:20:0.01")]
    tgrid: Grid,
    /// Number of peaks of |F| to report.
    #[arg(long, default_value_t = 0)]
    peaks: usize,
    #[arg(long, default_value_t = 0.5)]
    min_sep: f64,
    /// Where to write the peaks; stdout when absent.
    #[arg(long)]
    peaks_out: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// `torus`, `sphere`, or a coefficient file.
    #[arg(long)]
    coeffs: String,
    #[arg(long)]
    grid: Grid,
    /// Candidate defect locations; default covers the first three quarters of the grid.
    #[arg(long)]
    candidates: Option<Grid>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Permit k = 0.
    #[arg(long)]
    allow_order_zero: bool,
    /// Report file; stdout when absent.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Two-column residual series.
    #[arg(long)]
    residual_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    kernel: KernelSpec,
    /// Keep every n-th table point.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_basis(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|col| {
            col.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| anyhow!("basis entry `{v}`: {e}")))
                .collect()
        })
        .collect()
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let mut spectrum = match args.model {
        Model::Torus => {
            let torus = match (&args.basis, args.side) {
                (Some(b), None) => FlatTorus::from_columns(&parse_basis(b)?)?,
                (None, Some(side)) => {
                    FlatTorus::cubic(args.dim.ok_or_else(|| anyhow!("--side needs --dim"))?, side)?
                }
                _ => bail!("a torus needs exactly one of --side (with --dim) or --basis"),
            };
            torus_spectrum(&torus, args.lmax)?
        }
        Model::Sphere => {
            let d = args.dim.ok_or_else(|| anyhow!("a sphere needs --dim"))?;
            let d = u32::try_from(d).map_err(|_| anyhow!("--dim {d} is too large"))?;
            sphere_spectrum(&RoundSphere::new(d)?, args.lmax)?
        }
    };
    let mut notes = Vec::new();
    for &mu in &args.remove {
        spectrum = spectrum.perturb(Perturbation::RemoveOne, mu, args.perturb_tol)?;
        notes.push(format!("remove {mu}"));
    }
    for &mu in &args.add {
        spectrum = spectrum.perturb(Perturbation::AddOne, mu, args.perturb_tol)?;
        notes.push(format!("add {mu}"));
    }
    if !notes.is_empty() {
        let label = format!("{} ({})", spectrum.label(), notes.join(", "));
        spectrum = spectrum.with_label(label);
    }
    emit(args.output.as_deref(), &to_structured_string(&spectrum))
}

fn run_count(args: &CountArgs) -> Result<()> {
    let spectrum = args.input.load()?;
    let series = counting_series(&spectrum, &args.grid.points())?;
    let header = vec![
        format!("weylscope count grid={} {}", args.grid, args.input.describe()),
        "lambda N".to_string(),
    ];
    emit(args.output.as_deref(), &two_columns(&header, &series))
}

fn run_riesz(args: &RieszArgs) -> Result<()> {
    let spectrum = args.input.load()?;
    let prefix = PrefixPowerSums::build(&spectrum, args.k);
    let series = riesz_series(&prefix, args.k, &args.grid.points())?;
    let header = vec![
        format!("weylscope riesz k={} grid={} {}", args.k, args.grid, args.input.describe()),
        format!("lambda R_{}N", args.k),
    ];
    emit(args.output.as_deref(), &two_columns(&header, &series))
}

fn run_mollify(args: &MollifyArgs) -> Result<()> {
    let spectrum = args.input.load()?;
    let kernel = args.kernel.build()?;
    let scaled = ScaledKernel::new(&kernel, args.scale)?;
    let mut header = vec![format!(
        "weylscope mollify mode={:?} scale={} grid={} {} {}",
        args.mode,
        args.scale,
        args.grid,
        args.kernel.describe(&kernel),
        args.input.describe()
    )
    .to_lowercase()];
    let text = match args.mode {
        MollifyMode::Gap => {
            let series = tauberian_gap_check(&spectrum, &scaled, &args.grid)?;
            header.push("lambda gap".into());
            two_columns(&header, &series)
        }
        MollifyMode::Counting | MollifyMode::Density => {
            let rows: Vec<[f64; 3]> = args
                .grid
                .points()
                .iter()
                .map(|&l| {
                    let s = if args.mode == MollifyMode::Counting {
                        convolve_counting(&spectrum, &scaled, l)?
                    } else {
                        convolve_density(&spectrum, &scaled, l)?
                    };
                    Ok([l, s.value, if s.complete { 1.0 } else { 0.0 }])
                })
                .collect::<weylscope::Result<_>>()?;
            if rows.iter().any(|r| r[2] == 0.0) {
                eprintln!("warning: some points reach past lambda_max; see the third column");
            }
            header.push("lambda value complete".into());
            columns(&header, &rows)
        }
    };
    emit(args.output.as_deref(), &text)
}

fn run_wavetrace(args: &WavetraceArgs) -> Result<()> {
    let spectrum = args.input.load()?;
    let window = match args.window {
        WindowShape::Gaussian => Window::Gaussian {
            center: args.center,
            sigma: args.sigma.ok_or_else(|| anyhow!("a gaussian window needs --sigma"))?,
        },
        WindowShape::Plateau => Window::Plateau {
            center: args.center,
            halfwidth: args.halfwidth.ok_or_else(|| anyhow!("a plateau window needs --halfwidth"))?,
        },
    };
    let trace = spectral_wave_trace(&spectrum, window, &args.tgrid)?;
    let base = format!("weylscope wavetrace {} tgrid={} {}", window.describe(), args.tgrid, args.input.describe());
    let header = vec![base.clone(), "t F".to_string()];
    emit(args.output.as_deref(), &two_columns(&header, &trace.points()))?;
    if args.peaks > 0 {
        let peaks = detect_length_peaks(&trace, args.min_sep, args.peaks)?;
        let rows: Vec<(f64, f64)> = peaks.iter().map(|p| (p.t, p.height)).collect();
        let header = vec![
            format!("{base} peaks={} min_sep={}", args.peaks, args.min_sep),
            "t height".to_string(),
        ];
        let text = two_columns(&header, &rows);
        match &args.peaks_out {
            Some(p) => write_atomic(p, text.as_bytes())?,
            None if args.output.is_some() => print!("{text}"),
            None => eprint!("{text}"),
        }
    }
    Ok(())
}

fn preset_coefficients(name: &str, spectrum: &Spectrum) -> Result<WeylCoefficients> {
    let p = spectrum.provenance();
    match name {
        "torus" => {
            let d = p.dimension.ok_or_else(|| anyhow!("the torus preset needs @dimension in the spectrum file"))?;
            let v = p.volume.ok_or_else(|| anyhow!("the torus preset needs @volume in the spectrum file"))?;
            Ok(WeylCoefficients::flat_torus(d, v)?)
        }
        "sphere" => {
            let d = p.dimension.ok_or_else(|| anyhow!("the sphere preset needs @dimension in the spectrum file"))?;
            Ok(WeylCoefficients::round_sphere(d)?)
        }
        path => Ok(WeylCoefficients::load(Path::new(path))?),
    }
}

fn run_audit(args: &AuditArgs) -> Result<()> {
    let spectrum = args.input.load()?;
    let coeffs = preset_coefficients(&args.coeffs, &spectrum)?;
    let mut config = AuditConfig::new(coeffs, args.grid)?;
    config.k = args.k;
    config.allow_order_zero = args.allow_order_zero;
    if let Some(c) = args.candidates {
        config.candidates = c;
    }
    if let Some(t) = args.threshold {
        config.threshold = t;
    }
    let report = detect_defects(&spectrum, &config)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# weylscope audit k={} coeffs={} grid={} {}",
        args.k,
        args.coeffs,
        args.grid,
        args.input.describe()
    );
    text.push_str(&report.to_toml_string());
    emit(args.output.as_deref(), &text)?;
    if let Some(p) = &args.residual_out {
        let header = vec![
            format!("weylscope audit residual k={} grid={} {}", args.k, args.grid, args.input.describe()),
            format!("lambda r_{}", args.k),
        ];
        write_atomic(p, two_columns(&header, &report.residual).as_bytes())?;
    }
    let mut summary = format!("verdict: {}", report.verdict.as_str());
    for a in &report.anomalies {
        let sign = match a.sign {
            weylscope::audit::DefectSign::Missing => "missing",
            weylscope::audit::DefectSign::Extra => "extra",
        };
        let _ = write!(summary, "\n  {sign} eigenvalue near {:.4} (amplitude {:.3}, score {:.3})", a.mu, a.amplitude, a.score);
    }
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn run_kernel(args: &KernelArgs) -> Result<()> {
    let kernel = args.kernel.build()?;
    let header = vec![
        format!(
            "weylscope kernel {} stride={} mass={} tail_bound={:e}",
            args.kernel.describe(&kernel),
            args.stride,
            kernel.mass(),
            kernel.tail_bound()
        ),
        format!("fourier support [-{0}, {0}]; t rho(t) for t >= 0, rho is even", kernel.fourier_support_halfwidth()),
        "t rho".to_string(),
    ];
    emit(args.output.as_deref(), &two_columns(&header, &kernel.samples(args.stride)))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("{THREADS_ENV}={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Count(a) => run_count(a),
        Command::Riesz(a) => run_riesz(a),
        Command::Mollify(a) => run_mollify(a),
        Command::Wavetrace(a) => run_wavetrace(a),
        Command::Audit(a) => run_audit(a),
        Command::Kernel(a) => run_kernel(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let completeness = err
        .chain()
        .filter_map(|e| e.downcast_ref::<weylscope::Error>())
        .any(weylscope::Error::is_completeness);
    if completeness {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
