//! Text formats for spectra.
//!
//! Plain: one `frequency multiplicity` pair per line (the multiplicity may
//! be omitted and defaults to 1), `#` starts a comment.
//!
//! Structured: the plain body preceded by `@key value` header lines:
//!
//! ```text
//! @format weylscope-spectrum 1
//! @unit frequency
//! @lambda_max 100
//! @label square torus
//! @dimension 2
//! @volume 39.47841760435743
//! 0 1
//! 1 4
//! ```
//!
//! Floats are written in shortest round-trip form, so `load(save(s)) == s`
//! bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Entry, Provenance, Spectrum};
use crate::error::{Error, Result};
use crate::output::write_atomic;

const MAGIC: &str = "weylscope-spectrum 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Plain,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// Square roots of Laplace eigenvalues.
    Frequency,
    /// Laplace eigenvalues themselves.
    Eigenvalue,
}

impl Unit {
    fn tag(self) -> &'static str {
        match self {
            Unit::Frequency => "frequency",
            Unit::Eigenvalue => "eigenvalue",
        }
    }
}

/// Knobs for reading plain files, which carry no header.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Completeness bound for plain files; defaults to the largest frequency read.
    pub lambda_max: Option<f64>,
    pub merge_tol: f64,
    pub unit: Unit,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            lambda_max: None,
            merge_tol: 0.0,
            unit: Unit::Frequency,
        }
    }
}

pub fn save(spectrum: &Spectrum, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Structured => to_structured_string(spectrum),
        Format::Plain => {
            let mut out = String::new();
            write_body(&mut out, spectrum);
            out
        }
    };
    write_atomic(path, text.as_bytes())
}

/// Canonical structured serialization.
pub fn to_structured_string(spectrum: &Spectrum) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@format {MAGIC}");
    let _ = writeln!(out, "@unit {}", Unit::Frequency.tag());
    let _ = writeln!(out, "@lambda_max {}", spectrum.lambda_max());
    let label = spectrum.label().replace(['\n', '\r'], " ");
    if !label.is_empty() {
        let _ = writeln!(out, "@label {label}");
    }
    let p = spectrum.provenance();
    if let Some(d) = p.dimension {
        let _ = writeln!(out, "@dimension {d}");
    }
    if let Some(v) = p.volume {
        let _ = writeln!(out, "@volume {v}");
    }
    write_body(&mut out, spectrum);
    out
}

fn write_body(out: &mut String, spectrum: &Spectrum) {
    for e in spectrum.entries() {
        let _ = writeln!(out, "{} {}", e.frequency, e.multiplicity);
    }
}

pub fn load(path: &Path, format: Format, options: &LoadOptions) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path, format, options)
}

/// Reads a file in either format: structured when its first non-comment line is an `@format` header.
pub fn load_auto(path: &Path, options: &LoadOptions) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let structured = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("@format"));
    let format = if structured { Format::Structured } else { Format::Plain };
    parse(&text, path, format, options)
}

pub(crate) fn parse(text: &str, path: &Path, format: Format, options: &LoadOptions) -> Result<Spectrum> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut unit = options.unit;
    let mut lambda_max = options.lambda_max;
    let mut label = String::new();
    let mut provenance = Provenance::default();
    let mut seen_magic = false;
    let mut rows: Vec<(usize, f64, u64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('@') {
            if format == Format::Plain {
                return Err(perr(lineno, "header line in a plain spectrum file".into()));
            }
            if !rows.is_empty() {
                return Err(perr(lineno, "header line after data".into()));
            }
            let (key, value) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
            let value = value.trim();
            match key {
                "format" => {
                    if value != MAGIC {
                        return Err(perr(lineno, format!("unsupported format `{value}`")));
                    }
                    seen_magic = true;
                }
                "unit" => {
                    unit = match value {
                        "frequency" => Unit::Frequency,
                        "eigenvalue" => Unit::Eigenvalue,
                        other => return Err(perr(lineno, format!("unknown unit `{other}`"))),
                    }
                }
                "lambda_max" => {
                    lambda_max = Some(
                        value
                            .parse()
                            .map_err(|e| perr(lineno, format!("bad lambda_max: {e}")))?,
                    )
                }
                "label" => label = value.to_string(),
                "dimension" => {
                    provenance.dimension = Some(
                        value
                            .parse()
                            .map_err(|e| perr(lineno, format!("bad dimension: {e}")))?,
                    )
                }
                "volume" => {
                    provenance.volume = Some(
                        value
                            .parse()
                            .map_err(|e| perr(lineno, format!("bad volume: {e}")))?,
                    )
                }
                other => return Err(perr(lineno, format!("unknown header key `{other}`"))),
            }
            continue;
        }

        let data = line.split('#').next().unwrap_or("").trim();
        let mut fields = data.split_whitespace();
        let value: f64 = fields
            .next()
            .ok_or_else(|| perr(lineno, "empty data line".into()))?
            .parse()
            .map_err(|e| perr(lineno, format!("bad value: {e}")))?;
        let mult: u64 = match fields.next() {
            Some(m) => m
                .parse()
                .map_err(|e| perr(lineno, format!("bad multiplicity: {e}")))?,
            None => 1,
        };
        if fields.next().is_some() {
            return Err(perr(lineno, "expected at most two columns".into()));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(perr(lineno, format!("value {value} must be finite and non-negative")));
        }
        if mult == 0 {
            return Err(perr(lineno, "multiplicity must be at least 1".into()));
        }
        let freq = match unit {
            Unit::Frequency => value,
            Unit::Eigenvalue => value.sqrt(),
        };
        rows.push((lineno, freq, mult));
    }

    if format == Format::Structured {
        if !seen_magic {
            return Err(perr(1, format!("missing `@format {MAGIC}` header")));
        }
        if lambda_max.is_none() {
            return Err(perr(1, "missing `@lambda_max` header".into()));
        }
        for w in rows.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(Error::validation(format!(
                    "{}:{}: frequencies must be strictly increasing",
                    path.display(),
                    w[1].0
                )));
            }
        }
    }

    let lambda_max = lambda_max.unwrap_or_else(|| rows.iter().map(|r| r.1).fold(0.0, f64::max));
    let pairs: Vec<(f64, u64)> = rows.iter().map(|r| (r.1, r.2)).collect();
    let merge_tol = if format == Format::Structured { 0.0 } else { options.merge_tol };
    let spectrum = Spectrum::from_frequencies(&pairs, lambda_max, merge_tol)?;
    Ok(spectrum.with_label(label).with_provenance(provenance))
}

impl Spectrum {
    /// Entries as plain `(frequency, multiplicity)` tuples.
    pub fn to_pairs(&self) -> Vec<(f64, u64)> {
        self.entries
            .iter()
            .map(|&Entry { frequency, multiplicity }| (frequency, multiplicity))
            .collect()
    }
}
