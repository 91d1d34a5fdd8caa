//! Frequency spectra: validated, sorted lists of `(frequency, multiplicity)`
//! with a completeness bound.
//!
//! The working variable is the frequency `λ = √E`, where `E` is a Laplace
//! eigenvalue. Conversion from eigenvalues happens only at ingestion.

mod format;

pub use format::{load, load_auto, save, to_structured_string, Format, LoadOptions, Unit};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub frequency: f64,
    pub multiplicity: u64,
}

/// Optional geometric provenance carried alongside the data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub dimension: Option<u32>,
    pub volume: Option<f64>,
}

/// Immutable, validated spectrum.
///
/// Invariants: frequencies strictly increasing and non-negative,
/// multiplicities at least one, every frequency `<= lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    entries: Vec<Entry>,
    lambda_max: f64,
    label: String,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    RemoveOne,
    AddOne,
}

impl Spectrum {
    /// Builds a spectrum from raw `(frequency, multiplicity)` pairs.
    ///
    /// Values are sorted; runs of neighbours closer than `merge_tol` collapse
    /// into one entry at the multiplicity-weighted mean frequency.
    pub fn from_frequencies(values: &[(f64, u64)], lambda_max: f64, merge_tol: f64) -> Result<Self> {
        if !(lambda_max.is_finite() && lambda_max >= 0.0) {
            return Err(Error::validation(format!(
                "lambda_max must be finite and non-negative, got {lambda_max}"
            )));
        }
        if !(merge_tol.is_finite() && merge_tol >= 0.0) {
            return Err(Error::validation(format!(
                "merge tolerance must be non-negative, got {merge_tol}"
            )));
        }
        for &(f, m) in values {
            if !f.is_finite() {
                return Err(Error::validation(format!("non-finite frequency {f}")));
            }
            if f < 0.0 {
                return Err(Error::validation(format!("negative frequency {f}")));
            }
            if m == 0 {
                return Err(Error::validation(format!(
                    "zero multiplicity at frequency {f}"
                )));
            }
            if f > lambda_max {
                return Err(Error::OutOfRange {
                    value: f,
                    lambda_max,
                });
            }
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            entries: merge_sorted(&sorted, merge_tol),
            lambda_max,
            label: String::new(),
            provenance: Provenance::default(),
        })
    }

    /// Builds a spectrum from Laplace eigenvalues `E`, storing `√E`.
    pub fn from_laplace_eigenvalues(
        values: &[(f64, u64)],
        lambda_max: f64,
        merge_tol: f64,
    ) -> Result<Self> {
        let mut freqs = Vec::with_capacity(values.len());
        for &(e, m) in values {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::validation(format!(
                    "Laplace eigenvalue {e} must be finite and non-negative"
                )));
            }
            freqs.push((e.sqrt(), m));
        }
        Self::from_frequencies(&freqs, lambda_max, merge_tol)
    }

    /// Assembles a spectrum from entries already known to be valid.
    pub(crate) fn from_sorted_entries(entries: Vec<Entry>, lambda_max: f64) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].frequency < w[1].frequency));
        debug_assert!(entries.iter().all(|e| e.frequency <= lambda_max));
        Self {
            entries,
            lambda_max,
            label: String::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Number of entries with frequency strictly below `lambda`.
    pub fn index_below(&self, lambda: f64) -> usize {
        self.entries.partition_point(|e| e.frequency < lambda)
    }

    /// Keeps entries strictly below `new_lambda_max`.
    pub fn truncate(&self, new_lambda_max: f64) -> Result<Self> {
        if !(new_lambda_max >= 0.0) {
            return Err(Error::validation(format!(
                "truncation bound {new_lambda_max} must be non-negative"
            )));
        }
        if new_lambda_max > self.lambda_max {
            return Err(Error::OutOfRange {
                value: new_lambda_max,
                lambda_max: self.lambda_max,
            });
        }
        let keep = if new_lambda_max == self.lambda_max {
            self.entries.len()
        } else {
            self.index_below(new_lambda_max)
        };
        Ok(Self {
            entries: self.entries[..keep].to_vec(),
            lambda_max: new_lambda_max,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Removes or adds a single unit of multiplicity at `mu`.
    ///
    /// An existing entry within `tol` of `mu` is the one modified.
    pub fn perturb(&self, action: Perturbation, mu: f64, tol: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::validation(format!("perturbation point {mu} is invalid")));
        }
        let mut entries = self.entries.clone();
        let nearest = self.nearest_within(mu, tol);
        match action {
            Perturbation::RemoveOne => {
                let i = nearest.ok_or_else(|| {
                    Error::validation(format!("no entry within {tol} of {mu} to remove"))
                })?;
                if entries[i].multiplicity == 1 {
                    entries.remove(i);
                } else {
                    entries[i].multiplicity -= 1;
                }
            }
            Perturbation::AddOne => match nearest {
                Some(i) => entries[i].multiplicity += 1,
                None => {
                    if mu > self.lambda_max {
                        return Err(Error::OutOfRange {
                            value: mu,
                            lambda_max: self.lambda_max,
                        });
                    }
                    let at = entries.partition_point(|e| e.frequency < mu);
                    entries.insert(
                        at,
                        Entry {
                            frequency: mu,
                            multiplicity: 1,
                        },
                    );
                }
            },
        }
        Ok(Self {
            entries,
            lambda_max: self.lambda_max,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
        })
    }

    fn nearest_within(&self, mu: f64, tol: f64) -> Option<usize> {
        let at = self.index_below(mu);
        [at.checked_sub(1), Some(at)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.entries.len())
            .map(|i| (i, (self.entries[i].frequency - mu).abs()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

fn merge_sorted(sorted: &[(f64, u64)], tol: f64) -> Vec<Entry> {
    let mut out: Vec<Entry> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].0 - sorted[j - 1].0 <= tol {
            j += 1;
        }
        let run = &sorted[i..j];
        let mult: u64 = run.iter().map(|r| r.1).sum();
        let frequency = if run.iter().all(|r| r.0 == run[0].0) {
            run[0].0
        } else {
            let weighted: f64 = crate::sum::compensated_sum(run.iter().map(|r| r.0 * r.1 as f64));
            weighted / mult as f64
        };
        out.push(Entry {
            frequency,
            multiplicity: mult,
        });
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &Spectrum) -> Vec<(f64, u64)> {
        s.entries()
            .iter()
            .map(|e| (e.frequency, e.multiplicity))
            .collect()
    }

    #[test]
    fn duplicates_merge() {
        let s = Spectrum::from_frequencies(&[(1.0, 1), (1.0, 2)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(1.0, 3)]);
    }

    #[test]
    fn zero_mode_is_kept() {
        let s = Spectrum::from_frequencies(&[(0.0, 1)], 1.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(0.0, 1)]);
    }

    #[test]
    fn input_is_sorted() {
        let s = Spectrum::from_frequencies(&[(2.0, 1), (1.0, 1)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(1.0, 1), (2.0, 1)]);
    }

    #[test]
    fn near_duplicates_merge_to_weighted_mean() {
        let s = Spectrum::from_frequencies(&[(1.0, 1), (1.0 + 3e-10, 3)], 5.0, 1e-9).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.entries()[0].multiplicity, 4);
        assert!((s.entries()[0].frequency - (1.0 + 2.25e-10)).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_and_out_of_range() {
        assert!(matches!(
            Spectrum::from_frequencies(&[(-1.0, 1)], 5.0, 0.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Spectrum::from_frequencies(&[(6.0, 1)], 5.0, 0.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(Spectrum::from_frequencies(&[(1.0, 0)], 5.0, 0.0).is_err());
    }

    #[test]
    fn eigenvalues_become_frequencies() {
        let s = Spectrum::from_laplace_eigenvalues(&[(4.0, 1)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(2.0, 1)]);
        let s = Spectrum::from_laplace_eigenvalues(&[(0.0, 1)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(0.0, 1)]);
        let s = Spectrum::from_laplace_eigenvalues(&[(2.0, 3), (6.0, 5)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s), vec![(2f64.sqrt(), 3), (6f64.sqrt(), 5)]);
        assert!(Spectrum::from_laplace_eigenvalues(&[(-1.0, 1)], 5.0, 0.0).is_err());
    }

    #[test]
    fn truncation_is_strict() {
        let s = Spectrum::from_frequencies(&[(1.0, 1), (2.0, 1)], 5.0, 0.0).unwrap();
        assert_eq!(pairs(&s.truncate(2.0).unwrap()), vec![(1.0, 1)]);
        assert!(s.truncate(0.0).unwrap().is_empty());
        assert_eq!(s.truncate(5.0).unwrap(), s);
        assert!(s.truncate(6.0).is_err());
    }

    #[test]
    fn perturbations() {
        let s = Spectrum::from_frequencies(&[(1.0, 3)], 5.0, 0.0).unwrap();
        let r = s.perturb(Perturbation::RemoveOne, 1.0, 0.0).unwrap();
        assert_eq!(pairs(&r), vec![(1.0, 2)]);

        let s = Spectrum::from_frequencies(&[(1.0, 1)], 5.0, 0.0).unwrap();
        let a = s.perturb(Perturbation::AddOne, 1.5, 0.0).unwrap();
        assert_eq!(pairs(&a), vec![(1.0, 1), (1.5, 1)]);
        assert!(s.perturb(Perturbation::RemoveOne, 9.9, 0.0).is_err());

        let gone = s.perturb(Perturbation::RemoveOne, 1.0, 0.0).unwrap();
        assert!(gone.is_empty());
        assert!(s.perturb(Perturbation::AddOne, 7.0, 0.0).is_err());
    }

    #[test]
    fn total_multiplicity_counts_everything() {
        let s = Spectrum::from_frequencies(&[(0.0, 1), (1.0, 4), (2.0, 4)], 3.0, 0.0).unwrap();
        assert_eq!(s.total_multiplicity(), 9);
        assert_eq!(s.index_below(1.0), 1);
        assert_eq!(s.index_below(1.5), 2);
    }
}
