//! Exhaustive enumeration of lattice vectors below a norm bound.
//!
//! The lattice is described by its Gram matrix `G`, so the squared norm of
//! the vector with integer coordinates `m` is `mᵀ G m`. Candidates are drawn
//! from the axis-aligned box that contains the ellipsoid `mᵀ G m < R²`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Relative distance to the nearest integer below which a scaled Gram entry is snapped.
const INTEGER_SNAP: f64 = 1e-9;

/// Sorted distinct norms `< radius` with the number of lattice vectors of each norm.
pub(crate) fn norms_below(
    gram: &DMatrix<f64>,
    radius: f64,
    include_origin: bool,
    point_budget: u64,
    merge_tol: f64,
) -> Result<Vec<(f64, u64)>> {
    let d = gram.nrows();
    let inverse = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::validation("lattice Gram matrix is singular"))?;

    let mut bounds = Vec::with_capacity(d);
    let mut candidates: f64 = 1.0;
    for i in 0..d {
        let b = (radius * inverse[(i, i)].max(0.0).sqrt()).floor();
        bounds.push(b as i64);
        candidates *= 2.0 * b + 1.0;
    }
    if candidates > point_budget as f64 {
        return Err(Error::Resource(format!(
            "enumeration needs {candidates:.3e} candidates, budget is {point_budget}"
        )));
    }

    match integer_form(gram) {
        Some((scale, ints)) => Ok(enumerate_integer(&ints, scale, radius, &bounds, include_origin)),
        None => Ok(enumerate_float(gram, radius, &bounds, include_origin, merge_tol)),
    }
}

/// Returns `(s, N)` with integer `N` such that `G = s N`, when one exists.
fn integer_form(gram: &DMatrix<f64>) -> Option<(f64, DMatrix<i64>)> {
    let scale = (0..gram.nrows())
        .map(|i| gram[(i, i)])
        .fold(f64::INFINITY, f64::min);
    if !(scale > 0.0) {
        return None;
    }
    let mut ints = DMatrix::<i64>::zeros(gram.nrows(), gram.ncols());
    for ((i, j), v) in gram.iter().enumerate().map(|(k, v)| ((k % gram.nrows(), k / gram.nrows()), v)) {
        let x = v / scale;
        let r = x.round();
        if (x - r).abs() > INTEGER_SNAP * x.abs().max(1.0) || r.abs() > 1e12 {
            return None;
        }
        ints[(i, j)] = r as i64;
    }
    Some((scale, ints))
}

/// Visits every integer vector in the box whose first coordinate is `first`.
fn for_each_in_slab(bounds: &[i64], first: i64, mut visit: impl FnMut(&[i64])) {
    let d = bounds.len();
    let mut m: Vec<i64> = bounds.iter().map(|b| -b).collect();
    m[0] = first;
    if d == 1 {
        visit(&m);
        return;
    }
    loop {
        visit(&m);
        let mut k = d - 1;
        loop {
            if m[k] < bounds[k] {
                m[k] += 1;
                break;
            }
            m[k] = -bounds[k];
            if k == 1 {
                return;
            }
            k -= 1;
        }
    }
}

fn enumerate_integer(
    ints: &DMatrix<i64>,
    scale: f64,
    radius: f64,
    bounds: &[i64],
    include_origin: bool,
) -> Vec<(f64, u64)> {
    let d = bounds.len();
    let mut qs: Vec<i64> = (-bounds[0]..=bounds[0])
        .into_par_iter()
        .map(|first| {
            let mut local = Vec::new();
            for_each_in_slab(bounds, first, |m| {
                let mut q: i64 = 0;
                for i in 0..d {
                    let mut row = 0i64;
                    for j in 0..d {
                        row += ints[(i, j)] * m[j];
                    }
                    q += m[i] * row;
                }
                if q == 0 && !include_origin {
                    return;
                }
                if ((q as f64) * scale).sqrt() < radius {
                    local.push(q);
                }
            });
            local
        })
        .flatten()
        .collect();
    qs.sort_unstable();

    let mut out: Vec<(f64, u64)> = Vec::new();
    let mut i = 0;
    while i < qs.len() {
        let mut j = i;
        while j < qs.len() && qs[j] == qs[i] {
            j += 1;
        }
        out.push((((qs[i] as f64) * scale).sqrt(), (j - i) as u64));
        i = j;
    }
    out
}

fn enumerate_float(
    gram: &DMatrix<f64>,
    radius: f64,
    bounds: &[i64],
    include_origin: bool,
    merge_tol: f64,
) -> Vec<(f64, u64)> {
    let d = bounds.len();
    let mut norms: Vec<f64> = (-bounds[0]..=bounds[0])
        .into_par_iter()
        .map(|first| {
            let mut local = Vec::new();
            for_each_in_slab(bounds, first, |m| {
                if !include_origin && m.iter().all(|&x| x == 0) {
                    return;
                }
                let mut q = NeumaierSum::new();
                for i in 0..d {
                    for j in 0..d {
                        q.add(gram[(i, j)] * (m[i] * m[j]) as f64);
                    }
                }
                let n = q.value().max(0.0).sqrt();
                if n < radius {
                    local.push(n);
                }
            });
            local
        })
        .flatten()
        .collect();
    norms.sort_by(f64::total_cmp);

    let mut out: Vec<(f64, u64)> = Vec::new();
    let mut i = 0;
    while i < norms.len() {
        let mut j = i + 1;
        while j < norms.len() && norms[j] - norms[j - 1] <= merge_tol {
            j += 1;
        }
        let run = &norms[i..j];
        let mean = run.iter().copied().collect::<NeumaierSum>().value() / run.len() as f64;
        out.push((mean, run.len() as u64));
        i = j;
    }
    out
}
