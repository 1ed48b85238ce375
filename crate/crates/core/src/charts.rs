//! Coordinate charts on `SL_n`, `B`, `B₋` and helpers for chart maps.
//!
//! * `G`: all `n²` matrix entries, row by row (an ambient chart; bivectors
//!   that are tangent to `SL_n` are represented faithfully).
//! * `B`: the upper-triangular entries `(i, j)`, `i ≤ j`, row by row, except
//!   the last diagonal entry, which is recovered from `det = 1`.
//! * `B₋`: the lower-triangular entries `(i, j)`, `i ≥ j`, row by row, except
//!   the last diagonal entry.

use crate::error::{Error, Result};
use crate::linalg::{flatten, re, unflatten, CMatrix, C64};

/// Which triangular Borel subgroup a chart describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Borel {
    /// Upper triangular `B`.
    Upper,
    /// Lower triangular `B₋`.
    Lower,
}

/// Matrix positions used as coordinates of a Borel chart.
pub fn borel_positions(n: usize, kind: Borel) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let keep = match kind {
                Borel::Upper => j >= i,
                Borel::Lower => j <= i,
            };
            if keep && !(i == n - 1 && j == n - 1) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Dimension `n(n+1)/2 − 1` of a Borel subgroup of `SL_n`.
pub fn borel_dim(n: usize) -> usize {
    n * (n + 1) / 2 - 1
}

/// Coordinates of a Borel element.
pub fn borel_coords(m: &CMatrix, kind: Borel) -> Vec<C64> {
    borel_positions(m.nrows(), kind).into_iter().map(|(i, j)| m[(i, j)]).collect()
}

/// Borel element with the given coordinates; the last diagonal entry is
/// `1 / ∏ (other diagonal entries)`.
pub fn borel_from_coords(v: &[C64], n: usize, kind: Borel) -> Result<CMatrix> {
    let pos = borel_positions(n, kind);
    if v.len() != pos.len() {
        return Err(Error::IndexMismatch { expected: pos.len(), found: v.len() });
    }
    let mut m = CMatrix::zeros(n, n);
    for (&(i, j), z) in pos.iter().zip(v) {
        m[(i, j)] = *z;
    }
    let prod: C64 = (0..n - 1).map(|k| m[(k, k)]).product();
    if prod.norm() < 1e-300 {
        return Err(Error::InvariantViolation("degenerate Borel diagonal".into()));
    }
    m[(n - 1, n - 1)] = re(1.0) / prod;
    Ok(m)
}

/// Indices of the Borel chart coordinates inside the ambient `n²` chart.
pub fn borel_ambient_indices(n: usize, kind: Borel) -> Vec<usize> {
    borel_positions(n, kind).into_iter().map(|(i, j)| i * n + j).collect()
}

/// Derivative of the Borel chart embedding along coordinate `k` at `m`.
pub fn borel_coordinate_tangent(m: &CMatrix, kind: Borel, k: usize) -> CMatrix {
    let n = m.nrows();
    let (i, j) = borel_positions(n, kind)[k];
    let mut t = CMatrix::zeros(n, n);
    t[(i, j)] = re(1.0);
    if i == j {
        t[(n - 1, n - 1)] = -m[(n - 1, n - 1)] / m[(i, i)];
    }
    t
}

/// Coordinates of a tangent vector `v ∈ T_m B` (or `B₋`) in the Borel chart.
pub fn borel_tangent_coords(v: &CMatrix, kind: Borel) -> Vec<C64> {
    borel_coords(v, kind)
}

/// Ambient coordinates of a group element (all entries).
pub fn ambient_coords(m: &CMatrix) -> Vec<C64> {
    flatten(m)
}

/// Group element from ambient coordinates.
pub fn ambient_from_coords(v: &[C64], n: usize) -> CMatrix {
    unflatten(v, n)
}

/// Split a coordinate vector into consecutive blocks of the given sizes.
pub fn split_blocks<'a>(v: &'a [C64], sizes: &[usize]) -> Vec<&'a [C64]> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for s in sizes {
        out.push(&v[start..start + s]);
        start += s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn borel_round_trip() {
        let b = CMatrix::from_row_slice(3, 3, &[re(2.0), re(1.0), re(3.0), re(0.0), re(0.25), re(-1.0), re(0.0), re(0.0), re(2.0)]);
        let v = borel_coords(&b, Borel::Upper);
        assert_eq!(v.len(), borel_dim(3));
        assert!(dist(&borel_from_coords(&v, 3, Borel::Upper).unwrap(), &b) < 1e-15);
        let bt = b.transpose();
        let w = borel_coords(&bt, Borel::Lower);
        assert!(dist(&borel_from_coords(&w, 3, Borel::Lower).unwrap(), &bt) < 1e-15);
    }

    #[test]
    fn coordinate_tangents_match_finite_differences() {
        let v = vec![re(2.0), re(1.0)];
        let b = borel_from_coords(&v, 2, Borel::Upper).unwrap();
        for k in 0..2 {
            let mut vp = v.clone();
            vp[k] += re(1e-7);
            let mut vm = v.clone();
            vm[k] -= re(1e-7);
            let fd = (borel_from_coords(&vp, 2, Borel::Upper).unwrap() - borel_from_coords(&vm, 2, Borel::Upper).unwrap()) / re(2e-7);
            assert!(dist(&fd, &borel_coordinate_tangent(&b, Borel::Upper, k)) < 1e-7);
        }
    }
}
