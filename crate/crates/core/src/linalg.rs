//! Dense complex matrix kernel: triangular factorizations, torus square roots,
//! matrix exponential/logarithm and central-difference Jacobians.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. Everything in
//! this module is a pure function of its inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar.
pub type C64 = Complex64;

/// Complex dense square matrix.
pub type CMatrix = DMatrix<C64>;

/// Relative pivot tolerance of the Gauss factorizations.
pub const PIVOT_TOL: f64 = 1e-9;

/// Default finite-difference step of [`numeric_jacobian`].
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Identity matrix of size `n`.
pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Elementary matrix `E_ij` (0-based indices).
pub fn elementary(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = re(1.0);
    m
}

/// Diagonal matrix with the given entries.
pub fn diag(entries: &[C64]) -> CMatrix {
    let n = entries.len();
    let mut m = CMatrix::zeros(n, n);
    for (k, v) in entries.iter().enumerate() {
        m[(k, k)] = *v;
    }
    m
}

/// Diagonal part of a square matrix.
pub fn diag_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = m[(k, k)];
    }
    d
}

/// Strictly upper triangular part.
pub fn strict_upper(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| if j > i { m[(i, j)] } else { re(0.0) })
}

/// Strictly lower triangular part.
pub fn strict_lower(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| if j < i { m[(i, j)] } else { re(0.0) })
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of a difference.
pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    norm(&(a - b))
}

/// Largest modulus among the strictly lower entries.
pub fn lower_defect(m: &CMatrix) -> f64 {
    norm(&strict_lower(m))
}

/// Largest modulus among the strictly upper entries.
pub fn upper_defect(m: &CMatrix) -> f64 {
    norm(&strict_upper(m))
}

/// True when every entry is finite.
pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Matrix inverse; fails with `InvariantViolation` on singular input.
pub fn inv(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .filter(is_finite)
        .ok_or_else(|| Error::InvariantViolation("singular matrix".into()))
}

/// Determinant.
pub fn det(m: &CMatrix) -> C64 {
    m.determinant()
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let nrm = norm(a);
    let mut s = 0i32;
    if nrm > 0.25 {
        s = (nrm / 0.25).log2().ceil() as i32;
    }
    let scaled = a / re(2f64.powi(s));
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=20 {
        term = &term * &scaled / re(k as f64);
        sum += &term;
        if norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Logarithm of a unipotent matrix (finite series in `m - I`).
pub fn log_unipotent(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let x = m - eye(n);
    let mut power = x.clone();
    let mut sum = CMatrix::zeros(n, n);
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += &power * re(sign / k as f64);
        power = &power * &x;
    }
    sum
}

/// Factors of the Gauss decomposition `g = m·h·n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussFactors {
    /// Unit lower triangular factor.
    pub m: CMatrix,
    /// Diagonal factor.
    pub h: CMatrix,
    /// Unit upper triangular factor.
    pub n: CMatrix,
}

impl GaussFactors {
    /// Product `m·h·n`.
    pub fn product(&self) -> CMatrix {
        &self.m * &self.h * &self.n
    }
}

/// Doolittle elimination without pivoting: `g = m·h·n` with `m` unit lower,
/// `h` diagonal and `n` unit upper triangular.
///
/// A pivot whose modulus is at most `1e-9·‖g‖` marks the boundary of the open
/// cell `N₋·T·N` and is reported as `NotInOpenCell`.
pub fn gauss_decompose(g: &CMatrix) -> Result<GaussFactors> {
    let n = g.nrows();
    let scale = norm(g);
    if !is_finite(g) {
        return Err(Error::InvariantViolation("non-finite matrix".into()));
    }
    let mut lower = eye(n);
    let mut upper = g.clone();
    for k in 0..n {
        let pivot = upper[(k, k)];
        if pivot.norm() <= PIVOT_TOL * scale {
            return Err(Error::NotInOpenCell { index: k, modulus: pivot.norm() });
        }
        for i in (k + 1)..n {
            let factor = upper[(i, k)] / pivot;
            lower[(i, k)] = factor;
            for j in k..n {
                let v = upper[(k, j)];
                upper[(i, j)] -= factor * v;
            }
        }
    }
    let h = diag_part(&upper);
    let mut unit_upper = upper.clone();
    for i in 0..n {
        let p = upper[(i, i)];
        for j in 0..n {
            unit_upper[(i, j)] = if j < i { re(0.0) } else { upper[(i, j)] / p };
        }
    }
    Ok(GaussFactors { m: lower, h, n: unit_upper })
}

/// Reversed anti-diagonal permutation matrix.
fn flip(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { re(1.0) } else { re(0.0) })
}

/// Opposite Gauss decomposition `g = n·h·m` with `n` unit upper, `h`
/// diagonal and `m` unit lower triangular. Returned in a [`GaussFactors`]
/// whose `m` field is the unit lower factor and `n` field the unit upper one,
/// so that `g = n·h·m`.
pub fn opposite_gauss_decompose(g: &CMatrix) -> Result<GaussFactors> {
    let j = flip(g.nrows());
    let f = gauss_decompose(&(&j * g * &j))?;
    Ok(GaussFactors { m: &j * &f.n * &j, h: &j * &f.h * &j, n: &j * &f.m * &j })
}

/// Branch selection for [`torus_sqrt`].
#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    /// Principal square root of each diagonal entry.
    Principal,
    /// Root closest to a reference diagonal matrix (continuity hint).
    Near(CMatrix),
}

/// Square root of a diagonal determinant-one matrix.
///
/// Each entry gets the principal root, or the root nearest to the reference
/// under [`Branch::Near`]. The product of the chosen roots is `±1`; when it is
/// `-1` the sign of the single entry whose choice is least determined is
/// flipped so the result stays in the torus of `SL_n`.
pub fn torus_sqrt(t: &CMatrix, branch: &Branch) -> CMatrix {
    let n = t.nrows();
    let mut roots: Vec<C64> = Vec::with_capacity(n);
    let mut flip_cost: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        let r = t[(k, k)].sqrt();
        match branch {
            Branch::Principal => {
                roots.push(r);
                flip_cost.push(std::f64::consts::PI - t[(k, k)].arg().abs());
            }
            Branch::Near(reference) => {
                let target = reference[(k, k)];
                let (a, b) = ((r - target).norm(), (-r - target).norm());
                if a <= b {
                    roots.push(r);
                    flip_cost.push(b - a);
                } else {
                    roots.push(-r);
                    flip_cost.push(a - b);
                }
            }
        }
    }
    let prod: C64 = roots.iter().product();
    if (prod - re(-1.0)).norm() < (prod - re(1.0)).norm() {
        let mut best = n - 1;
        for k in 0..n {
            if flip_cost[k] < flip_cost[best] {
                best = k;
            }
        }
        roots[best] = -roots[best];
    }
    diag(&roots)
}

/// Central-difference Jacobian of a map between complex coordinate spaces.
///
/// `f` is assumed holomorphic, so real-step central differences give the
/// complex-linear Jacobian with `O(step²)` truncation error. Any failing
/// probe is reported as `DomainEscape`.
pub fn numeric_jacobian<F>(f: F, x: &[C64], step: f64) -> Result<CMatrix>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let dim_in = x.len();
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim_in);
    let mut probe = x.to_vec();
    let escape = |e: Error| Error::DomainEscape(e.to_string());
    for k in 0..dim_in {
        probe[k] = x[k] + re(step);
        let plus = f(&probe).map_err(escape)?;
        probe[k] = x[k] - re(step);
        let minus = f(&probe).map_err(escape)?;
        probe[k] = x[k];
        if plus.len() != minus.len() {
            return Err(Error::IndexMismatch { expected: plus.len(), found: minus.len() });
        }
        columns.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / re(2.0 * step)).collect());
    }
    let dim_out = if dim_in == 0 { f(x)?.len() } else { columns[0].len() };
    Ok(CMatrix::from_fn(dim_out, dim_in, |i, j| columns[j][i]))
}

/// Central-difference derivative at `t = 0` of a curve in a coordinate space.
pub fn curve_derivative<F>(f: F, step: f64) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    let escape = |e: Error| Error::DomainEscape(e.to_string());
    let plus = f(step).map_err(escape)?;
    let minus = f(-step).map_err(escape)?;
    Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / re(2.0 * step)).collect())
}

/// Central-difference derivative at `t = 0` of a matrix-valued curve.
pub fn matrix_curve_derivative<F>(f: F, step: f64) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let escape = |e: Error| Error::DomainEscape(e.to_string());
    let plus = f(step).map_err(escape)?;
    let minus = f(-step).map_err(escape)?;
    Ok((plus - minus) / re(2.0 * step))
}

/// Flatten a matrix row by row.
pub fn flatten(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * m.ncols());
    for i in 0..n {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Inverse of [`flatten`] for an `n×n` matrix.
pub fn unflatten(v: &[C64], n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between two complex vectors of equal length.
pub fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| re(a[i][j]))
    }

    #[test]
    fn gauss_identity() {
        let f = gauss_decompose(&eye(2)).unwrap();
        assert_eq!(f.m, eye(2));
        assert_eq!(f.h, eye(2));
        assert_eq!(f.n, eye(2));
    }

    #[test]
    fn gauss_small_example() {
        let f = gauss_decompose(&m2([[1.0, 1.0], [1.0, 2.0]])).unwrap();
        assert!(dist(&f.m, &m2([[1.0, 0.0], [1.0, 1.0]])) < 1e-14);
        assert!(dist(&f.h, &eye(2)) < 1e-14);
        assert!(dist(&f.n, &m2([[1.0, 1.0], [0.0, 1.0]])) < 1e-14);
    }

    #[test]
    fn gauss_rejects_weyl_element() {
        let err = gauss_decompose(&m2([[0.0, -1.0], [1.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::NotInOpenCell { index: 0, .. }));
    }

    #[test]
    fn opposite_gauss_reconstructs() {
        let g = m2([[3.0, 1.0], [2.0, 1.0]]);
        let f = opposite_gauss_decompose(&g).unwrap();
        assert!(dist(&(&f.n * &f.h * &f.m), &g) < 1e-13);
        assert!(lower_defect(&f.n) < 1e-15 && upper_defect(&f.m) < 1e-15);
    }

    #[test]
    fn torus_sqrt_examples() {
        assert_eq!(torus_sqrt(&eye(2), &Branch::Principal), eye(2));
        let s = torus_sqrt(&diag(&[re(4.0), re(0.25)]), &Branch::Principal);
        assert!(dist(&s, &diag(&[re(2.0), re(0.5)])) < 1e-15);
        let s = torus_sqrt(&diag(&[re(2.0), re(0.5)]), &Branch::Principal);
        assert!(dist(&s, &diag(&[re(2f64.sqrt()), re(0.5f64.sqrt())])) < 1e-15);
    }

    #[test]
    fn torus_sqrt_keeps_determinant_one() {
        for z in [C64::new(-1.0, 0.0), C64::new(-1.0, 0.1), C64::new(0.3, -2.0)] {
            let t = diag(&[z, z.inv()]);
            let s = torus_sqrt(&t, &Branch::Principal);
            assert!((det(&s) - re(1.0)).norm() < 1e-14);
            assert!(dist(&(&s * &s), &t) < 1e-14);
        }
    }

    #[test]
    fn torus_sqrt_follows_hint() {
        let t = diag(&[re(4.0), re(0.25)]);
        let s = torus_sqrt(&t, &Branch::Near(diag(&[re(-2.0), re(-0.5)])));
        assert!(dist(&s, &diag(&[re(-2.0), re(-0.5)])) < 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let id = numeric_jacobian(|x| Ok(x.to_vec()), &[re(0.3), re(-1.0)], JACOBIAN_STEP).unwrap();
        assert!(dist(&id, &eye(2)) < 1e-9);
        let sq = numeric_jacobian(|x| Ok(vec![x[0] * x[0]]), &[re(1.0)], JACOBIAN_STEP).unwrap();
        assert!((sq[(0, 0)] - re(2.0)).norm() < 1e-10);
    }

    #[test]
    fn jacobian_reports_domain_escape() {
        let err = numeric_jacobian(
            |x| if x[0].re > 0.0 { Ok(vec![x[0]]) } else { Err(Error::NotInCell("x".into())) },
            &[re(0.0)],
            JACOBIAN_STEP,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DomainEscape(_)));
    }

    #[test]
    fn jacobian_of_gauss_factor_matches_richardson_oracle() {
        let x = [re(1.0), re(1.0), re(1.0), re(2.0)];
        let f = |v: &[C64]| Ok(flatten(&gauss_decompose(&unflatten(v, 2))?.m));
        let j = numeric_jacobian(f, &x, JACOBIAN_STEP).unwrap();
        let coarse = numeric_jacobian(f, &x, 2e-7).unwrap();
        let fine = numeric_jacobian(f, &x, 1e-7).unwrap();
        let richardson = (&fine * re(4.0) - coarse) / re(3.0);
        assert!(dist(&j, &richardson) < 1e-5);
    }

    #[test]
    fn expm_and_log_are_inverse_on_unipotents() {
        let x = CMatrix::from_fn(3, 3, |i, j| if j > i { C64::new(0.3 * (i + j) as f64, 0.1) } else { re(0.0) });
        let u = expm(&x);
        assert!(dist(&log_unipotent(&u), &x) < 1e-13);
    }
}
