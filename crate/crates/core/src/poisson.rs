//! Bivector fields as antisymmetric coefficient matrices in a chart, and the
//! residual computations used to verify Poisson-geometric claims.
//!
//! Conventions:
//! * a bivector with coefficient matrix `P` is the tensor `Σ P^{ij} ∂_i ⊗ ∂_j`,
//!   so `{x_i, x_j} = P^{ij}`;
//! * the wedge of two vector fields is `X ∧ Y = X ⊗ Y − Y ⊗ X`;
//! * `π♯(α)^j = Σ_i α_i P^{ij}` (contraction in the first slot);
//! * Lie-algebraic r-matrices such as `Λ_st` are scaled by [`R_MATRIX_SCALE`].

use nalgebra::DVector;

use crate::charts::{borel_ambient_indices, borel_coordinate_tangent, borel_coords, borel_dim, Borel};
use crate::double::{DoubleElement, GammaElement};
use crate::error::{Error, Result};
use crate::lie::{pairing, standard_r_matrix, DualBorelBases, LieBasis};
use crate::linalg::{flatten, inv, numeric_jacobian, re, CMatrix, C64, JACOBIAN_STEP};

/// Scale applied to every wedge of Lie-algebra elements in an r-matrix:
/// `a ∧ b ↦ R_MATRIX_SCALE·(a ⊗ b − b ⊗ a)`.
pub const R_MATRIX_SCALE: f64 = 0.5;

/// Antisymmetric coefficient matrix of a bivector relative to a named chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    /// Chart identifier.
    pub chart: String,
    /// Coefficients `P^{ij}`; exactly antisymmetric.
    pub coeffs: CMatrix,
}

impl Bivector {
    /// Build from a square matrix, replacing it by its antisymmetric part.
    pub fn new(chart: impl Into<String>, m: CMatrix) -> Self {
        let coeffs = (&m - m.transpose()) / re(2.0);
        Self { chart: chart.into(), coeffs }
    }

    /// Zero bivector of dimension `d`.
    pub fn zeros(chart: impl Into<String>, d: usize) -> Self {
        Self { chart: chart.into(), coeffs: CMatrix::zeros(d, d) }
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Frobenius norm of the coefficients.
    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.coeffs)
    }

    /// `π♯(α)^j = Σ_i α_i P^{ij}`.
    pub fn sharp(&self, alpha: &[C64]) -> Vec<C64> {
        let d = self.dim();
        (0..d).map(|j| (0..d).map(|i| alpha[i] * self.coeffs[(i, j)]).sum()).collect()
    }

    /// Restriction to a subset of coordinates (valid for bivectors tangent to
    /// the submanifold cut out by the remaining coordinates).
    pub fn restrict(&self, chart: impl Into<String>, indices: &[usize]) -> Self {
        let k = indices.len();
        let m = CMatrix::from_fn(k, k, |a, b| self.coeffs[(indices[a], indices[b])]);
        Self { chart: chart.into(), coeffs: m }
    }

    /// Scaled copy.
    pub fn scaled(&self, s: f64) -> Self {
        Self { chart: self.chart.clone(), coeffs: &self.coeffs * re(s) }
    }
}

/// Coefficient matrix of `a ∧ b = a ⊗ b − b ⊗ a`.
pub fn wedge(a: &[C64], b: &[C64]) -> CMatrix {
    let d = a.len();
    CMatrix::from_fn(d, d, |i, j| a[i] * b[j] - b[i] * a[j])
}

/// Block-diagonal sum of bivectors (product Poisson structure).
pub fn block_sum(chart: impl Into<String>, parts: &[&Bivector]) -> Bivector {
    let d: usize = parts.iter().map(|p| p.dim()).sum();
    let mut m = CMatrix::zeros(d, d);
    let mut off = 0;
    for p in parts {
        let k = p.dim();
        m.view_mut((off, off), (k, k)).copy_from(&p.coeffs);
        off += k;
    }
    Bivector { chart: chart.into(), coeffs: m }
}

/// Embed a vector given on one block into the full coordinate vector.
pub fn place(v: &[C64], offset: usize, total: usize) -> Vec<C64> {
    let mut out = vec![re(0.0); total];
    out[offset..offset + v.len()].copy_from_slice(v);
    out
}

/// Standard Poisson structure `π_st = Λ_st^L − Λ_st^R` at `g` in the ambient
/// chart of matrix entries.
pub fn pi_st_at(g: &CMatrix) -> Bivector {
    let n = g.nrows();
    let mut m = CMatrix::zeros(n * n, n * n);
    for (em, ep) in standard_r_matrix(n) {
        let l = wedge(&flatten(&(g * &em)), &flatten(&(g * &ep)));
        let r = wedge(&flatten(&(&em * g)), &flatten(&(&ep * g)));
        m += (l - r) * re(R_MATRIX_SCALE);
    }
    Bivector { chart: "G".into(), coeffs: m }
}

/// `π_st` restricted to a Borel subgroup, in its Borel chart.
pub fn pi_st_borel(b: &CMatrix, kind: Borel) -> Bivector {
    let chart = match kind {
        Borel::Upper => "B",
        Borel::Lower => "B-",
    };
    pi_st_at(b).restrict(chart, &borel_ambient_indices(b.nrows(), kind))
}

/// Mixed product `(π_Y, π_Z) − Σ (ρ(ξ^i), 0) ∧ (0, λ(x_i))`.
pub fn mixed_product(pi_y: &Bivector, pi_z: &Bivector, rho_vecs: &[Vec<C64>], lambda_vecs: &[Vec<C64>]) -> Result<Bivector> {
    if rho_vecs.len() != lambda_vecs.len() {
        return Err(Error::IndexMismatch { expected: rho_vecs.len(), found: lambda_vecs.len() });
    }
    let (dy, dz) = (pi_y.dim(), pi_z.dim());
    let mut out = block_sum(format!("{}x{}", pi_y.chart, pi_z.chart), &[pi_y, pi_z]);
    for (r, l) in rho_vecs.iter().zip(lambda_vecs) {
        if r.len() != dy {
            return Err(Error::IndexMismatch { expected: dy, found: r.len() });
        }
        if l.len() != dz {
            return Err(Error::IndexMismatch { expected: dz, found: l.len() });
        }
        out.coeffs -= wedge(&place(r, 0, dy + dz), &place(l, dy, dy + dz));
    }
    Ok(out)
}

/// `π_Γ` at `γ` in the `p_L` chart `(b, u)` (B coordinates then B₋ coordinates):
/// `(π_G, π_{G*}) − Σ (x_i^L, 0) ∧ (0, (ξ^i)^R)` with `π_G = π_st|_B` and
/// `π_{G*} = −π_st|_{B₋}`.
pub fn pi_gamma_at(gamma: &GammaElement) -> Bivector {
    let n = gamma.b.nrows();
    let bases = DualBorelBases::new(n);
    let pi_g = pi_st_borel(&gamma.b, Borel::Upper);
    let pi_gs = pi_st_borel(&gamma.u, Borel::Lower).scaled(-1.0);
    let rho: Vec<Vec<C64>> = bases.x_basis.iter().map(|x| borel_coords(&(&gamma.b * x), Borel::Upper)).collect();
    let lam: Vec<Vec<C64>> = bases.xi_basis.iter().map(|xi| borel_coords(&(xi * &gamma.u), Borel::Lower)).collect();
    let mut p = mixed_product(&pi_g, &pi_gs, &rho, &lam).expect("aligned bases");
    p.chart = "Gamma:pL".into();
    p
}

/// `π_Γ` at `γ` in the `p_R` chart `(u', b')` (B₋ coordinates then B coordinates):
/// `(−π_{G*}, −π_G) + Σ ((ξ^i)^L, 0) ∧ (0, x_i^R)`, so that the target maps
/// are anti-Poisson.
pub fn pi_gamma_pr_at(gamma: &GammaElement) -> Bivector {
    let n = gamma.b.nrows();
    let bases = DualBorelBases::new(n);
    let pi_gs = pi_st_borel(&gamma.u_prime, Borel::Lower).scaled(-1.0);
    let pi_g = pi_st_borel(&gamma.b_prime, Borel::Upper);
    let rho: Vec<Vec<C64>> = bases.xi_basis.iter().map(|xi| borel_coords(&(&gamma.u_prime * xi), Borel::Lower)).collect();
    let lam: Vec<Vec<C64>> = bases.x_basis.iter().map(|x| borel_coords(&(x * &gamma.b_prime), Borel::Upper)).collect();
    let mut p = mixed_product(&pi_gs, &pi_g, &rho, &lam).expect("aligned bases").scaled(-1.0);
    p.chart = "Gamma:pR".into();
    p
}

/// Ambient coordinates of a tangent vector `(X, t)` of `D = G × T`.
fn double_tangent(x: &CMatrix, t: &CMatrix) -> Vec<C64> {
    let mut v = flatten(x);
    v.extend((0..t.nrows()).map(|k| t[(k, k)]));
    v
}

/// `π⁺_D = Λ^R + Λ^L` at `d ∈ D` in the ambient chart (`n²` entries of the
/// `G`-component followed by the `n` diagonal entries of the torus component),
/// with `Λ = Σ ξ̄̄^i ∧ x̄_i` summed over the full dual bases of `(𝔟, 𝔟₋)`.
pub fn pi_plus_d_at(d: &DoubleElement) -> Bivector {
    let n = d.g.nrows();
    let bases = DualBorelBases::new(n);
    let dim = n * n + n;
    let mut m = CMatrix::zeros(dim, dim);
    for (x, xi) in bases.x_basis.iter().zip(&bases.xi_basis) {
        let x_t = crate::linalg::diag_part(x);
        let xi_t = -crate::linalg::diag_part(xi);
        let xl = double_tangent(&(&d.g * x), &(&d.t * &x_t));
        let xil = double_tangent(&(&d.g * xi), &(&d.t * &xi_t));
        let xr = double_tangent(&(x * &d.g), &(&x_t * &d.t));
        let xir = double_tangent(&(xi * &d.g), &(&xi_t * &d.t));
        m += (wedge(&xil, &xl) + wedge(&xir, &xr)) * re(R_MATRIX_SCALE);
    }
    Bivector { chart: "D".into(), coeffs: m }
}

/// Push a bivector forward along a chart map: `J·P·Jᵀ` with `J` the
/// central-difference Jacobian at `x`.
pub fn pushforward<F>(f: F, x: &[C64], b: &Bivector, chart: impl Into<String>) -> Result<Bivector>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let j = numeric_jacobian(f, x, JACOBIAN_STEP)?;
    if j.ncols() != b.dim() {
        return Err(Error::IndexMismatch { expected: b.dim(), found: j.ncols() });
    }
    Ok(pushforward_with_jacobian(&j, b, chart))
}

/// `J·P·Jᵀ` for a given Jacobian.
pub fn pushforward_with_jacobian(j: &CMatrix, b: &Bivector, chart: impl Into<String>) -> Bivector {
    Bivector::new(chart, j * &b.coeffs * j.transpose())
}

/// `‖f_*π_src − sign·π_dst‖ / (1 + ‖π_dst‖)`.
pub fn poisson_map_residual<F>(f: F, src_point: &[C64], src_pi: &Bivector, dst_pi: &Bivector, sign: f64) -> Result<f64>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let pushed = pushforward(f, src_point, src_pi, dst_pi.chart.clone())?;
    Ok(bivector_residual(&pushed, dst_pi, sign))
}

/// `‖a − sign·b‖ / (1 + ‖b‖)`.
pub fn bivector_residual(a: &Bivector, b: &Bivector, sign: f64) -> f64 {
    crate::linalg::norm(&(&a.coeffs - &b.coeffs * re(sign))) / (1.0 + b.norm())
}

/// Singular values and right singular vectors of a complex matrix.
fn svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let s = m.clone().svd(false, true);
    let v_t = s.v_t.expect("requested V^T");
    (s.singular_values.iter().copied().collect(), v_t)
}

/// Orthonormal basis (Hermitian) of the column span of `t`, which must have
/// full column rank (`σ_min ≥ 1e-8`).
fn column_basis(t: &CMatrix) -> Result<CMatrix> {
    let s = t.clone().svd(true, false);
    let smin = s.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < 1e-8 {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    Ok(s.u.expect("requested U").columns(0, t.ncols()).into_owned())
}

/// Basis of covectors annihilating the columns of `t` under the bilinear
/// pairing `ν(v) = Σ ν_i v_i` (rows of the returned matrix).
fn conormal_basis(t: &CMatrix) -> Result<CMatrix> {
    let tt = t.transpose();
    let (sv, v_t) = svd(&tt);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < 1e-8 {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    let d = t.nrows();
    let k = t.ncols();
    // Rows of V^H beyond the rank span the Hermitian null space of tᵀ; take
    // their complex conjugates to turn them into bilinear null vectors.
    let full = if v_t.nrows() < d {
        let (_, vfull) = svd(&{
            let mut padded = CMatrix::zeros(d, d);
            padded.view_mut((0, 0), (k, d)).copy_from(&tt);
            padded
        });
        vfull
    } else {
        v_t
    };
    let rows = d - k;
    Ok(CMatrix::from_fn(rows, d, |r, c| full[(k + r, c)].conj()))
}

/// Component of `v` orthogonal (Hermitian) to the span of the orthonormal
/// columns of `q`.
fn orthogonal_component(q: &CMatrix, v: &[C64]) -> DVector<C64> {
    let v = DVector::from_column_slice(v);
    let proj = q * (q.adjoint() * &v);
    v - proj
}

/// Coisotropy residual of the image of `graph_param` at `point` for the
/// ambient bivector `ambient_pi` (given at the image point):
/// `max_ν ‖(π♯ν)^⊥‖ / ‖π♯ν‖` over a basis of the conormal space.
pub fn coisotropy_residual<F>(graph_param: F, point: &[C64], ambient_pi: &Bivector) -> Result<f64>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let t = numeric_jacobian(graph_param, point, JACOBIAN_STEP)?;
    coisotropy_residual_with_tangent(&t, ambient_pi)
}

/// [`coisotropy_residual`] with a precomputed tangent frame (columns).
pub fn coisotropy_residual_with_tangent(t: &CMatrix, ambient_pi: &Bivector) -> Result<f64> {
    let q = column_basis(t)?;
    let conormal = conormal_basis(t)?;
    let mut worst: f64 = 0.0;
    for r in 0..conormal.nrows() {
        let nu: Vec<C64> = conormal.row(r).iter().copied().collect();
        let v = ambient_pi.sharp(&nu);
        let vn = crate::linalg::vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        let perp = orthogonal_component(&q, &v);
        worst = worst.max(perp.norm() / vn);
    }
    Ok(worst)
}

/// Tangency residual of a Poisson-submanifold claim: the largest relative
/// normal component of `π♯` applied to every coordinate covector, scaled by
/// `‖π‖`.
pub fn tangency_residual(t: &CMatrix, ambient_pi: &Bivector) -> Result<f64> {
    let q = column_basis(t)?;
    let d = ambient_pi.dim();
    let scale = 1.0 + ambient_pi.norm();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let mut e = vec![re(0.0); d];
        e[k] = re(1.0);
        let v = ambient_pi.sharp(&e);
        worst = worst.max(orthogonal_component(&q, &v).norm() / scale);
    }
    Ok(worst)
}

/// Finite-difference Schouten bracket `[π, π]` at `point`, maximal modulus of
/// the cyclic sum `Σ_l (P^{li}∂_l P^{jk} + P^{lj}∂_l P^{ki} + P^{lk}∂_l P^{ij})`,
/// normalized by `‖π‖² + 1`. Derivatives use step `1e-5` and one Richardson
/// extrapolation.
pub fn jacobi_residual<F>(pi_field: F, point: &[C64]) -> Result<f64>
where
    F: Fn(&[C64]) -> Result<Bivector>,
{
    let p0 = pi_field(point)?;
    let d = p0.dim();
    let h = 1e-5;
    let derivative = |l: usize, step: f64| -> Result<CMatrix> {
        let mut xp = point.to_vec();
        let mut xm = point.to_vec();
        xp[l] += re(step);
        xm[l] -= re(step);
        let fp = pi_field(&xp).map_err(|e| Error::DomainEscape(e.to_string()))?;
        let fm = pi_field(&xm).map_err(|e| Error::DomainEscape(e.to_string()))?;
        Ok((fp.coeffs - fm.coeffs) / re(2.0 * step))
    };
    let mut dp: Vec<CMatrix> = Vec::with_capacity(d);
    for l in 0..d {
        let coarse = derivative(l, h)?;
        let fine = derivative(l, h / 2.0)?;
        dp.push((fine * re(4.0) - coarse) / re(3.0));
    }
    let p = &p0.coeffs;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                let mut s = re(0.0);
                for l in 0..d {
                    s += p[(l, i)] * dp[l][(j, k)] + p[(l, j)] * dp[l][(k, i)] + p[(l, k)] * dp[l][(i, j)];
                }
                worst = worst.max(s.norm());
            }
        }
    }
    Ok(worst / (p0.norm().powi(2) + 1.0))
}

/// Which invariant 1-form a dressing field pulls back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariance {
    /// Left-invariant form `ξ^L(v) = ⟨g⁻¹v, ξ⟩` on `B` (`ξ ∈ 𝔟₋`).
    LeftOnB,
    /// Right-invariant form `x^R(v) = ⟨x, v u⁻¹⟩` on `B₋` (`x ∈ 𝔟`).
    RightOnBminus,
}

/// Pullback `μ*α` of an invariant 1-form on a Borel subgroup along a moment
/// map `μ` given as a chart map into Borel coordinates.
pub fn pullback_invariant_form<F>(mu: F, point: &[C64], element: &CMatrix, kind: Invariance) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let n = element.nrows();
    let (borel, ) = match kind {
        Invariance::LeftOnB => (Borel::Upper,),
        Invariance::RightOnBminus => (Borel::Lower,),
    };
    let base_coords = mu(point)?;
    let g = crate::charts::borel_from_coords(&base_coords, n, borel)?;
    let g_inv = inv(&g)?;
    let form: Vec<C64> = (0..borel_dim(n))
        .map(|k| {
            let t = borel_coordinate_tangent(&g, borel, k);
            match kind {
                Invariance::LeftOnB => pairing(&(&g_inv * &t), element),
                Invariance::RightOnBminus => pairing(element, &(&t * &g_inv)),
            }
        })
        .collect();
    let j = numeric_jacobian(mu, point, JACOBIAN_STEP)?;
    Ok((0..j.ncols()).map(|c| (0..j.nrows()).map(|r| form[r] * j[(r, c)]).sum()).collect())
}

/// Dressing vector field `π♯(μ*ξ^L)` (or `π♯(μ*x^R)`) at `point`.
pub fn dressing_field<F>(mu: F, pi: &Bivector, element: &CMatrix, kind: Invariance, point: &[C64]) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let alpha = pullback_invariant_form(mu, point, element, kind)?;
    Ok(pi.sharp(&alpha))
}

/// Positive roots of `sl_n` in the fixed order (convenience re-export).
pub fn positive_roots(n: usize) -> Vec<(usize, usize)> {
    LieBasis::new(n).pos_roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::borel_from_coords;
    use crate::double::{dress, gamma_lower, p_map};
    use crate::linalg::{eye, expm, Branch};

    fn upper3() -> CMatrix {
        CMatrix::from_row_slice(3, 3, &[re(1.2), C64::new(0.3, 0.1), re(-0.4), re(0.0), re(0.9), re(0.5), re(0.0), re(0.0), re(1.0 / 1.08)])
    }

    fn lower3() -> CMatrix {
        upper3().transpose() * re(1.0)
    }

    #[test]
    fn pi_st_vanishes_on_torus() {
        assert!(pi_st_at(&eye(3)).norm() < 1e-15);
        let t = crate::linalg::diag(&[re(2.0), C64::new(0.0, 1.0), C64::new(0.0, -0.5)]);
        assert!(pi_st_at(&t).norm() < 1e-14);
    }

    #[test]
    fn pi_st_bracket_expansion_sl2() {
        // {x12, x11} at g = [[1,1],[0,1]] from an independent expansion:
        // Λ^L − Λ^R with Λ = s(E21⊗E12 − E12⊗E21) evaluated on dx12 ⊗ dx11.
        let g = CMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(0.0), re(1.0)]);
        let p = pi_st_at(&g);
        let e12 = crate::linalg::elementary(2, 0, 1);
        let e21 = crate::linalg::elementary(2, 1, 0);
        let comp = |m: &CMatrix, i: usize, j: usize| m[(i, j)];
        let l1 = &g * &e21;
        let l2 = &g * &e12;
        let r1 = &e21 * &g;
        let r2 = &e12 * &g;
        let value = (comp(&l1, 0, 1) * comp(&l2, 0, 0) - comp(&l2, 0, 1) * comp(&l1, 0, 0))
            - (comp(&r1, 0, 1) * comp(&r2, 0, 0) - comp(&r2, 0, 1) * comp(&r1, 0, 0));
        assert!((p.coeffs[(1, 0)] - value * re(R_MATRIX_SCALE)).norm() < 1e-14);
        assert!(p.norm() > 0.1);
    }

    #[test]
    fn dressing_field_matches_dressing_on_b() {
        let bases = DualBorelBases::new(3);
        let b = upper3();
        let x0 = borel_coords(&b, Borel::Upper);
        let pi = pi_st_borel(&b, Borel::Upper);
        for xi in &bases.xi_basis {
            let field = dressing_field(|v| Ok(v.to_vec()), &pi, xi, Invariance::LeftOnB, &x0).unwrap();
            let path = |t: f64| {
                let (_, bp) = dress(&b, &expm(&(xi * re(t))), &Branch::Principal).unwrap();
                borel_coords(&bp, Borel::Upper)
            };
            let h = 1e-6;
            let fd: Vec<C64> = path(h).iter().zip(path(-h)).map(|(a, b)| (a - b) / re(2.0 * h)).collect();
            assert!(crate::linalg::vec_dist(&field, &fd) < 1e-6, "{field:?} vs {fd:?}");
        }
    }

    #[test]
    fn dressing_field_matches_dressing_on_bminus() {
        let bases = DualBorelBases::new(3);
        let u = lower3();
        let x0 = borel_coords(&u, Borel::Lower);
        let pi = pi_st_borel(&u, Borel::Lower).scaled(-1.0);
        for x in &bases.x_basis {
            let field = dressing_field(|v| Ok(v.to_vec()), &pi, x, Invariance::RightOnBminus, &x0).unwrap();
            let field: Vec<C64> = field.iter().map(|z| -z).collect();
            let path = |t: f64| {
                let (up, _) = dress(&expm(&(x * re(t))), &u, &Branch::Principal).unwrap();
                borel_coords(&up, Borel::Lower)
            };
            let h = 1e-6;
            let fd: Vec<C64> = path(h).iter().zip(path(-h)).map(|(a, b)| (a - b) / re(2.0 * h)).collect();
            assert!(crate::linalg::vec_dist(&field, &fd) < 1e-6, "{field:?} vs {fd:?}");
        }
    }

    #[test]
    fn p_pushforward_is_pi_plus_d() {
        let b = upper3();
        let u = lower3();
        let g = gamma_lower(&b, &u).unwrap();
        let n = 3;
        let db = borel_dim(n);
        let mut x = borel_coords(&b, Borel::Upper);
        x.extend(borel_coords(&u, Borel::Lower));
        let f = |v: &[C64]| {
            let bb = borel_from_coords(&v[..db], n, Borel::Upper)?;
            let uu = borel_from_coords(&v[db..], n, Borel::Lower)?;
            let d = p_map(&crate::double::GammaElement { b: bb, u: uu.clone(), u_prime: uu, b_prime: eye(n) });
            let mut out = flatten(&d.g);
            out.extend((0..n).map(|k| d.t[(k, k)]));
            Ok(out)
        };
        let pushed = pushforward(f, &x, &pi_gamma_at(&g), "D").unwrap();
        let target = pi_plus_d_at(&p_map(&g));
        let r = bivector_residual(&pushed, &target, 1.0);
        assert!(r < 1e-8, "residual {r}");
    }

    #[test]
    fn chart_change_to_p_r_preserves_pi_gamma() {
        let (b, u) = (upper3(), lower3());
        let g = gamma_lower(&b, &u).unwrap();
        let n = 3;
        let db = borel_dim(n);
        let mut x = borel_coords(&b, Borel::Upper);
        x.extend(borel_coords(&u, Borel::Lower));
        let f = |v: &[C64]| {
            let bb = borel_from_coords(&v[..db], n, Borel::Upper)?;
            let uu = borel_from_coords(&v[db..], n, Borel::Lower)?;
            let (up, bp) = dress(&bb, &uu, &Branch::Near(g.b_prime.clone()))?;
            let mut out = borel_coords(&up, Borel::Lower);
            out.extend(borel_coords(&bp, Borel::Upper));
            Ok(out)
        };
        let pushed = pushforward(f, &x, &pi_gamma_at(&g), "Gamma:pR").unwrap();
        let r = bivector_residual(&pushed, &pi_gamma_pr_at(&g), 1.0);
        assert!(r < 1e-8, "residual {r}");
    }

    #[test]
    fn group_multiplication_graph_is_coisotropic() {
        let par = |v: &[C64]| CMatrix::from_row_slice(2, 2, &[v[0], v[1], v[2], (re(1.0) + v[1] * v[2]) / v[0]]);
        let p = vec![re(1.3), C64::new(0.2, -0.4), re(0.7), C64::new(0.8, 0.3), re(-0.5), C64::new(0.1, 0.9)];
        let graph = |v: &[C64]| -> Result<Vec<C64>> {
            let (a, b) = (par(&v[..3]), par(&v[3..]));
            let mut o = flatten(&a);
            o.extend(flatten(&b));
            o.extend(flatten(&(&a * &b)));
            Ok(o)
        };
        let (a, b) = (par(&p[..3]), par(&p[3..]));
        let ab = &a * &b;
        let good = block_sum("G^3", &[&pi_st_at(&a), &pi_st_at(&b), &pi_st_at(&ab).scaled(-1.0)]);
        let bad = block_sum("G^3", &[&pi_st_at(&a), &pi_st_at(&b), &pi_st_at(&ab)]);
        assert!(coisotropy_residual(graph, &p, &good).unwrap() < 1e-8);
        assert!(coisotropy_residual(graph, &p, &bad).unwrap() > 1e-2);
    }
}
