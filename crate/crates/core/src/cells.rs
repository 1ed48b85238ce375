//! Bruhat cells `C_ū = Nū ∩ ūN₋`, their charts, the factorizations
//! `BuB ≅ C_ū × B` and `B₋uB₋ ≅ B₋ × C_ū`, cell tuples with their Borel
//! actions and cocycles, and the bivectors `π_n`, `π'_{−n}`, `π̃_{±n}` in cell
//! coordinates.

use crate::charts::{borel_coords, borel_dim, Borel};
use crate::error::{Error, Result};
use crate::lie::{weyl_representative, DualBorelBases, LieBasis, WeylWord};
use crate::linalg::{
    curve_derivative, expm, eye, flatten, gauss_decompose, inv, log_unipotent, matrix_curve_derivative, norm, re, unflatten,
    CMatrix, C64, JACOBIAN_STEP,
};
use crate::poisson::{block_sum, mixed_product, pi_st_at, pi_st_borel, pushforward, Bivector};

/// Relative tolerance of cell membership tests.
pub const CELL_TOL: f64 = 1e-8;

/// Chart `t ↦ exp(Σ t_k E_{α_k})·w̄` of a Bruhat cell, with `α_k` running
/// over the inversion roots of `w` in the fixed positive-root order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellChart {
    /// Word of the Weyl group element.
    pub word: WeylWord,
    /// Rank parameter (`SL_n`).
    pub n: usize,
    /// Representative `w̄`.
    pub rep: CMatrix,
    rep_inv: CMatrix,
    /// Positive roots `α` with `w⁻¹α < 0`, as index pairs `(i, j)`, `i < j`.
    pub inversion_roots: Vec<(usize, usize)>,
}

impl CellChart {
    /// Chart for the standard representative of `word`.
    pub fn new(word: WeylWord, n: usize) -> Self {
        let rep = weyl_representative(&word, n);
        Self::with_representative(word, n, rep).expect("standard representatives are invertible")
    }

    /// Chart for an arbitrary representative of the same Weyl group element.
    pub fn with_representative(word: WeylWord, n: usize, rep: CMatrix) -> Result<Self> {
        let rep_inv = inv(&rep)?;
        let inversion_roots = LieBasis::new(n)
            .pos_roots
            .into_iter()
            .filter(|&(i, j)| {
                let conj = &rep_inv * crate::linalg::elementary(n, i, j) * &rep;
                (0..n).any(|r| (0..r).any(|c| conj[(r, c)].norm() > 0.5))
            })
            .collect();
        Ok(Self { word, n, rep, rep_inv, inversion_roots })
    }

    /// Chart for a single simple reflection.
    pub fn simple(letter: usize, n: usize) -> Result<Self> {
        Ok(Self::new(WeylWord::simple(letter, n)?, n))
    }

    /// Cell dimension `l(w)`.
    pub fn dim(&self) -> usize {
        self.inversion_roots.len()
    }

    /// Cell point with coordinates `t`.
    pub fn param(&self, t: &[C64]) -> Result<CMatrix> {
        if t.len() != self.dim() {
            return Err(Error::IndexMismatch { expected: self.dim(), found: t.len() });
        }
        let mut a = CMatrix::zeros(self.n, self.n);
        for (&(i, j), z) in self.inversion_roots.iter().zip(t) {
            a[(i, j)] = *z;
        }
        Ok(expm(&a) * &self.rep)
    }

    /// Defect of `c` from `C_w̄`: distance of `c·w̄⁻¹` from the unipotent group
    /// generated by the inversion roots plus distance of `w̄⁻¹·c` from `N₋`.
    pub fn membership_residual(&self, c: &CMatrix) -> f64 {
        let m = c * &self.rep_inv;
        let l = &self.rep_inv * c;
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want_zero_m = i > j || (i < j && !self.inversion_roots.contains(&(i, j)));
                if i == j {
                    d += (m[(i, i)] - re(1.0)).norm() + (l[(i, i)] - re(1.0)).norm();
                } else {
                    if want_zero_m {
                        d += m[(i, j)].norm();
                    }
                    if i < j {
                        d += l[(i, j)].norm();
                    }
                }
            }
        }
        d / (1.0 + norm(c))
    }

    /// Coordinates of a cell point (entries of `log(c·w̄⁻¹)` at the inversion roots).
    pub fn coords(&self, c: &CMatrix) -> Result<Vec<C64>> {
        let r = self.membership_residual(c);
        if r > CELL_TOL {
            return Err(Error::NotInCell(format!("membership defect {r:.3e}")));
        }
        Ok(self.coords_unchecked(c))
    }

    fn coords_unchecked(&self, c: &CMatrix) -> Vec<C64> {
        let l = log_unipotent(&(c * &self.rep_inv));
        self.inversion_roots.iter().map(|&(i, j)| l[(i, j)]).collect()
    }

    /// `g = c·b` with `c ∈ C_w̄` and `b ∈ B`.
    ///
    /// With `w̄⁻¹g = m·h·n` (Gauss), `c = w̄·m` and `b = h·n`; the result is
    /// accepted when `c·w̄⁻¹` lies in the inversion-root unipotent group.
    pub fn factor_bub(&self, g: &CMatrix) -> Result<(CMatrix, CMatrix)> {
        self.factor_bub_with(g, true)
    }

    /// [`Self::factor_bub`]; with `strict = false` the membership test is
    /// skipped, which extends the factorization smoothly to a neighbourhood
    /// of `BuB` in `GL_n` (used for chart maps that are differentiated).
    pub fn factor_bub_with(&self, g: &CMatrix, strict: bool) -> Result<(CMatrix, CMatrix)> {
        let f = gauss_decompose(&(&self.rep_inv * g)).map_err(|e| Error::NotInCell(e.to_string()))?;
        let c = &self.rep * &f.m;
        let b = &f.h * &f.n;
        let r = if strict { self.membership_residual(&c) } else { 0.0 };
        if r > CELL_TOL {
            return Err(Error::NotInCell(format!("factor outside the cell (defect {r:.3e})")));
        }
        Ok((c, b))
    }

    /// `g = b₋·c` with `b₋ ∈ B₋` and `c ∈ C_w̄`.
    ///
    /// With `g·w̄⁻¹ = m·h·n` (Gauss), `b₋ = m·h` and `c = n·w̄`.
    pub fn factor_bminus_ubminus(&self, g: &CMatrix) -> Result<(CMatrix, CMatrix)> {
        self.factor_bminus_ubminus_with(g, true)
    }

    /// [`Self::factor_bminus_ubminus`] with an optional membership test.
    pub fn factor_bminus_ubminus_with(&self, g: &CMatrix, strict: bool) -> Result<(CMatrix, CMatrix)> {
        let f = gauss_decompose(&(g * &self.rep_inv)).map_err(|e| Error::NotInCell(e.to_string()))?;
        let bm = &f.m * &f.h;
        let c = &f.n * &self.rep;
        let r = if strict { self.membership_residual(&c) } else { 0.0 };
        if r > CELL_TOL {
            return Err(Error::NotInCell(format!("factor outside the cell (defect {r:.3e})")));
        }
        Ok((bm, c))
    }
}

/// Tuple `(c_1, …, c_k)` of cell points; `c̲ = c_1⋯c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTuple {
    /// Factors, factor `i` in the `i`-th cell.
    pub factors: Vec<CMatrix>,
}

impl CellTuple {
    /// Ordered product `c̲`.
    pub fn product(&self) -> CMatrix {
        let n = self.factors.first().map_or(0, |f| f.nrows());
        self.factors.iter().fold(eye(n), |acc, f| acc * f)
    }

    /// Sum of factorwise distances.
    pub fn dist(&self, other: &Self) -> f64 {
        self.factors.iter().zip(&other.factors).map(|(a, b)| crate::linalg::dist(a, b)).sum()
    }

    /// Concatenation `(c, c')`.
    pub fn concat(&self, other: &Self) -> Self {
        Self { factors: self.factors.iter().chain(&other.factors).cloned().collect() }
    }

    /// Ambient coordinates (all matrix entries of all factors).
    pub fn ambient(&self) -> Vec<C64> {
        self.factors.iter().flat_map(flatten).collect()
    }
}

/// Product chart `C_ū = C_{ū_1} × ⋯ × C_{ū_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleChart {
    /// Rank parameter (`SL_n`).
    pub n: usize,
    /// One chart per factor.
    pub charts: Vec<CellChart>,
}

impl TupleChart {
    /// One simple-reflection factor per letter of `word`.
    pub fn from_word(word: &WeylWord, n: usize) -> Result<Self> {
        let charts = word.letters.iter().map(|&l| CellChart::simple(l, n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, charts })
    }

    /// Concatenated chart for `(ū, v̄)`.
    pub fn concat(&self, other: &Self) -> Self {
        Self { n: self.n, charts: self.charts.iter().chain(&other.charts).cloned().collect() }
    }

    /// Number of factors.
    pub fn len(&self) -> usize {
        self.charts.len()
    }

    /// True when there are no factors.
    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.charts.iter().map(CellChart::dim).sum()
    }

    /// Tuple with the given concatenated coordinates.
    pub fn param(&self, t: &[C64]) -> Result<CellTuple> {
        if t.len() != self.dim() {
            return Err(Error::IndexMismatch { expected: self.dim(), found: t.len() });
        }
        let mut off = 0;
        let mut factors = Vec::with_capacity(self.len());
        for ch in &self.charts {
            factors.push(ch.param(&t[off..off + ch.dim()])?);
            off += ch.dim();
        }
        Ok(CellTuple { factors })
    }

    /// Concatenated coordinates of a tuple.
    pub fn coords(&self, c: &CellTuple) -> Result<Vec<C64>> {
        if c.factors.len() != self.len() {
            return Err(Error::IndexMismatch { expected: self.len(), found: c.factors.len() });
        }
        let mut out = Vec::with_capacity(self.dim());
        for (ch, f) in self.charts.iter().zip(&c.factors) {
            out.extend(ch.coords(f)?);
        }
        Ok(out)
    }

    /// Coordinates without the membership test (smooth extension off the cell).
    pub fn coords_extended(&self, c: &CellTuple) -> Vec<C64> {
        self.charts.iter().zip(&c.factors).flat_map(|(ch, f)| ch.coords_unchecked(f)).collect()
    }

    /// Largest factorwise membership defect.
    pub fn membership_residual(&self, c: &CellTuple) -> f64 {
        self.charts.iter().zip(&c.factors).map(|(ch, f)| ch.membership_residual(f)).fold(0.0, f64::max)
    }

    /// Left-to-right sweep: `b·g_1 = c_1·b_1`, `b_1·g_2 = c_2·b_2`, …;
    /// returns `((c_i), b_k)`.
    pub fn sweep_left(&self, b: &CMatrix, gs: &[CMatrix]) -> Result<(CellTuple, CMatrix)> {
        self.sweep_left_with(b, gs, true)
    }

    fn sweep_left_with(&self, b: &CMatrix, gs: &[CMatrix], strict: bool) -> Result<(CellTuple, CMatrix)> {
        if gs.len() != self.len() {
            return Err(Error::IndexMismatch { expected: self.len(), found: gs.len() });
        }
        let mut carry = b.clone();
        let mut factors = Vec::with_capacity(gs.len());
        for (ch, g) in self.charts.iter().zip(gs) {
            let (c, nb) = ch.factor_bub_with(&(&carry * g), strict)?;
            factors.push(c);
            carry = nb;
        }
        Ok((CellTuple { factors }, carry))
    }

    /// Right-to-left sweep: `g_k·b₋ = b₋^{(k)}·c_k`, `g_{k−1}·b₋^{(k)} = …`;
    /// returns `(b₋^{(1)}, (c_i))`.
    pub fn sweep_right(&self, gs: &[CMatrix], bm: &CMatrix) -> Result<(CMatrix, CellTuple)> {
        self.sweep_right_with(gs, bm, true)
    }

    fn sweep_right_with(&self, gs: &[CMatrix], bm: &CMatrix, strict: bool) -> Result<(CMatrix, CellTuple)> {
        if gs.len() != self.len() {
            return Err(Error::IndexMismatch { expected: self.len(), found: gs.len() });
        }
        let mut carry = bm.clone();
        let mut factors = vec![CMatrix::zeros(0, 0); gs.len()];
        for (k, (ch, g)) in self.charts.iter().zip(gs).enumerate().rev() {
            let (nb, c) = ch.factor_bminus_ubminus_with(&(g * &carry), strict)?;
            factors[k] = c;
            carry = nb;
        }
        Ok((carry, CellTuple { factors }))
    }

    /// `b·c̲ = b[c]̲·b_ū(b, c)`; returns `(b[c], b_ū(b, c))`.
    pub fn act_b(&self, b: &CMatrix, c: &CellTuple) -> Result<(CellTuple, CMatrix)> {
        self.sweep_left(b, &c.factors)
    }

    /// `c̲·b₋ = b_{−ū}(b₋, c)·c^{b₋}̲`; returns `(b_{−ū}(b₋, c), c^{b₋})`.
    pub fn act_bminus(&self, c: &CellTuple, bm: &CMatrix) -> Result<(CMatrix, CellTuple)> {
        self.sweep_right(&c.factors, bm)
    }

    /// `λ_u(x)(c) = d/dt exp(tx)[c]` in cell coordinates.
    pub fn left_field(&self, c: &CellTuple, x: &CMatrix) -> Result<Vec<C64>> {
        curve_derivative(|s| self.coords(&self.act_b(&expm(&(x * re(s))), c)?.0), JACOBIAN_STEP)
    }

    /// `ρ_u(ξ)(c) = d/dt c^{exp(tξ)}` in cell coordinates.
    pub fn right_field(&self, c: &CellTuple, xi: &CMatrix) -> Result<Vec<C64>> {
        curve_derivative(|s| self.coords(&self.act_bminus(c, &expm(&(xi * re(s))))?.1), JACOBIAN_STEP)
    }

    /// `b_ū(x) = d/dt b_ū(exp(tx), c) ∈ 𝔟`.
    pub fn cocycle_derivative_b(&self, c: &CellTuple, x: &CMatrix) -> Result<CMatrix> {
        matrix_curve_derivative(|s| Ok(self.act_b(&expm(&(x * re(s))), c)?.1), JACOBIAN_STEP)
    }

    /// `b_{−ū}(ξ) = d/dt b_{−ū}(exp(tξ), c) ∈ 𝔟₋`.
    pub fn cocycle_derivative_bminus(&self, c: &CellTuple, xi: &CMatrix) -> Result<CMatrix> {
        matrix_curve_derivative(|s| Ok(self.act_bminus(c, &expm(&(xi * re(s))))?.0), JACOBIAN_STEP)
    }

    fn split_ambient(&self, v: &[C64]) -> Vec<CMatrix> {
        let n2 = self.n * self.n;
        (0..self.len()).map(|k| unflatten(&v[k * n2..(k + 1) * n2], self.n)).collect()
    }

    fn pi_st_product(&self, gs: &[CMatrix]) -> Bivector {
        let parts: Vec<Bivector> = gs.iter().map(pi_st_at).collect();
        let refs: Vec<&Bivector> = parts.iter().collect();
        block_sum("G^k", &refs)
    }

    /// `π_n` at `[c]` in cell coordinates: pushforward of `π_st^k` along the
    /// left-to-right sweep `G^k → C_ū`.
    pub fn pi_n(&self, c: &CellTuple) -> Result<Bivector> {
        let f = |v: &[C64]| Ok(self.coords_extended(&self.sweep_left_with(&eye(self.n), &self.split_ambient(v), false)?.0));
        pushforward(f, &c.ambient(), &self.pi_st_product(&c.factors), "cells")
    }

    /// `π'_{−n}` at `[c]` in cell coordinates: pushforward of `π_st^k` along
    /// the right-to-left sweep `G^k → C_ū`.
    pub fn pi_prime_minus_n(&self, c: &CellTuple) -> Result<Bivector> {
        let f = |v: &[C64]| Ok(self.coords_extended(&self.sweep_right_with(&self.split_ambient(v), &eye(self.n), false)?.1));
        pushforward(f, &c.ambient(), &self.pi_st_product(&c.factors), "cells")
    }

    /// `π̃_n` at `[c_1, …, c_k b]` in the `(t, b)` chart of `BuB ≅ C_ū × B`.
    pub fn pi_tilde_plus(&self, c: &CellTuple, b: &CMatrix) -> Result<Bivector> {
        let mut gs = c.factors.clone();
        let last = gs.len() - 1;
        gs[last] = &gs[last] * b;
        let f = |v: &[C64]| {
            let (cc, bb) = self.sweep_left_with(&eye(self.n), &self.split_ambient(v), false)?;
            let mut out = self.coords_extended(&cc);
            out.extend(borel_coords(&bb, Borel::Upper));
            Ok(out)
        };
        let amb: Vec<C64> = gs.iter().flat_map(flatten).collect();
        pushforward(f, &amb, &self.pi_st_product(&gs), "cellsxB")
    }

    /// `π̃_{−n}` at `[b₋c_1, …, c_k]` in the `(b₋, t)` chart of `B₋uB₋ ≅ B₋ × C_ū`.
    pub fn pi_tilde_minus(&self, bm: &CMatrix, c: &CellTuple) -> Result<Bivector> {
        let mut gs = c.factors.clone();
        gs[0] = bm * &gs[0];
        let f = |v: &[C64]| {
            let (bb, cc) = self.sweep_right_with(&self.split_ambient(v), &eye(self.n), false)?;
            let mut out = borel_coords(&bb, Borel::Lower);
            out.extend(self.coords_extended(&cc));
            Ok(out)
        };
        let amb: Vec<C64> = gs.iter().flat_map(flatten).collect();
        pushforward(f, &amb, &self.pi_st_product(&gs), "B-xcells")
    }

    /// Mixed product `π_n ×_{(ρ_u, λ₊)} π_st` at `([c], b)`.
    pub fn j_plus_mixed(&self, c: &CellTuple, b: &CMatrix) -> Result<Bivector> {
        let bases = DualBorelBases::new(self.n);
        let rho = bases.xi_basis.iter().map(|xi| self.right_field(c, xi)).collect::<Result<Vec<_>>>()?;
        let lam: Vec<Vec<C64>> = bases.x_basis.iter().map(|x| borel_coords(&(x * b), Borel::Upper)).collect();
        mixed_product(&self.pi_n(c)?, &pi_st_borel(b, Borel::Upper), &rho, &lam)
    }

    /// Mixed product `π_st ×_{(ρ₋, λ_u)} (−π_n)` at `(b₋, [c])`.
    ///
    /// The dual pair here is `((B₋, π_st), (B, −π_st))`, whose duality is the
    /// negative of the standard pairing, so the dual basis of `(x_i)` is `(−ξ^i)`.
    pub fn j_minus_mixed(&self, bm: &CMatrix, c: &CellTuple) -> Result<Bivector> {
        let bases = DualBorelBases::new(self.n);
        let rho: Vec<Vec<C64>> = bases.xi_basis.iter().map(|xi| borel_coords(&(bm * xi * re(-1.0)), Borel::Lower)).collect();
        let lam = bases.x_basis.iter().map(|x| self.left_field(c, x)).collect::<Result<Vec<_>>>()?;
        mixed_product(&pi_st_borel(bm, Borel::Lower), &self.pi_n(c)?.scaled(-1.0), &rho, &lam)
    }
}

/// `I_u`: identity on representatives, changing the quotient presentation
/// from `F'_{−n}` to `F_n`.
pub fn i_u(c: &CellTuple) -> CellTuple {
    c.clone()
}

/// Dimension of the `(t, b)` chart of `BuB`.
pub fn j_plus_dim(tc: &TupleChart) -> usize {
    tc.dim() + borel_dim(tc.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, dist};
    use crate::poisson::{bivector_residual, poisson_map_residual};

    fn m2(a: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| re(a[i][j]))
    }

    fn word(letters: &[usize], n: usize) -> TupleChart {
        TupleChart::from_word(&WeylWord::new(letters.to_vec(), n).unwrap(), n).unwrap()
    }

    fn sample_t(k: usize, seed: f64) -> Vec<C64> {
        (0..k).map(|i| C64::new(0.3 + 0.21 * (i as f64 + seed).sin(), 0.17 * (1.7 * i as f64 + seed).cos())).collect()
    }

    #[test]
    fn cell_param_examples() {
        let ch = CellChart::simple(1, 2).unwrap();
        assert_eq!(ch.param(&[]).unwrap_err(), Error::IndexMismatch { expected: 1, found: 0 });
        assert!(dist(&ch.param(&[re(0.0)]).unwrap(), &m2([[0.0, -1.0], [1.0, 0.0]])) < 1e-15);
        assert!(dist(&ch.param(&[re(2.5)]).unwrap(), &m2([[2.5, -1.0], [1.0, 0.0]])) < 1e-14);
        let e = CellChart::new(WeylWord::new(vec![], 3).unwrap(), 3);
        assert_eq!(e.dim(), 0);
        assert_eq!(e.param(&[]).unwrap(), eye(3));
    }

    #[test]
    fn inversion_roots_of_longest_element() {
        let w0 = CellChart::new(WeylWord::new(vec![1, 2, 1], 3).unwrap(), 3);
        assert_eq!(w0.inversion_roots, vec![(0, 1), (0, 2), (1, 2)]);
        let t = sample_t(3, 0.4);
        let c = w0.param(&t).unwrap();
        assert!(w0.membership_residual(&c) < 1e-13);
        let back = w0.coords(&c).unwrap();
        assert!(crate::linalg::vec_dist(&back, &t) < 1e-11);
    }

    #[test]
    fn factor_bub_examples() {
        let ch = CellChart::simple(1, 2).unwrap();
        let g = m2([[0.7, -1.0], [1.0, 0.0]]);
        let (c, b) = ch.factor_bub(&g).unwrap();
        assert!(dist(&c, &g) < 1e-14 && dist(&b, &eye(2)) < 1e-14);
        let (c, b) = ch.factor_bub(&m2([[0.0, -1.0], [1.0, 2.0]])).unwrap();
        assert!(dist(&c, &ch.rep) < 1e-14 && dist(&b, &m2([[1.0, 2.0], [0.0, 1.0]])) < 1e-14);
        assert!(matches!(ch.factor_bub(&eye(2)), Err(Error::NotInCell(_))));
    }

    #[test]
    fn factor_bminus_examples() {
        let ch = CellChart::simple(1, 2).unwrap();
        let g = m2([[0.7, -1.0], [1.0, 0.0]]);
        let (bm, c) = ch.factor_bminus_ubminus(&g).unwrap();
        assert!(dist(&c, &g) < 1e-14 && dist(&bm, &eye(2)) < 1e-14);
        let (bm, c) = ch.factor_bminus_ubminus(&m2([[0.0, -1.0], [1.0, -2.0]])).unwrap();
        assert!(dist(&c, &ch.rep) < 1e-14 && dist(&bm, &m2([[1.0, 0.0], [2.0, 1.0]])) < 1e-14);
        assert!(matches!(ch.factor_bminus_ubminus(&eye(2)), Err(Error::NotInCell(_))));
    }

    #[test]
    fn torus_acts_on_sl2_cell() {
        let tc = word(&[1], 2);
        let a = re(1.3);
        let t1 = re(0.4);
        let c = tc.param(&[t1]).unwrap();
        let (bc, cocycle) = tc.act_b(&diag(&[a, a.inv()]), &c).unwrap();
        assert!(dist(&bc.factors[0], &m2([[1.3 * 1.3 * 0.4, -1.0], [1.0, 0.0]])) < 1e-13);
        assert!(dist(&cocycle, &diag(&[a.inv(), a])) < 1e-13);
        let (cocycle, cb) = tc.act_bminus(&c, &diag(&[a, a.inv()])).unwrap();
        assert!(dist(&(c.product() * diag(&[a, a.inv()])), &(&cocycle * cb.product())) < 1e-13);
    }

    #[test]
    fn pi_n_on_one_dimensional_cell_vanishes() {
        let tc = word(&[1], 2);
        let c = tc.param(&[re(0.0)]).unwrap();
        assert!(tc.pi_n(&c).unwrap().norm() < 1e-12);
    }

    #[test]
    fn i_u_is_anti_poisson() {
        for (letters, n) in [(vec![1], 2), (vec![1, 1], 2), (vec![1, 2], 3), (vec![2, 1, 2], 3)] {
            let tc = word(&letters, n);
            let t = sample_t(tc.dim(), 1.1);
            let c = tc.param(&t).unwrap();
            let src = tc.pi_prime_minus_n(&c).unwrap();
            let dst = tc.pi_n(&c).unwrap();
            let f = |v: &[C64]| Ok(v.to_vec());
            let r = poisson_map_residual(f, &t, &src, &dst, -1.0).unwrap();
            assert!(r < 1e-8, "{letters:?}: {r}");
        }
    }

    #[test]
    fn j_plus_and_j_minus_are_mixed_products() {
        for (letters, n) in [(vec![1], 2), (vec![1, 2], 3)] {
            let tc = word(&letters, n);
            let c = tc.param(&sample_t(tc.dim(), 0.3)).unwrap();
            let b = CMatrix::from_fn(n, n, |i, j| if i == j { re(1.0 + 0.1 * i as f64) } else if i < j { C64::new(0.2, 0.1 * j as f64) } else { re(0.0) });
            let b = {
                let d: C64 = (0..n).map(|k| b[(k, k)]).product();
                let mut b = b;
                b[(n - 1, n - 1)] /= d;
                b
            };
            let bm = b.transpose();
            let r_plus = bivector_residual(&tc.pi_tilde_plus(&c, &b).unwrap(), &tc.j_plus_mixed(&c, &b).unwrap(), 1.0);
            let r_minus = bivector_residual(&tc.pi_tilde_minus(&bm, &c).unwrap(), &tc.j_minus_mixed(&bm, &c).unwrap(), 1.0);
            assert!(r_plus < 1e-6 && r_minus < 1e-6, "{letters:?}: {r_plus} {r_minus}");
        }
    }
}
