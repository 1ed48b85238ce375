//! Root data and r-matrix data for `sl_n`: root vectors, the Cartan basis,
//! the dual bases of `(𝔟, 𝔟₋)`, and Weyl group representatives.

use crate::error::{Error, Result};
use crate::linalg::{diag_part, elementary, eye, re, strict_lower, strict_upper, CMatrix, C64};

/// Trace form `⟨x, y⟩_𝔤 = tr(xy)`.
pub fn trace_form(x: &CMatrix, y: &CMatrix) -> C64 {
    (x * y).trace()
}

/// Pairing of `𝔟` with `𝔟₋`:
/// `⟨x₊ + x₀, y₋ + y₀⟩ = −tr(x₊y₋) − 2·tr(x₀y₀)`.
pub fn pairing(x: &CMatrix, y: &CMatrix) -> C64 {
    -trace_form(&strict_upper(x), &strict_lower(y)) - re(2.0) * trace_form(&diag_part(x), &diag_part(y))
}

/// Root vectors and Cartan basis of `sl_n`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    /// Rank data: matrix size `n`.
    pub n: usize,
    /// Positive roots as 0-based pairs `(i, j)`, `i < j`, in lexicographic order.
    pub pos_roots: Vec<(usize, usize)>,
    /// `E_α = E_ij` for each positive root.
    pub pos_root_vectors: Vec<CMatrix>,
    /// `E_{−α} = E_ji` for each positive root.
    pub neg_root_vectors: Vec<CMatrix>,
    /// Traceless diagonal basis with `2·tr(H_i H_j) = δ_ij`.
    pub cartan_basis: Vec<CMatrix>,
}

impl LieBasis {
    /// Build the basis for `sl_n`, `n ≥ 2`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "sl_n needs n ≥ 2");
        let mut pos_roots = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pos_roots.push((i, j));
            }
        }
        let pos_root_vectors = pos_roots.iter().map(|&(i, j)| elementary(n, i, j)).collect();
        let neg_root_vectors = pos_roots.iter().map(|&(i, j)| elementary(n, j, i)).collect();
        let mut cartan_basis: Vec<CMatrix> = Vec::new();
        for k in 0..(n - 1) {
            let mut v = elementary(n, k, k) - elementary(n, k + 1, k + 1);
            for h in &cartan_basis {
                let proj = re(2.0) * trace_form(&v, h);
                v -= h * proj;
            }
            let scale = (re(2.0) * trace_form(&v, &v)).sqrt();
            cartan_basis.push(v / scale);
        }
        Self { n, pos_roots, pos_root_vectors, neg_root_vectors, cartan_basis }
    }

    /// Number of positive roots.
    pub fn num_pos_roots(&self) -> usize {
        self.pos_roots.len()
    }

    /// Index of the root `(i, j)` in the fixed order.
    pub fn root_index(&self, root: (usize, usize)) -> Option<usize> {
        self.pos_roots.iter().position(|&r| r == root)
    }
}

/// Dual bases `x_i ∈ 𝔟`, `ξ^i ∈ 𝔟₋` with `⟨x_i, ξ^j⟩_{(𝔟,𝔟₋)} = δ_ij`.
#[derive(Debug, Clone)]
pub struct DualBorelBases {
    /// `{−E_α} ∪ {−H_i}`.
    pub x_basis: Vec<CMatrix>,
    /// `{E_{−α}} ∪ {H_i}`.
    pub xi_basis: Vec<CMatrix>,
}

impl DualBorelBases {
    /// Dual bases for `sl_n`.
    pub fn new(n: usize) -> Self {
        let basis = LieBasis::new(n);
        let mut x_basis: Vec<CMatrix> = basis.pos_root_vectors.iter().map(|e| -e).collect();
        let mut xi_basis: Vec<CMatrix> = basis.neg_root_vectors.clone();
        for h in &basis.cartan_basis {
            x_basis.push(-h);
            xi_basis.push(h.clone());
        }
        Self { x_basis, xi_basis }
    }

    /// Common dimension `dim 𝔟 = dim 𝔟₋`.
    pub fn dim(&self) -> usize {
        self.x_basis.len()
    }

    /// Coordinates of `y ∈ 𝔟₋` in the basis `ξ^i` (obtained by pairing with `x_i`).
    pub fn xi_coords(&self, y: &CMatrix) -> Vec<C64> {
        self.x_basis.iter().map(|x| pairing(x, y)).collect()
    }

    /// Coordinates of `y ∈ 𝔟` in the basis `x_i` (obtained by pairing with `ξ^i`).
    pub fn x_coords(&self, y: &CMatrix) -> Vec<C64> {
        self.xi_basis.iter().map(|xi| pairing(y, xi)).collect()
    }
}

/// Skew r-matrix `Λ_st = Σ_{α>0} E_{−α} ∧ E_α` as a list of `(E_{−α}, E_α)` pairs.
pub fn standard_r_matrix(n: usize) -> Vec<(CMatrix, CMatrix)> {
    let basis = LieBasis::new(n);
    basis.neg_root_vectors.into_iter().zip(basis.pos_root_vectors).collect()
}

/// Pairs `(ξ^i, x_i)` entering the mixed term `Σ (ξ^i, 0) ∧ (0, x_i)`.
pub fn mixed_r_term(n: usize) -> Vec<(CMatrix, CMatrix)> {
    let bases = DualBorelBases::new(n);
    bases.xi_basis.into_iter().zip(bases.x_basis).collect()
}

/// A word in the simple reflections `s_1, …, s_{n−1}` (1-based letters).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylWord {
    /// Letters in `{1, …, n−1}`.
    pub letters: Vec<usize>,
}

impl WeylWord {
    /// Validate the letters against the rank.
    pub fn new(letters: Vec<usize>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::ConfigError(format!("rank must be at least 2, got {n}")));
        }
        if let Some(bad) = letters.iter().find(|&&l| l == 0 || l >= n) {
            return Err(Error::ConfigError(format!("letter {bad} is outside 1..={}", n - 1)));
        }
        Ok(Self { letters })
    }

    /// Single simple reflection.
    pub fn simple(letter: usize, n: usize) -> Result<Self> {
        Self::new(vec![letter], n)
    }

    /// Word length.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// True for the empty word.
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Standard representative of the simple reflection `s_i`: the identity with
/// the block `[[0, −1], [1, 0]]` at rows and columns `(i, i+1)` (1-based).
pub fn simple_representative(letter: usize, n: usize) -> CMatrix {
    let k = letter - 1;
    let mut m = eye(n);
    m[(k, k)] = re(0.0);
    m[(k + 1, k + 1)] = re(0.0);
    m[(k, k + 1)] = re(-1.0);
    m[(k + 1, k)] = re(1.0);
    m
}

/// Product of the standard simple representatives along the word.
pub fn weyl_representative(w: &WeylWord, n: usize) -> CMatrix {
    w.letters.iter().fold(eye(n), |acc, &l| acc * simple_representative(l, n))
}

/// Coadjoint action `Ad*_g ξ ∈ 𝔟₋` of `g ∈ B` on `ξ ∈ 𝔟₋ ≅ 𝔟*`, defined by
/// `⟨x, Ad*_g ξ⟩ = ⟨Ad_{g⁻¹} x, ξ⟩` for all `x ∈ 𝔟`.
pub fn coadjoint_b(g: &CMatrix, xi: &CMatrix, bases: &DualBorelBases) -> Result<CMatrix> {
    let g_inv = crate::linalg::inv(g)?;
    let mut out = CMatrix::zeros(g.nrows(), g.nrows());
    for (x, dual) in bases.x_basis.iter().zip(&bases.xi_basis) {
        out += dual * pairing(&(&g_inv * x * g), xi);
    }
    Ok(out)
}

/// Coadjoint action `Ad*_u x ∈ 𝔟` of `u ∈ B₋` on `x ∈ 𝔟 ≅ 𝔟₋*`, defined by
/// `⟨Ad*_u x, η⟩ = ⟨x, Ad_{u⁻¹} η⟩` for all `η ∈ 𝔟₋`.
pub fn coadjoint_bminus(u: &CMatrix, x: &CMatrix, bases: &DualBorelBases) -> Result<CMatrix> {
    let u_inv = crate::linalg::inv(u)?;
    let mut out = CMatrix::zeros(u.nrows(), u.nrows());
    for (xb, xi) in bases.x_basis.iter().zip(&bases.xi_basis) {
        out += xb * pairing(x, &(&u_inv * xi * u));
    }
    Ok(out)
}
