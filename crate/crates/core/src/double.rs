//! The double `D = G × T` of the dual pair `(B, π_st)`, `(B₋, −π_st)`, local
//! dressing actions, and the manifold `Γ` of factorization quadruples with its
//! two groupoid structures (over `B` and over `B₋`).

use crate::error::{Error, Result};
use crate::linalg::{
    diag_part, dist, gauss_decompose, inv, lower_defect, norm, opposite_gauss_decompose, torus_sqrt, upper_defect, Branch,
    CMatrix,
};

/// Tolerance of the composability tests of both groupoid structures.
pub const COMPOSABLE_TOL: f64 = 1e-9;

/// Element `(g, t)` of the double `D = G × T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleElement {
    /// `G`-component.
    pub g: CMatrix,
    /// Torus component (diagonal).
    pub t: CMatrix,
}

impl DoubleElement {
    /// Componentwise product.
    pub fn mul(&self, other: &Self) -> Self {
        Self { g: &self.g * &other.g, t: &self.t * &other.t }
    }

    /// Componentwise inverse.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { g: inv(&self.g)?, t: inv(&self.t)? })
    }

    /// Distance to another element (sum of Frobenius distances).
    pub fn dist(&self, other: &Self) -> f64 {
        dist(&self.g, &other.g) + dist(&self.t, &other.t)
    }
}

/// `b̄ = (b, h)` where `h` is the diagonal part of `b ∈ B`.
pub fn embed_b(b: &CMatrix) -> DoubleElement {
    DoubleElement { g: b.clone(), t: diag_part(b) }
}

/// `b̄̄₋ = (b₋, h⁻¹)` where `h` is the diagonal part of `b₋ ∈ B₋`.
pub fn embed_bminus(b: &CMatrix) -> DoubleElement {
    let h = diag_part(b);
    let n = b.nrows();
    let t = CMatrix::from_fn(n, n, |i, j| if i == j { h[(i, i)].inv() } else { h[(i, j)] });
    DoubleElement { g: b.clone(), t }
}

/// Factorization quadruple `(b, u, u', b')` with `b̄ ū̄ = ū̄' b̄'` in `D`.
///
/// Over `B` its source and target are `b` and `b'`; over `B₋` they are `u`
/// and `u'`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaElement {
    /// Upper Borel component, `θ_B`.
    pub b: CMatrix,
    /// Lower Borel component, `θ_{B₋}`.
    pub u: CMatrix,
    /// Lower Borel component, `τ_{B₋}`.
    pub u_prime: CMatrix,
    /// Upper Borel component, `τ_B`.
    pub b_prime: CMatrix,
}

impl GammaElement {
    /// Residual of the defining relation `b̄ū̄ = ū̄'b̄'` plus triangularity defects.
    pub fn residual(&self) -> f64 {
        let lhs = embed_b(&self.b).mul(&embed_bminus(&self.u));
        let rhs = embed_bminus(&self.u_prime).mul(&embed_b(&self.b_prime));
        lhs.dist(&rhs)
            + lower_defect(&self.b)
            + lower_defect(&self.b_prime)
            + upper_defect(&self.u)
            + upper_defect(&self.u_prime)
    }

    /// Distance between two quadruples (sum of componentwise distances).
    pub fn dist(&self, other: &Self) -> f64 {
        dist(&self.b, &other.b) + dist(&self.u, &other.u) + dist(&self.u_prime, &other.u_prime) + dist(&self.b_prime, &other.b_prime)
    }

    /// Source over `B`.
    pub fn theta_b(&self) -> &CMatrix {
        &self.b
    }

    /// Target over `B`.
    pub fn tau_b(&self) -> &CMatrix {
        &self.b_prime
    }

    /// Source over `B₋`.
    pub fn theta_bminus(&self) -> &CMatrix {
        &self.u
    }

    /// Target over `B₋`.
    pub fn tau_bminus(&self) -> &CMatrix {
        &self.u_prime
    }
}

/// Identity bisection over `B`: `ε_B(g) = (g, e, e, g)`.
pub fn eps_b(g: &CMatrix) -> GammaElement {
    let e = CMatrix::identity(g.nrows(), g.nrows());
    GammaElement { b: g.clone(), u: e.clone(), u_prime: e, b_prime: g.clone() }
}

/// Identity bisection over `B₋`: `ε_{B₋}(u) = (e, u, u, e)`.
pub fn eps_bminus(u: &CMatrix) -> GammaElement {
    let e = CMatrix::identity(u.nrows(), u.nrows());
    GammaElement { b: e.clone(), u: u.clone(), u_prime: u.clone(), b_prime: e }
}

/// Local dressing: solve `b̄ū̄ = ū̄'b̄'` for `(u', b') = (b[u], b^u)`.
///
/// With `b·u = m·h·n` (Gauss), `u' = m·s` and `b' = s⁻¹·h·n` where
/// `s = h_u·r` and `r² = h·h_u⁻¹·h_b⁻¹`. The root `r` is taken on the given
/// branch; the principal branch gives `r = e` on both identity bisections.
pub fn dress(b: &CMatrix, u: &CMatrix, branch: &Branch) -> Result<(CMatrix, CMatrix)> {
    let f = gauss_decompose(&(b * u)).map_err(|e| Error::NotInDressingDomain(e.to_string()))?;
    let h_b = diag_part(b);
    let h_u = diag_part(u);
    let r2 = &f.h * inv(&h_u)? * inv(&h_b)?;
    let r = torus_sqrt(&r2, branch);
    let s = &h_u * &r;
    let u_prime = &f.m * &s;
    let b_prime = inv(&s)? * &f.h * &f.n;
    Ok((u_prime, b_prime))
}

/// Inverse dressing: solve `ḡū̄ = ū̄'ḡ'` for `(g, u) = (u'[g'], u'^{g'})`.
///
/// With `u'·g' = n·h·m` (opposite Gauss), `g = n·a` and `u = a⁻¹·h·m` where
/// `a = h_{g'}·r` and `r² = h·h_{u'}⁻¹·h_{g'}⁻¹`.
pub fn dress_inverse(u_prime: &CMatrix, g_prime: &CMatrix, branch: &Branch) -> Result<(CMatrix, CMatrix)> {
    let f = opposite_gauss_decompose(&(u_prime * g_prime)).map_err(|e| Error::NotInDressingDomain(e.to_string()))?;
    let h_up = diag_part(u_prime);
    let h_gp = diag_part(g_prime);
    let r2 = &f.h * inv(&h_up)? * inv(&h_gp)?;
    let r = torus_sqrt(&r2, branch);
    let a = &h_gp * &r;
    let g = &f.n * &a;
    let u = inv(&a)? * &f.h * &f.m;
    Ok((g, u))
}

/// `γ_{g,u} = (g, u, g[u], g^u)` on the principal branch.
pub fn gamma_lower(g: &CMatrix, u: &CMatrix) -> Result<GammaElement> {
    gamma_lower_with(g, u, &Branch::Principal)
}

/// `γ_{g,u}` with an explicit branch.
pub fn gamma_lower_with(g: &CMatrix, u: &CMatrix, branch: &Branch) -> Result<GammaElement> {
    let (u_prime, b_prime) = dress(g, u, branch)?;
    Ok(GammaElement { b: g.clone(), u: u.clone(), u_prime, b_prime })
}

/// `γ^{u',g'} = (u'[g'], u'^{g'}, u', g')` on the principal branch.
pub fn gamma_upper(u_prime: &CMatrix, g_prime: &CMatrix) -> Result<GammaElement> {
    gamma_upper_with(u_prime, g_prime, &Branch::Principal)
}

/// `γ^{u',g'}` with an explicit branch.
pub fn gamma_upper_with(u_prime: &CMatrix, g_prime: &CMatrix, branch: &Branch) -> Result<GammaElement> {
    let (g, u) = dress_inverse(u_prime, g_prime, branch)?;
    Ok(GammaElement { b: g, u, u_prime: u_prime.clone(), b_prime: g_prime.clone() })
}

fn composable(a: &CMatrix, b: &CMatrix) -> Result<()> {
    let r = dist(a, b) / (1.0 + norm(a));
    if r > COMPOSABLE_TOL {
        return Err(Error::NotComposable { residual: r });
    }
    Ok(())
}

/// Product over `B₋`: `(g₁,u₁,u'₁,g'₁) ⋆ (g₂,u₂,u'₂,g'₂) = (g₂g₁, u₁, u'₂, g'₂g'₁)`,
/// defined when `u'₁ = u₂`.
pub fn gamma_mult_over_gstar(a: &GammaElement, b: &GammaElement) -> Result<GammaElement> {
    composable(&a.u_prime, &b.u)?;
    Ok(GammaElement { b: &b.b * &a.b, u: a.u.clone(), u_prime: b.u_prime.clone(), b_prime: &b.b_prime * &a.b_prime })
}

/// Product over `B`: `(g₁,u₁,u'₁,g'₁)·(g₂,u₂,u'₂,g'₂) = (g₁, u₁u₂, u'₁u'₂, g'₂)`,
/// defined when `g'₁ = g₂`.
pub fn gamma_mult_over_g(a: &GammaElement, b: &GammaElement) -> Result<GammaElement> {
    composable(&a.b_prime, &b.b)?;
    Ok(GammaElement { b: a.b.clone(), u: &a.u * &b.u, u_prime: &a.u_prime * &b.u_prime, b_prime: b.b_prime.clone() })
}

/// Inverse over `B`: `ι_B(g,u,u',g') = (g', u⁻¹, u'⁻¹, g)`.
pub fn gamma_inverse_over_g(a: &GammaElement) -> Result<GammaElement> {
    Ok(GammaElement { b: a.b_prime.clone(), u: inv(&a.u)?, u_prime: inv(&a.u_prime)?, b_prime: a.b.clone() })
}

/// Inverse over `B₋`: `ι_{B₋}(g,u,u',g') = (g⁻¹, u', u, g'⁻¹)`.
pub fn gamma_inverse_over_gstar(a: &GammaElement) -> Result<GammaElement> {
    Ok(GammaElement { b: inv(&a.b)?, u: a.u_prime.clone(), u_prime: a.u.clone(), b_prime: inv(&a.b_prime)? })
}

/// Element of the local bisection `S_γ = {(hg, u, h[u'], h^{u'}g')}`.
pub fn bisection_s(gamma: &GammaElement, h: &CMatrix) -> Result<GammaElement> {
    let (hu, h_up) = dress(h, &gamma.u_prime, &Branch::Principal)?;
    Ok(GammaElement { b: h * &gamma.b, u: gamma.u.clone(), u_prime: hu, b_prime: h_up * &gamma.b_prime })
}

/// Diagonal pair `(γ, γ)` of the Lagrangian bisection `ℒ = (O_Γ)_diag`.
///
/// Membership in `O_Γ` is decided by re-dressing `(b, u)` on the principal
/// branch and requiring the stored quadruple to be reproduced.
pub fn lagrangian_bisection_pair(gamma: &GammaElement) -> Result<(GammaElement, GammaElement)> {
    let redone = gamma_lower(&gamma.b, &gamma.u)?;
    let r = redone.dist(gamma);
    if r > 1e-8 * (1.0 + norm(&gamma.b) + norm(&gamma.u)) {
        return Err(Error::NotInDressingDomain(format!("quadruple is on a different branch (mismatch {r:.3e})")));
    }
    Ok((gamma.clone(), gamma.clone()))
}

/// The map `p(γ) = b̄ū̄ = (b·u, h_b·h_u⁻¹)` from `Γ` to `D`.
pub fn p_map(gamma: &GammaElement) -> DoubleElement {
    embed_b(&gamma.b).mul(&embed_bminus(&gamma.u))
}
