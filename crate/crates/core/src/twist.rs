//! The twist construction `𝒴 ×_ℒ 𝒵`: given local Poisson groupoids `𝒴`, `𝒵`
//! with moment morphisms `μ_𝒴` into `G = B` and `μ_𝒵` into `G* = B₋`, a right
//! action `◁_G` of `Γ_G` on `μ_𝒴` and a right action `◁_{G*}` of `Γ_{G*}` on
//! `μ_𝒵`, the product `𝒴 × 𝒵` carries the local groupoid structure
//!
//! * `θ(ỹ, z̃) = (θ_𝒴(ỹ), μ_𝒴(ỹ)[θ_𝒵(z̃)])`,
//! * `τ(ỹ, z̃) = (τ_𝒴(ỹ)^{μ_𝒵(z̃)}, τ_𝒵(z̃))`,
//! * `ε(y, z) = (ε_𝒴(y), ε_𝒵(z))`,
//! * `ι(ỹ, z̃) = (ι_𝒴(ỹ ◁_G γ), ι_𝒵(z̃ ◁_{G*} γ))` with `γ = γ_{μ_𝒴(ỹ), μ_𝒵(z̃)}`,
//! * `(ỹ₁, z̃₁)·(ỹ₂, z̃₂) = (ỹ₁(γ ▷_G ỹ₂), (γ ▷_{G*} z̃₁)z̃₂)` with
//!   `γ = γ^{μ_𝒵(z̃₁), μ_𝒴(ỹ₂)}`,
//!
//! where `γ ▷ x = x ◁ ι(γ)`. The base actions `y^u` and `g[z]` come from
//! letting identity bisections act on identity bisections.
//!
//! Two instances are provided: generalized double Bruhat cells
//! ([`GdbcFactor`]) and the cotangent line `T*ℂ` with `G = G* = ℂ*`
//! ([`CotangentFactor`]), where group elements are `1 × 1` matrices.

use rand::Rng;

use crate::cells::CellTuple;
use crate::double::{
    eps_b, eps_bminus, gamma_inverse_over_g, gamma_inverse_over_gstar, gamma_lower_with, gamma_mult_over_g,
    gamma_mult_over_gstar, gamma_upper_with, DoubleElement, GammaElement, COMPOSABLE_TOL,
};
use crate::double::{embed_b, embed_bminus};
use crate::error::{Error, Result};
use crate::gdbc::{GdbcElement, GdbcSpace, Side};
use crate::lie::{coadjoint_b, coadjoint_bminus, DualBorelBases};
use crate::linalg::{curve_derivative, dist, expm, inv, norm, re, vec_dist, vec_norm, Branch, CMatrix, C64, JACOBIAN_STEP};
use crate::poisson::{block_sum, coisotropy_residual, mixed_product, poisson_map_residual, pushforward, bivector_residual, Bivector};
use crate::sampling::complex;

/// A local Poisson groupoid with a moment morphism and a right action of one
/// of the two groupoid structures of `Γ`, together with a chart.
///
/// Chart convention: [`TwistFactor::coords`] lists the source coordinates
/// ([`TwistFactor::base_coords`] of `θ(x)`) first, followed by fiber
/// coordinates, so elements with prescribed source are obtained by
/// prepending base coordinates to fiber coordinates.
pub trait TwistFactor {
    /// Groupoid element.
    type Elem: Clone + std::fmt::Debug;
    /// Base point.
    type Base: Clone + std::fmt::Debug;

    /// Source map.
    fn source(&self, x: &Self::Elem) -> Result<Self::Base>;
    /// Target map.
    fn target(&self, x: &Self::Elem) -> Result<Self::Base>;
    /// Identity bisection.
    fn identity(&self, b: &Self::Base) -> Result<Self::Elem>;
    /// Groupoid inverse.
    fn inverse(&self, x: &Self::Elem) -> Result<Self::Elem>;
    /// Groupoid product, defined when `τ(x₁) = θ(x₂)`.
    fn mult(&self, x1: &Self::Elem, x2: &Self::Elem) -> Result<Self::Elem>;
    /// Moment morphism into `B` (for `𝒴`) or `B₋` (for `𝒵`).
    fn moment(&self, x: &Self::Elem) -> CMatrix;
    /// Right action of `Γ` along the moment map.
    fn act(&self, x: &Self::Elem, gamma: &GammaElement) -> Result<Self::Elem>;
    /// Distance between elements.
    fn dist(&self, a: &Self::Elem, b: &Self::Elem) -> f64;
    /// Relative distance between base points.
    fn base_dist(&self, a: &Self::Base, b: &Self::Base) -> f64;
    /// Chart dimension of the groupoid.
    fn dim(&self) -> usize;
    /// Chart dimension of the base.
    fn base_dim(&self) -> usize;
    /// Chart coordinates (source coordinates first).
    fn coords(&self, x: &Self::Elem) -> Result<Vec<C64>>;
    /// Element with the given chart coordinates.
    #[allow(clippy::wrong_self_convention)]
    fn from_coords(&self, p: &[C64]) -> Result<Self::Elem>;
    /// Base coordinates.
    fn base_coords(&self, b: &Self::Base) -> Result<Vec<C64>>;
    /// Poisson bivector of the groupoid at `x` in chart coordinates.
    fn bivector(&self, x: &Self::Elem) -> Result<Bivector>;
    /// Poisson bivector of the base at `b` in base coordinates.
    fn base_bivector(&self, b: &Self::Base) -> Result<Bivector>;
    /// Random chart coordinates near the identity bisection.
    fn sample_coords<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>>;
}

/// Dual bases `(x_i)` of `𝔤` and `(ξ^i)` of `𝔤*` used by the mixed product on the base.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    /// Matrix size of the group elements.
    pub n: usize,
    /// Basis of `𝔤`.
    pub x_basis: Vec<CMatrix>,
    /// Dual basis of `𝔤*`.
    pub xi_basis: Vec<CMatrix>,
}

impl DualPair {
    /// The pair `(𝔟, 𝔟₋)` of `sl_n`.
    pub fn borel(n: usize) -> Self {
        let b = DualBorelBases::new(n);
        Self { n, x_basis: b.x_basis, xi_basis: b.xi_basis }
    }

    /// The abelian pair `(ℂ, ℂ)` of `(ℂ*, 0)` with itself, paired by multiplication.
    pub fn scalar() -> Self {
        let one = CMatrix::from_element(1, 1, re(1.0));
        Self { n: 1, x_basis: vec![one.clone()], xi_basis: vec![one] }
    }

    /// Coadjoint action `Ad*_g ξ` of `g ∈ G` on `ξ ∈ 𝔤*`.
    pub fn coadjoint(&self, g: &CMatrix, xi: &CMatrix) -> Result<CMatrix> {
        if self.n == 1 {
            return Ok(xi.clone());
        }
        coadjoint_b(g, xi, &DualBorelBases::new(self.n))
    }

    /// Coadjoint action `Ad*_u x` of `u ∈ G*` on `x ∈ 𝔤`.
    pub fn coadjoint_dual(&self, u: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
        if self.n == 1 {
            return Ok(x.clone());
        }
        coadjoint_bminus(u, x, &DualBorelBases::new(self.n))
    }
}

/// Element `(ỹ, z̃)` of `𝒴 ×_ℒ 𝒵`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedPair<Y, Z> {
    /// Component in `𝒴`.
    pub y: Y,
    /// Component in `𝒵`.
    pub z: Z,
}

/// Base point `(y, z)` of `Y × Z`.
pub type BasePair<Y, Z> = (Y, Z);

/// The data `(𝒴, 𝒵, μ_𝒴, μ_𝒵, ◁_G, ◁_{G*})` of the twist.
#[derive(Debug, Clone)]
pub struct TwistContext<Y: TwistFactor, Z: TwistFactor> {
    /// The factor acted on by `Γ_G`.
    pub y: Y,
    /// The factor acted on by `Γ_{G*}`.
    pub z: Z,
    /// Dual bases for the mixed product on the base.
    pub pair: DualPair,
    /// Square-root branch used for every `γ` built by the context.
    pub branch: Branch,
}

type Pair<Y, Z> = TwistedPair<<Y as TwistFactor>::Elem, <Z as TwistFactor>::Elem>;
type Base<Y, Z> = BasePair<<Y as TwistFactor>::Base, <Z as TwistFactor>::Base>;

impl<Y: TwistFactor, Z: TwistFactor> TwistContext<Y, Z> {
    /// Context on the principal square-root branch.
    pub fn new(y: Y, z: Z, pair: DualPair) -> Self {
        Self { y, z, pair, branch: Branch::Principal }
    }

    /// Same context with another branch for the `γ` elements.
    pub fn with_branch(&self, branch: Branch) -> Self
    where
        Y: Clone,
        Z: Clone,
    {
        Self { y: self.y.clone(), z: self.z.clone(), pair: self.pair.clone(), branch }
    }

    /// `γ_{g,u} = (g, u, g[u], g^u)`.
    pub fn gamma_lower(&self, g: &CMatrix, u: &CMatrix) -> Result<GammaElement> {
        gamma_lower_with(g, u, &self.branch)
    }

    /// `γ^{u',g'} = (u'[g'], u'^{g'}, u', g')`.
    pub fn gamma_upper(&self, u_prime: &CMatrix, g_prime: &CMatrix) -> Result<GammaElement> {
        gamma_upper_with(u_prime, g_prime, &self.branch)
    }

    /// Left action `γ ▷_G ỹ = ỹ ◁_G ι_G(γ)`.
    pub fn left_act_y(&self, gamma: &GammaElement, y: &Y::Elem) -> Result<Y::Elem> {
        self.y.act(y, &gamma_inverse_over_g(gamma)?)
    }

    /// Left action `γ ▷_{G*} z̃ = z̃ ◁_{G*} ι_{G*}(γ)`.
    pub fn left_act_z(&self, gamma: &GammaElement, z: &Z::Elem) -> Result<Z::Elem> {
        self.z.act(z, &gamma_inverse_over_gstar(gamma)?)
    }

    /// Base action `ϱ_Y(y, u) = y^u = θ_𝒴(ε_𝒴(y) ◁_G ε_{G*}(u))`.
    pub fn base_right(&self, y: &Y::Base, u: &CMatrix) -> Result<Y::Base> {
        self.y.source(&self.y.act(&self.y.identity(y)?, &eps_bminus(u))?)
    }

    /// Base action `ϑ_Z(g, z) = g[z] = θ_𝒵(ε_𝒵(z) ◁_{G*} ε_G(g))`.
    pub fn base_left(&self, g: &CMatrix, z: &Z::Base) -> Result<Z::Base> {
        self.z.source(&self.z.act(&self.z.identity(z)?, &eps_b(g))?)
    }

    /// Source `θ(ỹ, z̃) = (θ_𝒴(ỹ), μ_𝒴(ỹ)[θ_𝒵(z̃)])`.
    pub fn source(&self, p: &Pair<Y, Z>) -> Result<Base<Y, Z>> {
        let zb = self.base_left(&self.y.moment(&p.y), &self.z.source(&p.z)?)?;
        Ok((self.y.source(&p.y)?, zb))
    }

    /// Target `τ(ỹ, z̃) = (τ_𝒴(ỹ)^{μ_𝒵(z̃)}, τ_𝒵(z̃))`.
    pub fn target(&self, p: &Pair<Y, Z>) -> Result<Base<Y, Z>> {
        let yb = self.base_right(&self.y.target(&p.y)?, &self.z.moment(&p.z))?;
        Ok((yb, self.z.target(&p.z)?))
    }

    /// Identity `ε(y, z) = (ε_𝒴(y), ε_𝒵(z))`.
    pub fn identity(&self, b: &Base<Y, Z>) -> Result<Pair<Y, Z>> {
        Ok(TwistedPair { y: self.y.identity(&b.0)?, z: self.z.identity(&b.1)? })
    }

    /// Inverse `ι(ỹ, z̃) = (ι_𝒴(ỹ ◁_G γ), ι_𝒵(z̃ ◁_{G*} γ))`, `γ = γ_{μ_𝒴(ỹ), μ_𝒵(z̃)}`.
    pub fn inverse(&self, p: &Pair<Y, Z>) -> Result<Pair<Y, Z>> {
        let gamma = self.gamma_lower(&self.y.moment(&p.y), &self.z.moment(&p.z))?;
        Ok(TwistedPair {
            y: self.y.inverse(&self.y.act(&p.y, &gamma)?)?,
            z: self.z.inverse(&self.z.act(&p.z, &gamma)?)?,
        })
    }

    /// Relative mismatch between `τ(p₁)` and `θ(p₂)`.
    pub fn composability_residual(&self, p1: &Pair<Y, Z>, p2: &Pair<Y, Z>) -> Result<f64> {
        let t = self.target(p1)?;
        let s = self.source(p2)?;
        Ok(self.y.base_dist(&t.0, &s.0).max(self.z.base_dist(&t.1, &s.1)))
    }

    /// Product `(ỹ₁(γ ▷_G ỹ₂), (γ ▷_{G*} z̃₁)z̃₂)`, `γ = γ^{μ_𝒵(z̃₁), μ_𝒴(ỹ₂)}`.
    pub fn mult(&self, p1: &Pair<Y, Z>, p2: &Pair<Y, Z>) -> Result<Pair<Y, Z>> {
        let r = self.composability_residual(p1, p2)?;
        if r > COMPOSABLE_TOL {
            return Err(Error::NotComposable { residual: r });
        }
        let gamma = self.gamma_upper(&self.z.moment(&p1.z), &self.y.moment(&p2.y))?;
        let y = self.y.mult(&p1.y, &self.left_act_y(&gamma, &p2.y)?)?;
        let z = self.z.mult(&self.left_act_z(&gamma, &p1.z)?, &p2.z)?;
        Ok(TwistedPair { y, z })
    }

    /// Moment `μ(ỹ, z̃) = μ_𝒴(ỹ)·μ_𝒵(z̃) ∈ D`.
    pub fn moment(&self, p: &Pair<Y, Z>) -> DoubleElement {
        embed_b(&self.y.moment(&p.y)).mul(&embed_bminus(&self.z.moment(&p.z)))
    }

    /// `R_ℒ(z̃, ỹ) = (z̃ ◁_{G*} γ, ỹ ◁_G γ)`, `γ = γ_{μ_𝒴(ỹ), μ_𝒵(z̃)}`.
    pub fn r_l(&self, z: &Z::Elem, y: &Y::Elem) -> Result<(Z::Elem, Y::Elem)> {
        let gamma = self.gamma_lower(&self.y.moment(y), &self.z.moment(z))?;
        Ok((self.z.act(z, &gamma)?, self.y.act(y, &gamma)?))
    }

    /// `R_ℒ⁻¹(z̃, ỹ) = (γ ▷_{G*} z̃, γ ▷_G ỹ)`, `γ = γ^{μ_𝒵(z̃), μ_𝒴(ỹ)}`.
    pub fn r_l_inv(&self, z: &Z::Elem, y: &Y::Elem) -> Result<(Z::Elem, Y::Elem)> {
        let gamma = self.gamma_upper(&self.z.moment(z), &self.y.moment(y))?;
        Ok((self.left_act_z(&gamma, z)?, self.left_act_y(&gamma, y)?))
    }

    /// Distance between twisted pairs.
    pub fn dist(&self, a: &Pair<Y, Z>, b: &Pair<Y, Z>) -> f64 {
        self.y.dist(&a.y, &b.y) + self.z.dist(&a.z, &b.z)
    }

    /// Distance between base pairs.
    pub fn base_dist(&self, a: &Base<Y, Z>, b: &Base<Y, Z>) -> f64 {
        self.y.base_dist(&a.0, &b.0) + self.z.base_dist(&a.1, &b.1)
    }

    /// Chart coordinates `(coords(ỹ), coords(z̃))`.
    pub fn coords(&self, p: &Pair<Y, Z>) -> Result<Vec<C64>> {
        let mut v = self.y.coords(&p.y)?;
        v.extend(self.z.coords(&p.z)?);
        Ok(v)
    }

    /// Twisted pair with chart coordinates `(coords(ỹ), coords(z̃))`.
    pub fn from_coords(&self, v: &[C64]) -> Result<Pair<Y, Z>> {
        let dy = self.y.dim();
        Ok(TwistedPair { y: self.y.from_coords(&v[..dy])?, z: self.z.from_coords(&v[dy..])? })
    }

    /// Base coordinates of a base pair.
    pub fn base_coords(&self, b: &Base<Y, Z>) -> Result<Vec<C64>> {
        let mut v = self.y.base_coords(&b.0)?;
        v.extend(self.z.base_coords(&b.1)?);
        Ok(v)
    }

    /// Product bivector `π_𝒴 × π_𝒵` at `p`.
    pub fn product_bivector(&self, p: &Pair<Y, Z>) -> Result<Bivector> {
        Ok(block_sum("YxZ", &[&self.y.bivector(&p.y)?, &self.z.bivector(&p.z)?]))
    }

    /// Mixed product `π_Y ×_{(ϱ_Y, ϑ_Z)} π_Z` at a base pair, with the
    /// infinitesimal base actions obtained by differentiating [`Self::base_right`]
    /// and [`Self::base_left`].
    pub fn base_mixed_product(&self, b: &Base<Y, Z>) -> Result<Bivector> {
        let mut rho = Vec::with_capacity(self.pair.xi_basis.len());
        let mut lam = Vec::with_capacity(self.pair.x_basis.len());
        for (x, xi) in self.pair.x_basis.iter().zip(&self.pair.xi_basis) {
            rho.push(curve_derivative(|s| self.y.base_coords(&self.base_right(&b.0, &expm(&(xi * re(s))))?), JACOBIAN_STEP)?);
            lam.push(curve_derivative(|s| self.z.base_coords(&self.base_left(&expm(&(x * re(s))), &b.1)?), JACOBIAN_STEP)?);
        }
        mixed_product(&self.y.base_bivector(&b.0)?, &self.z.base_bivector(&b.1)?, &rho, &lam)
    }

    /// Random twisted pair from the factor samplers.
    pub fn sample<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Pair<Y, Z>> {
        let mut v = self.y.sample_coords(rng, scale)?;
        v.extend(self.z.sample_coords(rng, scale)?);
        self.from_coords(&v)
    }

    /// Dimension of the fiber part of the composable-pair chart.
    fn fiber_dims(&self) -> (usize, usize) {
        (self.y.dim() - self.y.base_dim(), self.z.dim() - self.z.base_dim())
    }

    /// Composable pair with chart coordinates `(coords(p₁), f_𝒴, f_𝒵)`: the
    /// second pair has `θ_𝒴(ỹ₂) = τ_𝒴(ỹ₁)^{μ_𝒵(z̃₁)}`,
    /// `θ_𝒵(z̃₂) = μ_𝒴(ỹ₂)⁻¹[τ_𝒵(z̃₁)]` and fiber coordinates `(f_𝒴, f_𝒵)`.
    pub fn composable_from_coords(&self, v: &[C64]) -> Result<(Pair<Y, Z>, Pair<Y, Z>)> {
        let d = self.y.dim() + self.z.dim();
        let (fy, fz) = self.fiber_dims();
        if v.len() != d + fy + fz {
            return Err(Error::IndexMismatch { expected: d + fy + fz, found: v.len() });
        }
        let p1 = self.from_coords(&v[..d])?;
        let t1 = self.target(&p1)?;
        let mut cy = self.y.base_coords(&t1.0)?;
        cy.extend_from_slice(&v[d..d + fy]);
        let y2 = self.y.from_coords(&cy)?;
        let zb = self.base_left(&inv(&self.y.moment(&y2))?, &t1.1)?;
        let mut cz = self.z.base_coords(&zb)?;
        cz.extend_from_slice(&v[d + fy..]);
        let z2 = self.z.from_coords(&cz)?;
        Ok((p1, TwistedPair { y: y2, z: z2 }))
    }

    /// Random chart coordinates of a composable pair (see
    /// [`Self::composable_from_coords`]) whose product is defined; at most
    /// 100 attempts.
    pub fn sample_composable_coords<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>> {
        let (fy, fz) = self.fiber_dims();
        let by = self.y.base_dim();
        let bz = self.z.base_dim();
        for _ in 0..100 {
            let mut v = self.y.sample_coords(rng, scale)?;
            v.extend(self.z.sample_coords(rng, scale)?);
            v.extend(self.y.sample_coords(rng, scale)?[by..by + fy].iter().copied());
            v.extend(self.z.sample_coords(rng, scale)?[bz..bz + fz].iter().copied());
            if let Ok((p1, p2)) = self.composable_from_coords(&v) {
                if self.mult(&p1, &p2).is_ok() {
                    return Ok(v);
                }
            }
        }
        Err(Error::NotInDressingDomain("no composable twisted pair after 100 attempts".into()))
    }

    /// Largest relative residual of the groupoid axioms at a composable pair:
    /// right and left identity, `p·ι(p) = ε(θ(p))`, `ι(p)·p = ε(τ(p))`,
    /// `ι(ι(p)) = p`, and the source and target of the product.
    pub fn axiom_residual(&self, p1: &Pair<Y, Z>, p2: &Pair<Y, Z>) -> Result<f64> {
        let scale = 1.0 + vec_norm(&self.coords(p1)?);
        let mut worst: f64 = 0.0;
        let right = self.mult(p1, &self.identity(&self.target(p1)?)?)?;
        worst = worst.max(self.dist(&right, p1) / scale);
        let left = self.mult(&self.identity(&self.source(p1)?)?, p1)?;
        worst = worst.max(self.dist(&left, p1) / scale);
        let inv1 = self.inverse(p1)?;
        let e_s = self.identity(&self.source(p1)?)?;
        worst = worst.max(self.dist(&self.mult(p1, &inv1)?, &e_s) / scale);
        let e_t = self.identity(&self.target(p1)?)?;
        worst = worst.max(self.dist(&self.mult(&inv1, p1)?, &e_t) / scale);
        worst = worst.max(self.dist(&self.inverse(&inv1)?, p1) / scale);
        let p12 = self.mult(p1, p2)?;
        worst = worst.max(self.base_dist(&self.source(&p12)?, &self.source(p1)?));
        worst = worst.max(self.base_dist(&self.target(&p12)?, &self.target(p2)?));
        Ok(worst)
    }

    /// Associativity residual `‖(p₁p₂)p₃ − p₁(p₂p₃)‖` (relative).
    pub fn associativity_residual(&self, p1: &Pair<Y, Z>, p2: &Pair<Y, Z>, p3: &Pair<Y, Z>) -> Result<f64> {
        let lhs = self.mult(&self.mult(p1, p2)?, p3)?;
        let rhs = self.mult(p1, &self.mult(p2, p3)?)?;
        Ok(self.dist(&lhs, &rhs) / (1.0 + vec_norm(&self.coords(&lhs)?)))
    }

    /// Random composable triple: `p₂`, `p₃` are built from `p₁` through the
    /// composable-pair chart.
    pub fn sample_composable_triple<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<[Pair<Y, Z>; 3]> {
        for _ in 0..100 {
            let v = self.sample_composable_coords(rng, scale)?;
            let (p1, p2) = self.composable_from_coords(&v)?;
            let (fy, fz) = self.fiber_dims();
            let mut w = self.coords(&p2)?;
            let by = self.y.base_dim();
            let bz = self.z.base_dim();
            w.extend(self.y.sample_coords(rng, scale)?[by..by + fy].iter().copied());
            w.extend(self.z.sample_coords(rng, scale)?[bz..bz + fz].iter().copied());
            if let Ok((_, p3)) = self.composable_from_coords(&w) {
                if self.mult(&p2, &p3).is_ok() && self.mult(&self.mult(&p1, &p2)?, &p3).is_ok() {
                    return Ok([p1, p2, p3]);
                }
            }
        }
        Err(Error::NotInDressingDomain("no composable triple after 100 attempts".into()))
    }

    /// `(θ_*(π_𝒴 × π_𝒵) − π_mixed, τ_*(π_𝒴 × π_𝒵) + π_mixed)` residuals at `p`.
    pub fn base_pushforward_residuals(&self, p: &Pair<Y, Z>) -> Result<(f64, f64)> {
        let pi = self.product_bivector(p)?;
        let x = self.coords(p)?;
        let theta = pushforward(|v| self.base_coords(&self.source(&self.from_coords(v)?)?), &x, &pi, "YxZ:base")?;
        let tau = pushforward(|v| self.base_coords(&self.target(&self.from_coords(v)?)?), &x, &pi, "YxZ:base")?;
        let at_theta = self.base_mixed_product(&self.source(p)?)?;
        let at_tau = self.base_mixed_product(&self.target(p)?)?;
        Ok((bivector_residual(&theta, &at_theta, 1.0), bivector_residual(&tau, &at_tau, -1.0)))
    }

    /// Coisotropy residual of the graph of the twisted multiplication in
    /// `((𝒴 × 𝒵)³, π × π × (−π))`, `π = π_𝒴 × π_𝒵`, at the composable pair
    /// with chart coordinates `v`.
    pub fn mult_graph_coisotropy(&self, v: &[C64]) -> Result<f64> {
        let (p1, p2) = self.composable_from_coords(v)?;
        let p12 = self.mult(&p1, &p2)?;
        let ambient = block_sum(
            "(YxZ)^3",
            &[&self.product_bivector(&p1)?, &self.product_bivector(&p2)?, &self.product_bivector(&p12)?.scaled(-1.0)],
        );
        let graph = |w: &[C64]| -> Result<Vec<C64>> {
            let (q1, q2) = self.composable_from_coords(w)?;
            let q12 = self.mult(&q1, &q2)?;
            let mut out = self.coords(&q1)?;
            out.extend(self.coords(&q2)?);
            out.extend(self.coords(&q12)?);
            Ok(out)
        };
        coisotropy_residual(graph, v, &ambient)
    }

    /// Round-trip residual `R_ℒ⁻¹(R_ℒ(z̃, ỹ)) = (z̃, ỹ)`.
    pub fn r_l_round_trip(&self, z: &Z::Elem, y: &Y::Elem) -> Result<f64> {
        let (z1, y1) = self.r_l(z, y)?;
        let (z2, y2) = self.r_l_inv(&z1, &y1)?;
        let scale = 1.0 + vec_norm(&self.z.coords(z)?) + vec_norm(&self.y.coords(y)?);
        Ok((self.z.dist(&z2, z) + self.y.dist(&y2, y)) / scale)
    }

    /// Poisson residual of `R_ℒ` on `(𝒵 × 𝒴, π_𝒵 × π_𝒴)`.
    pub fn r_l_poisson_residual(&self, z: &Z::Elem, y: &Y::Elem) -> Result<f64> {
        let dz = self.z.dim();
        let mut x = self.z.coords(z)?;
        x.extend(self.y.coords(y)?);
        let src = block_sum("ZxY", &[&self.z.bivector(z)?, &self.y.bivector(y)?]);
        let (z1, y1) = self.r_l(z, y)?;
        let dst = block_sum("ZxY", &[&self.z.bivector(&z1)?, &self.y.bivector(&y1)?]);
        let f = |v: &[C64]| -> Result<Vec<C64>> {
            let (a, b) = self.r_l(&self.z.from_coords(&v[..dz])?, &self.y.from_coords(&v[dz..])?)?;
            let mut out = self.z.coords(&a)?;
            out.extend(self.y.coords(&b)?);
            Ok(out)
        };
        poisson_map_residual(f, &x, &src, &dst, 1.0)
    }

    /// `eq-Y-twist` residual: `(ỹ₁ỹ₂) ◁_G (γ₂ ⋆ γ₁) = (ỹ₁ ◁_G γ₁)(ỹ₂ ◁_G γ₂)`
    /// with `γ₂ = γ_{μ(ỹ₂), u}` and `γ₁ = γ_{μ(ỹ₁), τ_{G*}(γ₂)}`.
    pub fn y_twist_residual(&self, y1: &Y::Elem, y2: &Y::Elem, u: &CMatrix) -> Result<f64> {
        let g2 = self.gamma_lower(&self.y.moment(y2), u)?;
        let g1 = self.gamma_lower(&self.y.moment(y1), &g2.u_prime)?;
        let lhs = self.y.act(&self.y.mult(y1, y2)?, &gamma_mult_over_gstar(&g2, &g1)?)?;
        let rhs = self.y.mult(&self.y.act(y1, &g1)?, &self.y.act(y2, &g2)?)?;
        Ok(self.y.dist(&lhs, &rhs) / (1.0 + vec_norm(&self.y.coords(&lhs)?)))
    }

    /// `eq-Z-twist` residual: `(z̃₁z̃₂) ◁_{G*} (γ₁γ₂) = (z̃₁ ◁_{G*} γ₁)(z̃₂ ◁_{G*} γ₂)`
    /// with `γ₁ = γ_{g, μ(z̃₁)}` and `γ₂ = γ_{τ_G(γ₁), μ(z̃₂)}`.
    pub fn z_twist_residual(&self, z1: &Z::Elem, z2: &Z::Elem, g: &CMatrix) -> Result<f64> {
        let g1 = self.gamma_lower(g, &self.z.moment(z1))?;
        let g2 = self.gamma_lower(&g1.b_prime, &self.z.moment(z2))?;
        let lhs = self.z.act(&self.z.mult(z1, z2)?, &gamma_mult_over_g(&g1, &g2)?)?;
        let rhs = self.z.mult(&self.z.act(z1, &g1)?, &self.z.act(z2, &g2)?)?;
        Ok(self.z.dist(&lhs, &rhs) / (1.0 + vec_norm(&self.z.coords(&lhs)?)))
    }

    /// Relative residual of `μ(x₁x₂) = μ(x₁)μ(x₂)` for both factors.
    pub fn moment_morphism_residual(&self, y1: &Y::Elem, y2: &Y::Elem, z1: &Z::Elem, z2: &Z::Elem) -> Result<f64> {
        let my = self.y.moment(&self.y.mult(y1, y2)?);
        let py = self.y.moment(y1) * self.y.moment(y2);
        let mz = self.z.moment(&self.z.mult(z1, z2)?);
        let pz = self.z.moment(z1) * self.z.moment(z2);
        Ok((dist(&my, &py) / (1.0 + norm(&py))).max(dist(&mz, &pz) / (1.0 + norm(&pz))))
    }

    /// Base compatibility of the dressing action on `𝒴` (largest over the
    /// dual basis): `θ_𝒴(ϱ_𝒴(ξ)(ỹ)) = ϱ_Y(Ad*_{μ(ỹ)⁻¹}ξ)(θ_𝒴(ỹ))`, with
    /// `ϱ_𝒴(ξ)(ỹ) = d/dt ỹ ◁_G γ_{μ(ỹ), exp(tξ)}`. Here `Ad*_{g⁻¹}` is the
    /// transpose of `Ad_{g⁻¹}`, which is [`DualPair::coadjoint`] at `g`.
    pub fn varrho_ad_residual(&self, y: &Y::Elem) -> Result<f64> {
        let g = self.y.moment(y);
        let base = self.y.source(y)?;
        let mut worst: f64 = 0.0;
        for xi in &self.pair.xi_basis {
            let lhs = curve_derivative(
                |s| self.y.base_coords(&self.y.source(&self.y.act(y, &self.gamma_lower(&g, &expm(&(xi * re(s))))?)?)?),
                JACOBIAN_STEP,
            )?;
            let ad = self.pair.coadjoint(&g, xi)?;
            let rhs = curve_derivative(|s| self.y.base_coords(&self.base_right(&base, &expm(&(&ad * re(s))))?), JACOBIAN_STEP)?;
            worst = worst.max(vec_dist(&lhs, &rhs) / (1.0 + vec_norm(&rhs)));
        }
        Ok(worst)
    }

    /// Base compatibility of the dressing action on `𝒵` (largest over the
    /// basis of `𝔤`): `τ_𝒵(ϑ_𝒵(x)(z̃)) = ϑ_Z(Ad*_{μ(z̃)}x)(τ_𝒵(z̃))`, with
    /// `ϑ_𝒵(x)(z̃) = d/dt z̃ ◁_{G*} γ_{exp(tx), μ(z̃)}` and `Ad*_u` the
    /// transpose of `Ad_u`.
    pub fn vartheta_ad_residual(&self, z: &Z::Elem) -> Result<f64> {
        let u = self.z.moment(z);
        let u_inv = inv(&u)?;
        let base = self.z.target(z)?;
        let mut worst: f64 = 0.0;
        for x in &self.pair.x_basis {
            let lhs = curve_derivative(
                |s| self.z.base_coords(&self.z.target(&self.z.act(z, &self.gamma_lower(&expm(&(x * re(s))), &u)?)?)?),
                JACOBIAN_STEP,
            )?;
            let ad = self.pair.coadjoint_dual(&u_inv, x)?;
            let rhs = curve_derivative(|s| self.z.base_coords(&self.base_left(&expm(&(&ad * re(s))), &base)?), JACOBIAN_STEP)?;
            worst = worst.max(vec_dist(&lhs, &rhs) / (1.0 + vec_norm(&rhs)));
        }
        Ok(worst)
    }
}

/// `𝒢^{ū,ū}` as a twist factor: side `B` uses `μ₊` and `◁_B`, side `B₋`
/// uses `μ₋` and `◁_{B₋}`. The chart is the intrinsic chart `(t, t₋, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdbcFactor {
    /// The groupoid `𝒢^{ū,ū}`.
    pub space: GdbcSpace,
    /// Which action and moment map the factor uses.
    pub side: Side,
}

impl GdbcFactor {
    /// Factor for the word `u` of `SL_n` on the given side.
    pub fn new(word: &crate::lie::WeylWord, n: usize, side: Side) -> Result<Self> {
        Ok(Self { space: GdbcSpace::new(word, word, n)?, side })
    }
}

impl TwistFactor for GdbcFactor {
    type Elem = GdbcElement;
    type Base = CellTuple;

    fn source(&self, x: &GdbcElement) -> Result<CellTuple> {
        Ok(self.space.source(x))
    }

    fn target(&self, x: &GdbcElement) -> Result<CellTuple> {
        Ok(self.space.target(x))
    }

    fn identity(&self, b: &CellTuple) -> Result<GdbcElement> {
        self.space.identity(b)
    }

    fn inverse(&self, x: &GdbcElement) -> Result<GdbcElement> {
        self.space.inverse(x)
    }

    fn mult(&self, x1: &GdbcElement, x2: &GdbcElement) -> Result<GdbcElement> {
        self.space.mult(x1, x2)
    }

    fn moment(&self, x: &GdbcElement) -> CMatrix {
        match self.side {
            Side::B => self.space.mu_plus(x),
            Side::BMinus => self.space.mu_minus(x),
        }
    }

    fn act(&self, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        self.space.act(self.side, x, gamma)
    }

    fn dist(&self, a: &GdbcElement, b: &GdbcElement) -> f64 {
        a.dist(b)
    }

    fn base_dist(&self, a: &CellTuple, b: &CellTuple) -> f64 {
        a.dist(b) / (1.0 + norm(&a.product()))
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn base_dim(&self) -> usize {
        self.space.u.dim()
    }

    fn coords(&self, x: &GdbcElement) -> Result<Vec<C64>> {
        self.space.chart_coords(x)
    }

    fn from_coords(&self, p: &[C64]) -> Result<GdbcElement> {
        self.space.from_chart(p)
    }

    fn base_coords(&self, b: &CellTuple) -> Result<Vec<C64>> {
        self.space.u.coords(b)
    }

    fn bivector(&self, x: &GdbcElement) -> Result<Bivector> {
        Ok(Bivector::new("G:intrinsic", self.space.intrinsic_bivector(x)?.1))
    }

    fn base_bivector(&self, b: &CellTuple) -> Result<Bivector> {
        self.space.u.pi_n(b)
    }

    fn sample_coords<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>> {
        self.space.sample_chart(rng, scale)
    }
}

/// Point `(p, q)` of `T*ℂ ≅ ℂ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotangentPoint {
    /// Fiber coordinate.
    pub p: C64,
    /// Base coordinate.
    pub q: C64,
}

/// `T*ℂ` as the bundle of groups over `ℂ` (`(p, q)(p', q) = (p + p', q)`),
/// with `π = ∂_p ∧ ∂_q`, moment `μ(p, q) = e^{pq} ∈ ℂ*` and the action
/// `(p, q) ◁ (e^{pq}, z) = (z⁻¹p, zq)` of the action groupoid of `ℂ*`.
///
/// On side `B` (the factor `𝒴`) the acting parameter is `z = τ_{G*}(γ)`; on
/// side `B₋` (the factor `𝒵`) it is `z = θ_G(γ)`. The chart is `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotangentFactor {
    /// Which role the factor plays.
    pub side: Side,
}

fn scalar(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

fn scalar_dist(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + a.norm())
}

impl TwistFactor for CotangentFactor {
    type Elem = CotangentPoint;
    type Base = C64;

    fn source(&self, x: &CotangentPoint) -> Result<C64> {
        Ok(x.q)
    }

    fn target(&self, x: &CotangentPoint) -> Result<C64> {
        Ok(x.q)
    }

    fn identity(&self, q: &C64) -> Result<CotangentPoint> {
        Ok(CotangentPoint { p: re(0.0), q: *q })
    }

    fn inverse(&self, x: &CotangentPoint) -> Result<CotangentPoint> {
        Ok(CotangentPoint { p: -x.p, q: x.q })
    }

    fn mult(&self, x1: &CotangentPoint, x2: &CotangentPoint) -> Result<CotangentPoint> {
        let r = scalar_dist(x1.q, x2.q);
        if r > COMPOSABLE_TOL {
            return Err(Error::NotComposable { residual: r });
        }
        Ok(CotangentPoint { p: x1.p + x2.p, q: x1.q })
    }

    fn moment(&self, x: &CotangentPoint) -> CMatrix {
        scalar((x.p * x.q).exp())
    }

    fn act(&self, x: &CotangentPoint, gamma: &GammaElement) -> Result<CotangentPoint> {
        let (anchor, z) = match self.side {
            Side::B => (gamma.b[(0, 0)], gamma.u_prime[(0, 0)]),
            Side::BMinus => (gamma.u[(0, 0)], gamma.b[(0, 0)]),
        };
        let r = scalar_dist((x.p * x.q).exp(), anchor);
        if r > COMPOSABLE_TOL {
            return Err(Error::NotComposable { residual: r });
        }
        Ok(CotangentPoint { p: x.p / z, q: x.q * z })
    }

    fn dist(&self, a: &CotangentPoint, b: &CotangentPoint) -> f64 {
        (a.p - b.p).norm() + (a.q - b.q).norm()
    }

    fn base_dist(&self, a: &C64, b: &C64) -> f64 {
        scalar_dist(*a, *b)
    }

    fn dim(&self) -> usize {
        2
    }

    fn base_dim(&self) -> usize {
        1
    }

    fn coords(&self, x: &CotangentPoint) -> Result<Vec<C64>> {
        Ok(vec![x.q, x.p])
    }

    fn from_coords(&self, v: &[C64]) -> Result<CotangentPoint> {
        if v.len() != 2 {
            return Err(Error::IndexMismatch { expected: 2, found: v.len() });
        }
        Ok(CotangentPoint { p: v[1], q: v[0] })
    }

    fn base_coords(&self, b: &C64) -> Result<Vec<C64>> {
        Ok(vec![*b])
    }

    fn bivector(&self, _x: &CotangentPoint) -> Result<Bivector> {
        // ∂_p ∧ ∂_q in the chart (q, p).
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 0)] = re(1.0);
        m[(0, 1)] = re(-1.0);
        Ok(Bivector { chart: "T*C:(q,p)".into(), coeffs: m })
    }

    fn base_bivector(&self, _b: &C64) -> Result<Bivector> {
        Ok(Bivector::zeros("C", 1))
    }

    fn sample_coords<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>> {
        Ok(vec![complex(rng, scale), complex(rng, scale)])
    }
}

/// The twist of `T*ℂ` with itself over `G = G* = ℂ*`.
pub type CotangentTwist = TwistContext<CotangentFactor, CotangentFactor>;

/// The twist of `𝒢^{ū,ū}` (acted on by `Γ_B`) and `𝒢^{v̄,v̄}` (acted on by `Γ_{B₋}`).
pub type GdbcTwist = TwistContext<GdbcFactor, GdbcFactor>;

/// The `T*ℂ` instance.
pub fn cotangent_twist() -> CotangentTwist {
    TwistContext::new(CotangentFactor { side: Side::B }, CotangentFactor { side: Side::BMinus }, DualPair::scalar())
}

/// The GDBC instance for words `u`, `v` of `SL_n`.
pub fn gdbc_twist(u: &crate::lie::WeylWord, v: &crate::lie::WeylWord, n: usize) -> Result<GdbcTwist> {
    Ok(TwistContext::new(GdbcFactor::new(u, n, Side::B)?, GdbcFactor::new(v, n, Side::BMinus)?, DualPair::borel(n)))
}

/// Twisted pair of GDBC elements.
pub type KappaPair = TwistedPair<GdbcElement, GdbcElement>;

impl GdbcTwist {
    /// `𝒢^{w̄,w̄}` for the concatenated word `w = (u, v)`.
    pub fn concatenated_space(&self) -> GdbcSpace {
        let w = self.y.space.u.concat(&self.z.space.u);
        GdbcSpace::from_charts(w.clone(), w)
    }

    /// Concatenation `κ(ỹ, z̃) = ([c, b[c']], b_v̄(b, c')b', b₋b_{−ū}(b'₋, c₋), [c₋^{b'₋}, c'₋])`.
    pub fn kappa(&self, p: &KappaPair) -> Result<GdbcElement> {
        let (y, z) = (&p.y, &p.z);
        let (bc, bv) = self.z.space.u.act_b(&y.b, &z.c)?;
        let (bu, cm) = self.y.space.u.act_bminus(&y.cm, &z.bm)?;
        let x = GdbcElement { c: y.c.concat(&bc), b: bv * &z.b, bm: &y.bm * bu, cm: cm.concat(&z.cm) };
        self.concatenated_space().validate(&x)?;
        Ok(x)
    }

    /// Torus action defining the quotient `𝒦_{ū,v̄}`:
    /// `(ỹ, z̃)·t = ((c, bt, b₋b_{−ū}(t, c₋), c₋^t), (t⁻¹[c'], b_v̄(t⁻¹, c')b', t⁻¹b'₋, c'₋))`.
    pub fn t_act(&self, p: &KappaPair, t: &CMatrix) -> Result<KappaPair> {
        let (y, z) = (&p.y, &p.z);
        let t_inv = inv(t)?;
        let (bu, cm) = self.y.space.u.act_bminus(&y.cm, t)?;
        let (c, bv) = self.z.space.u.act_b(&t_inv, &z.c)?;
        let y2 = GdbcElement { c: y.c.clone(), b: &y.b * t, bm: &y.bm * bu, cm };
        let z2 = GdbcElement { c, b: bv * &z.b, bm: &t_inv * &z.bm, cm: z.cm.clone() };
        self.y.space.validate(&y2)?;
        self.z.space.validate(&z2)?;
        Ok(TwistedPair { y: y2, z: z2 })
    }

    /// Membership of `x ∈ 𝒢^{w̄,w̄}` in the open set `(𝒢^{w̄,w̄})₀`:
    /// `(h₁⋯h_n)⁻¹g₁⋯g_n ∈ B₋B` with `g₁⋯g_n = c₁⋯c_n` and
    /// `h₁⋯h_n = b₋·(c₋)₁⋯(c₋)_n` over the first `n = |ū|` factors.
    pub fn open_condition(&self, x: &GdbcElement) -> Result<()> {
        let n = self.y.space.u.len();
        let prefix = |c: &CellTuple| c.factors[..n].iter().fold(crate::linalg::eye(self.pair.n), |acc, f| acc * f);
        let h = &x.bm * prefix(&x.cm);
        crate::linalg::gauss_decompose(&(inv(&h)? * prefix(&x.c)))?;
        Ok(())
    }

    /// Largest relative residual of the two cocycle identities
    /// `b_v̄(b₂⁻¹, c'₋₁)⁻¹ = b_v̄(b₂, c'₂)` and
    /// `b_{−ū}(b'₋₁⁻¹, c₂)⁻¹ = b_{−ū}(b'₋₁, c₋₁)` at a composable pair.
    pub fn cocycle_inverse_residual(&self, p1: &KappaPair, p2: &KappaPair) -> Result<f64> {
        let (y1, z1, y2, z2) = (&p1.y, &p1.z, &p2.y, &p2.z);
        let v = &self.z.space.u;
        let u = &self.y.space.u;
        let lhs_v = inv(&v.act_b(&inv(&y2.b)?, &z1.cm)?.1)?;
        let rhs_v = v.act_b(&y2.b, &z2.c)?.1;
        let lhs_u = inv(&u.act_bminus(&y2.c, &inv(&z1.bm)?)?.0)?;
        let rhs_u = u.act_bminus(&y1.cm, &z1.bm)?.0;
        Ok((dist(&lhs_v, &rhs_v) / (1.0 + norm(&rhs_v))).max(dist(&lhs_u, &rhs_u) / (1.0 + norm(&rhs_u))))
    }

    /// Homomorphism residual `‖κ(p₁·p₂) − κ(p₁)κ(p₂)‖` (relative), with the
    /// product on the left computed by the twist multiplication.
    pub fn kappa_hom_residual(&self, p1: &KappaPair, p2: &KappaPair) -> Result<f64> {
        let lhs = self.kappa(&self.mult(p1, p2)?)?;
        let w = self.concatenated_space();
        let rhs = w.mult(&self.kappa(p1)?, &self.kappa(p2)?)?;
        Ok(lhs.dist(&rhs) / (1.0 + rhs.dist(&w.identity(&w.source(&rhs))?)))
    }

    /// Residual of `κ(p·t) = κ(p)` and `θ(p·t) = θ(p)`.
    pub fn t_invariance_residual(&self, p: &KappaPair, t: &CMatrix) -> Result<f64> {
        let q = self.t_act(p, t)?;
        let (a, b) = (self.kappa(p)?, self.kappa(&q)?);
        let w = self.concatenated_space();
        let k = a.dist(&b) / (1.0 + a.dist(&w.identity(&w.source(&a))?));
        Ok(k.max(self.base_dist(&self.source(p)?, &self.source(&q)?)).max(self.base_dist(&self.target(p)?, &self.target(&q)?)))
    }

    /// Associativity residual of the quotient multiplication, compared
    /// through `κ`: `κ((p₁p₂)p₃) = κ(p₁(p₂p₃))`. Representatives of the two
    /// sides may differ by an element of `T` when the square-root branch of
    /// the canonical `γ` changes.
    pub fn quotient_associativity_residual(&self, p1: &KappaPair, p2: &KappaPair, p3: &KappaPair) -> Result<f64> {
        let lhs = self.kappa(&self.mult(&self.mult(p1, p2)?, p3)?)?;
        let rhs = self.kappa(&self.mult(p1, &self.mult(p2, p3)?)?)?;
        let w = self.concatenated_space();
        Ok(lhs.dist(&rhs) / (1.0 + rhs.dist(&w.identity(&w.source(&rhs))?)))
    }

    /// Residual of `κ(p₁·p₂)` under a change of square-root branch for the
    /// canonical `γ`: the quotient product must not depend on the choice.
    pub fn branch_independence_residual(&self, p1: &KappaPair, p2: &KappaPair, branch: Branch) -> Result<f64> {
        let a = self.kappa(&self.mult(p1, p2)?)?;
        let b = self.kappa(&self.with_branch(branch).mult(p1, p2)?)?;
        let w = self.concatenated_space();
        Ok(a.dist(&b) / (1.0 + a.dist(&w.identity(&w.source(&a))?)))
    }
}

/// A `T*ℂ` twisted pair from the coordinates `(p₁, p₂, q₁, q₂)`.
pub fn cotangent_pair(p1: C64, p2: C64, q1: C64, q2: C64) -> TwistedPair<CotangentPoint, CotangentPoint> {
    TwistedPair { y: CotangentPoint { p: p1, q: q1 }, z: CotangentPoint { p: p2, q: q2 } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::WeylWord;
    use crate::sampling::{lower_borel, sample_rng, upper_borel};

    fn c(x: f64) -> C64 {
        re(x)
    }

    #[test]
    fn cotangent_example_values() {
        let ctx = cotangent_twist();
        let p = cotangent_pair(c(1.0), c(0.0), c(1.0), c(1.0));
        let s = ctx.source(&p).unwrap();
        assert!((s.0 - c(1.0)).norm() < 1e-15 && (s.1 - c(1f64.exp())).norm() < 1e-14);
        let t = ctx.target(&p).unwrap();
        assert!((t.0 - c(1.0)).norm() < 1e-15 && (t.1 - c(1.0)).norm() < 1e-15);
        let q = cotangent_pair(c(0.0), c(2.0), c(1.0), c(1.0));
        let m = ctx.mult(&p, &q).unwrap();
        let expected = cotangent_pair(c(1.0), c(2.0), c(1.0), c(1.0));
        assert!(ctx.dist(&m, &expected) < 1e-14);
    }

    #[test]
    fn cotangent_base_is_quadratic() {
        let ctx = cotangent_twist();
        let mut rng = sample_rng(1, "twist-test", 0);
        let p = ctx.sample(&mut rng, 0.8).unwrap();
        let (a, b) = ctx.base_pushforward_residuals(&p).unwrap();
        assert!(a < 1e-8 && b < 1e-8, "{a:e} {b:e}");
        let s = ctx.source(&p).unwrap();
        let mixed = ctx.base_mixed_product(&s).unwrap();
        assert!((mixed.coeffs[(0, 1)] + s.0 * s.1).norm() < 1e-8);
    }

    #[test]
    fn cotangent_axioms_and_coisotropy() {
        let ctx = cotangent_twist();
        let mut rng = sample_rng(2, "twist-test", 0);
        let [p1, p2, p3] = ctx.sample_composable_triple(&mut rng, 0.8).unwrap();
        assert!(ctx.axiom_residual(&p1, &p2).unwrap() < 1e-12);
        assert!(ctx.associativity_residual(&p1, &p2, &p3).unwrap() < 1e-12);
        let v = ctx.sample_composable_coords(&mut rng, 0.8).unwrap();
        assert!(ctx.mult_graph_coisotropy(&v).unwrap() < 1e-8);
    }

    fn sl2_twist() -> GdbcTwist {
        let w = WeylWord::new(vec![1], 2).unwrap();
        gdbc_twist(&w, &w, 2).unwrap()
    }

    #[test]
    fn gdbc_twist_axioms() {
        let ctx = sl2_twist();
        let mut rng = sample_rng(3, "twist-test", 0);
        let [p1, p2, p3] = ctx.sample_composable_triple(&mut rng, 0.4).unwrap();
        let a = ctx.axiom_residual(&p1, &p2).unwrap();
        assert!(a < 1e-9, "axioms {a:e}");
        let r = ctx.quotient_associativity_residual(&p1, &p2, &p3).unwrap();
        assert!(r < 1e-9, "associativity {r:e}");
    }

    #[test]
    fn kappa_is_a_homomorphism_and_t_invariant() {
        let ctx = sl2_twist();
        let w = ctx.concatenated_space();
        for seed in 0..6 {
            let mut rng = sample_rng(seed, "twist-kappa", 0);
            let v = ctx.sample_composable_coords(&mut rng, 0.4).unwrap();
            let (p1, p2) = ctx.composable_from_coords(&v).unwrap();
            let k1 = ctx.kappa(&p1).unwrap();
            assert!(w.residual(&k1) < 1e-10);
            ctx.open_condition(&k1).unwrap();
            let h = ctx.kappa_hom_residual(&p1, &p2).unwrap();
            assert!(h < 1e-8, "homomorphism {h:e}");
            let l = ctx.cocycle_inverse_residual(&p1, &p2).unwrap();
            assert!(l < 1e-10, "cocycle identities {l:e}");
            let t = crate::sampling::torus(&mut rng, 2, 0.5);
            let r = ctx.t_invariance_residual(&p1, &t).unwrap();
            assert!(r < 1e-9, "T-invariance {r:e}");
            let flip = crate::linalg::diag(&[re(-1.0), re(-1.0)]);
            let b = ctx.branch_independence_residual(&p1, &p2, Branch::Near(flip)).unwrap();
            assert!(b < 1e-8, "branch independence {b:e}");
        }
    }

    #[test]
    fn kappa_of_identities_is_an_identity() {
        let ctx = sl2_twist();
        let mut rng = sample_rng(9, "twist-kappa", 0);
        let p = ctx.sample(&mut rng, 0.4).unwrap();
        let e = ctx.identity(&ctx.source(&p).unwrap()).unwrap();
        let k = ctx.kappa(&e).unwrap();
        let w = ctx.concatenated_space();
        assert!(k.dist(&w.identity(&w.source(&k)).unwrap()) < 1e-10);
    }

    #[test]
    fn gdbc_twisted_multiplicativity_and_r_l() {
        let ctx = sl2_twist();
        let mut rng = sample_rng(4, "twist-test", 0);
        let (y1, y2) = ctx.y.space.composable_from_chart(&ctx.y.space.sample_composable_chart(&mut rng, 0.4).unwrap()).unwrap();
        let (z1, z2) = ctx.z.space.composable_from_chart(&ctx.z.space.sample_composable_chart(&mut rng, 0.4).unwrap()).unwrap();
        let u = lower_borel(&mut rng, 2, 0.3);
        let g = upper_borel(&mut rng, 2, 0.3);
        assert!(ctx.y_twist_residual(&y1, &y2, &u).unwrap() < 1e-9);
        assert!(ctx.z_twist_residual(&z1, &z2, &g).unwrap() < 1e-9);
        assert!(ctx.moment_morphism_residual(&y1, &y2, &z1, &z2).unwrap() < 1e-10);
        assert!(ctx.r_l_round_trip(&z1, &y1).unwrap() < 1e-9);
        let r = ctx.r_l_poisson_residual(&z1, &y1).unwrap();
        assert!(r < 1e-6, "R_L Poisson residual {r:e}");
    }

    #[test]
    fn gdbc_twist_base_and_varrho() {
        let ctx = sl2_twist();
        let mut rng = sample_rng(5, "twist-test", 0);
        let p = ctx.sample(&mut rng, 0.4).unwrap();
        let (a, b) = ctx.base_pushforward_residuals(&p).unwrap();
        assert!(a < 1e-6 && b < 1e-6, "base residuals {a:e} {b:e}");
        let r = ctx.varrho_ad_residual(&p.y).unwrap();
        assert!(r < 1e-5, "varrho-Ad residual {r:e}");
        let r = ctx.vartheta_ad_residual(&p.z).unwrap();
        assert!(r < 1e-5, "vartheta-Ad residual {r:e}");
    }

    #[test]
    fn gdbc_twist_graph_is_coisotropic() {
        let ctx = sl2_twist();
        let mut rng = sample_rng(6, "twist-test", 0);
        let v = ctx.sample_composable_coords(&mut rng, 0.4).unwrap();
        let r = ctx.mult_graph_coisotropy(&v).unwrap();
        assert!(r < 1e-6, "coisotropy {r:e}");
    }
}
