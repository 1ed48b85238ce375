//! Generalized double Bruhat cells `𝒢^{ū,v̄} = {([c], b, b₋, [c₋]) : c̲b = b₋c̲₋}`:
//! the groupoid structure for `ū = v̄`, the bivector `π_{ū,v̄}`, the moment
//! maps `μ±`, the right actions `◁_B`, `◁_{B₋}` of the double symplectic
//! groupoid, and residuals of the Poisson-geometric statements about them.
//!
//! Two coordinate systems are used:
//! * the ambient chart `(t, b, b₋, t₋)` of `C_ū × B × B₋ × C_v̄`, where
//!   `π_{ū,v̄}` is assembled and `𝒢` sits as a Poisson submanifold;
//! * the intrinsic chart `(t, t₋, h)` of `𝒢`, where `h` lists the first
//!   `n − 1` diagonal entries of `b`, the strictly upper entries of `b` solve
//!   the linear system `strict_upper(c̲·b·c̲₋⁻¹) = 0`, and `b₋ = c̲·b·c̲₋⁻¹`.

use nalgebra::DVector;
use rand::Rng;

use crate::cells::{CellTuple, TupleChart};
use crate::charts::{borel_coords, borel_dim, borel_from_coords, Borel};
use crate::double::{
    bisection_s, eps_b, eps_bminus, gamma_inverse_over_g, gamma_lower, gamma_mult_over_g, gamma_mult_over_gstar, GammaElement,
    COMPOSABLE_TOL,
};
use crate::error::{Error, Result};
use crate::lie::{DualBorelBases, WeylWord};
use crate::linalg::{
    curve_derivative, dist, elementary, expm, eye, inv, lower_defect, norm, numeric_jacobian, re, upper_defect, CMatrix, C64,
    JACOBIAN_STEP,
};
use crate::poisson::{
    block_sum, bivector_residual, coisotropy_residual, dressing_field, mixed_product, pi_gamma_at, pi_st_borel, place,
    pushforward, pushforward_with_jacobian, tangency_residual, wedge, Bivector, Invariance,
};
use crate::sampling::{complex_vec, torus};

/// Relative tolerance of the defining relation `c̲b = b₋c̲₋`.
pub const GDBC_TOL: f64 = 1e-10;

/// Smallest accepted ratio `σ_min/σ_max` of the linear system solved by the
/// intrinsic chart.
pub const CHART_CONDITION: f64 = 1e-8;

/// Ratio `σ_min/σ_max` required of randomly sampled chart points.
pub const SAMPLE_CONDITION: f64 = 1e-2;

/// Bound on `‖b‖_F` and `‖b₋‖_F` for randomly sampled elements. The chart
/// `(t, t₋, h)` degenerates where a Borel component escapes to infinity
/// (for `SL_2`, `u = v = (s)`: `(b₋)₁₁ = t·b₁₁/t₋`), and finite-difference
/// residuals lose accuracy on approach.
pub const SAMPLE_NORM_BOUND: f64 = 10.0;

/// Element `([c], b, b₋, [c₋])` of `𝒢^{ū,v̄}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdbcElement {
    /// Cell tuple for `ū`.
    pub c: CellTuple,
    /// Upper Borel component.
    pub b: CMatrix,
    /// Lower Borel component.
    pub bm: CMatrix,
    /// Cell tuple for `v̄`.
    pub cm: CellTuple,
}

impl GdbcElement {
    /// `‖c̲b − b₋c̲₋‖ / (1 + ‖c̲b‖)`.
    pub fn constraint_residual(&self) -> f64 {
        let lhs = self.c.product() * &self.b;
        let rhs = &self.bm * self.cm.product();
        dist(&lhs, &rhs) / (1.0 + norm(&lhs))
    }

    /// Sum of componentwise distances.
    pub fn dist(&self, other: &Self) -> f64 {
        self.c.dist(&other.c) + dist(&self.b, &other.b) + dist(&self.bm, &other.bm) + self.cm.dist(&other.cm)
    }
}

/// Which double-groupoid action a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `◁_B`, the action of `(Γ_B, −π_Γ)` along `μ₊`.
    B,
    /// `◁_{B₋}`, the action of `(Γ_{B₋}, π_Γ)` along `μ₋`.
    BMinus,
}

/// The space `𝒢^{ū,v̄}` for fixed words and standard representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GdbcSpace {
    /// Rank parameter (`SL_n`).
    pub n: usize,
    /// Tuple chart for `ū`.
    pub u: TupleChart,
    /// Tuple chart for `v̄`.
    pub v: TupleChart,
}

fn bminus_coords(m: &CMatrix) -> Vec<C64> {
    borel_coords(m, Borel::Lower)
}

fn b_coords(m: &CMatrix) -> Vec<C64> {
    borel_coords(m, Borel::Upper)
}

/// Point of `Γ` in the `p_L` chart `(b, u)`.
fn gamma_from_pl(q: &[C64], n: usize) -> Result<GammaElement> {
    let db = borel_dim(n);
    let b = borel_from_coords(&q[..db], n, Borel::Upper)?;
    let u = borel_from_coords(&q[db..], n, Borel::Lower)?;
    gamma_lower(&b, &u)
}

fn gamma_pl(g: &GammaElement) -> Vec<C64> {
    let mut q = b_coords(&g.b);
    q.extend(bminus_coords(&g.u));
    q
}

/// Whether both Borel components are within [`SAMPLE_NORM_BOUND`].
fn is_bounded(x: &GdbcElement) -> bool {
    norm(&x.b) <= SAMPLE_NORM_BOUND && norm(&x.bm) <= SAMPLE_NORM_BOUND
}

fn check_match(a: &CMatrix, b: &CMatrix) -> Result<()> {
    let r = dist(a, b) / (1.0 + norm(a));
    if r > COMPOSABLE_TOL {
        return Err(Error::NotComposable { residual: r });
    }
    Ok(())
}

impl GdbcSpace {
    /// `𝒢^{ū,v̄}` with one simple cell per letter.
    pub fn new(u: &WeylWord, v: &WeylWord, n: usize) -> Result<Self> {
        Ok(Self { n, u: TupleChart::from_word(u, n)?, v: TupleChart::from_word(v, n)? })
    }

    /// Build from explicit tuple charts.
    pub fn from_charts(u: TupleChart, v: TupleChart) -> Self {
        Self { n: u.n, u, v }
    }

    /// True when `ū = v̄`, the case carrying a groupoid structure.
    pub fn is_groupoid(&self) -> bool {
        self.u == self.v
    }

    /// `dim 𝒢 = l(u) + l(v) + n − 1`.
    pub fn dim(&self) -> usize {
        self.u.dim() + self.v.dim() + self.n - 1
    }

    /// Dimension of the ambient chart `(t, b, b₋, t₋)`.
    pub fn ambient_dim(&self) -> usize {
        self.u.dim() + 2 * borel_dim(self.n) + self.v.dim()
    }

    /// Offsets of the four blocks of the ambient chart.
    pub fn block_offsets(&self) -> [usize; 4] {
        let db = borel_dim(self.n);
        [0, self.u.dim(), self.u.dim() + db, self.u.dim() + 2 * db]
    }

    /// Total defect of `x`: defining relation, triangularity, cell membership.
    pub fn residual(&self, x: &GdbcElement) -> f64 {
        if x.c.factors.len() != self.u.len() || x.cm.factors.len() != self.v.len() {
            return f64::INFINITY;
        }
        x.constraint_residual()
            + lower_defect(&x.b)
            + upper_defect(&x.bm)
            + self.u.membership_residual(&x.c)
            + self.v.membership_residual(&x.cm)
    }

    /// Check the invariant of `x`.
    pub fn validate(&self, x: &GdbcElement) -> Result<()> {
        if x.c.factors.len() != self.u.len() || x.cm.factors.len() != self.v.len() {
            return Err(Error::InvariantViolation("tuple length does not match the words".into()));
        }
        let r = x.constraint_residual();
        if r > GDBC_TOL {
            return Err(Error::InvariantViolation(format!("c̲b ≠ b₋c̲₋ (defect {r:.3e})")));
        }
        let tri = lower_defect(&x.b) + upper_defect(&x.bm);
        if tri > GDBC_TOL {
            return Err(Error::InvariantViolation(format!("Borel components not triangular (defect {tri:.3e})")));
        }
        let cell = self.u.membership_residual(&x.c).max(self.v.membership_residual(&x.cm));
        if cell > crate::cells::CELL_TOL {
            return Err(Error::NotInCell(format!("membership defect {cell:.3e}")));
        }
        Ok(())
    }

    fn validated(&self, x: GdbcElement) -> Result<GdbcElement> {
        self.validate(&x)?;
        Ok(x)
    }

    /// Solve for the upper Borel component with the given diagonal; returns
    /// `(b, σ_min/σ_max)` of the linear system.
    fn solve_b(&self, c: &CMatrix, cm_inv: &CMatrix, h: &[C64]) -> Result<(CMatrix, f64)> {
        let n = self.n;
        let prod: C64 = h.iter().product();
        if prod.norm() < 1e-300 {
            return Err(Error::InvariantViolation("degenerate diagonal".into()));
        }
        let mut d = eye(n);
        for (k, z) in h.iter().enumerate() {
            d[(k, k)] = *z;
        }
        d[(n - 1, n - 1)] = re(1.0) / prod;
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let k = slots.len();
        let a = CMatrix::from_fn(k, k, |r, col| {
            let (p, q) = slots[col];
            let img = c * elementary(n, p, q) * cm_inv;
            img[slots[r]]
        });
        let rhs0 = c * &d * cm_inv;
        let rhs = DVector::from_iterator(k, slots.iter().map(|&s| -rhs0[s]));
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if smax == 0.0 { 0.0 } else { smin / smax };
        if ratio < CHART_CONDITION {
            return Err(Error::RankDeficient { sigma_min: ratio });
        }
        let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::InvariantViolation(e.to_string()))?;
        let mut b = d;
        for (s, z) in slots.iter().zip(sol.iter()) {
            b[*s] = *z;
        }
        Ok((b, ratio))
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_chart_with_ratio(&self, p: &[C64]) -> Result<(GdbcElement, f64)> {
        if p.len() != self.dim() {
            return Err(Error::IndexMismatch { expected: self.dim(), found: p.len() });
        }
        let (du, dv) = (self.u.dim(), self.v.dim());
        let c = self.u.param(&p[..du])?;
        let cm = self.v.param(&p[du..du + dv])?;
        let cm_inv = inv(&cm.product())?;
        let cp = c.product();
        let (b, ratio) = self.solve_b(&cp, &cm_inv, &p[du + dv..])?;
        let mut bm = &cp * &b * &cm_inv;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                bm[(i, j)] = re(0.0);
            }
        }
        Ok((GdbcElement { c, b, bm, cm }, ratio))
    }

    /// Element with intrinsic coordinates `(t, t₋, h)`.
    pub fn from_chart(&self, p: &[C64]) -> Result<GdbcElement> {
        Ok(self.from_chart_with_ratio(p)?.0)
    }

    /// Intrinsic coordinates `(t, t₋, h)` of `x`.
    pub fn chart_coords(&self, x: &GdbcElement) -> Result<Vec<C64>> {
        let mut p = self.u.coords(&x.c)?;
        p.extend(self.v.coords(&x.cm)?);
        p.extend((0..self.n - 1).map(|k| x.b[(k, k)]));
        Ok(p)
    }

    /// Ambient coordinates `(t, b, b₋, t₋)` of `x`.
    pub fn ambient(&self, x: &GdbcElement) -> Result<Vec<C64>> {
        let mut a = self.u.coords(&x.c)?;
        a.extend(b_coords(&x.b));
        a.extend(bminus_coords(&x.bm));
        a.extend(self.v.coords(&x.cm)?);
        Ok(a)
    }

    /// Random intrinsic coordinates: cell coordinates with parts in
    /// `[−scale, scale]` and `h = exp(z)` with `z` of size `scale/2`, retried
    /// until the chart system is well conditioned (at most 100 attempts).
    pub fn sample_chart<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>> {
        for _ in 0..100 {
            let mut p = complex_vec(rng, self.u.dim() + self.v.dim(), scale);
            let t = torus(rng, self.n, scale / 2.0);
            p.extend((0..self.n - 1).map(|k| t[(k, k)]));
            if let Ok((x, ratio)) = self.from_chart_with_ratio(&p) {
                if ratio >= SAMPLE_CONDITION && is_bounded(&x) && self.validate(&x).is_ok() {
                    return Ok(p);
                }
            }
        }
        Err(Error::NotInCell("no well-conditioned sample after 100 attempts".into()))
    }

    /// Random element of `𝒢`.
    pub fn sample<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<GdbcElement> {
        let p = self.sample_chart(rng, scale)?;
        self.from_chart(&p)
    }

    /// Random composable pair in the chart `(t, t₋, h, t'₋, h')`, with
    /// `x₁ = (t, t₋, h)` and `x₂ = (t₋, t'₋, h')`.
    pub fn sample_composable_chart<R: Rng>(&self, rng: &mut R, scale: f64) -> Result<Vec<C64>> {
        self.require_groupoid()?;
        for _ in 0..100 {
            let p1 = self.sample_chart(rng, scale)?;
            let mut tail = complex_vec(rng, self.v.dim(), scale);
            let t = torus(rng, self.n, scale / 2.0);
            tail.extend((0..self.n - 1).map(|k| t[(k, k)]));
            let mut p = p1;
            p.extend(tail);
            if let Ok((x1, x2)) = self.composable_from_chart(&p) {
                let ok2 = self
                    .from_chart_with_ratio(&self.second_chart(&p))
                    .map(|(x, r)| r >= SAMPLE_CONDITION && is_bounded(&x))
                    .unwrap_or(false);
                if ok2 && self.mult(&x1, &x2).is_ok() {
                    return Ok(p);
                }
            }
        }
        Err(Error::NotInCell("no composable sample after 100 attempts".into()))
    }

    fn second_chart(&self, p: &[C64]) -> Vec<C64> {
        let (du, dv, h) = (self.u.dim(), self.v.dim(), self.n - 1);
        let mut q = p[du..du + dv].to_vec();
        q.extend_from_slice(&p[du + dv + h..]);
        q
    }

    /// Composable pair with chart coordinates `(t, t₋, h, t'₋, h')`.
    pub fn composable_from_chart(&self, p: &[C64]) -> Result<(GdbcElement, GdbcElement)> {
        let d = self.dim();
        let extra = self.v.dim() + self.n - 1;
        if p.len() != d + extra {
            return Err(Error::IndexMismatch { expected: d + extra, found: p.len() });
        }
        Ok((self.from_chart(&p[..d])?, self.from_chart(&self.second_chart(p))?))
    }

    fn require_groupoid(&self) -> Result<()> {
        if !self.is_groupoid() {
            return Err(Error::InvariantViolation("groupoid structure needs equal words".into()));
        }
        Ok(())
    }

    /// Source `θ(x) = [c]`.
    pub fn source(&self, x: &GdbcElement) -> CellTuple {
        x.c.clone()
    }

    /// Target `τ(x) = [c₋]`.
    pub fn target(&self, x: &GdbcElement) -> CellTuple {
        x.cm.clone()
    }

    /// Identity `ε(c) = (c, e, e, c)`.
    pub fn identity(&self, c: &CellTuple) -> Result<GdbcElement> {
        self.require_groupoid()?;
        let e = eye(self.n);
        self.validated(GdbcElement { c: c.clone(), b: e.clone(), bm: e, cm: c.clone() })
    }

    /// Inverse `ι(c, b, b₋, c₋) = (c₋, b⁻¹, b₋⁻¹, c)`.
    pub fn inverse(&self, x: &GdbcElement) -> Result<GdbcElement> {
        self.require_groupoid()?;
        self.validate(x)?;
        self.validated(GdbcElement { c: x.cm.clone(), b: inv(&x.b)?, bm: inv(&x.bm)?, cm: x.c.clone() })
    }

    /// Product `(c, bb', b₋b'₋, c'₋)`, defined when `c₋ = c'`.
    pub fn mult(&self, x1: &GdbcElement, x2: &GdbcElement) -> Result<GdbcElement> {
        self.require_groupoid()?;
        let r = x1.cm.dist(&x2.c) / (1.0 + x1.cm.product().norm());
        if r > COMPOSABLE_TOL {
            return Err(Error::NotComposable { residual: r });
        }
        self.validated(GdbcElement { c: x1.c.clone(), b: &x1.b * &x2.b, bm: &x1.bm * &x2.bm, cm: x2.cm.clone() })
    }

    /// Moment map `μ₊(x) = b`.
    pub fn mu_plus(&self, x: &GdbcElement) -> CMatrix {
        x.b.clone()
    }

    /// Moment map `μ₋(x) = b₋`.
    pub fn mu_minus(&self, x: &GdbcElement) -> CMatrix {
        x.bm.clone()
    }

    /// `x ◁_B γ = ([c^{u'}], b', b_{−ū}(u', c)⁻¹ b₋ b_{−v̄}(u, c₋), [c₋^u])`
    /// for `γ = (b, u, u', b')` with `θ_B(γ) = μ₊(x)`.
    pub fn act_gamma_b(&self, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        check_match(&x.b, &gamma.b)?;
        self.validated(self.act_gamma_b_unchecked(x, gamma)?)
    }

    /// The formula of [`Self::act_gamma_b`] without the composability and
    /// invariant checks (its smooth extension to all of `Γ`).
    pub fn act_gamma_b_unchecked(&self, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        let (bu, c_new) = self.u.act_bminus(&x.c, &gamma.u_prime)?;
        let (bv, cm_new) = self.v.act_bminus(&x.cm, &gamma.u)?;
        Ok(GdbcElement { c: c_new, b: gamma.b_prime.clone(), bm: inv(&bu)? * &x.bm * bv, cm: cm_new })
    }

    /// `x ◁_{B₋} γ₋ = ([g[c]], b_ū(g, c) b b_v̄(g', c₋)⁻¹, b'₋, [g'[c₋]])`
    /// for `γ₋ = (g, b₋, b'₋, g')` with `θ_{B₋}(γ₋) = μ₋(x)`.
    pub fn act_gamma_bminus(&self, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        check_match(&x.bm, &gamma.u)?;
        self.validated(self.act_gamma_bminus_unchecked(x, gamma)?)
    }

    /// The formula of [`Self::act_gamma_bminus`] without checks.
    pub fn act_gamma_bminus_unchecked(&self, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        let (c_new, bu) = self.u.act_b(&gamma.b, &x.c)?;
        let (cm_new, bv) = self.v.act_b(&gamma.b_prime, &x.cm)?;
        Ok(GdbcElement { c: c_new, b: bu * &x.b * inv(&bv)?, bm: gamma.u_prime.clone(), cm: cm_new })
    }

    /// Action of the given side.
    pub fn act(&self, side: Side, x: &GdbcElement, gamma: &GammaElement) -> Result<GdbcElement> {
        match side {
            Side::B => self.act_gamma_b(x, gamma),
            Side::BMinus => self.act_gamma_bminus(x, gamma),
        }
    }

    /// `π_{ū,v̄}` at `x` in the ambient chart, assembled from the four-line
    /// formula: the product `(π_n, π_st, π_st, −π_n)` corrected by the
    /// wedges of `ρ_ū(ξ^i)`, `x_i^R`, `(ξ^i)^L`, `λ_v̄(x_i)`, `λ_ū(x_i)`,
    /// `b_ū(x_i)^R`, `(ξ^i)^R`, `x_i^L`, `b_{−v̄}(ξ^i)^L` and `ρ_v̄(ξ^i)`.
    pub fn pi_uv(&self, x: &GdbcElement) -> Result<Bivector> {
        let bases = DualBorelBases::new(self.n);
        let d = self.ambient_dim();
        let [_, ob, obm, ocm] = self.block_offsets();
        let base = block_sum(
            "G:ambient",
            &[&self.u.pi_n(&x.c)?, &pi_st_borel(&x.b, Borel::Upper), &pi_st_borel(&x.bm, Borel::Lower), &self.v.pi_n(&x.cm)?.scaled(-1.0)],
        );
        let mut m = base.coeffs;
        for (xi_, xi) in bases.x_basis.iter().zip(&bases.xi_basis) {
            let rho_u = place(&self.u.right_field(&x.c, xi)?, 0, d);
            let x_r = place(&b_coords(&(xi_ * &x.b)), ob, d);
            m -= wedge(&rho_u, &x_r);

            let xi_l = place(&bminus_coords(&(&x.bm * xi)), obm, d);
            let lam_v = place(&self.v.left_field(&x.cm, xi_)?, ocm, d);
            m += wedge(&xi_l, &lam_v);

            let mut first = place(&self.u.left_field(&x.c, xi_)?, 0, d);
            let bu = self.u.cocycle_derivative_b(&x.c, xi_)?;
            for (k, z) in b_coords(&(bu * &x.b)).into_iter().enumerate() {
                first[ob + k] = z;
            }
            let xi_r = place(&bminus_coords(&(xi * &x.bm)), obm, d);
            m -= wedge(&first, &xi_r);

            let x_l = place(&b_coords(&(&x.b * xi_)), ob, d);
            let bv = self.v.cocycle_derivative_bminus(&x.cm, xi)?;
            let mut second = place(&bminus_coords(&(&x.bm * bv)), obm, d);
            for (k, z) in self.v.right_field(&x.cm, xi)?.into_iter().enumerate() {
                second[ocm + k] = z;
            }
            m += wedge(&x_l, &second);
        }
        Ok(Bivector::new("G:ambient", m))
    }

    /// `π_{ū,v̄}` at `x` assembled independently as the mixed product of
    /// `π̃_n` (pushed through `J⁺`) and `π̃_{−n}` (pushed through `J⁻`) along the
    /// right `L*`-action `[b₁⁻¹g₁, …, g_k b₂]` and the left `L`-action
    /// `[b₋₁g₁, …, g_k b₋₂⁻¹]`, both differentiated on `G^k`.
    pub fn pi_uv_route_b(&self, x: &GdbcElement) -> Result<Bivector> {
        let bases = DualBorelBases::new(self.n);
        let plus = self.u.pi_tilde_plus(&x.c, &x.b)?;
        let minus = self.v.pi_tilde_minus(&x.bm, &x.cm)?;
        let rho = |y1: &CMatrix, y2: &CMatrix| -> Result<Vec<C64>> {
            curve_derivative(
                |s| {
                    let mut gs = x.c.factors.clone();
                    gs[0] = expm(&(y1 * re(-s))) * &gs[0];
                    let last = gs.len() - 1;
                    gs[last] = &gs[last] * &x.b * expm(&(y2 * re(s)));
                    let (cc, bb) = self.u.sweep_left(&eye(self.n), &gs)?;
                    let mut out = self.u.coords(&cc)?;
                    out.extend(b_coords(&bb));
                    Ok(out)
                },
                JACOBIAN_STEP,
            )
        };
        let lam = |e1: &CMatrix, e2: &CMatrix| -> Result<Vec<C64>> {
            curve_derivative(
                |s| {
                    let mut gs = x.cm.factors.clone();
                    gs[0] = expm(&(e1 * re(s))) * &x.bm * &gs[0];
                    let last = gs.len() - 1;
                    gs[last] = &gs[last] * expm(&(e2 * re(-s)));
                    let (bb, cc) = self.v.sweep_right(&gs, &eye(self.n))?;
                    let mut out = bminus_coords(&bb);
                    out.extend(self.v.coords(&cc)?);
                    Ok(out)
                },
                JACOBIAN_STEP,
            )
        };
        let zero = CMatrix::zeros(self.n, self.n);
        let mut rho_vecs = Vec::new();
        let mut lam_vecs = Vec::new();
        for (xk, xik) in bases.x_basis.iter().zip(&bases.xi_basis) {
            rho_vecs.push(rho(xk, &zero)?);
            lam_vecs.push(lam(&(xik * re(-1.0)), &zero)?);
            rho_vecs.push(rho(&zero, xk)?);
            lam_vecs.push(lam(&zero, xik)?);
        }
        let mut out = mixed_product(&plus, &minus, &rho_vecs, &lam_vecs)?;
        out.chart = "G:ambient".into();
        Ok(out)
    }

    /// Jacobian of the intrinsic chart at `x` (columns span `T_x𝒢` in the
    /// ambient chart).
    pub fn tangent_frame(&self, x: &GdbcElement) -> Result<CMatrix> {
        let p = self.chart_coords(x)?;
        numeric_jacobian(|q| self.ambient(&self.from_chart(q)?), &p, JACOBIAN_STEP)
    }

    /// Intrinsic coordinates `p` of `x` and coefficients `Q` with
    /// `π_{ū,v̄}(x) = T·Q·Tᵀ`, `T` the tangent frame.
    pub fn intrinsic_bivector(&self, x: &GdbcElement) -> Result<(Vec<C64>, CMatrix)> {
        let p = self.chart_coords(x)?;
        let t = self.tangent_frame(x)?;
        let th = t.adjoint();
        let left = (&th * &t).try_inverse().ok_or(Error::RankDeficient { sigma_min: 0.0 })? * th;
        let pi = self.pi_uv(x)?;
        Ok((p, &left * &pi.coeffs * left.transpose()))
    }

    /// Pushforward of `π_{ū,v̄}(x)` along a map defined on `𝒢` (given in
    /// intrinsic coordinates) with values in some chart.
    pub fn pushforward_from<F>(&self, x: &GdbcElement, f: F, chart: &str) -> Result<Bivector>
    where
        F: Fn(&GdbcElement) -> Result<Vec<C64>>,
    {
        let (p, q) = self.intrinsic_bivector(x)?;
        let j = numeric_jacobian(|r| f(&self.from_chart(r)?), &p, JACOBIAN_STEP)?;
        Ok(Bivector::new(chart, &j * q * j.transpose()))
    }

    /// Poisson-submanifold check: normal component of `π♯` on the ambient
    /// coordinate covectors.
    pub fn tangency_residual(&self, x: &GdbcElement) -> Result<f64> {
        tangency_residual(&self.tangent_frame(x)?, &self.pi_uv(x)?)
    }

    /// Residual between the four-line `π_{ū,v̄}` and the route through `π̃_{n,n}`.
    pub fn route_b_residual(&self, x: &GdbcElement) -> Result<f64> {
        Ok(bivector_residual(&self.pi_uv(x)?, &self.pi_uv_route_b(x)?, 1.0))
    }

    /// `(θ_*π − π_n, τ_*π + π_n)` residuals at `x`, with the source and
    /// target pushforwards taken from the mixed-product assembly.
    pub fn base_residuals(&self, x: &GdbcElement) -> Result<(f64, f64)> {
        let pi = self.pi_uv_route_b(x)?;
        let [_, _, _, ocm] = self.block_offsets();
        let src: Vec<usize> = (0..self.u.dim()).collect();
        let tgt: Vec<usize> = (ocm..ocm + self.v.dim()).collect();
        let theta = pi.restrict("cells", &src);
        let tau = pi.restrict("cells", &tgt);
        Ok((bivector_residual(&theta, &self.u.pi_n(&x.c)?, 1.0), bivector_residual(&tau, &self.v.pi_n(&x.cm)?, -1.0)))
    }

    /// Coisotropy residual of the graph of the multiplication in
    /// `(𝒢³, π × π × (−π))` at the composable pair with chart coordinates `p`.
    pub fn mult_graph_coisotropy(&self, p: &[C64]) -> Result<f64> {
        let (x1, x2) = self.composable_from_chart(p)?;
        let x12 = self.mult(&x1, &x2)?;
        let ambient_pi =
            block_sum("G^3", &[&self.pi_uv(&x1)?, &self.pi_uv(&x2)?, &self.pi_uv(&x12)?.scaled(-1.0)]);
        let graph = |q: &[C64]| -> Result<Vec<C64>> {
            let (y1, y2) = self.composable_from_chart(q)?;
            let y12 = self.mult(&y1, &y2)?;
            let mut out = self.ambient(&y1)?;
            out.extend(self.ambient(&y2)?);
            out.extend(self.ambient(&y12)?);
            Ok(out)
        };
        coisotropy_residual(graph, p, &ambient_pi)
    }

    /// `eq-dirac1` residual: largest relative mismatch between the dressing
    /// field `π♯(μ*α)` and the derivative of the action along
    /// `γ_{μ₊(x), exp(tξ)}` (side `B`) or `γ_{exp(tx), μ₋(x)}` (side `B₋`),
    /// over the dual basis.
    pub fn dirac1_residual(&self, x: &GdbcElement, side: Side) -> Result<f64> {
        let bases = DualBorelBases::new(self.n);
        let pi = self.pi_uv(x)?;
        let point = self.ambient(x)?;
        let [_, ob, obm, ocm] = self.block_offsets();
        let mut worst: f64 = 0.0;
        match side {
            Side::B => {
                let mu = |v: &[C64]| Ok(v[ob..obm].to_vec());
                for xi in &bases.xi_basis {
                    let field = dressing_field(mu, &pi, xi, Invariance::LeftOnB, &point)?;
                    let flow = curve_derivative(
                        |s| self.ambient(&self.act_gamma_b(x, &gamma_lower(&x.b, &expm(&(xi * re(s))))?)?),
                        JACOBIAN_STEP,
                    )?;
                    worst = worst.max(crate::linalg::vec_dist(&field, &flow) / (1.0 + crate::linalg::vec_norm(&flow)));
                }
            }
            Side::BMinus => {
                let mu = |v: &[C64]| Ok(v[obm..ocm].to_vec());
                for xb in &bases.x_basis {
                    let field = dressing_field(mu, &pi, xb, Invariance::RightOnBminus, &point)?;
                    let flow = curve_derivative(
                        |s| self.ambient(&self.act_gamma_bminus(x, &gamma_lower(&expm(&(xb * re(s))), &x.bm)?)?),
                        JACOBIAN_STEP,
                    )?;
                    worst = worst.max(crate::linalg::vec_dist(&field, &flow) / (1.0 + crate::linalg::vec_norm(&flow)));
                }
            }
        }
        Ok(worst)
    }

    /// `eq-dirac2` residual at a composable `(x, γ)`.
    ///
    /// Side `B` (groupoid `(Γ_B, −π_Γ)`, bisection `S_γ(h) = (hg, u, h[u'], h^{u'}g')`):
    /// `π(x◁γ) = L_x(R_S π_Γ(ε_B(g)) − π_Γ(γ)) + R_S π(x)`.
    ///
    /// Side `B₋` (groupoid `(Γ_{B₋}, π_Γ)`, bisection `S'_γ(k) = ι_B(γ_{g,k⁻¹})·γ`):
    /// `π(x◁γ) = L_x(π_Γ(γ) − R_{S'} π_Γ(ε_{B₋}(u))) + R_{S'} π(x)`.
    ///
    /// `L_x(γ') = x◁γ'` is differentiated in the `p_L` chart of `Γ`; `R_S` is
    /// the right translation by the bisection, differentiated on `𝒢` through
    /// the intrinsic chart and on `Γ` through the `p_L` chart.
    pub fn dirac2_residual(&self, x: &GdbcElement, gamma: &GammaElement, side: Side) -> Result<f64> {
        let n = self.n;
        let lhs = self.pi_uv(&self.act(side, x, gamma)?)?;
        let (translated, delta) = match side {
            Side::B => {
                let g = gamma.b.clone();
                let g_inv = inv(&g)?;
                let r_s_y = |y: &GdbcElement| -> Result<Vec<C64>> {
                    let s = bisection_s(gamma, &(&y.b * &g_inv))?;
                    self.ambient(&self.act_gamma_b(y, &s)?)
                };
                let translated = self.pushforward_from(x, r_s_y, "G:ambient")?;
                let r_s_gamma = |q: &[C64]| -> Result<Vec<C64>> {
                    let gp = gamma_from_pl(q, n)?;
                    let s = bisection_s(gamma, &(&gp.b_prime * &g_inv))?;
                    Ok(gamma_pl(&gamma_mult_over_g(&gp, &s)?))
                };
                let eps = eps_b(&g);
                let at_eps = pushforward(r_s_gamma, &gamma_pl(&eps), &pi_gamma_at(&eps), "Gamma:pL")?;
                let delta = Bivector::new("Gamma:pL", at_eps.coeffs - pi_gamma_at(gamma).coeffs);
                (translated, delta)
            }
            Side::BMinus => {
                let g = gamma.b.clone();
                let u_inv = inv(&gamma.u)?;
                let s_prime = |k: &CMatrix| -> Result<GammaElement> {
                    let inner = gamma_lower(&g, &inv(k)?)?;
                    gamma_mult_over_g(&gamma_inverse_over_g(&inner)?, gamma)
                };
                let r_s_y = |y: &GdbcElement| -> Result<Vec<C64>> {
                    let s = s_prime(&(&y.bm * &u_inv))?;
                    self.ambient(&self.act_gamma_bminus(y, &s)?)
                };
                let translated = self.pushforward_from(x, r_s_y, "G:ambient")?;
                let r_s_gamma = |q: &[C64]| -> Result<Vec<C64>> {
                    let gp = gamma_from_pl(q, n)?;
                    let s = s_prime(&(&gp.u_prime * &u_inv))?;
                    Ok(gamma_pl(&gamma_mult_over_gstar(&gp, &s)?))
                };
                let eps = eps_bminus(&gamma.u);
                let at_eps = pushforward(r_s_gamma, &gamma_pl(&eps), &pi_gamma_at(&eps), "Gamma:pL")?;
                let delta = Bivector::new("Gamma:pL", pi_gamma_at(gamma).coeffs - at_eps.coeffs);
                (translated, delta)
            }
        };
        let l_x = |q: &[C64]| -> Result<Vec<C64>> {
            let gp = gamma_from_pl(q, n)?;
            let y = match side {
                Side::B => self.act_gamma_b_unchecked(x, &gp)?,
                Side::BMinus => self.act_gamma_bminus_unchecked(x, &gp)?,
            };
            self.ambient(&y)
        };
        let j = numeric_jacobian(l_x, &gamma_pl(gamma), JACOBIAN_STEP)?;
        let moved = pushforward_with_jacobian(&j, &delta, "G:ambient");
        let rhs = Bivector::new("G:ambient", moved.coeffs + translated.coeffs);
        Ok(bivector_residual(&rhs, &lhs, 1.0))
    }

    /// Random `γ` composable with `x` for the given side: `γ_{μ₊(x), u}` with
    /// random `u ∈ B₋` (side `B`) or `γ_{g, μ₋(x)}` with random `g ∈ B`
    /// (side `B₋`).
    pub fn sample_gamma<R: Rng>(&self, rng: &mut R, x: &GdbcElement, side: Side, scale: f64) -> Result<GammaElement> {
        match side {
            Side::B => gamma_lower(&x.b, &crate::sampling::lower_borel(rng, self.n, scale)),
            Side::BMinus => gamma_lower(&crate::sampling::upper_borel(rng, self.n, scale), &x.bm),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_rng;

    fn space(letters: &[usize], n: usize) -> GdbcSpace {
        let w = WeylWord::new(letters.to_vec(), n).unwrap();
        GdbcSpace::new(&w, &w, n).unwrap()
    }

    #[test]
    fn chart_points_satisfy_invariant() {
        for (letters, n) in [(vec![1], 2), (vec![1, 1], 2), (vec![1, 2], 3), (vec![2, 1, 2], 3)] {
            let sp = space(&letters, n);
            for i in 0..5 {
                let x = sp.sample(&mut sample_rng(1, "gdbc-test", i), 0.5).unwrap();
                assert!(sp.residual(&x) < 1e-10, "{letters:?}");
                let p = sp.chart_coords(&x).unwrap();
                assert!(sp.from_chart(&p).unwrap().dist(&x) < 1e-9);
            }
        }
    }

    #[test]
    fn groupoid_axioms() {
        let sp = space(&[1, 2], 3);
        let mut rng = sample_rng(2, "gdbc-test", 0);
        let p = sp.sample_composable_chart(&mut rng, 0.5).unwrap();
        let (x1, x2) = sp.composable_from_chart(&p).unwrap();
        let x12 = sp.mult(&x1, &x2).unwrap();
        let id_t = sp.identity(&sp.target(&x1)).unwrap();
        assert!(sp.mult(&x1, &id_t).unwrap().dist(&x1) < 1e-12);
        let inv1 = sp.inverse(&x1).unwrap();
        assert!(sp.mult(&x1, &inv1).unwrap().dist(&sp.identity(&x1.c).unwrap()) < 1e-9);
        assert!(sp.inverse(&inv1).unwrap().dist(&x1) < 1e-9);
        assert_eq!(sp.source(&x12), x1.c);
        assert!(matches!(sp.mult(&x2, &x2), Err(Error::NotComposable { .. })));
    }

    #[test]
    fn identity_bisection_example() {
        let sp = space(&[1], 2);
        let c = sp.u.param(&[re(0.7)]).unwrap();
        let e = sp.identity(&c).unwrap();
        assert_eq!(sp.mu_plus(&e), eye(2));
        assert_eq!(sp.mu_minus(&e), eye(2));
        let pi = sp.pi_uv(&e).unwrap();
        assert!(crate::linalg::norm(&(&pi.coeffs + pi.coeffs.transpose())) == 0.0);
    }

    #[test]
    fn four_line_formula_matches_route_b_and_is_tangent() {
        for (letters, n) in [(vec![1], 2), (vec![1, 2], 3)] {
            let sp = space(&letters, n);
            for i in 0..3 {
                let x = sp.sample(&mut sample_rng(3, "gdbc-test", i), 0.5).unwrap();
                let r = sp.route_b_residual(&x).unwrap();
                assert!(r < 1e-6, "{letters:?} route B residual {r:e}");
                let t = sp.tangency_residual(&x).unwrap();
                assert!(t < 1e-6, "{letters:?} tangency residual {t:e}");
                let (a, b) = sp.base_residuals(&x).unwrap();
                assert!(a < 1e-6 && b < 1e-6, "{letters:?} base residuals {a:e} {b:e}");
            }
        }
    }

    #[test]
    fn multiplication_graph_is_coisotropic() {
        let sp = space(&[1, 1], 2);
        let p = sp.sample_composable_chart(&mut sample_rng(4, "gdbc-test", 0), 0.5).unwrap();
        let r = sp.mult_graph_coisotropy(&p).unwrap();
        assert!(r < 1e-6, "coisotropy residual {r:e}");
    }

    #[test]
    fn actions_preserve_invariant_and_compose() {
        let sp = space(&[1, 2], 3);
        let mut rng = sample_rng(5, "gdbc-test", 0);
        let x = sp.sample(&mut rng, 0.5).unwrap();
        assert!(sp.act_gamma_b(&x, &eps_b(&x.b)).unwrap().dist(&x) < 1e-12);
        assert!(sp.act_gamma_bminus(&x, &eps_bminus(&x.bm)).unwrap().dist(&x) < 1e-12);
        let g1 = sp.sample_gamma(&mut rng, &x, Side::B, 0.4).unwrap();
        let g2 = gamma_lower(&g1.b_prime, &crate::sampling::lower_borel(&mut rng, 3, 0.4)).unwrap();
        let lhs = sp.act_gamma_b(&x, &gamma_mult_over_g(&g1, &g2).unwrap()).unwrap();
        let rhs = sp.act_gamma_b(&sp.act_gamma_b(&x, &g1).unwrap(), &g2).unwrap();
        assert!(lhs.dist(&rhs) < 1e-9);
    }

    #[test]
    fn dirac_conditions_hold() {
        for (letters, n) in [(vec![1], 2), (vec![1, 2], 3)] {
            let sp = space(&letters, n);
            let mut rng = sample_rng(6, "gdbc-test", 0);
            let x = sp.sample(&mut rng, 0.5).unwrap();
            for side in [Side::B, Side::BMinus] {
                let r1 = sp.dirac1_residual(&x, side).unwrap();
                let gamma = sp.sample_gamma(&mut rng, &x, side, 0.4).unwrap();
                let r2 = sp.dirac2_residual(&x, &gamma, side).unwrap();
                assert!(r1 < 1e-5 && r2 < 1e-5, "{letters:?} {side:?}: r1 {r1:e}, r2 {r2:e}");
            }
        }
    }
}
