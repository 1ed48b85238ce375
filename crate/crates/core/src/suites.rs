//! The verification suites behind the command-line harness.
//!
//! Each check evaluates a residual on independently seeded samples and
//! reports the largest one. Sample `i` of check `id` draws from
//! `sample_rng(seed, id, i·ATTEMPTS + a)`, where `a` counts the attempts
//! rejected because the random point left the domain of a local structure
//! map. Samples run in parallel; the maximum is order independent, so reports
//! do not depend on the number of worker threads.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cells::{i_u, CellChart, TupleChart};
use crate::charts::{borel_coords, borel_dim, borel_from_coords, Borel};
use crate::double::{
    dress, embed_b, embed_bminus, gamma_inverse_over_g, gamma_inverse_over_gstar, gamma_lower, gamma_mult_over_g,
    gamma_mult_over_gstar, gamma_upper, p_map, GammaElement,
};
use crate::error::{Error, Result};
use crate::gdbc::{GdbcElement, GdbcSpace, Side};
use crate::lie::{DualBorelBases, WeylWord};
use crate::linalg::{
    curve_derivative, det, diag, diag_part, dist, expm, eye, flatten, gauss_decompose, inv, norm, opposite_gauss_decompose,
    re, torus_sqrt, unflatten, vec_norm, Branch, CMatrix, C64, JACOBIAN_STEP,
};
use crate::poisson::{
    bivector_residual, block_sum, coisotropy_residual, dressing_field, jacobi_residual, mixed_product, pi_gamma_at,
    pi_gamma_pr_at, pi_plus_d_at, pi_st_at, pi_st_borel, poisson_map_residual, pushforward, Bivector, Invariance,
};
use crate::report::{CheckRecord, SuiteConfig, SuiteName, SuiteReport};
use crate::sampling::{complex, complex_vec, lower_borel, sample_rng, torus, upper_borel};
use crate::twist::{cotangent_pair, cotangent_twist, gdbc_twist, GdbcTwist, KappaPair};

/// Attempts per sample before a domain failure counts as a failed sample.
pub const ATTEMPTS: u64 = 50;

/// Residual of indicator checks whose outcome is pass or fail.
const INDICATOR_FAIL: f64 = 1.0;
/// Tolerance of indicator checks.
const INDICATOR_TOL: f64 = 0.5;
/// Smallest accepted `|det π_Γ|`.
const DET_FLOOR: f64 = 1e-10;

/// Whether an error only says that a random point left a local domain.
fn is_domain_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotInOpenCell { .. }
            | Error::NotInDressingDomain(_)
            | Error::NotComposable { .. }
            | Error::NotInCell(_)
            | Error::DomainEscape(_)
            | Error::RankDeficient { .. }
    )
}

/// Residual of one sample: retried on domain errors, `inf` on any other
/// error, on a non-finite value, or when every attempt fails.
fn sample_residual<F>(seed: u64, id: &str, index: u64, f: &F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64>,
{
    for attempt in 0..ATTEMPTS {
        let mut rng = sample_rng(seed, id, index * ATTEMPTS + attempt);
        match f(&mut rng) {
            Ok(r) if r.is_finite() => return r,
            Ok(_) => return f64::INFINITY,
            Err(e) if is_domain_error(&e) => continue,
            Err(_) => return f64::INFINITY,
        }
    }
    f64::INFINITY
}

/// `SL_n` together with a word, as used in check identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    /// Rank parameter.
    pub n: usize,
    /// The word.
    pub word: WeylWord,
}

impl Target {
    fn new(letters: &[usize], n: usize) -> Self {
        Self { n, word: WeylWord::new(letters.to_vec(), n).expect("built-in words are valid") }
    }

    /// Label such as `SL3:1,2`.
    pub fn label(&self) -> String {
        let letters: Vec<String> = self.word.letters.iter().map(usize::to_string).collect();
        format!("SL{}:{}", self.n, letters.join(","))
    }
}

/// Collects the records of one suite.
struct Runner<'a> {
    cfg: &'a SuiteConfig,
    records: Vec<CheckRecord>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a SuiteConfig) -> Self {
        Self { cfg, records: Vec::new() }
    }

    /// Run a residual check; `samples` and `tol` are the defaults that the
    /// configuration may override.
    fn check<F>(&mut self, id: String, anchor: &str, samples: usize, tol: f64, f: F)
    where
        F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
    {
        let tol = self.cfg.tol.unwrap_or(tol);
        self.run(id, anchor, samples, tol, f);
    }

    /// Run a pass/fail check: the residual is `0` or `1` and the tolerance is
    /// not overridable.
    fn indicator<F>(&mut self, id: String, anchor: &str, samples: usize, f: F)
    where
        F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
    {
        self.run(id, anchor, samples, INDICATOR_TOL, |rng| Ok(if f(rng)? { 0.0 } else { INDICATOR_FAIL }));
    }

    /// Run a check with a fixed tolerance.
    fn fixed<F>(&mut self, id: String, anchor: &str, samples: usize, tol: f64, f: F)
    where
        F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
    {
        self.run(id, anchor, samples, tol, f);
    }

    fn run<F>(&mut self, id: String, anchor: &str, samples: usize, tol: f64, f: F)
    where
        F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
    {
        let samples = self.cfg.samples.unwrap_or(samples);
        let seed = self.cfg.seed;
        let worst = (0..samples as u64)
            .into_par_iter()
            .map(|i| sample_residual(seed, &id, i, &f))
            .reduce(|| 0.0, f64::max);
        self.records.push(CheckRecord::new(id, anchor, samples, worst, tol));
    }
}

/// Run every suite of the configuration, in order.
pub fn run(cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    cfg.suites.iter().map(|&s| run_suite(cfg, s)).collect()
}

/// Run one suite.
pub fn run_suite(cfg: &SuiteConfig, suite: SuiteName) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut runner = Runner::new(cfg);
    match suite {
        SuiteName::Kernel => kernel_suite(&mut runner)?,
        SuiteName::Gamma => gamma_suite(&mut runner),
        SuiteName::Cells => cells_suite(&mut runner)?,
        SuiteName::Poisson => poisson_suite(&mut runner),
        SuiteName::Gdbc => gdbc_suite(&mut runner)?,
        SuiteName::Twist => twist_suite(&mut runner)?,
        SuiteName::TstarC => tstar_c_suite(&mut runner),
    }
    Ok(SuiteReport { suite, checks: runner.records, wall_ms: start.elapsed().as_millis() as u64 })
}

/// `SL_2`, `SL_3` and the configured rank.
fn ranks(cfg: &SuiteConfig) -> Vec<usize> {
    let mut r = vec![2, 3, cfg.group_rank];
    r.sort_unstable();
    r.dedup();
    r
}

/// The configured words, or the given defaults when none are configured.
fn targets(cfg: &SuiteConfig, defaults: &[(&[usize], usize)]) -> Vec<Target> {
    if cfg.words.is_empty() {
        defaults.iter().map(|(l, n)| Target::new(l, *n)).collect()
    } else {
        cfg.words.iter().map(|w| Target { n: cfg.group_rank, word: w.clone() }).collect()
    }
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    dist(a, b) / (1.0 + norm(b))
}

/// Random element of the open cell `N₋TN` of `SL_n`.
fn sample_group(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    lower_borel(rng, n, scale) * upper_borel(rng, n, scale)
}

/// Unit triangular part `m·diag(m)⁻¹` of a triangular matrix.
fn unit_right(m: &CMatrix) -> Result<CMatrix> {
    Ok(m * inv(&diag_part(m))?)
}

fn unit_left(m: &CMatrix) -> Result<CMatrix> {
    Ok(inv(&diag_part(m))? * m)
}

// ---------------------------------------------------------------- kernel

const KERNEL: &str = "Kernel sanity";

fn kernel_suite(r: &mut Runner) -> Result<()> {
    for n in ranks(r.cfg) {
        r.check(format!("kernel.gauss-round-trip[SL{n}]"), KERNEL, 100, 1e-11, |rng| {
            let (l, u) = (lower_borel(rng, n, 0.6), upper_borel(rng, n, 0.6));
            let g = &l * &u;
            let f = gauss_decompose(&g)?;
            let h = diag_part(&l) * diag_part(&u);
            Ok(rel(&f.product(), &g)
                .max(rel(&f.m, &unit_right(&l)?))
                .max(rel(&f.h, &h))
                .max(rel(&f.n, &unit_left(&u)?)))
        });
        r.check(format!("kernel.opposite-gauss-round-trip[SL{n}]"), KERNEL, 100, 1e-11, |rng| {
            let (u, l) = (upper_borel(rng, n, 0.6), lower_borel(rng, n, 0.6));
            let g = &u * &l;
            let f = opposite_gauss_decompose(&g)?;
            let h = diag_part(&u) * diag_part(&l);
            Ok(rel(&(&f.n * &f.h * &f.m), &g)
                .max(rel(&f.n, &unit_right(&u)?))
                .max(rel(&f.h, &h))
                .max(rel(&f.m, &unit_left(&l)?)))
        });
        r.check(format!("kernel.torus-sqrt[SL{n}]"), KERNEL, 100, 1e-12, |rng| {
            let t = torus(rng, n, 1.0);
            let mut worst: f64 = 0.0;
            let principal = torus_sqrt(&t, &Branch::Principal);
            for root in [principal.clone(), torus_sqrt(&t, &Branch::Near(-&principal))] {
                worst = worst.max(rel(&(&root * &root), &t)).max((det(&root) - re(1.0)).norm());
            }
            Ok(worst)
        });
        r.check(format!("kernel.jacobi-pi-st[SL{n}]"), KERNEL, 50, 1e-5, |rng| {
            let g = sample_group(rng, n, 0.5);
            jacobi_residual(|v| Ok(pi_st_at(&unflatten(v, n))), &flatten(&g))
        });
    }
    let cells = targets(r.cfg, &[(&[1], 2), (&[1, 2], 3), (&[2, 1, 2], 3)]);
    for t in &cells {
        let chart = CellChart::new(t.word.clone(), t.n);
        let n = t.n;
        r.check(format!("kernel.cell-factorization[{}]", t.label()), KERNEL, 100, 1e-11, |rng| {
            let c = chart.param(&complex_vec(rng, chart.dim(), 0.8))?;
            let (b, bm) = (upper_borel(rng, n, 0.6), lower_borel(rng, n, 0.6));
            let (c1, b1) = chart.factor_bub(&(&c * &b))?;
            let (bm2, c2) = chart.factor_bminus_ubminus(&(&bm * &c))?;
            Ok(rel(&c1, &c).max(rel(&b1, &b)).max(rel(&c2, &c)).max(rel(&bm2, &bm)))
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- gamma

const DOUBLE: &str = "Double groupoid suite";
const GAMMA_SCALE: f64 = 0.3;

fn sample_gamma(rng: &mut ChaCha8Rng, n: usize) -> Result<GammaElement> {
    gamma_lower(&upper_borel(rng, n, GAMMA_SCALE), &lower_borel(rng, n, GAMMA_SCALE))
}

fn gamma_rel(a: &GammaElement, b: &GammaElement) -> f64 {
    a.dist(b) / (1.0 + norm(&b.b) + norm(&b.u) + norm(&b.u_prime) + norm(&b.b_prime))
}

/// Borel coordinates `(b, u)` of the `p_L` chart of `Γ`.
fn gamma_pl_coords(g: &GammaElement) -> Vec<C64> {
    let mut x = borel_coords(&g.b, Borel::Upper);
    x.extend(borel_coords(&g.u, Borel::Lower));
    x
}

fn gamma_pl_split(v: &[C64], n: usize) -> Result<(CMatrix, CMatrix)> {
    let db = borel_dim(n);
    Ok((borel_from_coords(&v[..db], n, Borel::Upper)?, borel_from_coords(&v[db..], n, Borel::Lower)?))
}

fn gamma_suite(r: &mut Runner) {
    for n in ranks(r.cfg) {
        r.check(format!("gamma.associativity-over-gstar[SL{n}]"), DOUBLE, 100, 1e-9, |rng| {
            let g1 = sample_gamma(rng, n)?;
            let g2 = gamma_lower(&upper_borel(rng, n, GAMMA_SCALE), &g1.u_prime)?;
            let g3 = gamma_lower(&upper_borel(rng, n, GAMMA_SCALE), &g2.u_prime)?;
            let lhs = gamma_mult_over_gstar(&gamma_mult_over_gstar(&g1, &g2)?, &g3)?;
            let rhs = gamma_mult_over_gstar(&g1, &gamma_mult_over_gstar(&g2, &g3)?)?;
            Ok(gamma_rel(&lhs, &rhs))
        });
        r.check(format!("gamma.associativity-over-g[SL{n}]"), DOUBLE, 100, 1e-9, |rng| {
            let g1 = sample_gamma(rng, n)?;
            let g2 = gamma_lower(&g1.b_prime, &lower_borel(rng, n, GAMMA_SCALE))?;
            let g3 = gamma_lower(&g2.b_prime, &lower_borel(rng, n, GAMMA_SCALE))?;
            let lhs = gamma_mult_over_g(&gamma_mult_over_g(&g1, &g2)?, &g3)?;
            let rhs = gamma_mult_over_g(&g1, &gamma_mult_over_g(&g2, &g3)?)?;
            Ok(gamma_rel(&lhs, &rhs))
        });
        r.check(format!("gamma.iota-morphism[SL{n}]"), "eq-iota-morphism", 100, 1e-10, |rng| {
            let g1 = sample_gamma(rng, n)?;
            let g2 = gamma_lower(&upper_borel(rng, n, GAMMA_SCALE), &g1.u_prime)?;
            let lhs = gamma_inverse_over_g(&gamma_mult_over_gstar(&g1, &g2)?)?;
            let rhs = gamma_mult_over_gstar(&gamma_inverse_over_g(&g1)?, &gamma_inverse_over_g(&g2)?)?;
            let h1 = sample_gamma(rng, n)?;
            let h2 = gamma_lower(&h1.b_prime, &lower_borel(rng, n, GAMMA_SCALE))?;
            let lhs2 = gamma_inverse_over_gstar(&gamma_mult_over_g(&h1, &h2)?)?;
            let rhs2 = gamma_mult_over_g(&gamma_inverse_over_gstar(&h1)?, &gamma_inverse_over_gstar(&h2)?)?;
            Ok(gamma_rel(&lhs, &rhs).max(gamma_rel(&lhs2, &rhs2)))
        });
        r.check(format!("gamma.cocycle[SL{n}]"), "eq-gam-mult", 100, 1e-9, |rng| {
            let (u1, u2) = (lower_borel(rng, n, GAMMA_SCALE), lower_borel(rng, n, GAMMA_SCALE));
            let (g1, g2) = (upper_borel(rng, n, GAMMA_SCALE), upper_borel(rng, n, GAMMA_SCALE));
            let g = &g1;
            // γ^{u₁u₂, g} = γ^{u₁, u₂[g]} γ^{u₂, g}
            let inner = gamma_upper(&u2, g)?;
            let lhs = gamma_upper(&(&u1 * &u2), g)?;
            let rhs = gamma_mult_over_g(&gamma_upper(&u1, &inner.b)?, &inner)?;
            // γ^{u, g₁g₂} = γ^{u^{g₁}, g₂} ⋆ γ^{u, g₁}
            let first = gamma_upper(&u1, &g1)?;
            let lhs2 = gamma_upper(&u1, &(&g1 * &g2))?;
            let rhs2 = gamma_mult_over_gstar(&gamma_upper(&first.u, &g2)?, &first)?;
            Ok(gamma_rel(&lhs, &rhs).max(gamma_rel(&lhs2, &rhs2)))
        });
        r.check(format!("gamma.twist-mult[SL{n}]"), "lem-twist-mult", 100, 1e-10, |rng| {
            let (g1, g2) = (upper_borel(rng, n, GAMMA_SCALE), upper_borel(rng, n, GAMMA_SCALE));
            let (u1, u2) = (lower_borel(rng, n, GAMMA_SCALE), lower_borel(rng, n, GAMMA_SCALE));
            let lhs = embed_b(&g1).mul(&embed_bminus(&u1)).mul(&embed_b(&g2)).mul(&embed_bminus(&u2));
            let gamma = gamma_upper(&u1, &g2)?;
            let rhs = embed_b(&(&g1 * &gamma.b)).mul(&embed_bminus(&(&gamma.u * &u2)));
            Ok(lhs.dist(&rhs) / (1.0 + norm(&lhs.g) + norm(&lhs.t)))
        });
        r.check(format!("gamma.p-pushforward[SL{n}]"), DOUBLE, 50, 1e-8, |rng| {
            let g = sample_gamma(rng, n)?;
            let f = |v: &[C64]| {
                let (b, u) = gamma_pl_split(v, n)?;
                let d = p_map(&GammaElement { b, u: u.clone(), u_prime: u, b_prime: eye(n) });
                let mut out = flatten(&d.g);
                out.extend((0..n).map(|k| d.t[(k, k)]));
                Ok(out)
            };
            let pushed = pushforward(f, &gamma_pl_coords(&g), &pi_gamma_at(&g), "D")?;
            Ok(bivector_residual(&pushed, &pi_plus_d_at(&p_map(&g)), 1.0))
        });
        r.fixed(format!("gamma.nondegenerate[SL{n}]"), DOUBLE, 100, 1.0, |rng| {
            let g = sample_gamma(rng, n)?;
            Ok(DET_FLOOR / det(&pi_gamma_at(&g).coeffs).norm())
        });
        r.check(format!("gamma.dress-round-trip[SL{n}]"), DOUBLE, 100, 1e-9, |rng| {
            let g = sample_gamma(rng, n)?;
            Ok(gamma_rel(&gamma_upper(&g.u_prime, &g.b_prime)?, &g).max(g.residual()))
        });
        let bases = DualBorelBases::new(n);
        r.check(format!("gamma.dressing-fields[SL{n}]"), DOUBLE, 20, 1e-6, |rng| {
            let b = upper_borel(rng, n, 0.5);
            let u = lower_borel(rng, n, 0.5);
            let mut worst: f64 = 0.0;
            let xb = borel_coords(&b, Borel::Upper);
            let pb = pi_st_borel(&b, Borel::Upper);
            for xi in &bases.xi_basis {
                let field = dressing_field(|v| Ok(v.to_vec()), &pb, xi, Invariance::LeftOnB, &xb)?;
                let fd = curve_derivative(
                    |t| Ok(borel_coords(&dress(&b, &expm(&(xi * re(t))), &Branch::Principal)?.1, Borel::Upper)),
                    JACOBIAN_STEP,
                )?;
                worst = worst.max(crate::linalg::vec_dist(&field, &fd) / (1.0 + vec_norm(&fd)));
            }
            let xu = borel_coords(&u, Borel::Lower);
            let pu = pi_st_borel(&u, Borel::Lower).scaled(-1.0);
            for x in &bases.x_basis {
                let field = dressing_field(|v| Ok(v.to_vec()), &pu, x, Invariance::RightOnBminus, &xu)?;
                let field: Vec<C64> = field.iter().map(|z| -z).collect();
                let fd = curve_derivative(
                    |t| Ok(borel_coords(&dress(&expm(&(x * re(t))), &u, &Branch::Principal)?.0, Borel::Lower)),
                    JACOBIAN_STEP,
                )?;
                worst = worst.max(crate::linalg::vec_dist(&field, &fd) / (1.0 + vec_norm(&fd)));
            }
            Ok(worst)
        });
    }
}

// ---------------------------------------------------------------- poisson

const COMP: &str = "eq-comp-pi+";

fn poisson_suite(r: &mut Runner) {
    for n in ranks(r.cfg) {
        let bases = DualBorelBases::new(n);
        r.check(format!("poisson.comp-pi-plus[SL{n}]"), COMP, 50, 1e-9, |rng| {
            let g = sample_gamma(rng, n)?;
            let (b, u) = (&g.b, &g.u);
            let mut rho = Vec::with_capacity(bases.dim());
            let mut lam = Vec::with_capacity(bases.dim());
            for (x, xi) in bases.x_basis.iter().zip(&bases.xi_basis) {
                rho.push(curve_derivative(|t| Ok(borel_coords(&(b * expm(&(x * re(t)))), Borel::Upper)), JACOBIAN_STEP)?);
                lam.push(curve_derivative(|t| Ok(borel_coords(&(expm(&(xi * re(t))) * u), Borel::Lower)), JACOBIAN_STEP)?);
            }
            let rebuilt = mixed_product(&pi_st_borel(b, Borel::Upper), &pi_st_borel(u, Borel::Lower).scaled(-1.0), &rho, &lam)?;
            Ok(bivector_residual(&rebuilt, &pi_gamma_at(&g), 1.0))
        });
        r.check(format!("poisson.p-r-chart[SL{n}]"), COMP, 50, 1e-8, |rng| {
            let g = sample_gamma(rng, n)?;
            let f = |v: &[C64]| {
                let (b, u) = gamma_pl_split(v, n)?;
                let (up, bp) = dress(&b, &u, &Branch::Near(g.b_prime.clone()))?;
                let mut out = borel_coords(&up, Borel::Lower);
                out.extend(borel_coords(&bp, Borel::Upper));
                Ok(out)
            };
            let pushed = pushforward(f, &gamma_pl_coords(&g), &pi_gamma_at(&g), "Gamma:pR")?;
            Ok(bivector_residual(&pushed, &pi_gamma_pr_at(&g), 1.0))
        });
        r.check(format!("poisson.jacobi-pi-gamma[SL{n}]"), COMP, 20, 1e-5, |rng| {
            let g = sample_gamma(rng, n)?;
            let field = |v: &[C64]| -> Result<Bivector> {
                let (b, u) = gamma_pl_split(v, n)?;
                Ok(pi_gamma_at(&GammaElement { b, u: u.clone(), u_prime: u, b_prime: eye(n) }))
            };
            jacobi_residual(field, &gamma_pl_coords(&g))
        });
        r.check(format!("poisson.multiplicativity-pi-st[SL{n}]"), KERNEL, 20, 1e-8, |rng| {
            let (a, b) = (sample_group(rng, n, 0.5), sample_group(rng, n, 0.5));
            let d = n * n;
            let graph = |v: &[C64]| -> Result<Vec<C64>> {
                let (a, b) = (unflatten(&v[..d], n), unflatten(&v[d..], n));
                let mut o = flatten(&a);
                o.extend(flatten(&b));
                o.extend(flatten(&(&a * &b)));
                Ok(o)
            };
            let mut p = flatten(&a);
            p.extend(flatten(&b));
            let ambient = block_sum("G^3", &[&pi_st_at(&a), &pi_st_at(&b), &pi_st_at(&(&a * &b)).scaled(-1.0)]);
            coisotropy_residual(graph, &p, &ambient)
        });
    }
}

// ---------------------------------------------------------------- cells

fn tuple_chart(t: &Target) -> Result<TupleChart> {
    TupleChart::from_word(&t.word, t.n)
}

fn cells_suite(r: &mut Runner) -> Result<()> {
    for t in targets(r.cfg, &[(&[1], 2), (&[1, 2], 3)]) {
        let tc = tuple_chart(&t)?;
        let n = t.n;
        r.check(format!("cells.j-plus[{}]", t.label()), "Prop lem-J^pm", 30, 1e-6, |rng| {
            let c = tc.param(&complex_vec(rng, tc.dim(), 0.5))?;
            let b = upper_borel(rng, n, 0.4);
            Ok(bivector_residual(&tc.pi_tilde_plus(&c, &b)?, &tc.j_plus_mixed(&c, &b)?, 1.0))
        });
        r.check(format!("cells.j-minus[{}]", t.label()), "Prop lem-J^pm", 30, 1e-6, |rng| {
            let c = tc.param(&complex_vec(rng, tc.dim(), 0.5))?;
            let bm = lower_borel(rng, n, 0.4);
            Ok(bivector_residual(&tc.pi_tilde_minus(&bm, &c)?, &tc.j_minus_mixed(&bm, &c)?, 1.0))
        });
    }
    for t in targets(r.cfg, &[(&[1], 2), (&[1, 1], 2), (&[1, 2], 3), (&[2, 1, 2], 3)]) {
        let tc = tuple_chart(&t)?;
        r.check(format!("cells.i-u-anti-poisson[{}]", t.label()), "Lemma lem-isom-I_u", 50, 1e-8, |rng| {
            let x = complex_vec(rng, tc.dim(), 0.5);
            let c = tc.param(&x)?;
            let image = i_u(&c);
            let f = |v: &[C64]| tc.coords(&i_u(&tc.param(v)?));
            poisson_map_residual(f, &x, &tc.pi_prime_minus_n(&c)?, &tc.pi_n(&image)?, -1.0)
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- gdbc

const AXIOMS: &str = "Prop lem-theta-submersion";
const MAIN: &str = "Theorem thm-main-Guu";
const ACTIONS: &str = "Theorem thm-lhd-BB_-";
const GDBC_SCALE: f64 = 0.5;

fn gdbc_space(t: &Target) -> Result<GdbcSpace> {
    GdbcSpace::new(&t.word, &t.word, t.n)
}

/// Size of `x` relative to the identity at its source.
fn gdbc_scale(sp: &GdbcSpace, x: &GdbcElement) -> Result<f64> {
    Ok(1.0 + x.dist(&sp.identity(&sp.source(x))?))
}

/// Composable triple built through the composable-pair chart.
fn gdbc_triple(sp: &GdbcSpace, rng: &mut ChaCha8Rng) -> Result<[GdbcElement; 3]> {
    let p = sp.sample_composable_chart(rng, GDBC_SCALE)?;
    let (x1, x2) = sp.composable_from_chart(&p)?;
    let extra = sp.sample_composable_chart(rng, GDBC_SCALE)?;
    let mut q = sp.chart_coords(&x2)?;
    q.extend_from_slice(&extra[sp.dim()..]);
    let (_, x3) = sp.composable_from_chart(&q)?;
    Ok([x1, x2, x3])
}

fn gdbc_axiom_residual(sp: &GdbcSpace, rng: &mut ChaCha8Rng) -> Result<f64> {
    let [x1, x2, x3] = gdbc_triple(sp, rng)?;
    let s = gdbc_scale(sp, &x1)?;
    let e_s = sp.identity(&sp.source(&x1))?;
    let e_t = sp.identity(&sp.target(&x1))?;
    let inv1 = sp.inverse(&x1)?;
    let x12 = sp.mult(&x1, &x2)?;
    let lhs = sp.mult(&x12, &x3)?;
    let rhs = sp.mult(&x1, &sp.mult(&x2, &x3)?)?;
    let worst = [
        sp.mult(&e_s, &x1)?.dist(&x1) / s,
        sp.mult(&x1, &e_t)?.dist(&x1) / s,
        sp.mult(&x1, &inv1)?.dist(&e_s) / s,
        sp.mult(&inv1, &x1)?.dist(&e_t) / s,
        sp.inverse(&inv1)?.dist(&x1) / s,
        sp.source(&x12).dist(&sp.source(&x1)) / s,
        sp.target(&x12).dist(&sp.target(&x2)) / s,
        lhs.dist(&rhs) / gdbc_scale(sp, &lhs)?,
        sp.residual(&x12),
        sp.residual(&lhs),
    ];
    Ok(worst.into_iter().fold(0.0, f64::max))
}

fn gdbc_suite(r: &mut Runner) -> Result<()> {
    for t in targets(r.cfg, &[(&[1], 2), (&[1, 1], 2), (&[1, 2], 3), (&[2, 1, 2], 3)]) {
        let sp = gdbc_space(&t)?;
        r.check(format!("gdbc.axioms[{}]", t.label()), AXIOMS, 200, 1e-9, |rng| gdbc_axiom_residual(&sp, rng));
    }
    for t in targets(r.cfg, &[(&[1, 1], 2), (&[1, 2], 3)]) {
        let sp = gdbc_space(&t)?;
        r.check(format!("gdbc.coisotropy[{}]", t.label()), MAIN, 100, 1e-6, |rng| {
            sp.mult_graph_coisotropy(&sp.sample_composable_chart(rng, GDBC_SCALE)?)
        });
        r.check(format!("gdbc.base-pushforward[{}]", t.label()), MAIN, 50, 1e-6, |rng| {
            let (a, b) = sp.base_residuals(&sp.sample(rng, GDBC_SCALE)?)?;
            Ok(a.max(b))
        });
        r.check(format!("gdbc.tangency[{}]", t.label()), MAIN, 20, 1e-6, |rng| {
            let x = sp.sample(rng, GDBC_SCALE)?;
            Ok(sp.tangency_residual(&x)?.max(sp.route_b_residual(&x)?))
        });
    }
    for t in targets(r.cfg, &[(&[1], 2), (&[1, 2], 3)]) {
        let sp = gdbc_space(&t)?;
        for (side, name) in [(Side::B, "b"), (Side::BMinus, "b-minus")] {
            r.check(format!("gdbc.dirac1-{name}[{}]", t.label()), ACTIONS, 50, 1e-5, |rng| {
                sp.dirac1_residual(&sp.sample(rng, GDBC_SCALE)?, side)
            });
            r.check(format!("gdbc.dirac2-{name}[{}]", t.label()), ACTIONS, 50, 1e-5, |rng| {
                let x = sp.sample(rng, GDBC_SCALE)?;
                let gamma = sp.sample_gamma(rng, &x, side, 0.4)?;
                sp.dirac2_residual(&x, &gamma, side)
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- twist

const CONCAT: &str = "Concatenation suite";
const KAPPA: &str = "Prop pro-kappa_uv";
const TWIST_SCALE: f64 = 0.4;

/// Word pairs `(u, v)` for the twist suite: the first two configured words
/// (or one word twice), else `SL_2` with `u = v = (s)` and `SL_3` with
/// `u = (s₁), v = (s₂)`.
fn twist_targets(cfg: &SuiteConfig) -> Vec<(Target, Target)> {
    match cfg.words.as_slice() {
        [] => vec![(Target::new(&[1], 2), Target::new(&[1], 2)), (Target::new(&[1], 3), Target::new(&[2], 3))],
        [w] => vec![(Target { n: cfg.group_rank, word: w.clone() }, Target { n: cfg.group_rank, word: w.clone() })],
        [u, v, ..] => vec![(Target { n: cfg.group_rank, word: u.clone() }, Target { n: cfg.group_rank, word: v.clone() })],
    }
}

fn composable_pair(ctx: &GdbcTwist, rng: &mut ChaCha8Rng) -> Result<(KappaPair, KappaPair)> {
    ctx.composable_from_coords(&ctx.sample_composable_coords(rng, TWIST_SCALE)?)
}

fn twist_suite(r: &mut Runner) -> Result<()> {
    for (u, v) in twist_targets(r.cfg) {
        let n = u.n;
        let ctx = gdbc_twist(&u.word, &v.word, n)?;
        let label = format!("{}|{}", u.label(), v.label().split(':').nth(1).unwrap_or(""));
        r.check(format!("twist.kappa-homomorphism[{label}]"), KAPPA, 100, 1e-8, |rng| {
            let (p1, p2) = composable_pair(&ctx, rng)?;
            ctx.kappa_hom_residual(&p1, &p2)
        });
        r.check(format!("twist.kappa-t-invariance[{label}]"), KAPPA, 100, 1e-9, |rng| {
            let p = ctx.sample(rng, TWIST_SCALE)?;
            ctx.t_invariance_residual(&p, &torus(rng, n, 0.5))
        });
        r.check(format!("twist.cocycle-inverse[{label}]"), "Lemma lem1-kappa_uv", 100, 1e-10, |rng| {
            let (p1, p2) = composable_pair(&ctx, rng)?;
            ctx.cocycle_inverse_residual(&p1, &p2)
        });
        r.indicator(format!("twist.open-condition[{label}]"), "Lemma lem-kappa_uv", 100, |rng| {
            let k = ctx.kappa(&ctx.sample(rng, TWIST_SCALE)?)?;
            Ok(ctx.open_condition(&k).is_ok())
        });
        r.check(format!("twist.axioms[{label}]"), CONCAT, 100, 1e-9, |rng| {
            let [p1, p2, p3] = ctx.sample_composable_triple(rng, TWIST_SCALE)?;
            Ok(ctx.axiom_residual(&p1, &p2)?.max(ctx.quotient_associativity_residual(&p1, &p2, &p3)?))
        });
        r.check(format!("twist.branch-independence[{label}]"), CONCAT, 50, 1e-8, |rng| {
            let (p1, p2) = composable_pair(&ctx, rng)?;
            ctx.branch_independence_residual(&p1, &p2, Branch::Near(diag(&sign_flip(n))))
        });
        r.check(format!("twist.coisotropy[{label}]"), CONCAT, 20, 1e-6, |rng| {
            ctx.mult_graph_coisotropy(&ctx.sample_composable_coords(rng, TWIST_SCALE)?)
        });
        r.check(format!("twist.base-pushforward[{label}]"), CONCAT, 20, 1e-6, |rng| {
            let (a, b) = ctx.base_pushforward_residuals(&ctx.sample(rng, TWIST_SCALE)?)?;
            Ok(a.max(b))
        });
        let (yspace, zspace) = (&ctx.y.space, &ctx.z.space);
        let factor_pairs = |rng: &mut ChaCha8Rng| -> Result<((GdbcElement, GdbcElement), (GdbcElement, GdbcElement))> {
            let ys = yspace.composable_from_chart(&yspace.sample_composable_chart(rng, TWIST_SCALE)?)?;
            let zs = zspace.composable_from_chart(&zspace.sample_composable_chart(rng, TWIST_SCALE)?)?;
            Ok((ys, zs))
        };
        r.check(format!("twist.r-l-round-trip[{label}]"), CONCAT, 50, 1e-9, |rng| {
            let p = ctx.sample(rng, TWIST_SCALE)?;
            ctx.r_l_round_trip(&p.z, &p.y)
        });
        r.check(format!("twist.r-l-poisson[{label}]"), CONCAT, 20, 1e-6, |rng| {
            let p = ctx.sample(rng, TWIST_SCALE)?;
            ctx.r_l_poisson_residual(&p.z, &p.y)
        });
        r.check(format!("twist.twisted-multiplicativity[{label}]"), CONCAT, 50, 1e-9, |rng| {
            let ((y1, y2), (z1, z2)) = factor_pairs(rng)?;
            let (ul, gu) = (lower_borel(rng, n, 0.3), upper_borel(rng, n, 0.3));
            Ok(ctx.y_twist_residual(&y1, &y2, &ul)?.max(ctx.z_twist_residual(&z1, &z2, &gu)?))
        });
        r.check(format!("twist.moment-morphism[{label}]"), CONCAT, 50, 1e-10, |rng| {
            let ((y1, y2), (z1, z2)) = factor_pairs(rng)?;
            ctx.moment_morphism_residual(&y1, &y2, &z1, &z2)
        });
        r.check(format!("twist.dressing-compatibility[{label}]"), CONCAT, 20, 1e-5, |rng| {
            let p = ctx.sample(rng, TWIST_SCALE)?;
            Ok(ctx.varrho_ad_residual(&p.y)?.max(ctx.vartheta_ad_residual(&p.z)?))
        });
    }
    Ok(())
}

/// Diagonal of a non-trivial element of `T^{(2)}`: `−1` on the first
/// `2⌊n/2⌋` entries and `1` elsewhere.
fn sign_flip(n: usize) -> Vec<C64> {
    (0..n).map(|k| if k < 2 * (n / 2) { re(-1.0) } else { re(1.0) }).collect()
}

// ---------------------------------------------------------------- T*C

const EXAMPLE: &str = "Example T*C";

/// `T*ℂ` pair `(p₁, p₂, q₁, q₂)` with parts in `[−1, 1]`.
fn tstar_point(rng: &mut ChaCha8Rng) -> [C64; 4] {
    [complex(rng, 1.0), complex(rng, 1.0), complex(rng, 1.0), complex(rng, 1.0)]
}

fn scalar_rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn tstar_c_suite(r: &mut Runner) {
    let ctx = cotangent_twist();
    r.check("tstar_c.structure-maps".into(), EXAMPLE, 1000, 1e-12, |rng| {
        let [p1, p2, q1, q2] = tstar_point(rng);
        let p = cotangent_pair(p1, p2, q1, q2);
        let mut worst: f64 = 0.0;
        let mut cmp = |a: C64, b: C64| worst = worst.max(scalar_rel(a, b));
        let s = ctx.source(&p)?;
        cmp(s.0, q1);
        cmp(s.1, (p1 * q1).exp() * q2);
        let t = ctx.target(&p)?;
        cmp(t.0, (p2 * q2).exp() * q1);
        cmp(t.1, q2);
        let e = ctx.identity(&(q1, q2))?;
        for (a, b) in [(e.y.p, re(0.0)), (e.z.p, re(0.0)), (e.y.q, q1), (e.z.q, q2)] {
            cmp(a, b);
        }
        let i = ctx.inverse(&p)?;
        let expected = [-(-p2 * q2).exp() * p1, -(-p1 * q1).exp() * p2, (p2 * q2).exp() * q1, (p1 * q1).exp() * q2];
        for (a, b) in [i.y.p, i.z.p, i.y.q, i.z.q].into_iter().zip(expected) {
            cmp(a, b);
        }
        let (pp1, pp2) = (complex(rng, 1.0), complex(rng, 1.0));
        let qq1 = (p2 * q2).exp() * q1;
        let qq2 = (-pp1 * qq1).exp() * q2;
        let m = ctx.mult(&p, &cotangent_pair(pp1, pp2, qq1, qq2))?;
        let expected = [p1 + (p2 * q2).exp() * pp1, pp2 + (pp1 * qq1).exp() * p2, q1, qq2];
        for (a, b) in [m.y.p, m.z.p, m.y.q, m.z.q].into_iter().zip(expected) {
            cmp(a, b);
        }
        Ok(worst)
    });
    r.check("tstar_c.base-pushforward".into(), EXAMPLE, 100, 1e-8, |rng| {
        let [p1, p2, q1, q2] = tstar_point(rng);
        let p = cotangent_pair(p1, p2, q1, q2);
        let pi = ctx.product_bivector(&p)?;
        let x = ctx.coords(&p)?;
        let quadratic = |a: C64, b: C64, sign: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 1)] = re(-sign) * a * b;
            m[(1, 0)] = re(sign) * a * b;
            Bivector::new("C^2", m)
        };
        let theta = pushforward(|v| ctx.base_coords(&ctx.source(&ctx.from_coords(v)?)?), &x, &pi, "C^2")?;
        let tau = pushforward(|v| ctx.base_coords(&ctx.target(&ctx.from_coords(v)?)?), &x, &pi, "C^2")?;
        let (s, t) = (ctx.source(&p)?, ctx.target(&p)?);
        Ok(bivector_residual(&theta, &quadratic(s.0, s.1, 1.0), 1.0).max(bivector_residual(&tau, &quadratic(t.0, t.1, -1.0), 1.0)))
    });
    r.check("tstar_c.axioms".into(), EXAMPLE, 200, 1e-12, |rng| {
        let [p1, p2, p3] = ctx.sample_composable_triple(rng, 1.0)?;
        Ok(ctx.axiom_residual(&p1, &p2)?.max(ctx.associativity_residual(&p1, &p2, &p3)?))
    });
    r.check("tstar_c.coisotropy".into(), EXAMPLE, 100, 1e-8, |rng| ctx.mult_graph_coisotropy(&ctx.sample_composable_coords(rng, 1.0)?));
}
