//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bruhat_core::linalg::{numeric_jacobian, re, C64, JACOBIAN_STEP};
use bruhat_core::report::{report_json, CheckRecord, SuiteConfig, SuiteName, SuiteReport};
use bruhat_core::sampling::{complex, sample_rng};
use bruhat_core::suites::{run, run_suite};
use bruhat_core::twist::{cotangent_pair, cotangent_twist};

/// Requirement on one check record: largest admissible residual and minimum
/// sample count.
struct Need {
    id: String,
    tol: f64,
    samples: usize,
}

fn need(id: impl Into<String>, tol: f64, samples: usize) -> Need {
    Need { id: id.into(), tol, samples }
}

fn find<'a>(reports: &'a [SuiteReport], id: &str) -> Option<&'a CheckRecord> {
    reports.iter().flat_map(|r| &r.checks).find(|c| c.id == id)
}

/// Check the records against the pinned tolerances; returns the largest
/// residual seen.
fn verify(reports: &[SuiteReport], needs: &[Need]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for n in needs {
        let rec = find(reports, &n.id).ok_or_else(|| format!("record {} missing", n.id))?;
        let r = rec.max_residual.0;
        if rec.samples < n.samples {
            return Err(format!("{}: {} samples < {}", n.id, rec.samples, n.samples));
        }
        if r.is_nan() || r > n.tol {
            return Err(format!("{}: residual {r:e} > {:e}", n.id, n.tol));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    if elapsed > budget {
        return Err(format!("runtime {:.2} s exceeds {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()));
    }
    Ok(())
}

fn suite_time(reports: &[SuiteReport], suite: SuiteName) -> Duration {
    Duration::from_millis(reports.iter().filter(|r| r.suite == suite).map(|r| r.wall_ms).sum())
}

/// Closed-form structure maps of the `T*ℂ` example, checked against the
/// generic twist machinery, and the quadratic base bivector `−q₁q₂`.
fn tstar_oracle() -> Result<f64, String> {
    let ctx = cotangent_twist();
    let mut worst: f64 = 0.0;
    let e = |x: C64| x.exp();
    let mut cmp = |a: C64, b: C64| worst = worst.max((a - b).norm() / (1.0 + b.norm()));
    for i in 0..1000 {
        let mut rng = sample_rng(2024, "acceptance-tstar", i);
        let [p1, p2, q1, q2] = [complex(&mut rng, 1.0), complex(&mut rng, 1.0), complex(&mut rng, 1.0), complex(&mut rng, 1.0)];
        let p = cotangent_pair(p1, p2, q1, q2);
        let s = ctx.source(&p).map_err(|e| e.to_string())?;
        cmp(s.0, q1);
        cmp(s.1, e(p1 * q1) * q2);
        let t = ctx.target(&p).map_err(|e| e.to_string())?;
        cmp(t.0, e(p2 * q2) * q1);
        cmp(t.1, q2);
        let id = ctx.identity(&(q1, q2)).map_err(|e| e.to_string())?;
        cmp(id.y.p, re(0.0));
        cmp(id.z.p, re(0.0));
        cmp(id.y.q, q1);
        cmp(id.z.q, q2);
        let inv = ctx.inverse(&p).map_err(|e| e.to_string())?;
        cmp(inv.y.p, -e(-p2 * q2) * p1);
        cmp(inv.z.p, -e(-p1 * q1) * p2);
        cmp(inv.y.q, e(p2 * q2) * q1);
        cmp(inv.z.q, e(p1 * q1) * q2);
        let (r1, r2) = (complex(&mut rng, 1.0), complex(&mut rng, 1.0));
        let s1 = e(p2 * q2) * q1;
        let s2 = e(-r1 * s1) * q2;
        let m = ctx.mult(&p, &cotangent_pair(r1, r2, s1, s2)).map_err(|e| e.to_string())?;
        cmp(m.y.p, p1 + e(p2 * q2) * r1);
        cmp(m.z.p, r2 + e(r1 * s1) * p2);
        cmp(m.y.q, q1);
        cmp(m.z.q, s2);
    }
    let maps = worst;
    if maps > 1e-12 {
        return Err(format!("closed-form structure maps differ by {maps:e}"));
    }
    // θ-pushforward of ∂p₁∧∂q₁ + ∂p₂∧∂q₂ in coordinates (p₁, p₂, q₁, q₂).
    let mut push: f64 = 0.0;
    for i in 0..100 {
        let mut rng = sample_rng(2024, "acceptance-tstar-push", i);
        let x: Vec<C64> = (0..4).map(|_| complex(&mut rng, 1.0)).collect();
        let theta = |v: &[C64]| -> bruhat_core::Result<Vec<C64>> { Ok(vec![v[2], (v[0] * v[2]).exp() * v[3]]) };
        let j = numeric_jacobian(theta, &x, JACOBIAN_STEP).map_err(|e| e.to_string())?;
        // {f, g} = Σ_k (∂f/∂p_k ∂g/∂q_k − ∂f/∂q_k ∂g/∂p_k)
        let bracket = (0..2).map(|k| j[(0, k)] * j[(1, k + 2)] - j[(0, k + 2)] * j[(1, k)]).sum::<C64>();
        let (a, b) = (x[2], (x[0] * x[2]).exp() * x[3]);
        let expected = -a * b;
        push = push.max((bracket - expected).norm() / (1.0 + expected.norm()));
    }
    if push > 1e-8 {
        return Err(format!("θ-pushforward differs from −q₁q₂∂q₁∧∂q₂ by {push:e}"));
    }
    Ok(maps.max(push))
}

fn criterion1() -> Result<String, String> {
    let start = Instant::now();
    let cfg = SuiteConfig { suites: vec![SuiteName::TstarC], ..SuiteConfig::default() };
    let reports = vec![run_suite(&cfg, SuiteName::TstarC).map_err(|e| e.to_string())?];
    let worst = verify(
        &reports,
        &[need("tstar_c.structure-maps", 1e-12, 1000), need("tstar_c.base-pushforward", 1e-8, 1), need("tstar_c.axioms", 1e-12, 1)],
    )?;
    let oracle = tstar_oracle()?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("max residual {:.2e}, oracle {oracle:.2e}, {:.2} s", worst, elapsed.as_secs_f64()))
}

fn criterion2(reports: &[SuiteReport]) -> Result<String, String> {
    let worst = verify(
        reports,
        &[
            need("gdbc.axioms[SL2:1]", 1e-9, 200),
            need("gdbc.axioms[SL2:1,1]", 1e-9, 200),
            need("gdbc.axioms[SL3:1,2]", 1e-9, 200),
            need("gdbc.axioms[SL3:2,1,2]", 1e-9, 200),
        ],
    )?;
    let t = suite_time(reports, SuiteName::Gdbc);
    within(t, Duration::from_secs(30))?;
    Ok(format!("max residual {worst:.2e}, gdbc suite {:.2} s", t.as_secs_f64()))
}

fn criterion3(reports: &[SuiteReport]) -> Result<String, String> {
    let worst = verify(
        reports,
        &[
            need("gdbc.coisotropy[SL2:1,1]", 1e-6, 100),
            need("gdbc.coisotropy[SL3:1,2]", 1e-6, 100),
            need("gdbc.base-pushforward[SL2:1,1]", 1e-6, 1),
            need("gdbc.base-pushforward[SL3:1,2]", 1e-6, 1),
        ],
    )?;
    let t = suite_time(reports, SuiteName::Gdbc);
    within(t, Duration::from_secs(120))?;
    Ok(format!("max residual {worst:.2e}, gdbc suite {:.2} s", t.as_secs_f64()))
}

fn criterion4(reports: &[SuiteReport]) -> Result<String, String> {
    let mut needs = Vec::new();
    for word in ["SL2:1", "SL3:1,2"] {
        for kind in ["dirac1-b", "dirac2-b", "dirac1-b-minus", "dirac2-b-minus"] {
            needs.push(need(format!("gdbc.{kind}[{word}]"), 1e-5, 50));
        }
    }
    Ok(format!("max residual {:.2e}", verify(reports, &needs)?))
}

fn criterion5(reports: &[SuiteReport]) -> Result<String, String> {
    let mut needs = Vec::new();
    for n in [2, 3] {
        let ids = [
            ("associativity-over-gstar", 1e-9, 1),
            ("associativity-over-g", 1e-9, 1),
            ("iota-morphism", 1e-10, 1),
            ("cocycle", 1e-9, 1),
            ("p-pushforward", 1e-8, 1),
            // residual 1e-10/|det π_Γ| ≤ 1 ⇔ |det π_Γ| ≥ 1e-10
            ("nondegenerate", 1.0, 100),
            ("twist-mult", 1e-10, 1),
        ];
        for (name, tol, samples) in ids {
            needs.push(need(format!("gamma.{name}[SL{n}]"), tol, samples));
        }
    }
    verify(reports, &needs)?;
    let det_floor = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.id.starts_with("gamma.nondegenerate"))
        .map(|c| 1e-10 / c.max_residual.0)
        .fold(f64::INFINITY, f64::min);
    Ok(format!("all residuals within tolerance, min |det π_Γ| {det_floor:.2e}"))
}

fn criterion6(reports: &[SuiteReport]) -> Result<String, String> {
    let worst = verify(
        reports,
        &[
            need("poisson.comp-pi-plus[SL2]", 1e-9, 1),
            need("poisson.comp-pi-plus[SL3]", 1e-9, 1),
            need("cells.j-plus[SL2:1]", 1e-6, 1),
            need("cells.j-minus[SL2:1]", 1e-6, 1),
            need("cells.j-plus[SL3:1,2]", 1e-6, 1),
            need("cells.j-minus[SL3:1,2]", 1e-6, 1),
            need("cells.i-u-anti-poisson[SL2:1]", 1e-8, 1),
            need("cells.i-u-anti-poisson[SL2:1,1]", 1e-8, 1),
            need("cells.i-u-anti-poisson[SL3:1,2]", 1e-8, 1),
            need("cells.i-u-anti-poisson[SL3:2,1,2]", 1e-8, 1),
        ],
    )?;
    Ok(format!("max residual {worst:.2e}"))
}

fn criterion7(reports: &[SuiteReport]) -> Result<String, String> {
    let mut needs = Vec::new();
    for label in ["SL2:1|1", "SL3:1|2"] {
        for (name, tol) in [("kappa-homomorphism", 1e-8), ("kappa-t-invariance", 1e-9), ("cocycle-inverse", 1e-10), ("open-condition", 0.0)] {
            needs.push(need(format!("twist.{name}[{label}]"), tol, 1));
        }
    }
    Ok(format!("max residual {:.2e}, open condition on every sample", verify(reports, &needs)?))
}

fn criterion8(reports: &[SuiteReport]) -> Result<String, String> {
    let mut needs = vec![need("kernel.jacobi-pi-st[SL3]", 1e-5, 50)];
    for n in [2, 3] {
        for (name, tol) in [("gauss-round-trip", 1e-11), ("opposite-gauss-round-trip", 1e-11), ("torus-sqrt", 1e-12)] {
            needs.push(need(format!("kernel.{name}[SL{n}]"), tol, 1));
        }
    }
    for w in ["SL2:1", "SL3:1,2", "SL3:2,1,2"] {
        needs.push(need(format!("kernel.cell-factorization[{w}]"), 1e-11, 1));
    }
    Ok(format!("max residual {:.2e}", verify(reports, &needs)?))
}

fn strip_wall_ms(json: &str) -> String {
    json.lines().filter(|l| !l.trim_start().starts_with("\"wall_ms\"")).collect::<Vec<_>>().join("\n")
}

fn criterion9(first: &[SuiteReport], first_time: Duration) -> Result<String, String> {
    let start = Instant::now();
    let second = run(&SuiteConfig::default()).map_err(|e| e.to_string())?;
    let second_time = start.elapsed();
    let a = report_json(first).map_err(|e| e.to_string())?;
    let b = report_json(&second).map_err(|e| e.to_string())?;
    if strip_wall_ms(&a) != strip_wall_ms(&b) {
        return Err("reports of two runs with the same seed differ".into());
    }
    let slowest = first_time.max(second_time);
    within(slowest, Duration::from_secs(300))?;
    Ok(format!("byte-identical reports ({} bytes), full suite {:.2} s", a.len(), slowest.as_secs_f64()))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: usize, title: &str, outcome: Result<String, String>| match outcome {
        Ok(detail) => println!("PASS criterion {n}: {title} ({detail})"),
        Err(why) => {
            failures += 1;
            println!("FAIL criterion {n}: {title} ({why})");
        }
    };
    report(1, "T*C example reproduction", criterion1());
    let start = Instant::now();
    let full = run(&SuiteConfig::default());
    let full_time = start.elapsed();
    match full {
        Ok(reports) => {
            report(2, "groupoid axioms of G^{w,w}", criterion2(&reports));
            report(3, "Poisson groupoid over (O^w, π_n)", criterion3(&reports));
            report(4, "Poisson actions of Γ_B and Γ_B-", criterion4(&reports));
            report(5, "double symplectic groupoid Γ", criterion5(&reports));
            report(6, "mixed-product identities", criterion6(&reports));
            report(7, "concatenation map κ", criterion7(&reports));
            report(8, "kernel sanity", criterion8(&reports));
            report(9, "determinism and runtime", criterion9(&reports, full_time));
        }
        Err(e) => {
            for (n, title) in [
                (2, "groupoid axioms of G^{w,w}"),
                (3, "Poisson groupoid over (O^w, π_n)"),
                (4, "Poisson actions of Γ_B and Γ_B-"),
                (5, "double symplectic groupoid Γ"),
                (6, "mixed-product identities"),
                (7, "concatenation map κ"),
                (8, "kernel sanity"),
                (9, "determinism and runtime"),
            ] {
                report(n, title, Err(format!("default run failed: {e}")));
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
