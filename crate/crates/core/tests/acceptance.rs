mod common;

use common::fd_eigenvalue;
use phipower::analytic::Expr;
use phipower::calculus::{power_derivative_residual, taylor_expand, wronskian_numeric, PowerDerivative, WronskianForms};
use phipower::grid::{Grid, SampledFunction};
use phipower::phi::{builtin_suite, materialize_phi, BuiltinCase, ComplexValue, FunctionSpec};
use phipower::powers::PowerTable;
use phipower::quadrature::Rule;
use phipower::spps::{build_spps, dirichlet_eigenvalues, schrodinger_problem, EigenOptions, SturmLiouvilleProblem};
use phipower::susy::{build_susy_pair, partner_spectrum_check};
use phipower::trig::build_trig;
use phipower::volterra::{partner_resolvent, proposition51_check, resolvent_solution};
use phipower::{Result, C64};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const SEED: u64 = 2024;

/// A measured quantity and the side of the bound it must stay on.
enum Measure {
    AtMost(f64, f64),
    AtLeast(f64, f64),
}

impl Measure {
    fn holds(&self) -> bool {
        match *self {
            Measure::AtMost(v, tol) => v <= tol,
            Measure::AtLeast(v, tol) => v >= tol,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Measure::AtMost(v, tol) => format!("{v:.3e} <= {tol:.0e}"),
            Measure::AtLeast(v, tol) => format!("{v:.3} >= {tol}"),
        }
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Result<Measure>,
}

fn one() -> FunctionSpec {
    FunctionSpec::Constant { value: ComplexValue::Real(1.0) }
}

fn table(case: &BuiltinCase, m: usize, order: usize) -> Result<PowerTable> {
    let g = case.grid(m)?;
    PowerTable::build(&materialize_phi(&case.spec, &g)?, g.x0_index(), order)
}

fn real_suite() -> Vec<BuiltinCase> {
    builtin_suite().into_iter().filter(BuiltinCase::is_real).collect()
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn monomial_reduction() -> Result<Measure> {
    let g = Grid::uniform(0.0, 1.0, 513, 0.0)?;
    let t = PowerTable::build(&materialize_phi(&one(), &g)?, 0, 10)?;
    let mut worst: f64 = 0.0;
    for n in 0..=10 {
        for (i, x) in g.nodes().iter().enumerate() {
            let want = x.powi(n as i32);
            worst = worst.max((t.x(n)[i].re - want).abs()).max((t.xt(n)[i].re - want).abs());
            worst = worst.max(t.x(n)[i].im.abs());
        }
    }
    Ok(Measure::AtMost(worst, 1e-10))
}

fn symmetry_suite() -> Result<Measure> {
    let cases = [
        (FunctionSpec::ShiftedSquare, 0.0, 1.0),
        (FunctionSpec::SqrtCosh, 0.0, 2.0),
        (FunctionSpec::GaussianGround, -1.0, 1.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for (spec, a, b) in cases {
        let g = Grid::uniform(a, b, 513, a)?;
        let t = PowerTable::build(&materialize_phi(&spec, &g)?, g.x0_index(), 8)?;
        let bases = sample(&mut rng, g.len(), 8).into_vec();
        for n in 1..=8 {
            worst = worst.max(t.symmetry_residual(n, &bases)?);
        }
    }
    Ok(Measure::AtMost(worst, 1e-8))
}

fn binomial_identity() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for case in builtin_suite() {
        let t = table(&case, 513, 8)?;
        for n in [2, 4, 6, 8] {
            worst = worst.max(t.binomial_residual(n)?);
        }
    }
    Ok(Measure::AtMost(worst, 1e-8))
}

fn pythagorean_identities() -> Result<Measure> {
    let epsilon = 1e-10;
    let mut worst: f64 = 0.0;
    for case in builtin_suite() {
        let t = table(&case, 513, 61)?;
        let trig = build_trig(&t, epsilon)?;
        // an uncertified truncation counts as a failure
        if trig.tail_bound > epsilon {
            return Ok(Measure::AtMost(f64::INFINITY, 1e-8));
        }
        worst = worst.max(trig.elliptic_residual()).max(trig.hyperbolic_residual());
    }
    Ok(Measure::AtMost(worst, 1e-8))
}

fn derivative_rule() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for case in builtin_suite() {
        let t = table(&case, 513, 8)?;
        for n in 0..=8 {
            for k in 0..=n {
                for v in PowerDerivative::ALL {
                    if v.applies(k, n) {
                        worst = worst.max(power_derivative_residual(&t, k, n, v)?);
                    }
                }
            }
        }
    }
    Ok(Measure::AtMost(worst, 1e-8))
}

fn taylor_exactness() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for case in real_suite() {
        let t = table(&case, 513, 7)?;
        let g = t.grid().clone();
        for f in [Expr::x().exp(), Expr::x().sin()] {
            let f = SampledFunction::from_expr(&g, f);
            for n in 0..=6 {
                worst = worst.max(taylor_expand(&f, &t, n)?.reconstruction_residual(&f));
            }
        }
        let basis = t.y_basis();
        for m in 0..=6 {
            let y = basis.y_row(m);
            for n in 0..=6 {
                worst = worst.max(taylor_expand(&y, &t, n)?.reconstruction_residual(&y));
            }
        }
    }
    Ok(Measure::AtMost(worst, 1e-7))
}

fn wronskian_closed_forms() -> Result<Measure> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for case in real_suite() {
        let g = case.grid(513)?;
        let phi = materialize_phi(&case.spec, &g)?;
        let t = PowerTable::build(&phi, g.x0_index(), 4)?;
        let mut nodes = sample(&mut rng, g.len(), 16).into_vec();
        nodes.extend([0, g.x0_index(), g.len() - 1]);
        for n in 0..=4 {
            let forms = WronskianForms::new(&phi, n)?;
            for &i in &nodes {
                let (w, wt) = forms.at(i);
                worst = worst.max((wronskian_numeric(&t, n, i, false)? - w).norm() / w.abs());
                worst = worst.max((wronskian_numeric(&t, n, i, true)? - wt).norm() / wt.abs());
            }
        }
    }
    Ok(Measure::AtMost(worst, 1e-6))
}

fn box_spectrum() -> Result<Measure> {
    let g = Grid::uniform(0.0, std::f64::consts::PI, 1025, 0.0)?;
    let zero = SampledFunction::constant(&g, C64::new(0.0, 0.0));
    let unit = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let series = build_spps(&schrodinger_problem(&zero, &unit)?, 30)?;
    let e = dirichlet_eigenvalues(&series, (0.5, 26.0), 5)?;
    if e.eigenvalues.len() < 5 {
        return Ok(Measure::AtMost(f64::INFINITY, 1e-6));
    }
    let worst = e.eigenvalues.iter().enumerate().map(|(k, l)| (l - ((k + 1) * (k + 1)) as f64).abs()).fold(0.0, f64::max);
    Ok(Measure::AtMost(worst, 1e-6))
}

fn harmonic_susy() -> Result<Measure> {
    let g = Grid::uniform(-6.0, 6.0, 2049, 0.0)?;
    let psi = SampledFunction::from_expr(&g, (Expr::real(-0.5) * Expr::x() * Expr::x()).exp());
    let pair = build_susy_pair(&psi)?;
    let rep = partner_spectrum_check(&pair, 3, 60, (-1.0, 7.0), &EigenOptions::default())?;
    let h1 = rep.h1.as_ref().map(|e| e.eigenvalues.clone()).unwrap_or_default();
    if h1.len() < 4 || rep.rows.len() < 3 {
        return Ok(Measure::AtMost(f64::INFINITY, 1e-3));
    }
    // the oracle grid has 8193 nodes, so 8191 interior unknowns
    let oracle1: Vec<f64> = (0..3).map(|k| fd_eigenvalue(|x| x * x - 1.0, -6.0, 6.0, 8191, k)).collect();
    let oracle2: Vec<f64> = (0..3).map(|k| fd_eigenvalue(|x| x * x + 1.0, -6.0, 6.0, 8191, k)).collect();
    let mut worst = rep.max_difference;
    for k in 0..3 {
        worst = worst.max((h1[k] - 2.0 * k as f64).abs());
        worst = worst.max((h1[k] - oracle1[k]).abs());
        worst = worst.max((rep.rows[k].e2_shifted - oracle2[k]).abs());
    }
    Ok(Measure::AtMost(worst, 1e-3))
}

fn product_identities() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for case in builtin_suite() {
        let t = table(&case, 129, 8)?;
        for n in 1..=3 {
            for m in 1..=(4 - n) {
                worst = worst.max(proposition51_check(&t, n, m)?);
            }
        }
    }
    Ok(Measure::AtMost(worst, 1e-7))
}

// p = 1, r = 1, q = −V with V = ψ₀''/ψ₀
fn plain_problem(psi: &SampledFunction, minus_v: Expr) -> Result<SturmLiouvilleProblem> {
    let g = psi.grid();
    let unit = SampledFunction::constant(g, C64::new(1.0, 0.0));
    SturmLiouvilleProblem::new(unit.clone(), SampledFunction::from_expr(g, minus_v), unit, psi.clone())
}

fn resolvent_equivalence() -> Result<Measure> {
    let g = Grid::uniform(-2.0, 2.0, 513, 0.0)?;
    let x2 = || Expr::x() * Expr::x();
    let cases = [
        (SampledFunction::constant(&g, C64::new(1.0, 0.0)), Expr::real(0.0), Expr::real(0.0)),
        (SampledFunction::from_expr(&g, (Expr::real(-0.5) * x2()).exp()), Expr::real(1.0) - x2(), Expr::real(-1.0) - x2()),
    ];
    let unit = C64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for (psi, minus_v1, minus_v2) in cases {
        let s1 = build_spps(&plain_problem(&psi, minus_v1)?, 40)?;
        let s2 = build_spps(&plain_problem(&psi.recip(), minus_v2)?, 40)?;
        for l in [0.0, 1.0, -1.0] {
            let lambda = C64::new(l, 0.0);
            let r = resolvent_solution(&psi, lambda, g.x0_index(), 1e-15)?;
            let sol = s1.evaluate(lambda, unit, unit, 1e-12)?;
            worst = worst.max(sup_diff(&r.u1_part, &sol.u1)).max(sup_diff(&r.u2_part, &sol.u2));
            let pr = partner_resolvent(&psi, lambda, g.x0_index(), 1e-15)?;
            let sol = s2.evaluate(lambda, unit, unit, 1e-12)?;
            worst = worst.max(sup_diff(&pr.u1_part, &sol.u1)).max(sup_diff(&pr.u2_part, &sol.u2));
        }
    }
    Ok(Measure::AtMost(worst, 1e-7))
}

fn quadrature_order() -> Result<Measure> {
    let integrands: [(Expr, f64); 2] =
        [(Expr::x().exp(), std::f64::consts::E - 1.0), ((Expr::real(3.0) * Expr::x()).cos(), 3f64.sin() / 3.0)];
    let mut worst = f64::INFINITY;
    for rule in [Rule::Simpson, Rule::Quintic] {
        for (f, exact) in &integrands {
            let err = |m: usize| -> Result<f64> {
                let g = Grid::uniform(0.0, 1.0, m, 0.0)?.with_rule(rule);
                let s = SampledFunction::from_expr(&g, f.clone());
                Ok((g.quadrature().definite(s.values(), 0, m - 1).re - exact).abs())
            };
            worst = worst.min(err(33)? / err(65)?);
        }
    }
    Ok(Measure::AtLeast(worst, 12.0))
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "monomial_reduction", budget: secs(1), run: monomial_reduction },
        Criterion { id: 2, name: "symmetry_suite", budget: secs(10), run: symmetry_suite },
        Criterion { id: 3, name: "binomial_identity", budget: None, run: binomial_identity },
        Criterion { id: 4, name: "pythagorean_identities", budget: None, run: pythagorean_identities },
        Criterion { id: 5, name: "derivative_rule", budget: None, run: derivative_rule },
        Criterion { id: 6, name: "taylor_exactness", budget: None, run: taylor_exactness },
        Criterion { id: 7, name: "wronskian_closed_forms", budget: None, run: wronskian_closed_forms },
        Criterion { id: 8, name: "box_spectrum", budget: secs(5), run: box_spectrum },
        Criterion { id: 9, name: "harmonic_susy", budget: secs(30), run: harmonic_susy },
        Criterion { id: 10, name: "product_identities", budget: None, run: product_identities },
        Criterion { id: 11, name: "resolvent_equivalence", budget: secs(60), run: resolvent_equivalence },
        Criterion { id: 12, name: "quadrature_order", budget: None, run: quadrature_order },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let (ok, detail) = match &outcome {
            Ok(m) => (m.holds() && in_budget, m.describe()),
            Err(e) => (false, format!("{}: {e}", e.name())),
        };
        let budget = c.budget.map(|b| format!(" of {}s", b.as_secs())).unwrap_or_default();
        println!(
            "{} {:>2} {:<24} {detail}  [{:.2}s{budget}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
        failed += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
