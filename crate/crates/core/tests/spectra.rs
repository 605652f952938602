mod common;

use common::fd_eigenvalue;
use phipower::analytic::Expr;
use phipower::grid::{Grid, SampledFunction};
use phipower::powers::PowerTable;
use phipower::spps::*;
use phipower::susy::{build_susy_pair, partner_spectrum_check};
use phipower::C64;

fn gaussian(g: &Grid) -> SampledFunction {
    SampledFunction::from_expr(g, (Expr::real(-0.5) * Expr::x() * Expr::x()).exp())
}

#[test]
fn harmonic_spectrum_matches_difference_oracle() {
    let g = Grid::uniform(-6.0, 6.0, 2049, -6.0).unwrap();
    let psi = gaussian(&g);
    let v = SampledFunction::from_expr(&g, Expr::x() * Expr::x() - Expr::real(1.0));
    let series = build_spps(&schrodinger_problem(&v, &psi).unwrap(), 60).unwrap();
    let e = dirichlet_eigenvalues(&series, (-1.0, 7.0), 4).unwrap();
    assert_eq!(e.eigenvalues.len(), 4);
    for (k, l) in e.eigenvalues.iter().enumerate() {
        let oracle = fd_eigenvalue(|x| x * x - 1.0, -6.0, 6.0, 8191, k);
        assert!((l - oracle).abs() < 1e-4, "level {k}: {l} vs {oracle}");
    }
}

#[test]
fn harmonic_partner_spectrum_is_shifted() {
    let g = Grid::uniform(-6.0, 6.0, 2049, -6.0).unwrap();
    let pair = build_susy_pair(&gaussian(&g)).unwrap();
    let rep = partner_spectrum_check(&pair, 3, 60, (-1.0, 7.0), &EigenOptions::default()).unwrap();
    assert!(rep.ground.unwrap().abs() < 1e-3);
    for row in &rep.rows {
        let oracle = fd_eigenvalue(|x| x * x + 1.0, -6.0, 6.0, 8191, row.level);
        assert!((row.e2_shifted - oracle).abs() < 1e-3);
        assert!(row.difference < 1e-3);
    }
}

#[test]
fn box_eigenvalues_are_stable_under_doubling_k() {
    let g = Grid::uniform(0.0, std::f64::consts::PI, 1025, 0.0).unwrap();
    let zero = SampledFunction::constant(&g, C64::new(0.0, 0.0));
    let one = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let p = schrodinger_problem(&zero, &one).unwrap();
    let e30 = dirichlet_eigenvalues(&build_spps(&p, 30).unwrap(), (0.5, 26.0), 5).unwrap();
    let e60 = dirichlet_eigenvalues(&build_spps(&p, 60).unwrap(), (0.5, 26.0), 5).unwrap();
    for (a, b) in e30.eigenvalues.iter().zip(&e60.eigenvalues) {
        assert!((a - b).abs() <= 1e-8);
    }
    for r in &e30.residuals {
        assert!(*r <= 1e-10);
    }
}

#[test]
fn short_truncation_is_refused_at_the_range_edge() {
    let g = Grid::uniform(0.0, std::f64::consts::PI, 257, 0.0).unwrap();
    let zero = SampledFunction::constant(&g, C64::new(0.0, 0.0));
    let one = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let s = build_spps(&schrodinger_problem(&zero, &one).unwrap(), 8).unwrap();
    match dirichlet_eigenvalues(&s, (0.5, 100.0), 5) {
        Err(phipower::Error::TruncationTooSmall { current, needed }) => {
            assert_eq!(current, 8);
            assert!(needed > 8);
            let s = build_spps(&schrodinger_problem(&zero, &one).unwrap(), needed).unwrap();
            assert!(dirichlet_eigenvalues(&s, (0.5, 100.0), 5).is_ok());
        }
        other => panic!("expected TruncationTooSmall, got {other:?}"),
    }
}

#[test]
fn unit_weights_reproduce_power_table_rows() {
    let g = Grid::uniform(0.0, 1.0, 129, 0.0).unwrap();
    let u0 = SampledFunction::from_expr(&g, Expr::real(1.0) + Expr::x());
    let zero = SampledFunction::constant(&g, C64::new(0.0, 0.0));
    let one = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let s = build_spps(&SturmLiouvilleProblem::new(one.clone(), zero, one, u0.clone()).unwrap(), 4).unwrap();
    let t = PowerTable::build(&u0.powi(2), 0, 9).unwrap();
    for n in 0..=9 {
        for (a, b) in s.row(n).iter().zip(t.x(n)) {
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
        }
        for (a, b) in s.row_tilde(n).iter().zip(t.xt(n)) {
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
        }
    }
}

#[test]
fn schrodinger_rows_alternate_in_pairs() {
    // p = −1 flips the sign of every odd step: Zₙ picks up (−1)^⌈n/2⌉
    let g = Grid::uniform(0.0, 1.0, 129, 0.0).unwrap();
    let psi = SampledFunction::from_expr(&g, Expr::x().cosh());
    let v = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let s = build_spps(&schrodinger_problem(&v, &psi).unwrap(), 4).unwrap();
    let t = PowerTable::build(&psi.powi(2), 0, 9).unwrap();
    for n in 0..=9 {
        let sign = if (n as usize).div_ceil(2) % 2 == 0 { 1.0 } else { -1.0 };
        for (a, b) in s.row(n).iter().zip(t.x(n)) {
            assert!((a - b * sign).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }
}

#[test]
fn evaluated_solutions_satisfy_the_equation() {
    let g = Grid::uniform(0.0, std::f64::consts::PI, 1025, 0.0).unwrap();
    let zero = SampledFunction::constant(&g, C64::new(0.0, 0.0));
    let one = SampledFunction::constant(&g, C64::new(1.0, 0.0));
    let p = schrodinger_problem(&zero, &one).unwrap();
    let s = build_spps(&p, 30).unwrap();
    for lambda in [C64::new(4.0, 0.0), C64::new(-3.0, 0.5), C64::new(0.0, 0.0)] {
        let sol = evaluate_solution(&s, lambda, C64::new(0.3, 0.0), C64::new(1.0, -0.2)).unwrap();
        assert!(ode_residual(&p, &sol) <= 1e-5);
        let w = sol.u1[0] * sol.du2[0] - sol.du1[0] * sol.u2[0];
        assert!((w + 1.0).norm() < 1e-13);
    }
    // λ = 0 keeps only u₀ and u₀ ∫ 1/(u₀² p)
    let sol = evaluate_solution(&s, C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
    for (x, u) in g.nodes().iter().zip(&sol.u) {
        assert!((u.re - (1.0 - x)).abs() < 1e-13);
    }
}

#[test]
fn weighted_problem_solutions_satisfy_the_equation() {
    // u₀²r and 1/(u₀²p) differ here, so both derivative recurrences are exercised
    let g = Grid::uniform(-2.0, 2.0, 1025, -1.0).unwrap();
    let psi = gaussian(&g);
    let v = SampledFunction::from_expr(&g, Expr::x() * Expr::x() - Expr::real(1.0));
    let p = schrodinger_problem(&v, &psi).unwrap();
    let s = build_spps(&p, 30).unwrap();
    for lambda in [C64::new(2.5, 0.0), C64::new(-1.0, 1.0)] {
        for (c1, c2) in [(1.0, 0.0), (0.0, 1.0)] {
            let sol = evaluate_solution(&s, lambda, C64::new(c1, 0.0), C64::new(c2, 0.0)).unwrap();
            assert!(ode_residual(&p, &sol) <= 1e-5);
        }
    }
}
