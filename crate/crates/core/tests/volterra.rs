use phipower::analytic::Expr;
use phipower::grid::{Grid, SampledFunction};
use phipower::phi::{builtin_suite, materialize_phi};
use phipower::powers::{Family, PowerTable};
use phipower::spps::{build_spps, SturmLiouvilleProblem};
use phipower::volterra::*;
use phipower::C64;
use proptest::prelude::*;

fn smooth_kernel(g: &Grid, a: f64, b: f64, c: f64) -> Kernel {
    let x = g.nodes().to_vec();
    Kernel::from_fn(g, Support::Full, move |i, j| C64::new((a * x[i] + b * x[j]).cos() + c * x[i] * x[j], a * x[j])).unwrap()
}

// Sup over the coarse nodes of the change when the grid is refined once.
fn refinement_gap(coarse: &Kernel, fine: &Kernel) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..coarse.len() {
        for j in 0..coarse.len() {
            worst = worst.max((coarse.get(i, j) - fine.get(2 * i, 2 * j)).norm());
        }
    }
    worst
}

fn triple(m: usize, a: f64, b: f64, c: f64) -> (Kernel, Kernel) {
    let g = Grid::uniform(-1.0, 1.0, m, 0.0).unwrap();
    let f = smooth_kernel(&g, a, b, c);
    let h = smooth_kernel(&g, b, c, a);
    let k = smooth_kernel(&g, c, a, b);
    let left = compose(&compose(&f, &h).unwrap(), &k).unwrap();
    let right = compose(&f, &compose(&h, &k).unwrap()).unwrap();
    (left, right)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn composition_is_associative_and_distributive(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.0f64..1.0) {
        let (left, right) = triple(41, a, b, c);
        let (fine_left, fine_right) = triple(81, a, b, c);
        let quadrature_tol = refinement_gap(&left, &fine_left).max(refinement_gap(&right, &fine_right));
        prop_assert!(left.max_diff(&right) <= 2.0 * quadrature_tol + 1e-14);

        let g = Grid::uniform(-1.0, 1.0, 41, 0.0).unwrap();
        let (f, h, k) = (smooth_kernel(&g, a, b, c), smooth_kernel(&g, b, c, a), smooth_kernel(&g, c, a, b));
        let sum = compose(&f, &h.add(&k).unwrap()).unwrap();
        let parts = compose(&f, &h).unwrap().add(&compose(&f, &k).unwrap()).unwrap();
        prop_assert!(sum.max_diff(&parts) <= 1e-13 * sum.max_abs().max(1.0));
    }
}

#[test]
fn powers_of_a_kernel_are_permutable() {
    let powers = |m: usize| {
        let g = Grid::uniform(0.0, 1.0, m, 0.0).unwrap();
        let f = smooth_kernel(&g, 0.7, -0.4, 0.3);
        (1..=3).map(|n| kernel_power(&f, n).unwrap()).collect::<Vec<_>>()
    };
    let (p, fine) = (powers(41), powers(81));
    for n in 0..3 {
        for m in 0..3 {
            let a = compose(&p[n], &p[m]).unwrap();
            let b = compose(&p[m], &p[n]).unwrap();
            let tol = refinement_gap(&a, &compose(&fine[n], &fine[m]).unwrap())
                .max(refinement_gap(&b, &compose(&fine[m], &fine[n]).unwrap()));
            assert!(a.max_diff(&b) <= 2.0 * tol + 1e-14, "({n},{m})");
        }
    }
}

#[test]
fn ordered_composition_stays_upper_triangular() {
    let g = Grid::uniform(0.0, 1.0, 17, 0.0).unwrap();
    let x = g.nodes().to_vec();
    let f = Kernel::from_fn(&g, Support::Ordered, |i, j| C64::new(x[j] - x[i] + 1.0, 0.0)).unwrap();
    let p = kernel_power(&f, 3).unwrap();
    for i in 0..17 {
        for j in 0..i {
            assert_eq!(p.get(i, j), C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn bridges_hold_for_every_builtin_weight() {
    for case in builtin_suite() {
        let g = case.grid(97).unwrap();
        let t = PowerTable::build(&materialize_phi(&case.spec, &g).unwrap(), g.x0_index(), 8).unwrap();
        let rep = bridge_check(&t, 4).unwrap();
        assert!(rep.max() <= 1e-8, "{}: {rep:?}", case.name);
    }
}

#[test]
fn first_power_kernel_matches_sigma_primitive() {
    let g = Grid::uniform(0.0, 1.0, 65, 0.0).unwrap();
    let phi = materialize_phi(&phipower::phi::FunctionSpec::ShiftedSquare, &g).unwrap();
    let t = PowerTable::build(&phi, 0, 2).unwrap();
    let sigma = Kernel::sigma(&phi, Support::Full).unwrap();
    let one = Kernel::one(&g, Support::Full).unwrap();
    let first = compose(&one, &sigma).unwrap();
    let want = Kernel::power(&t, 1, Family::Plain, Outer::Phi).unwrap();
    assert!(first.max_diff(&want) < 1e-12);
    let second = compose(&first, &one).unwrap();
    let want = Kernel::power(&t, 2, Family::Plain, Outer::One).unwrap().scale(C64::new(0.5, 0.0));
    assert!(second.max_diff(&want) < 1e-12);
}

#[test]
fn product_identities_for_every_builtin_weight() {
    for case in builtin_suite() {
        let g = case.grid(97).unwrap();
        let t = PowerTable::build(&materialize_phi(&case.spec, &g).unwrap(), g.x0_index(), 8).unwrap();
        for (n, m) in [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 2)] {
            let r = proposition51_check(&t, n, m).unwrap();
            assert!(r <= 1e-7, "{} ({n},{m}): {r:e}", case.name);
        }
        assert!(matches!(proposition51_check(&t, 3, 2), Err(phipower::Error::InsufficientOrder { .. })));
    }
}

// p = 1, r = 1, q = −ψ₀''/ψ₀: the problem whose SPPS rows the resolvent sums
fn plain_problem(psi: &SampledFunction, minus_v: Expr) -> SturmLiouvilleProblem {
    let g = psi.grid();
    let one = SampledFunction::constant(g, C64::new(1.0, 0.0));
    SturmLiouvilleProblem::new(one.clone(), SampledFunction::from_expr(g, minus_v), one, psi.clone()).unwrap()
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn resolvent_parts_match_spps_series() {
    let g = Grid::uniform(-2.0, 2.0, 257, 0.0).unwrap();
    let x2 = || Expr::x() * Expr::x();
    let cases = [
        (SampledFunction::constant(&g, C64::new(1.0, 0.0)), Expr::real(0.0), Expr::real(0.0)),
        (
            SampledFunction::from_expr(&g, (Expr::real(-0.5) * x2()).exp()),
            Expr::real(1.0) - x2(),
            Expr::real(-1.0) - x2(),
        ),
    ];
    for (psi, minus_v1, minus_v2) in cases {
        let s1 = build_spps(&plain_problem(&psi, minus_v1), 40).unwrap();
        let s2 = build_spps(&plain_problem(&psi.recip(), minus_v2), 40).unwrap();
        for l in [0.0, 1.0, -1.0] {
            let lambda = C64::new(l, 0.0);
            let r = resolvent_solution(&psi, lambda, g.x0_index(), 1e-15).unwrap();
            assert!(r.tail_estimate <= 1e-15);
            let sol = s1.evaluate(lambda, C64::new(1.0, 0.0), C64::new(1.0, 0.0), 1e-12).unwrap();
            assert!(sup_diff(&r.u1_part, &sol.u1) <= 1e-8);
            assert!(sup_diff(&r.u2_part, &sol.u2) <= 1e-8);
            let pr = partner_resolvent(&psi, lambda, g.x0_index(), 1e-15).unwrap();
            let sol = s2.evaluate(lambda, C64::new(1.0, 0.0), C64::new(1.0, 0.0), 1e-12).unwrap();
            assert!(sup_diff(&pr.u1_part, &sol.u1) <= 1e-8);
            assert!(sup_diff(&pr.u2_part, &sol.u2) <= 1e-8);
            let back = partner_resolvent(&psi.recip(), lambda, g.x0_index(), 1e-15).unwrap();
            assert!(sup_diff(&back.u1_part, &r.u1_part) <= 1e-12);
        }
    }
}

#[test]
fn zero_spectral_parameter_keeps_leading_terms() {
    let g = Grid::uniform(-1.0, 1.0, 129, -1.0).unwrap();
    let psi = SampledFunction::from_expr(&g, Expr::x().cosh());
    let r = resolvent_solution(&psi, C64::new(0.0, 0.0), 0, 1e-15).unwrap();
    let rho = Kernel::rho(&psi).unwrap();
    for i in 0..g.len() {
        assert_eq!(r.u1_part[i], psi.values()[i]);
        assert!((r.u2_part[i] - rho.get(0, i) / psi.values()[i]).norm() < 1e-16);
        // ψ₀ ∫ dξ/ψ₀² = cosh x (tanh x + tanh 1)
        let x = g.nodes()[i];
        assert!((r.u2_part[i].re - (x.tanh() + 1f64.tanh()) * x.cosh()).abs() < 1e-11);
    }
}

#[test]
fn vanishing_ground_state_is_refused() {
    let g = Grid::uniform(-1.0, 1.0, 33, 0.0).unwrap();
    let psi = SampledFunction::from_expr(&g, Expr::x());
    assert!(matches!(
        resolvent_solution(&psi, C64::new(1.0, 0.0), 0, 1e-14),
        Err(phipower::Error::NonvanishingViolation { .. })
    ));
}
