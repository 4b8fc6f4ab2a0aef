use alpha2_dynamo::kernels::{discretize_schrodinger, fourth_order_correction, lowest_eigenpairs, Grid};
use alpha2_dynamo::pencil::{reduced_spectrum, solve_pencil};
use alpha2_dynamo::perturbation::{solvability_e1, x_jordan};
use alpha2_dynamo::profile::AlphaProfile;
use alpha2_dynamo::susy_exact::{bound_state_level, h2l_factorization_seed};
use alpha2_dynamo::transform::build_pipeline;
use alpha2_dynamo::verify::h1_level;
use proptest::prelude::*;

fn grid() -> Grid<f64> {
    Grid::standard()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn level_formula_matches_eigensolver(x0 in 0.1f64..3.0) {
        let exact = bound_state_level(x0).unwrap();
        let numeric = h1_level(x0, &grid()).unwrap();
        prop_assert!((exact - numeric).abs() < 1e-6, "x0 = {}: {} vs {}", x0, exact, numeric);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipeline_identities(x0 in -1.0f64..4.0, eps in 0.01f64..0.7, l in 0usize..4, sign in prop::bool::ANY) {
        let g = Grid::new(20.0, 200).unwrap();
        let eps = if sign { eps } else { -eps };
        let pipe = build_pipeline(x0, l, eps, &g);
        prop_assert!(pipe.max_p_squared_deviation() < 1e-12);
        prop_assert!(pipe.max_diagonalization_deviation().unwrap() < 1e-10);
        prop_assert!((pipe.u.det() + 2.0 * eps).abs() < 1e-15);
    }
}

#[test]
fn rescaled_problem_scales_eigenvalue() {
    // a = 2, x0 = 1 on r ∈ (0, 50) against a = 1, x0 = 2 on x ∈ (0, 100).
    let profile = AlphaProfile::new(2.0_f64, 1.0).unwrap();
    let rgrid = Grid::new(50.0, 8000).unwrap();
    let op = discretize_schrodinger(&rgrid, |r| -0.5 * profile.alpha(r).powi(2)).unwrap();
    let p = &lowest_eigenpairs(&op, 1).unwrap()[0];
    let lambda_a = -(p.value + fourth_order_correction(rgrid.spacing(), &p.vector));
    let unit = profile.rescale_to_unit_a().unwrap();
    let lambda_unit = reduced_spectrum(unit.x0, 0, &grid(), 1).unwrap()[0];
    let mapped = profile.unit_scale().lambda(lambda_unit);
    assert!(((lambda_a - mapped) / mapped).abs() < 1e-6, "{lambda_a} vs {mapped}");
}

#[test]
fn node_transition_at_jordan_point() {
    let g = grid();
    let xj: f64 = x_jordan();
    let has_node = |x0: f64| h2l_factorization_seed(x0, 0, &g).unwrap().nodes > 0;
    let (mut lo, mut hi) = (xj - 0.3, xj + 0.3);
    assert!(!has_node(lo) && has_node(hi));
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if has_node(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((0.5 * (lo + hi) - xj).abs() < g.spacing(), "{lo}");
}

#[test]
fn real_roots_below_jordan_point() {
    let g = grid();
    for i in 0..9 {
        let x0 = 0.1 * i as f64;
        let s = solve_pencil(x0, 0, &g).unwrap().expect("bound state");
        assert!(s.epsilon.is_finite() && s.epsilon > 0.0, "{x0}: {}", s.epsilon);
        assert!(s.diagnostics.rayleigh_mismatch < 1e-8);
        assert!(s.diagnostics.pencil_residual < 1e-7);
    }
}

#[test]
fn consistency_triangle() {
    let g = grid();
    let xj: f64 = x_jordan();
    let e1 = solvability_e1(&g).unwrap().e1_plus;
    for delta in [0.02, 0.04] {
        let up = solve_pencil(xj + delta, 0, &g).unwrap().unwrap().epsilon;
        let down = solve_pencil(xj - delta, 0, &g).unwrap().unwrap().epsilon;
        let slope = (up - down) / (2.0 * delta);
        assert!((slope - e1).abs() < 0.5 * delta, "δ = {delta}: slope {slope}, e1 {e1}");
    }
}

#[test]
fn single_precision_pencil() {
    let g32 = Grid::new(40.0_f32, 2000).unwrap();
    let g64 = Grid::new(40.0_f64, 2000).unwrap();
    let s32 = solve_pencil(0.5_f32, 0, &g32).unwrap().unwrap();
    let s64 = solve_pencil(0.5_f64, 0, &g64).unwrap().unwrap();
    assert!((s32.epsilon as f64 - s64.epsilon).abs() < 1e-3, "{} vs {}", s32.epsilon, s64.epsilon);
}
