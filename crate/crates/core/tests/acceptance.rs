//! Acceptance criteria at the default grid (L = 100, n = 8000). Each test
//! writes one `criterion N: PASS|FAIL` line to stderr, bypassing output
//! capture so the lines appear in a plain `cargo test` log.

use std::io::Write;
use std::sync::OnceLock;

use alpha2_dynamo::dirac;
use alpha2_dynamo::kernels::Grid;
use alpha2_dynamo::pencil::{reduced_spectrum, solve_pencil, sweep, x0_range, PencilProblem, SweepRow};
use alpha2_dynamo::perturbation::{local_slope_check, solvability_e1, wronskian_deviation, x_jordan};
use alpha2_dynamo::verify::{audit_solution, box_convergence_ratio, epsilon_crossings, onset, soliton_level, Audit};

fn grid() -> Grid<f64> {
    Grid::standard()
}

struct Shared {
    rows: Vec<SweepRow<f64>>,
    audits: Vec<(usize, f64, Audit<f64>)>,
    jordan_cells: usize,
}

/// One sweep over l = 0..3, x0 ∈ [0, 4] step 0.05, audited once.
fn shared() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = grid();
        let rows = sweep(&x0_range(0.0, 4.0, 0.05), &[0, 1, 2, 3], &g).expect("sweep");
        let mut audits = Vec::new();
        let mut jordan_cells = 0;
        for r in &rows {
            if let Some(s) = &r.solution {
                match audit_solution(s, &g).expect("audit") {
                    Some(a) => audits.push((r.l, r.x0, a)),
                    None => jordan_cells += 1,
                }
            }
        }
        Shared { rows, audits, jordan_cells }
    })
}

fn report(n: u32, passed: bool, detail: String) {
    let line = format!("criterion {n:2}: {} - {detail}\n", if passed { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "criterion {n} failed: {detail}");
}

#[test]
fn c01_reduced_level() {
    let g = grid();
    let mut worst = 0.0_f64;
    for i in 0..30 {
        let x0 = 0.1 + 2.9 * (i as f64 + 0.5) / 30.0;
        let lam = reduced_spectrum(x0, 0, &g, 1).unwrap();
        let dev = lam.first().map_or(f64::INFINITY, |l| (l - x0.tanh().powi(2)).abs());
        worst = worst.max(dev);
    }
    report(1, worst < 1e-6, format!("reduced λ = tanh²(x0) at 30 points, max |dev| = {worst:.3e} (tol 1e-6)"));
}

#[test]
fn c02_jordan_crossing() {
    let xj: f64 = x_jordan();
    let crossings = epsilon_crossings(&shared().rows, 0);
    let at = crossings.first().copied();
    let lam = at.and_then(|x| solve_pencil(x, 0, &grid()).unwrap()).map(|s| s.lambda);
    let passed = crossings.len() == 1
        && (crossings[0] - xj).abs() < 1e-2
        && lam.is_some_and(|l| (l - 0.5).abs() < 1e-4);
    report(
        2,
        passed,
        format!("ε crossings {crossings:?} vs x_J = {xj:.6} (tol 1e-2); λ there = {lam:?} (tol 1e-4)"),
    );
}

#[test]
fn c03_perturbation_coefficient() {
    let g = grid();
    let e1 = solvability_e1(&g).unwrap();
    let check = local_slope_check(&[-0.1, -0.05, -0.025, 0.025, 0.05, 0.1], &g).unwrap();
    let c = check.c_bound.unwrap_or(f64::INFINITY);
    let at_005 = check
        .rows
        .iter()
        .filter(|r| (r.delta.abs() - 0.05).abs() < 1e-12)
        .filter_map(|r| r.deviation)
        .fold(0.0_f64, |m, d| m.max(d.abs()));
    let passed = (e1.magnitude() - 0.5).abs() < 1e-6
        && e1.e1_plus < 0.0
        && check.rows.iter().all(|r| r.deviation.is_some())
        && c <= 0.2
        && at_005 < 5e-4;
    report(
        3,
        passed,
        format!(
            "ratio = {:.10} (|·| tol 1e-6 from ½), fitted c = {c:.4} (bound 0.2), c_lsq = {:.4}, |dev| at |δ|=0.05: {at_005:.3e}",
            e1.ratio,
            check.c_fit.unwrap_or(f64::NAN)
        ),
    );
}

#[test]
fn c04_wronskian() {
    let xs: Vec<f64> = (0..100).map(|i| 0.3 * i as f64).collect();
    let dev = wronskian_deviation(&xs);
    report(4, dev < 1e-10, format!("W(φ₊,φ₋) = −2^(−1/2) at 100 points, max |dev| = {dev:.3e} (tol 1e-10)"));
}

#[test]
fn c05_selection_rule() {
    let s = shared();
    let worst = s.audits.iter().map(|a| a.2.suppressed_ratio).fold(0.0_f64, f64::max);
    let gap = s
        .rows
        .iter()
        .filter_map(|r| r.solution.as_ref())
        .map(|x| x.diagnostics.suppressed_gap)
        .fold(f64::INFINITY, f64::min);
    report(
        5,
        !s.audits.is_empty() && worst < 1e-6 && gap > 0.0,
        format!(
            "{} states ({} Jordan cells skipped): max ‖F₋‖/‖F₊‖ = {worst:.3e} (tol 1e-6), min gap of other branch = {gap:.3e}",
            s.audits.len(),
            s.jordan_cells
        ),
    );
}

#[test]
fn c06_full_system() {
    let s = shared();
    let res = s.audits.iter().map(|a| a.2.full_residual).fold(0.0_f64, f64::max);
    let delta = s.audits.iter().map(|a| a.2.inverse_delta).fold(0.0_f64, f64::max);
    report(
        6,
        !s.audits.is_empty() && res < 1e-5 && delta < 1e-7,
        format!("max residual {res:.3e} (tol 1e-5), max inverse-iteration Δλ {delta:.3e} (tol 1e-7)"),
    );
}

#[test]
fn c07_dirac() {
    let g = grid();
    let mut worst = 0.0_f64;
    let mut ok = true;
    for x0 in [0.3, 0.5, 0.7] {
        let sys = dirac::build(x0, 0, &g).unwrap();
        let sol = solve_pencil(x0, 0, &g).unwrap();
        match sol.map(|s| dirac::lift_to_dirac(&s, &sys)) {
            Some(Ok(lift)) => worst = worst.max(lift.residual),
            _ => ok = false,
        }
    }
    let mut refused = Vec::new();
    for x0 in [1.0, 1.5] {
        let report = dirac::regularity_report(&[x0], 0, &g).unwrap();
        let sys = dirac::build(x0, 0, &g).unwrap();
        let sol = solve_pencil(x0, 0, &g).unwrap().unwrap();
        let r = !report[0].regular
            && matches!(dirac::lift_to_dirac(&sol, &sys), Err(alpha2_dynamo::Error::SuperpotentialPole { .. }));
        refused.push(r);
        ok &= r;
    }
    report(
        7,
        ok && worst < 1e-6,
        format!("max Dirac residual {worst:.3e} at x0 ∈ {{0.3,0.5,0.7}} (tol 1e-6); refused at {{1.0,1.5}}: {refused:?}"),
    );
}

#[test]
fn c08_overcritical_and_onset() {
    let s = shared();
    let min_lambda = s
        .rows
        .iter()
        .filter_map(|r| r.solution.as_ref())
        .map(|x| x.lambda)
        .fold(f64::INFINITY, f64::min);
    let onsets: Vec<Option<f64>> = (0..4).map(|l| onset(&s.rows, l)).collect();
    let increasing = onsets.iter().all(Option::is_some) && onsets.windows(2).all(|w| w[0] < w[1]);
    report(
        8,
        min_lambda > 0.0 && increasing,
        format!("min λ = {min_lambda:.4e} (> 0); onsets l=0..3: {onsets:?}"),
    );
}

#[test]
fn c09_field_link() {
    let s = shared();
    let worst = s.audits.iter().map(|a| a.2.field_link).fold(0.0_f64, f64::max);
    report(
        9,
        !s.audits.is_empty() && worst < 1e-6,
        format!("max ‖Φ₂ − (α/2+ε)Φ₁‖/‖Φ₂‖ = {worst:.3e} over {} states (tol 1e-6)", s.audits.len()),
    );
}

#[test]
fn c10_reality() {
    let s = shared();
    let g = grid();
    let mut checked = 0;
    let mut ok = true;
    for r in &s.rows {
        if let Some(sol) = &r.solution {
            let (lo, hi) = sol.diagnostics.bracket;
            let problem = PencilProblem::new(r.x0, r.l, &g).unwrap();
            ok &= problem.constraint_sign(lo) != problem.constraint_sign(hi);
            ok &= lo <= sol.b_star && sol.b_star <= hi && hi - lo <= 1e-11;
            ok &= [sol.lambda, sol.epsilon, sol.diagnostics.pencil_residual, r.x0].iter().all(|v| v.is_finite());
            checked += 1;
        }
    }
    report(10, ok && checked > 0, format!("{checked} roots with verified real brackets, all fields finite"));
}

#[test]
fn c11_kernel_sanity() {
    let ratio: f64 = box_convergence_ratio(100).unwrap();
    let level: f64 = soliton_level(10.0).unwrap();
    report(
        11,
        (3.5..=4.5).contains(&ratio) && (level + 1.0).abs() < 1e-5,
        format!("box convergence ratio {ratio:.4} (in [3.5,4.5]); soliton level at x0=10: {level:.9} (tol 1e-5)"),
    );
}
