//! Cross-module invariant checks, shared by the command-line `verify`
//! command and the test suites.

use crate::dirac;
use crate::error::Result;
use crate::kernels::{discretize_schrodinger, fourth_order_correction, lowest_eigenpairs, lowest_eigenvalues, Grid};
use crate::pencil::{reduced_spectrum, solve_pencil, sweep, x0_range, PencilSolution, SweepRow};
use crate::perturbation::{
    first_order_correction, local_slope_check, solvability_e1, wronskian_deviation, x_jordan,
};
use crate::profile::AlphaProfile;
use crate::scalar::{lit, Real};
use crate::transform::{
    field_link_residual, inverse_iteration_step, reconstruct_phi, suppressed_branch_ratio, full_system_residual,
    FluxScheme, MatrixPipeline,
};

/// Full-problem diagnostics of one pencil bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit<T> {
    /// ‖(B − λ)Φ‖/‖Φ‖ for the reconstructed Φ.
    pub full_residual: T,
    /// |λ' − λ| after one block inverse-iteration step.
    pub inverse_delta: T,
    /// Field link on the inverse-iterated Φ.
    pub field_link: T,
    /// ‖F₋‖/‖F₊‖ on the inverse-iterated Φ.
    pub suppressed_ratio: T,
}

/// Audits a bound state; `None` in the Jordan regime, where U is singular.
pub fn audit_solution<T: Real>(sol: &PencilSolution<T>, grid: &Grid<T>) -> Result<Option<Audit<T>>> {
    if sol.is_jordan() {
        return Ok(None);
    }
    let pipe = MatrixPipeline::for_solution(sol, grid);
    let phi = reconstruct_phi(sol, &pipe)?;
    let full_residual = full_system_residual(&pipe, &phi, FluxScheme::Consistent);
    let step = inverse_iteration_step(&pipe, &phi, FluxScheme::Consistent)?;
    Ok(Some(Audit {
        full_residual,
        inverse_delta: step.delta(),
        field_link: field_link_residual(&step.phi.phi1, &step.phi.phi2, &pipe)?,
        suppressed_ratio: suppressed_branch_ratio(&step.phi, &pipe)?,
    }))
}

/// Zero crossings of ε(x0) along rows of one l, by linear interpolation
/// between consecutive bound states.
pub fn epsilon_crossings<T: Real>(rows: &[SweepRow<T>], l: usize) -> Vec<T> {
    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|r| r.l == l)
        .filter_map(|r| r.solution.as_ref().map(|s| (r.x0, s.epsilon)))
        .collect();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let ((xa, ea), (xb, eb)) = (w[0], w[1]);
        if ea == T::zero() {
            out.push(xa);
        } else if ea * eb < T::zero() {
            out.push(xa - ea * (xb - xa) / (eb - ea));
        }
    }
    out
}

/// First x0 carrying a bound state for the given l.
pub fn onset<T: Real>(rows: &[SweepRow<T>], l: usize) -> Option<T> {
    rows.iter().find(|r| r.l == l && r.solution.is_some()).map(|r| r.x0)
}

/// |λ(h) − λ(h/2)| / |λ(h/2) − λ(h/4)| for the lowest free-box mode on
/// [0, π] with n + 1 = m, 2m, 4m cells.
pub fn box_convergence_ratio<T: Real>(m: usize) -> Result<T> {
    let level = |cells: usize| -> Result<T> {
        let grid = Grid::new(T::PI(), cells - 1)?;
        let op = discretize_schrodinger(&grid, |_| T::zero())?;
        Ok(lowest_eigenvalues(&op, 1, lit(1e-13))?[0])
    };
    let (a, b, c) = (level(m)?, level(2 * m)?, level(4 * m)?);
    Ok((a - b).abs() / (b - c).abs())
}

/// Lowest level of −∂² − 2sech²(x − x0) on [0, 100], Richardson
/// extrapolated over n + 1 ∈ {2000, 4000, 8000}.
pub fn soliton_level<T: Real>(x0: T) -> Result<T> {
    let level = |cells: usize| -> Result<T> {
        let grid = Grid::new(lit(100.0), cells - 1)?;
        let profile = AlphaProfile::unit(x0);
        let op = discretize_schrodinger(&grid, |x| -lit::<T>(0.5) * profile.alpha(x).powi(2))?;
        Ok(lowest_eigenvalues(&op, 1, lit(1e-13))?[0])
    };
    let (a, b, c) = (level(2000)?, level(4000)?, level(8000)?);
    let (r1, r2) = ((lit::<T>(4.0) * b - a) / lit(3.0), (lit::<T>(4.0) * c - b) / lit(3.0));
    Ok((lit::<T>(16.0) * r2 - r1) / lit(15.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub grid: Grid<f64>,
    pub l_values: Vec<usize>,
    pub x0_values: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            grid: Grid::standard(),
            l_values: vec![0, 1, 2, 3],
            x0_values: x0_range(0.0, 4.0, 0.05),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.3e}"))
}

/// Runs every invariant and returns one row per check.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let grid = &cfg.grid;
    let mut out = Vec::new();
    let xj: f64 = x_jordan();

    let worst_ode = (0..1000)
        .map(|i| {
            let t = i as f64 / 999.0;
            let p = AlphaProfile::new(0.1 + 4.9 * t, -3.0 + 6.0 * ((7 * i) % 1000) as f64 / 999.0).unwrap();
            p.ode_residual(-5.0 + 15.0 * ((13 * i) % 1000) as f64 / 999.0).abs()
        })
        .fold(0.0_f64, f64::max);
    out.push(Check::new("profile ODE residual", worst_ode < 1e-12, format!("max {worst_ode:.3e}")));

    let mut worst = 0.0_f64;
    for i in 0..30 {
        let x0 = 0.1 + 2.9 * (i as f64 + 0.5) / 30.0;
        let lam = reduced_spectrum(x0, 0, grid, 1)?;
        let dev = lam.first().map_or(f64::INFINITY, |l| (l - x0.tanh().powi(2)).abs());
        worst = worst.max(dev);
    }
    out.push(Check::new("reduced level tanh²(x0)", worst < 1e-6, format!("max dev {worst:.3e}")));

    let xs: Vec<f64> = (0..100).map(|i| 0.3 * i as f64).collect();
    let wd = wronskian_deviation(&xs);
    out.push(Check::new("Wronskian −2^(−1/2)", wd < 1e-10, format!("max dev {wd:.3e}")));

    let e1 = solvability_e1(grid)?;
    let chi_ok = first_order_correction(e1.e1_plus, grid).is_ok();
    out.push(Check::new(
        "solvability ratio ½",
        (e1.magnitude() - 0.5).abs() < 1e-6 && e1.ratio < 0.0 && chi_ok,
        format!("ratio {:.10}, χ decays {chi_ok}", e1.ratio),
    ));
    let slope = local_slope_check(&[-0.1, -0.05, -0.025, 0.025, 0.05, 0.1], grid)?;
    let c = slope.c_bound;
    out.push(Check::new(
        "local slope ε ≈ −δ/2",
        c.is_some_and(|c| c <= 0.2) && slope.rows.iter().all(|r| r.deviation.is_some()),
        format!("c = {}", fmt_opt(c)),
    ));

    let rows = sweep(&cfg.x0_values, &cfg.l_values, grid)?;
    let crossings = epsilon_crossings(&rows, 0);
    let cross_ok = crossings.len() == 1 && (crossings[0] - xj).abs() < 1e-2;
    let lam_cross = match crossings.first() {
        Some(&x) => solve_pencil(x, 0, grid)?.map(|s| s.lambda),
        None => None,
    };
    let lam_ok = lam_cross.is_some_and(|l| (l - 0.5).abs() < 1e-4);
    if cfg.l_values.contains(&0) {
        out.push(Check::new(
            "Jordan crossing",
            cross_ok && lam_ok,
            format!("crossings {crossings:?}, λ {}", fmt_opt(lam_cross)),
        ));
    }

    let (mut full, mut inv, mut link, mut supp, mut gap) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
    let mut count = 0;
    let mut failures = 0;
    for s in rows.iter().filter_map(|r| r.solution.as_ref()) {
        gap = gap.min(s.diagnostics.suppressed_gap);
        match audit_solution(s, grid) {
            Ok(Some(a)) => {
                count += 1;
                full = full.max(a.full_residual);
                inv = inv.max(a.inverse_delta);
                link = link.max(a.field_link);
                supp = supp.max(a.suppressed_ratio);
            }
            Ok(None) => {}
            Err(_) => failures += 1,
        }
    }
    let clean = failures == 0;
    out.push(Check::new(
        "selection rule",
        clean && supp < 1e-6 && gap > 0.0,
        format!("{count} states, max ratio {supp:.3e}, min gap {gap:.3e}"),
    ));
    out.push(Check::new(
        "full-system equivalence",
        clean && full < 1e-5 && inv < 1e-7,
        format!("max residual {full:.3e}, max Δλ {inv:.3e}"),
    ));
    out.push(Check::new("field link", clean && link < 1e-6, format!("max {link:.3e}")));

    let mut dirac_ok = true;
    let mut dirac_worst = 0.0_f64;
    for x0 in [0.3, 0.5, 0.7] {
        let sys = dirac::build(x0, 0, grid)?;
        match solve_pencil(x0, 0, grid)? {
            Some(sol) => match dirac::lift_to_dirac(&sol, &sys) {
                Ok(lift) => dirac_worst = dirac_worst.max(lift.residual),
                Err(_) => dirac_ok = false,
            },
            None => dirac_ok = false,
        }
    }
    for x0 in [1.0, 1.5] {
        let sys = dirac::build(x0, 0, grid)?;
        let refused = match solve_pencil(x0, 0, grid)? {
            Some(sol) => dirac::lift_to_dirac(&sol, &sys).is_err(),
            None => false,
        };
        dirac_ok &= !sys.regular && refused;
    }
    out.push(Check::new(
        "Dirac equivalence",
        dirac_ok && dirac_worst < 1e-6,
        format!("max residual {dirac_worst:.3e}"),
    ));

    let positive = rows.iter().filter_map(|r| r.solution.as_ref()).all(|s| s.lambda > 0.0);
    let onsets: Vec<Option<f64>> = cfg.l_values.iter().map(|&l| onset(&rows, l)).collect();
    let increasing = onsets.iter().all(Option::is_some)
        && onsets.windows(2).all(|w| w[0].unwrap() < w[1].unwrap());
    out.push(Check::new(
        "overcritical, onset ordering",
        positive && increasing,
        format!("onsets {onsets:?}"),
    ));

    let real = rows.iter().filter_map(|r| r.solution.as_ref()).all(|s| {
        let (lo, hi) = s.diagnostics.bracket;
        s.epsilon.is_finite() && s.lambda.is_finite() && lo <= s.b_star && s.b_star <= hi && hi - lo <= 1e-11
    });
    out.push(Check::new("reality of roots", real, "bracketed real roots".into()));

    let ratio: f64 = box_convergence_ratio(100)?;
    let soliton: f64 = soliton_level(10.0)?;
    out.push(Check::new(
        "kernel sanity",
        (3.5..=4.5).contains(&ratio) && (soliton + 1.0).abs() < 1e-5,
        format!("ratio {ratio:.4}, soliton {soliton:.8}"),
    ));
    Ok(out)
}

/// Corrected lowest level of a discretized H₁ with the given center.
pub fn h1_level<T: Real>(x0: T, grid: &Grid<T>) -> Result<T> {
    let profile = AlphaProfile::unit(x0);
    let op = discretize_schrodinger(grid, |x| -lit::<T>(0.5) * profile.alpha(x).powi(2))?;
    let p = &lowest_eigenpairs(&op, 1)?[0];
    Ok(p.value + fourth_order_correction(grid.spacing(), &p.vector))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_ratio_is_four() {
        let r: f64 = box_convergence_ratio(100).unwrap();
        assert!((3.9..4.1).contains(&r), "{r}");
    }

    #[test]
    fn soliton_level_is_minus_one() {
        let e: f64 = soliton_level(10.0).unwrap();
        assert!((e + 1.0).abs() < 1e-5, "{e}");
    }

    #[test]
    fn crossings_interpolate() {
        let grid = Grid::new(60.0, 3000).unwrap();
        let rows = sweep(&[0.8, 0.85, 0.9, 0.95], &[0], &grid).unwrap();
        let c = epsilon_crossings(&rows, 0);
        assert_eq!(c.len(), 1);
        assert!((c[0] - x_jordan::<f64>()).abs() < 1e-2);
        assert_eq!(onset(&rows, 0), Some(0.8));
        assert_eq!(onset(&rows, 5), None);
    }

    #[test]
    fn h1_level_matches_formula() {
        let g: Grid<f64> = Grid::standard();
        let e = h1_level(1.0, &g).unwrap();
        assert!((e + 1.0_f64.tanh().powi(2)).abs() < 1e-6);
    }
}
