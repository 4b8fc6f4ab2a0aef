//! Quadratic pencils of the decoupled problem.
//!
//! With λ = ½ − ε² each decoupled component obeys
//! [−∂² + l(l+1)/x² − α²/2 + ½ ∓ εα − ε²] F± = 0. Replacing ∓εα by bα gives
//! a linear problem A(b)F = −λ(b)F; bound states are the intersections of
//! λ(b) with the constraint λ = ½ − b². On the F₊ pencil b = −ε.
//!
//! Roots are located on G(b) = λ(b) − ½ + b², whose sign is a single Sturm
//! count (G > 0 iff A(b) has an eigenvalue below b² − ½), so the scan and
//! the bisection never need eigenvectors. The value at the root is then
//! lifted from O(h²) to O(h⁴) by a deferred correction.

use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::{
    discretize_schrodinger, fourth_order_correction, lowest_eigenpairs, lowest_eigenvalues, second_difference, sturm_count, Grid,
    TridiagonalOperator,
};
use crate::profile::AlphaProfile;
use crate::scalar::{dot, from_usize, lit, max_abs, norm, Real};

pub const SCAN_MIN: f64 = -1.5;
pub const SCAN_MAX: f64 = 1.5;
pub const SCAN_STEP: f64 = 0.02;
pub const ROOT_TOL: f64 = 1e-12;
pub const LOCALIZATION_TOL: f64 = 1e-6;
/// Fraction of the box, measured from L, inspected by the localization test.
pub const TAIL_FRACTION: f64 = 0.1;
/// Below this |ε| the state is the Jordan configuration.
pub const JORDAN_EPSILON: f64 = 1e-6;

/// Which decoupled component carries the bound state once ε is taken
/// nonnegative via (ε, F±) ↦ (−ε, F∓).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn of_epsilon<T: Real>(epsilon: T) -> Self {
        if epsilon >= T::zero() {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The reduced operator −D² + l(l+1)/x² − α²/2 on a grid, with α kept
/// alongside so that A(b) is a diagonal update.
#[derive(Debug, Clone)]
pub struct PencilProblem<T> {
    pub x0: T,
    pub l: usize,
    pub grid: Grid<T>,
    base: TridiagonalOperator<T>,
    alpha: Vec<T>,
}

impl<T: Real> PencilProblem<T> {
    pub fn new(x0: T, l: usize, grid: &Grid<T>) -> Result<Self> {
        let profile = AlphaProfile::unit(x0);
        let cent = from_usize::<T>(l * (l + 1));
        let half = lit::<T>(0.5);
        let base = discretize_schrodinger(grid, |x| {
            let a = profile.alpha(x);
            cent / (x * x) - half * a * a
        })?;
        Ok(Self {
            x0,
            l,
            grid: *grid,
            base,
            alpha: grid.sample(|x| profile.alpha(x)),
        })
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn reduced(&self) -> &TridiagonalOperator<T> {
        &self.base
    }

    /// A(b) = reduced + b·α.
    pub fn auxiliary(&self, b: T) -> TridiagonalOperator<T> {
        let mut op = self.base.clone();
        for (d, &a) in op.diagonal.iter_mut().zip(&self.alpha) {
            *d += b * a;
        }
        op
    }

    /// Operator of the F± pencil at ε, shifted so that bound states are
    /// null vectors: A(∓ε) + ½ − ε².
    pub fn pencil_operator(&self, epsilon: T, sign: Branch) -> TridiagonalOperator<T> {
        let b = match sign {
            Branch::Plus => -epsilon,
            Branch::Minus => epsilon,
        };
        self.auxiliary(b).shifted(lit::<T>(0.5) - epsilon * epsilon)
    }

    /// Sign of G(b) = λ(b) − ½ + b² as a boolean (true when positive).
    pub fn constraint_sign(&self, b: T) -> bool {
        sturm_count(&self.auxiliary(b), b * b - lit(0.5)) >= 1
    }
}

/// The k largest bound-state λ of the reduced problem
/// [−∂² + l(l+1)/x² − α²/2] F = −λF, descending. Only λ > 0 is returned.
pub fn reduced_spectrum<T: Real>(x0: T, l: usize, grid: &Grid<T>, k: usize) -> Result<Vec<T>> {
    let problem = PencilProblem::new(x0, l, grid)?;
    let op = problem.reduced();
    let below = sturm_count(op, T::zero()).min(k);
    if below == 0 {
        return Ok(Vec::new());
    }
    let h = grid.spacing();
    let pairs = lowest_eigenpairs(op, below)?;
    Ok(pairs
        .iter()
        .map(|p| -(p.value + fourth_order_correction(h, &p.vector)))
        .filter(|&lambda| lambda > T::zero())
        .collect())
}

/// Smallest-eigenvalue λ(x0, b) of A(b) in the −λ convention.
pub fn auxiliary_lambda<T: Real>(x0: T, l: usize, b: T, grid: &Grid<T>) -> Result<T> {
    let problem = PencilProblem::new(x0, l, grid)?;
    let pair = &lowest_eigenpairs(&problem.auxiliary(b), 1)?[0];
    Ok(-(pair.value + fourth_order_correction(grid.spacing(), &pair.vector)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PencilDiagnostics<T> {
    /// ‖[A(−ε) + ½ − ε²]F‖/‖F‖ at the grid root.
    pub pencil_residual: T,
    /// |λ_grid + ⟨F, A(b*)F⟩| with unit F.
    pub rayleigh_mismatch: T,
    /// Distance from the required level ε² − ½ to the spectrum of the
    /// other pencil at the same ε; positive means that branch carries no
    /// bound state.
    pub suppressed_gap: T,
    /// Deferred correction added to the grid ε.
    pub correction: T,
    /// Every b* found by the scan, ascending.
    pub roots: Vec<T>,
    /// Bracket [b_lo, b_hi] of the selected root after bisection.
    pub bracket: (T, T),
}

/// A root of the constraint equation with its eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilSolution<T> {
    pub x0: T,
    pub l: usize,
    /// ½ − ε², from the corrected ε.
    pub lambda: T,
    pub epsilon: T,
    pub grid_lambda: T,
    pub grid_epsilon: T,
    pub b_star: T,
    pub branch: Branch,
    /// Unit-norm eigenfunction on the grid nodes.
    pub f: Vec<T>,
    pub localized: bool,
    /// max|F| over the last 10% of the box relative to max|F|.
    pub tail_ratio: T,
    pub diagnostics: PencilDiagnostics<T>,
}

impl<T: Real> PencilSolution<T> {
    pub fn is_jordan(&self) -> bool {
        self.epsilon.abs() < lit(JORDAN_EPSILON)
    }
}

/// 1e-6 in double precision; single precision cannot resolve tails that
/// small, so the bound never drops below 1000 ulps.
pub fn localization_tolerance<T: Real>() -> T {
    lit::<T>(LOCALIZATION_TOL).max(lit::<T>(1e3) * T::epsilon())
}

/// Max |v| over x ≥ (1 − TAIL_FRACTION)·L relative to max |v|.
pub fn tail_ratio<T: Real>(grid: &Grid<T>, v: &[T]) -> T {
    let start = grid.nearest(grid.length() * lit(1.0 - TAIL_FRACTION));
    let peak = max_abs(v);
    if peak == T::zero() {
        return T::zero();
    }
    max_abs(&v[start..]) / peak
}

/// Brackets of sign changes of G on the scan grid, ascending in b.
pub fn bracket_roots<T: Real>(problem: &PencilProblem<T>) -> Vec<(T, T)> {
    let steps = ((SCAN_MAX - SCAN_MIN) / SCAN_STEP).round() as usize;
    let bs: Vec<T> = (0..=steps).map(|i| lit(SCAN_MIN + SCAN_STEP * i as f64)).collect();
    let signs: Vec<bool> = bs.iter().map(|&b| problem.constraint_sign(b)).collect();
    (0..steps)
        .filter(|&i| signs[i] != signs[i + 1])
        .map(|i| (bs[i], bs[i + 1]))
        .collect()
}

fn bisect<T: Real>(problem: &PencilProblem<T>, mut lo: T, mut hi: T) -> (T, T) {
    let s_lo = problem.constraint_sign(lo);
    let tol = lit::<T>(ROOT_TOL);
    while hi - lo > tol {
        let mid = lo + (hi - lo) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if problem.constraint_sign(mid) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Distance from `level` to the nearest eigenvalue of `op`.
fn spectral_gap<T: Real>(op: &TridiagonalOperator<T>, level: T) -> Result<T> {
    let below = sturm_count(op, level);
    let values = lowest_eigenvalues(op, below + 1, lit(1e-10))?;
    let above = values[below] - level;
    Ok(match below {
        0 => above,
        k => above.min(level - values[k - 1]),
    })
}

/// Every intersection of λ(b) with the constraint, localized or not.
pub fn scan_pencil<T: Real>(problem: &PencilProblem<T>) -> Result<Vec<PencilSolution<T>>> {
    let brackets = bracket_roots(problem);
    let refined: Vec<(T, T)> = brackets.iter().map(|&(lo, hi)| bisect(problem, lo, hi)).collect();
    let roots: Vec<T> = refined.iter().map(|&(lo, hi)| lo + (hi - lo) * lit(0.5)).collect();
    refined
        .iter()
        .zip(&roots)
        .map(|(&bracket, &b)| candidate(problem, b, bracket, &roots))
        .collect()
}

fn candidate<T: Real>(problem: &PencilProblem<T>, b: T, bracket: (T, T), roots: &[T]) -> Result<PencilSolution<T>> {
    let grid = &problem.grid;
    let h = grid.spacing();
    let op = problem.auxiliary(b);
    let pair = lowest_eigenpairs(&op, 1)?.remove(0);
    let f = pair.vector;
    let grid_epsilon = -b;
    let grid_lambda = -pair.value;

    let pencil = problem.pencil_operator(grid_epsilon, Branch::Plus);
    let pencil_residual = norm(&pencil.apply(&f)) / norm(&f);
    let rayleigh_mismatch = (grid_lambda + dot(&f, &op.apply(&f))).abs();

    // ε_exact ≈ ε_h + (h²/12)‖D²F‖² / ⟨F, (α + 2ε)F⟩
    let d2 = second_difference(h, &f);
    let num = h * h / lit(12.0) * dot(&d2, &d2);
    let weighted: T = f
        .iter()
        .zip(problem.alpha())
        .map(|(&v, &a)| (a + lit::<T>(2.0) * grid_epsilon) * v * v)
        .sum();
    let correction = if weighted.abs() > lit(1e-3) {
        num / weighted
    } else {
        T::zero()
    };
    let epsilon = grid_epsilon + correction;
    let lambda = lit::<T>(0.5) - epsilon * epsilon;

    let suppressed_gap = spectral_gap(&problem.auxiliary(epsilon), epsilon * epsilon - lit(0.5))?;

    let tail = tail_ratio(grid, &f);
    Ok(PencilSolution {
        x0: problem.x0,
        l: problem.l,
        lambda,
        epsilon,
        grid_lambda,
        grid_epsilon,
        b_star: b,
        branch: Branch::of_epsilon(epsilon),
        localized: tail < localization_tolerance(),
        tail_ratio: tail,
        f,
        diagnostics: PencilDiagnostics {
            pencil_residual,
            rayleigh_mismatch,
            suppressed_gap,
            correction,
            roots: roots.to_vec(),
            bracket,
        },
    })
}

/// Picks the localized candidate closest to `previous` (continuity), or
/// the one with the largest λ when there is no history.
fn select<T: Real>(candidates: Vec<PencilSolution<T>>, previous: Option<T>) -> Option<PencilSolution<T>> {
    let localized = candidates.into_iter().filter(|c| c.localized);
    match previous {
        Some(eps) => localized.min_by(|a, b| {
            let da = (a.epsilon - eps).abs();
            let db = (b.epsilon - eps).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        }),
        None => localized.max_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(std::cmp::Ordering::Equal)),
    }
}

/// Bound state of the pencil at (x0, l), or `None` when no localized
/// intersection exists.
pub fn solve_pencil<T: Real>(x0: T, l: usize, grid: &Grid<T>) -> Result<Option<PencilSolution<T>>> {
    let problem = PencilProblem::new(x0, l, grid)?;
    Ok(select(scan_pencil(&problem)?, None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub l: usize,
    pub x0: T,
    pub solution: Option<PencilSolution<T>>,
    /// All constraint roots b* found at this cell.
    pub roots: Vec<T>,
}

/// Solves every (l, x0) cell in parallel and returns rows ordered by
/// (l, x0). Multiple localized roots are disambiguated by continuity along
/// increasing x0.
pub fn sweep<T: Real>(x0_values: &[T], l_values: &[usize], grid: &Grid<T>) -> Result<Vec<SweepRow<T>>> {
    let cells: Vec<(usize, T)> = l_values
        .iter()
        .flat_map(|&l| x0_values.iter().map(move |&x0| (l, x0)))
        .collect();
    let scanned: Vec<Vec<PencilSolution<T>>> = cells
        .par_iter()
        .map(|&(l, x0)| scan_pencil(&PencilProblem::new(x0, l, grid)?))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells.len());
    let mut previous: Option<(usize, T)> = None;
    for (&(l, x0), candidates) in cells.iter().zip(scanned) {
        let history = previous.filter(|&(pl, _)| pl == l).map(|(_, e)| e);
        let roots = candidates.first().map(|c| c.diagnostics.roots.clone()).unwrap_or_default();
        let solution = select(candidates, history);
        previous = match &solution {
            Some(s) => Some((l, s.epsilon)),
            None if history.is_some() => None,
            None => previous.filter(|&(pl, _)| pl == l),
        };
        rows.push(SweepRow { l, x0, solution, roots });
    }
    Ok(rows)
}

/// x0 values min, min + step, ... up to max (inclusive within half a step).
pub fn x0_range<T: Real>(min: T, max: T, step: T) -> Vec<T> {
    let count = ((max - min) / step + lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=count).map(|i| min + step * from_usize(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_jordan() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2.atanh()
    }

    fn coarse() -> Grid<f64> {
        Grid::new(60.0, 3000).unwrap()
    }

    #[test]
    fn reduced_matches_level_formula() {
        let grid = Grid::standard();
        for &x0 in &[x_jordan(), 2.0] {
            let lam = reduced_spectrum(x0, 0, &grid, 3).unwrap();
            assert_eq!(lam.len(), 1);
            assert!((lam[0] - x0.tanh().powi(2)).abs() < 1e-6, "{x0}: {}", lam[0]);
        }
    }

    #[test]
    fn no_reduced_bound_state_for_l1_near_origin() {
        assert!(reduced_spectrum(0.1, 1, &Grid::standard(), 2).unwrap().is_empty());
    }

    #[test]
    fn auxiliary_at_zero_is_reduced_top() {
        let grid = coarse();
        let top = reduced_spectrum(1.5, 0, &grid, 1).unwrap()[0];
        let aux = auxiliary_lambda(1.5, 0, 0.0, &grid).unwrap();
        assert!((top - aux).abs() < 1e-12);
    }

    #[test]
    fn auxiliary_is_monotone_in_b() {
        let grid = coarse();
        let lams: Vec<f64> = (0..=40)
            .map(|i| auxiliary_lambda(1.0, 0, -1.0 + 0.05 * i as f64, &grid).unwrap())
            .collect();
        assert!(lams.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn jordan_point_has_zero_epsilon() {
        let s = solve_pencil(x_jordan(), 0, &Grid::standard()).unwrap().unwrap();
        assert!(s.epsilon.abs() < 1e-6, "{}", s.epsilon);
        assert!((s.lambda - 0.5).abs() < 1e-10);
        assert!(s.is_jordan());
    }

    #[test]
    fn epsilon_changes_sign_across_jordan_point() {
        let grid = Grid::standard();
        let below = solve_pencil(x_jordan() - 0.2, 0, &grid).unwrap().unwrap();
        let above = solve_pencil(x_jordan() + 0.05, 0, &grid).unwrap().unwrap();
        assert!((below.epsilon - 0.1).abs() < 0.01, "{}", below.epsilon);
        assert_eq!(below.branch, Branch::Plus);
        assert!(above.epsilon < 0.0);
        assert_eq!(above.branch, Branch::Minus);
    }

    #[test]
    fn solution_invariants() {
        let grid = Grid::standard();
        let s = solve_pencil(1.4_f64, 1, &grid).unwrap().unwrap();
        assert!((s.lambda - (0.5 - s.epsilon * s.epsilon)).abs() < 1e-12);
        assert!(s.localized);
        assert!((norm(&s.f) - 1.0).abs() < 1e-12);
        assert!(s.diagnostics.pencil_residual < 1e-7, "{}", s.diagnostics.pencil_residual);
        assert!(s.diagnostics.rayleigh_mismatch < 1e-8);
        assert!(s.diagnostics.suppressed_gap > 0.0);
        assert!(s.diagnostics.correction.abs() < 1e-4);
    }

    #[test]
    fn branch_symmetry() {
        let grid = coarse();
        let problem = PencilProblem::new(0.6, 0, &grid).unwrap();
        let s = select(scan_pencil(&problem).unwrap(), None).unwrap();
        let plus = problem.auxiliary(-s.grid_epsilon);
        let minus_op = problem.pencil_operator(-s.grid_epsilon, Branch::Minus);
        let lp = lowest_eigenpairs(&plus, 1).unwrap()[0].value;
        let lm = lowest_eigenpairs(&minus_op, 1).unwrap()[0].value;
        let level = s.grid_epsilon * s.grid_epsilon - 0.5;
        assert!((lp - level).abs() < 1e-8);
        assert!((lm - (lp - level)).abs() < 1e-8);
    }

    #[test]
    fn continuum_roots_are_rejected() {
        let problem = PencilProblem::new(0.5, 0, &Grid::standard()).unwrap();
        let all = scan_pencil(&problem).unwrap();
        assert!(all.len() >= 2, "{}", all.len());
        assert_eq!(all.iter().filter(|c| c.localized).count(), 1);
    }

    #[test]
    fn sweep_rows_are_ordered() {
        let grid = coarse();
        let xs = x0_range(0.0, 2.0, 0.5);
        assert_eq!(xs.len(), 5);
        let rows = sweep(&xs, &[1, 0], &grid).unwrap();
        let keys: Vec<(usize, f64)> = rows.iter().map(|r| (r.l, r.x0)).collect();
        assert_eq!(keys[0], (1, 0.0));
        assert_eq!(keys[5], (0, 0.0));
        assert_eq!(rows.len(), 10);
        assert!(rows[0].solution.is_none());
        assert!(rows[9].solution.is_some());
    }

    #[test]
    fn range_includes_endpoint() {
        let xs = x0_range(0.0_f64, 4.0, 0.05);
        assert_eq!(xs.len(), 81);
        assert!((xs[80] - 4.0).abs() < 1e-12);
    }
}
