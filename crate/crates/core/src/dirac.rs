//! Dirac form of the pencils.
//!
//! With H₂,ₗ = −∂² + l(l+1)/x² − ½α² + ½ = L†L, L = −∂ + w, w = u'/u, the F₊
//! pencil splits into Lψ₁ = εψ₂ and L†ψ₂ − (α + ε)ψ₁ = 0, i.e.
//! (γ∂ + V_D)Ψ = εΨ with γ = [[0, 1], [−1, 0]] and V_D = [[−α, w], [w, 0]].
//! This needs u nodeless on (0, L).
//!
//! On the grid the factorization is kept exact by a staggered difference
//! operator built from the discrete zero-energy solution u_i:
//! (L_h f)_{i+½} = (f_i √(u_{i+1}/u_i) − f_{i+1} √(u_i/u_{i+1}))/h, so that
//! L_h†L_h is the three-point H₂,ₗ. ψ₂ therefore lives on half-nodes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::Grid;
use crate::pencil::{solve_pencil, PencilSolution, JORDAN_EPSILON};
use crate::profile::AlphaProfile;
use crate::scalar::{from_usize, lit, norm, to_f64, Real};
use crate::susy_exact::{h2l_factorization_seed, FactorizationSeed};
use crate::transform::Mat2;

#[derive(Debug, Clone)]
pub struct DiracSystem<T> {
    pub x0: T,
    pub l: usize,
    pub grid: Grid<T>,
    pub seed: FactorizationSeed<T>,
    /// u'/u at the nodes; `None` when u has a node.
    pub w: Option<Vec<T>>,
    pub alpha: Vec<T>,
    /// Discrete zero-energy solution u_0..u_{n+1} of the three-point H₂,ₗ.
    pub u_discrete: Vec<T>,
    pub regular: bool,
}

impl<T: Real> DiracSystem<T> {
    pub fn gamma() -> Mat2<T> {
        Mat2::new(T::zero(), T::one(), -T::one(), T::zero())
    }

    /// V_D at node i, or `None` when w is undefined.
    pub fn potential(&self, i: usize) -> Option<Mat2<T>> {
        let w = self.w.as_ref()?[i];
        Some(Mat2::new(-self.alpha[i], w, w, T::zero()))
    }

    fn ratios(&self) -> Vec<T> {
        // r_i = √(u_{i+1}/u_i) for i = 1..n, stored at index i.
        let u = &self.u_discrete;
        let mut r = vec![T::zero(); u.len()];
        for i in 1..u.len() - 1 {
            r[i] = (u[i + 1] / u[i]).sqrt();
        }
        r
    }

    /// (L_h f) on the half-nodes x_{½}, ..., x_{n+½}.
    pub fn lower(&self, f: &[T]) -> Vec<T> {
        let n = f.len();
        let h = self.grid.spacing();
        let r = self.ratios();
        (0..=n)
            .map(|j| {
                // Half-node j + ½ couples f_j and f_{j+1}; at j = 0 both
                // terms vanish since f_0 = 0 and √(u_0/u_1) = 0.
                if j == 0 {
                    return T::zero();
                }
                let right = if j < n { f[j] / r[j] } else { T::zero() };
                (f[j - 1] * r[j] - right) / h
            })
            .collect()
    }

    /// (L_h† g) on the nodes for g on the half-nodes.
    pub fn raise(&self, g: &[T]) -> Vec<T> {
        let n = g.len() - 1;
        let h = self.grid.spacing();
        let r = self.ratios();
        (1..=n)
            .map(|i| {
                let up = g[i] * r[i];
                let down = if i >= 2 { g[i - 1] / r[i - 1] } else { T::zero() };
                (up - down) / h
            })
            .collect()
    }

    /// ‖L_h†L_h f − H₂,ₗ f‖ / ‖f‖ with the three-point H₂,ₗ.
    pub fn factorization_residual(&self, f: &[T]) -> T {
        let lhs = self.raise(&self.lower(f));
        let h = self.grid.spacing();
        let inv_h2 = T::one() / (h * h);
        let n = f.len();
        let cent = from_usize::<T>(self.l * (self.l + 1));
        let half = lit::<T>(0.5);
        let r: Vec<T> = (0..n)
            .map(|i| {
                let x = self.grid.node(i);
                let a = self.alpha[i];
                let q = cent / (x * x) - half * a * a + half;
                let lo = if i > 0 { f[i - 1] } else { T::zero() };
                let hi = if i + 1 < n { f[i + 1] } else { T::zero() };
                let h2 = (lit::<T>(2.0) * f[i] - lo - hi) * inv_h2 + q * f[i];
                lhs[i] - h2
            })
            .collect();
        norm(&r) / norm(f)
    }
}

/// Solves the three-point recurrence of H₂,ₗ u = 0 from u₀ = 0, u₁ = h^{l+1}.
fn discrete_seed<T: Real>(x0: T, l: usize, grid: &Grid<T>) -> Vec<T> {
    let profile = AlphaProfile::unit(x0);
    let h = grid.spacing();
    let cent = from_usize::<T>(l * (l + 1));
    let half = lit::<T>(0.5);
    let n = grid.len();
    let mut u = Vec::with_capacity(n + 2);
    u.push(T::zero());
    u.push(h.powi(l as i32 + 1));
    for i in 1..=n {
        let x = grid.node(i - 1);
        let a = profile.alpha(x);
        let q = cent / (x * x) - half * a * a + half;
        let next = (lit::<T>(2.0) + h * h * q) * u[i] - u[i - 1];
        u.push(next);
    }
    u
}

pub fn build<T: Real>(x0: T, l: usize, grid: &Grid<T>) -> Result<DiracSystem<T>> {
    let seed = h2l_factorization_seed(x0, l, grid)?;
    let u_discrete = discrete_seed(x0, l, grid);
    let positive = u_discrete[1..].iter().all(|&v| v > T::zero() && v.is_finite());
    let regular = seed.is_regular() && positive;
    let w = if regular { seed.superpotential() } else { None };
    let profile = AlphaProfile::unit(x0);
    Ok(DiracSystem {
        x0,
        l,
        grid: *grid,
        w,
        alpha: grid.sample(|x| profile.alpha(x)),
        u_discrete,
        regular,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracLift<T> {
    pub epsilon: T,
    /// ψ₁ on the nodes.
    pub psi1: Vec<T>,
    /// ψ₂ on the half-nodes x_{½}..x_{n+½}.
    pub psi2: Vec<T>,
    /// ‖(γ∂ + V_D)Ψ − εΨ‖ / ‖Ψ‖.
    pub residual: T,
    /// ‖L_hψ₁ − εψ₂‖ / ‖Ψ‖.
    pub lower_residual: T,
    /// ‖L_h†ψ₂ − (α + ε)ψ₁‖ / ‖Ψ‖.
    pub upper_residual: T,
    /// ‖ε²ψ₁ − (εL_h†ψ₂ − αεψ₁)‖ / ‖ψ₁‖, the pencil recovered from the pair.
    pub pencil_identity: T,
}

impl<T: Real> DiracLift<T> {
    pub fn psi2_at_origin(&self) -> T {
        self.psi2[0]
    }
}

/// ψ₁ = F, ψ₂ = L_hψ₁/ε, with the Dirac residual of the pair.
pub fn lift_to_dirac<T: Real>(sol: &PencilSolution<T>, sys: &DiracSystem<T>) -> Result<DiracLift<T>> {
    let eps = sol.grid_epsilon;
    if eps.abs() <= lit(JORDAN_EPSILON) {
        return Err(Error::JordanRegime { epsilon: to_f64(eps) });
    }
    if !sys.regular {
        return Err(Error::SuperpotentialPole {
            x0: to_f64(sys.x0),
            l: sys.l,
            nodes: sys.seed.nodes.max(1),
        });
    }
    if sol.f.len() != sys.grid.len() {
        return Err(Error::InvalidInput("solution and Dirac system use different grids".into()));
    }
    let psi1 = sol.f.clone();
    let lowered = sys.lower(&psi1);
    let psi2: Vec<T> = lowered.iter().map(|&v| v / eps).collect();

    let raised = sys.raise(&psi2);
    let upper: Vec<T> = raised
        .iter()
        .zip(&psi1)
        .zip(&sys.alpha)
        .map(|((&r, &p), &a)| r - (a + eps) * p)
        .collect();
    let lower: Vec<T> = lowered.iter().zip(&psi2).map(|(&l, &p)| l - eps * p).collect();
    let total = (norm(&psi1).powi(2) + norm(&psi2).powi(2)).sqrt();
    let (nu, nl) = (norm(&upper), norm(&lower));
    let identity: Vec<T> = raised
        .iter()
        .zip(&psi1)
        .zip(&sys.alpha)
        .map(|((&r, &p), &a)| eps * eps * p - (eps * r - a * eps * p))
        .collect();
    Ok(DiracLift {
        epsilon: eps,
        residual: (nu * nu + nl * nl).sqrt() / total,
        lower_residual: nl / total,
        upper_residual: nu / total,
        pencil_identity: norm(&identity) / norm(&psi1),
        psi1,
        psi2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityRow<T> {
    pub x0: T,
    pub nodes: usize,
    pub regular: bool,
    /// Dirac residual of the bound state, for regular cells that have one.
    pub residual: Option<T>,
}

pub fn regularity_report<T: Real>(x0_values: &[T], l: usize, grid: &Grid<T>) -> Result<Vec<RegularityRow<T>>> {
    x0_values
        .par_iter()
        .map(|&x0| {
            let sys = build(x0, l, grid)?;
            let residual = if sys.regular {
                match solve_pencil(x0, l, grid)? {
                    Some(sol) if !sol.is_jordan() => Some(lift_to_dirac(&sol, &sys)?.residual),
                    _ => None,
                }
            } else {
                None
            };
            Ok(RegularityRow {
                x0,
                nodes: sys.seed.nodes,
                regular: sys.regular,
                residual,
            })
        })
        .collect()
}

/// Bisects the regular/irregular transition in x0 within [lo, hi], where
/// `lo` must be regular and `hi` irregular.
pub fn regularity_threshold<T: Real>(l: usize, grid: &Grid<T>, mut lo: T, mut hi: T, tol: T) -> Result<T> {
    let regular = |x0: T| -> Result<bool> { Ok(build(x0, l, grid)?.regular) };
    if !regular(lo)? || regular(hi)? {
        return Err(Error::InvalidInput(format!(
            "x0 range [{lo}, {hi}] does not bracket the regularity threshold for l = {l}"
        )));
    }
    while hi - lo > tol {
        let mid = lo + (hi - lo) * lit(0.5);
        if regular(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_jordan() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2.atanh()
    }

    #[test]
    fn discrete_factorization_is_exact() {
        let g: Grid<f64> = Grid::standard();
        let sys = build(0.4, 1, &g).unwrap();
        assert!(sys.regular);
        let f: Vec<f64> = g.sample(|x| x * x * (-x / 3.0).exp() * (1.0 + (x).sin()));
        assert!(sys.factorization_residual(&f) < 1e-6);
        let bumpy: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        assert!(sys.factorization_residual(&bumpy) < 1e-6);
    }

    #[test]
    fn gamma_and_potential_shape() {
        let g = Grid::new(40.0_f64, 2000).unwrap();
        let sys = build(0.5, 0, &g).unwrap();
        let gm = DiracSystem::<f64>::gamma();
        assert_eq!((gm.a12, gm.a21), (1.0, -1.0));
        let v = sys.potential(100).unwrap();
        assert_eq!(v.a12, v.a21);
        assert_eq!(v.a22, 0.0);
    }

    #[test]
    fn lift_below_threshold() {
        let g: Grid<f64> = Grid::standard();
        for &x0 in &[0.3, 0.5, 0.7] {
            let sol = solve_pencil(x0, 0, &g).unwrap().unwrap();
            let sys = build(x0, 0, &g).unwrap();
            let lift = lift_to_dirac(&sol, &sys).unwrap();
            assert!(lift.residual < 1e-6, "{x0}: {}", lift.residual);
            assert!(lift.pencil_identity < 1e-6);
            assert_eq!(lift.psi2_at_origin(), 0.0);
            assert!(lift.psi2.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn lift_refused_above_threshold() {
        let g: Grid<f64> = Grid::standard();
        for &x0 in &[1.0, 1.2, 1.5] {
            let sys = build(x0, 0, &g).unwrap();
            assert!(!sys.regular);
            assert!(sys.w.is_none());
            let sol = solve_pencil(x0, 0, &g).unwrap().unwrap();
            assert!(matches!(lift_to_dirac(&sol, &sys), Err(Error::SuperpotentialPole { .. })));
        }
    }

    #[test]
    fn threshold_for_l0_is_jordan_point() {
        let g: Grid<f64> = Grid::standard();
        let t = regularity_threshold(0, &g, 0.5, 1.2, 1e-4).unwrap();
        assert!((t - x_jordan()).abs() < 1e-3, "{t}");
        let t1 = regularity_threshold(1, &g, 0.5, 4.0, 1e-3).unwrap();
        assert!(t1 > t, "{t1}");
    }

    #[test]
    fn report_marks_regular_region() {
        let g: Grid<f64> = Grid::standard();
        let rows = regularity_report(&[0.3, 0.8, 0.95, 1.4], 0, &g).unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.regular).collect();
        assert_eq!(flags, vec![true, true, false, false]);
        assert!(rows[0].residual.unwrap() < 1e-6);
        assert!(rows[3].residual.is_none());
        assert!(rows[3].nodes >= 1);
    }
}
