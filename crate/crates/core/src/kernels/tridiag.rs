//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection followed by
//! inverse iteration.

use super::banded::BandedMatrix;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{dot, lit, max_abs, norm, to_f64, Real};

/// Symmetric tridiagonal matrix, typically −∂² + q(x) on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator<T> {
    pub diagonal: Vec<T>,
    pub off_diagonal: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    /// Unit Euclidean norm; first significant component positive.
    pub vector: Vec<T>,
}

impl<T: Real> TridiagonalOperator<T> {
    pub fn new(diagonal: Vec<T>, off_diagonal: Vec<T>) -> Result<Self> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidInput(format!(
                "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
                diagonal.len(),
                off_diagonal.len()
            )));
        }
        Ok(Self {
            diagonal,
            off_diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Infinity norm (equal to the 1-norm for a symmetric matrix).
    pub fn norm_inf(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off_diagonal[i - 1].abs() } else { T::zero() };
                let r = if i + 1 < n { self.off_diagonal[i].abs() } else { T::zero() };
                self.diagonal[i].abs() + l + r
            })
            .fold(T::zero(), T::max)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let l = if i > 0 { self.off_diagonal[i - 1].abs() } else { T::zero() };
            let r = if i + 1 < n { self.off_diagonal[i].abs() } else { T::zero() };
            lo = lo.min(self.diagonal[i] - l - r);
            hi = hi.max(self.diagonal[i] + l + r);
        }
        (lo, hi)
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * v[i];
                if i > 0 {
                    s += self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off_diagonal[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Copy with `shift` added to every diagonal entry.
    pub fn shifted(&self, shift: T) -> Self {
        Self {
            diagonal: self.diagonal.iter().map(|&d| d + shift).collect(),
            off_diagonal: self.off_diagonal.clone(),
        }
    }

    /// ‖Tv − λv‖ for a candidate eigenpair.
    pub fn residual(&self, value: T, v: &[T]) -> T {
        let tv = self.apply(v);
        tv.iter()
            .zip(v)
            .map(|(&a, &b)| (a - value * b) * (a - value * b))
            .sum::<T>()
            .sqrt()
    }
}

/// Standard three-point discretization of −∂² + q(x) with Dirichlet ends.
pub fn discretize_schrodinger<T: Real>(
    grid: &Grid<T>,
    potential: impl Fn(T) -> T,
) -> Result<TridiagonalOperator<T>> {
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let two = lit::<T>(2.0);
    let mut diagonal = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.node(i);
        let q = potential(x);
        if !q.is_finite() {
            return Err(Error::Discretization {
                node: i + 1,
                x: to_f64(x),
            });
        }
        diagonal.push(two * inv_h2 + q);
    }
    let off_diagonal = vec![-inv_h2; grid.len() - 1];
    TridiagonalOperator::new(diagonal, off_diagonal)
}

/// Number of eigenvalues strictly below `mu`.
pub fn sturm_count<T: Real>(op: &TridiagonalOperator<T>, mu: T) -> usize {
    let guard = T::epsilon() * op.norm_inf().max(T::one());
    sturm_count_guarded(op, mu, guard)
}

fn sturm_count_guarded<T: Real>(op: &TridiagonalOperator<T>, mu: T, guard: T) -> usize {
    let d = &op.diagonal;
    let e = &op.off_diagonal;
    let mut count = 0;
    let mut q = d[0] - mu;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..d.len() {
        let qs = if q.abs() < guard {
            if q < T::zero() {
                -guard
            } else {
                guard
            }
        } else {
            q
        };
        q = (d[i] - mu) - e[i - 1] * e[i - 1] / qs;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

const BISECTION_BUDGET: usize = 400;

/// The `k` algebraically smallest eigenvalues, ascending, each bracketed by
/// bisection to an absolute width of `tol`.
pub fn lowest_eigenvalues<T: Real>(op: &TridiagonalOperator<T>, k: usize, tol: T) -> Result<Vec<T>> {
    if k == 0 || k > op.len() {
        return Err(Error::invalid("k", format!("need 1 <= k <= {}, got {k}", op.len())));
    }
    let guard = T::epsilon() * op.norm_inf().max(T::one());
    let (lo0, hi0) = op.gershgorin();
    let pad = T::epsilon() * op.norm_inf().max(T::one()) * lit(4.0);
    let (mut floor, ceil) = (lo0 - pad, hi0 + pad);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (mut lo, mut hi) = (floor, ceil);
        let mut converged = false;
        for _ in 0..BISECTION_BUDGET {
            let mid = lo + (hi - lo) * lit(0.5);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                converged = true;
                break;
            }
            if sturm_count_guarded(op, mid, guard) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged || !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "bisection for eigenvalue #{j} did not converge within {BISECTION_BUDGET} steps"
            )));
        }
        out.push(lo + (hi - lo) * lit(0.5));
        floor = lo;
    }
    Ok(out)
}

/// The `k` smallest eigenpairs: bisection (absolute tolerance 1e-10) then
/// inverse iteration, orthogonalized against the pairs already found.
pub fn lowest_eigenpairs<T: Real>(op: &TridiagonalOperator<T>, k: usize) -> Result<Vec<EigenPair<T>>> {
    let tol = lit::<T>(1e-10).max(T::epsilon() * op.norm_inf());
    let values = lowest_eigenvalues(op, k, tol)?;
    let mut pairs: Vec<EigenPair<T>> = Vec::with_capacity(k);
    for &v in &values {
        let pair = refine_eigenpair(op, v, &pairs)?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Inverse iteration at shift `shift`, deflating `known` eigenvectors.
///
/// The returned value is the Rayleigh quotient of the converged vector; the
/// residual ‖Tv − λv‖ is required to fall below 1e-9·‖T‖.
pub fn refine_eigenpair<T: Real>(
    op: &TridiagonalOperator<T>,
    shift: T,
    known: &[EigenPair<T>],
) -> Result<EigenPair<T>> {
    let n = op.len();
    let tnorm = op.norm_inf().max(T::one());
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for i in 0..n {
        m.set(i, i, op.diagonal[i] - shift);
        if i + 1 < n {
            m.set(i, i + 1, op.off_diagonal[i]);
            m.set(i + 1, i, op.off_diagonal[i]);
        }
    }
    let lu = m.lu(T::epsilon() * tnorm)?;

    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + lit::<T>(0.1) * lit::<T>(((i * 7919) % 13) as f64 / 13.0))
        .collect();
    deflate(&mut v, known);
    normalize(&mut v)?;

    let target = lit::<T>(1e-9).max(lit::<T>(64.0) * T::epsilon()) * tnorm;
    let strict = lit::<T>(64.0) * T::epsilon() * tnorm;
    let mut best: Option<(T, T, Vec<T>)> = None;
    for _ in 0..12 {
        lu.solve_in_place(&mut v);
        deflate(&mut v, known);
        normalize(&mut v)?;
        let value = dot(&v, &op.apply(&v));
        let res = op.residual(value, &v);
        let improved = best.as_ref().is_none_or(|(_, r, _)| res < *r);
        if improved {
            best = Some((value, res, v.clone()));
        }
        if res <= strict || (!improved && res <= target) {
            break;
        }
    }
    let (value, res, mut vector) = best.expect("at least one iteration");
    if !(res <= target) {
        return Err(Error::NumericalFailure(format!(
            "inverse iteration residual {:e} exceeds {:e}",
            to_f64(res),
            to_f64(target)
        )));
    }
    fix_sign(&mut vector);
    Ok(EigenPair { value, vector })
}

fn deflate<T: Real>(v: &mut [T], known: &[EigenPair<T>]) {
    for p in known {
        let c = dot(v, &p.vector);
        for (x, &y) in v.iter_mut().zip(&p.vector) {
            *x -= c * y;
        }
    }
}

fn normalize<T: Real>(v: &mut [T]) -> Result<()> {
    let nv = norm(v);
    if !(nv.is_finite() && nv > T::zero()) {
        return Err(Error::NumericalFailure("inverse iteration produced a degenerate vector".into()));
    }
    for x in v.iter_mut() {
        *x /= nv;
    }
    Ok(())
}

/// Makes the first component above 1e-8·max|v| positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let thresh = lit::<T>(1e-8) * max_abs(v);
    if let Some(&first) = v.iter().find(|x| x.abs() > thresh) {
        if first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Three-point second difference with zero Dirichlet values outside.
pub fn second_difference<T: Real>(h: T, v: &[T]) -> Vec<T> {
    let n = v.len();
    let inv_h2 = T::one() / (h * h);
    let two = lit::<T>(2.0);
    (0..n)
        .map(|i| {
            let l = if i > 0 { v[i - 1] } else { T::zero() };
            let r = if i + 1 < n { v[i + 1] } else { T::zero() };
            (r - two * v[i] + l) * inv_h2
        })
        .collect()
}

/// Leading-order discretization error of a three-point eigenvalue.
///
/// For −D² + q the discrete eigenvalue sits below the continuum one by
/// (h²/12)·‖v''‖²/‖v‖² + O(h⁴); adding the returned value to the discrete
/// eigenvalue gives a fourth-order estimate.
pub fn fourth_order_correction<T: Real>(h: T, v: &[T]) -> T {
    let d2 = second_difference(h, v);
    h * h / lit(12.0) * dot(&d2, &d2) / dot(v, v)
}
