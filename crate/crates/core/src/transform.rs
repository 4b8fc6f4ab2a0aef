//! The coupled two-component problem and its diagonalization.
//!
//! (∂K∂ + M − λ)Φ = 0 with K = I − ασ₋ and M = −K·l(l+1)/x² + ασ₊. The
//! Kummer–Liouville change Φ = P⁻¹Ξ (P² = K) removes the first-derivative
//! coupling and leaves Ξ'' − l(l+1)/x²·Ξ + VΞ = 0, and the constant matrix
//! U diagonalizes V into the two pencils: Ξ = U(F₊, F₋)ᵀ.
//!
//! The block discretization of ∂K∂ is the flux form with its diagonal
//! replaced by the exact second-order term, −(αf')' ≈
//! −[ᾱ₊f₊ + ᾱ₋f₋ − 2αf]/h² + α''f/2, which makes the discrete transform an
//! exact map between pencil eigenvectors and block eigenvectors.

use crate::error::{Error, Result};
use crate::kernels::{BandedMatrix, Grid};
use crate::pencil::{PencilSolution, JORDAN_EPSILON};
use crate::profile::AlphaProfile;
use crate::scalar::{from_usize, lit, norm, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        (d != T::zero()).then(|| Self::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn apply(&self, v: (T, T)) -> (T, T) {
        (self.a11 * v.0 + self.a12 * v.1, self.a21 * v.0 + self.a22 * v.1)
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.a11 - o.a11)
            .abs()
            .max((self.a12 - o.a12).abs())
            .max((self.a21 - o.a21).abs())
            .max((self.a22 - o.a22).abs())
    }
}

/// All matrices of the transform sampled on the interior nodes.
#[derive(Debug, Clone)]
pub struct MatrixPipeline<T> {
    pub x0: T,
    pub l: usize,
    pub epsilon: T,
    pub lambda: T,
    pub grid: Grid<T>,
    pub alpha: Vec<T>,
    pub alpha_pp: Vec<T>,
    pub k: Vec<Mat2<T>>,
    pub m: Vec<Mat2<T>>,
    pub p: Vec<Mat2<T>>,
    pub p_inv: Vec<Mat2<T>>,
    pub v: Vec<Mat2<T>>,
    pub u: Mat2<T>,
    /// `None` at ε = 0, where det U = −2ε vanishes.
    pub u_inv: Option<Mat2<T>>,
}

pub fn build_pipeline<T: Real>(x0: T, l: usize, epsilon: T, grid: &Grid<T>) -> MatrixPipeline<T> {
    let profile = AlphaProfile::unit(x0);
    let lambda = lit::<T>(0.5) - epsilon * epsilon;
    let (half, quarter) = (lit::<T>(0.5), lit::<T>(0.25));
    let cent = from_usize::<T>(l * (l + 1));
    let n = grid.len();
    let (mut alpha, mut alpha_pp) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut k, mut m, mut p, mut p_inv, mut v) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for x in grid.nodes() {
        let a = profile.alpha(x);
        let (_, app) = profile.alpha_derivatives(x);
        let c = cent / (x * x);
        alpha.push(a);
        alpha_pp.push(app);
        k.push(Mat2::new(T::one(), T::zero(), -a, T::one()));
        m.push(Mat2::new(-c, a, a * c, -c));
        p.push(Mat2::new(T::one(), T::zero(), -half * a, T::one()));
        p_inv.push(Mat2::new(T::one(), T::zero(), half * a, T::one()));
        let d = half * a * a - lambda;
        v.push(Mat2::new(d, a, half * app + quarter * a * a * a - a * lambda, d));
    }
    let u = Mat2::new(T::one(), T::one(), epsilon, -epsilon);
    let u_inv = if epsilon == T::zero() { None } else { u.inverse() };
    MatrixPipeline {
        x0,
        l,
        epsilon,
        lambda,
        grid: *grid,
        alpha,
        alpha_pp,
        k,
        m,
        p,
        p_inv,
        v,
        u,
        u_inv,
    }
}

impl<T: Real> MatrixPipeline<T> {
    /// Pipeline at the grid root of a pencil solution, so that discrete
    /// identities hold to solver precision.
    pub fn for_solution(sol: &PencilSolution<T>, grid: &Grid<T>) -> Self {
        build_pipeline(sol.x0, sol.l, sol.grid_epsilon, grid)
    }

    pub fn max_p_squared_deviation(&self) -> T {
        self.p
            .iter()
            .zip(&self.k)
            .fold(T::zero(), |acc, (p, k)| acc.max(p.mul(p).max_abs_diff(k)))
    }

    pub fn max_p_inverse_deviation(&self) -> T {
        self.p
            .iter()
            .zip(&self.p_inv)
            .fold(T::zero(), |acc, (p, pi)| acc.max(p.mul(pi).max_abs_diff(&Mat2::identity())))
    }

    /// Max deviation of U⁻¹VU from diag(½α² − λ + εα, ½α² − λ − εα).
    pub fn max_diagonalization_deviation(&self) -> Option<T> {
        let ui = self.u_inv?;
        let half = lit::<T>(0.5);
        Some(self.v.iter().zip(&self.alpha).fold(T::zero(), |acc, (v, &a)| {
            let d = ui.mul(&v.mul(&self.u));
            let base = half * a * a - self.lambda;
            let expect = Mat2::new(base + self.epsilon * a, T::zero(), T::zero(), base - self.epsilon * a);
            acc.max(d.max_abs_diff(&expect))
        }))
    }

    fn require_invertible(&self) -> Result<Mat2<T>> {
        if self.epsilon.abs() <= lit(JORDAN_EPSILON) {
            return Err(Error::JordanRegime {
                epsilon: self.epsilon.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.u_inv
            .ok_or(Error::JordanRegime { epsilon: 0.0 })
    }

    /// Φ = P⁻¹U(F₊, F₋)ᵀ.
    pub fn reconstruct(&self, f_plus: &[T], f_minus: &[T]) -> Result<Phi<T>> {
        self.require_invertible()?;
        let n = self.grid.len();
        if f_plus.len() != n || f_minus.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} samples per component")));
        }
        let (mut phi1, mut phi2) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let xi = self.u.apply((f_plus[i], f_minus[i]));
            let (a, b) = self.p_inv[i].apply(xi);
            phi1.push(a);
            phi2.push(b);
        }
        Ok(Phi { phi1, phi2 })
    }

    /// (F₊, F₋) = U⁻¹PΦ.
    pub fn decompose(&self, phi: &Phi<T>) -> Result<(Vec<T>, Vec<T>)> {
        let ui = self.require_invertible()?;
        let n = self.grid.len();
        let (mut fp, mut fm) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let xi = self.p[i].apply((phi.phi1[i], phi.phi2[i]));
            let (a, b) = ui.apply(xi);
            fp.push(a);
            fm.push(b);
        }
        Ok((fp, fm))
    }
}

/// The two radial components of the original problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi<T> {
    pub phi1: Vec<T>,
    pub phi2: Vec<T>,
}

impl<T: Real> Phi<T> {
    /// Components interleaved as (Φ₁₀, Φ₂₀, Φ₁₁, Φ₂₁, ...).
    pub fn interleaved(&self) -> Vec<T> {
        self.phi1.iter().zip(&self.phi2).flat_map(|(&a, &b)| [a, b]).collect()
    }

    pub fn from_interleaved(v: &[T]) -> Self {
        Self {
            phi1: v.iter().step_by(2).copied().collect(),
            phi2: v.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn norm(&self) -> T {
        (norm(&self.phi1).powi(2) + norm(&self.phi2).powi(2)).sqrt()
    }
}

/// Φ for a pencil bound state, taking F₊ = F and F₋ = 0.
pub fn reconstruct_phi<T: Real>(sol: &PencilSolution<T>, pipe: &MatrixPipeline<T>) -> Result<Phi<T>> {
    let zeros = vec![T::zero(); sol.f.len()];
    pipe.reconstruct(&sol.f, &zeros)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    /// Flux form with the exact diagonal term; consistent with the pencils.
    Consistent,
    /// Plain flux form with midpoint averages; O(h²) inconsistent.
    Midpoint,
}

/// 2n×2n banded matrix of ∂K∂ + M on interleaved unknowns.
pub fn block_operator<T: Real>(pipe: &MatrixPipeline<T>, scheme: FluxScheme) -> BandedMatrix<T> {
    let grid = &pipe.grid;
    let n = grid.len();
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let profile = AlphaProfile::unit(pipe.x0);
    let edge_lo = profile.alpha(T::zero());
    let edge_hi = profile.alpha(grid.length());
    let cent = from_usize::<T>(pipe.l * (pipe.l + 1));
    let mut b = BandedMatrix::zeros(2 * n, 3, 2);
    for i in 0..n {
        let x = grid.node(i);
        let c = cent / (x * x);
        let a = pipe.alpha[i];
        let a_lo = if i > 0 { pipe.alpha[i - 1] } else { edge_lo };
        let a_hi = if i + 1 < n { pipe.alpha[i + 1] } else { edge_hi };
        let (avg_lo, avg_hi) = (half * (a + a_lo), half * (a + a_hi));
        let (r1, r2) = (2 * i, 2 * i + 1);

        b.set(r1, r1, -two * inv_h2 - c);
        b.set(r1, r2, a);
        b.set(r2, r2, -two * inv_h2 - c);
        let diag = match scheme {
            FluxScheme::Consistent => two * a * inv_h2 + half * pipe.alpha_pp[i],
            FluxScheme::Midpoint => (avg_lo + avg_hi) * inv_h2,
        };
        b.set(r2, r1, diag + a * c);
        if i > 0 {
            b.set(r1, r1 - 2, inv_h2);
            b.set(r2, r2 - 2, inv_h2);
            b.set(r2, r1 - 2, -avg_lo * inv_h2);
        }
        if i + 1 < n {
            b.set(r1, r1 + 2, inv_h2);
            b.set(r2, r2 + 2, inv_h2);
            b.set(r2, r1 + 2, -avg_hi * inv_h2);
        }
    }
    b
}

/// ‖(B − λ)Φ‖ / ‖Φ‖ for the discrete block operator B.
pub fn full_system_residual<T: Real>(pipe: &MatrixPipeline<T>, phi: &Phi<T>, scheme: FluxScheme) -> T {
    let v = phi.interleaved();
    let bv = block_operator(pipe, scheme).mul_vec(&v);
    let r: Vec<T> = bv.iter().zip(&v).map(|(&a, &b)| a - pipe.lambda * b).collect();
    norm(&r) / norm(&v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseIterationStep<T> {
    pub shift: T,
    pub lambda_before: T,
    pub lambda_after: T,
    /// Normalized iterate.
    pub phi: Phi<T>,
}

impl<T: Real> InverseIterationStep<T> {
    pub fn delta(&self) -> T {
        (self.lambda_after - self.lambda_before).abs()
    }
}

/// Relative offset of the inverse-iteration shift from λ.
pub const INVERSE_ITERATION_OFFSET: f64 = 1e-6;

/// One step y = (B − σ)⁻¹Φ with σ = λ + 1e-6, giving λ' = σ + ⟨Φ,y⟩/⟨y,y⟩.
pub fn inverse_iteration_step<T: Real>(
    pipe: &MatrixPipeline<T>,
    phi: &Phi<T>,
    scheme: FluxScheme,
) -> Result<InverseIterationStep<T>> {
    let mut b = block_operator(pipe, scheme);
    let shift = pipe.lambda + lit(INVERSE_ITERATION_OFFSET);
    b.add_diagonal(-shift);
    let lu = b.lu(T::zero())?;
    let mut x = phi.interleaved();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let y = lu.solve(&x);
    let yy: T = y.iter().map(|&v| v * v).sum();
    let xy: T = x.iter().zip(&y).map(|(&a, &b)| a * b).sum();
    if !(yy > T::zero() && yy.is_finite()) {
        return Err(Error::NumericalFailure("block inverse iteration produced a degenerate vector".into()));
    }
    let lambda_after = shift + xy / yy;
    let ny = yy.sqrt();
    let sign = if xy < T::zero() { -T::one() } else { T::one() };
    let normalized: Vec<T> = y.iter().map(|&v| sign * v / ny).collect();
    Ok(InverseIterationStep {
        shift,
        lambda_before: pipe.lambda,
        lambda_after,
        phi: Phi::from_interleaved(&normalized),
    })
}

/// ‖Φ₂ − (α/2 + ε)Φ₁‖ / ‖Φ₂‖.
pub fn field_link_residual<T: Real>(phi1: &[T], phi2: &[T], pipe: &MatrixPipeline<T>) -> Result<T> {
    let n2 = norm(phi2);
    if !(n2 > T::zero()) {
        return Err(Error::UndefinedRatio("second component has zero norm".into()));
    }
    let half = lit::<T>(0.5);
    let r: Vec<T> = phi1
        .iter()
        .zip(phi2)
        .zip(&pipe.alpha)
        .map(|((&p1, &p2), &a)| p2 - (half * a + pipe.epsilon) * p1)
        .collect();
    Ok(norm(&r) / n2)
}

/// ‖F₋‖/‖F₊‖ after decomposing Φ: the weight of the branch that should
/// carry nothing.
pub fn suppressed_branch_ratio<T: Real>(phi: &Phi<T>, pipe: &MatrixPipeline<T>) -> Result<T> {
    let (fp, fm) = pipe.decompose(phi)?;
    let np = norm(&fp);
    if !(np > T::zero()) {
        return Err(Error::UndefinedRatio("carrying branch has zero norm".into()));
    }
    Ok(norm(&fm) / np)
}

/// At ε = 0 the transformed potential must be upper triangular,
/// [[½α² − ½, α], [0, ½α² − ½]], i.e. −∂² + V₀ on the diagonal with
/// V₀ = l(l+1)/x² − ½(α² − 1) and V₁ = −α above it. Returns the largest
/// pointwise deviation from that form.
pub fn jordan_form_check<T: Real>(x0: T, l: usize, grid: &Grid<T>) -> T {
    let pipe = build_pipeline(x0, l, T::zero(), grid);
    let half = lit::<T>(0.5);
    let cent = from_usize::<T>(l * (l + 1));
    let mut dev = T::zero();
    for (i, v) in pipe.v.iter().enumerate() {
        let x = grid.node(i);
        let a = pipe.alpha[i];
        let c = cent / (x * x);
        let v0 = c - half * (a * a - T::one());
        let v1 = -a;
        // Ξ'' − cΞ + VΞ = 0, so the diagonal operator is −∂² + (c − V₁₁).
        dev = dev
            .max(v.a21.abs())
            .max((c - v.a11 - v0).abs())
            .max((c - v.a22 - v0).abs())
            .max((v.a12 + v1).abs());
    }
    dev
}
