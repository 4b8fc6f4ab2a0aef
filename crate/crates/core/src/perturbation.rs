//! Expansion around the Jordan point.
//!
//! At x_J = artanh(2^{−1/2}) the l = 0 pencil has ε = 0, λ = ½, and the
//! chain (Ξ₁, Ξ₀) = (φ₋, 0) with κ = 2^{−1/2}. Writing x0 = x_J + δ and
//! ε = e₁δ + O(δ²), the first-order equation for the correction χ is
//! solvable with a decaying χ only if ∫ g₁φ₋² = 0, g₁ = α(α' ∓ e₁), which
//! fixes e₁ = ∓½. Integrals over [0, ∞) are truncated at L, where φ₋² is
//! far below double precision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{cumulative_simpson, simpson, Grid};
use crate::pencil::solve_pencil;
use crate::profile::AlphaProfile;
use crate::scalar::{lit, max_abs, norm, to_f64, Real};
use crate::susy_exact::{ExactSolution, Sign};

pub fn x_jordan<T: Real>() -> T {
    T::FRAC_1_SQRT_2().atanh()
}

pub fn kappa_jordan<T: Real>() -> T {
    T::FRAC_1_SQRT_2()
}

pub fn lambda_jordan<T: Real>() -> T {
    lit(0.5)
}

/// W(φ₊, φ₋) = φ₊φ₋' − φ₊'φ₋ at the Jordan point.
pub fn wronskian_jordan<T: Real>() -> T {
    -T::FRAC_1_SQRT_2()
}

fn phi<T: Real>(sign: Sign) -> ExactSolution<T> {
    ExactSolution {
        x0: x_jordan(),
        kappa: kappa_jordan(),
        sign,
    }
}

/// Largest deviation of the closed-form Wronskian from −2^{−1/2} over `xs`.
pub fn wronskian_deviation<T: Real>(xs: &[T]) -> T {
    let (p, m) = (phi::<T>(Sign::Plus), phi::<T>(Sign::Minus));
    let w = wronskian_jordan::<T>();
    xs.iter().fold(T::zero(), |acc, &x| {
        let v = p.value(x) * m.derivative(x) - p.derivative(x) * m.value(x);
        acc.max((v - w).abs())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain<T> {
    /// Ξ₁ = φ₋ on the interior nodes (C₁ = 1).
    pub xi1: Vec<T>,
    /// Ξ₀ ≡ 0.
    pub xi0: Vec<T>,
    /// ‖[−∂² − α²/2 + ½]Ξ₁‖ / ‖Ξ₁‖ with closed-form derivatives.
    pub residual: T,
    /// |φ₊(L)∫₀^L αφ₋²| / |φ₊(20)∫₀^20 αφ₋²|: the C₀ ≠ 0 candidate.
    pub divergence_ratio: T,
}

/// Witness radius for the divergence of φ₊∫₀ˣαφ₋².
pub const DIVERGENCE_PROBE: f64 = 20.0;

pub fn jordan_chain_solution<T: Real>(grid: &Grid<T>) -> Result<JordanChain<T>> {
    let m = phi::<T>(Sign::Minus);
    let p = phi::<T>(Sign::Plus);
    let profile = AlphaProfile::unit(x_jordan::<T>());
    let half = lit::<T>(0.5);
    let nodes = grid.nodes();
    let xi1: Vec<T> = nodes.iter().map(|&x| m.value(x)).collect();
    let res: Vec<T> = nodes
        .iter()
        .map(|&x| {
            let a = profile.alpha(x);
            -m.second_derivative(x) - half * a * a * m.value(x) + half * m.value(x)
        })
        .collect();

    let closed = grid.closed_nodes();
    let h = grid.spacing();
    let weight: Vec<T> = closed.iter().map(|&x| profile.alpha(x) * m.value(x).powi(2)).collect();
    let running = cumulative_simpson(&weight, h)?;
    let probe = grid.nearest(lit(DIVERGENCE_PROBE)) + 1;
    let last = closed.len() - 1;
    let at = |j: usize| (p.value(closed[j]) * running[j]).abs();
    Ok(JordanChain {
        residual: norm(&res) / norm(&xi1),
        divergence_ratio: at(last) / at(probe),
        xi0: vec![T::zero(); xi1.len()],
        xi1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvabilityReport<T> {
    /// ∫ α α' φ₋².
    pub numerator: T,
    /// ∫ α φ₋².
    pub denominator: T,
    /// numerator / denominator, signed (−½).
    pub ratio: T,
    /// e₁ on the F₊ branch (upper sign).
    pub e1_plus: T,
    /// e₁ on the F₋ branch.
    pub e1_minus: T,
}

impl<T: Real> SolvabilityReport<T> {
    pub fn magnitude(&self) -> T {
        self.ratio.abs()
    }
}

pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// The two quadratures fixing e₁, evaluated by Simpson on [0, L].
pub fn solvability_e1<T: Real>(grid: &Grid<T>) -> Result<SolvabilityReport<T>> {
    let m = phi::<T>(Sign::Minus);
    let profile = AlphaProfile::unit(x_jordan::<T>());
    let closed = grid.closed_nodes();
    let h = grid.spacing();
    let (mut num, mut den) = (Vec::with_capacity(closed.len()), Vec::with_capacity(closed.len()));
    for &x in &closed {
        let a = profile.alpha(x);
        let (da, _) = profile.alpha_derivatives(x);
        let w = m.value(x).powi(2);
        num.push(a * da * w);
        den.push(a * w);
    }
    let numerator = simpson(&num, h)?;
    let denominator = simpson(&den, h)?;
    if !(denominator.abs() >= lit(DEGENERATE_DENOMINATOR)) {
        return Err(Error::DegenerateQuadrature {
            value: to_f64(denominator),
        });
    }
    let ratio = numerator / denominator;
    Ok(SolvabilityReport {
        numerator,
        denominator,
        ratio,
        e1_plus: ratio,
        e1_minus: -ratio,
    })
}

/// g₁ = α(α' − e₁) on the F₊ branch.
pub fn g1<T: Real>(e1: T, x: T) -> T {
    let profile = AlphaProfile::unit(x_jordan::<T>());
    let (da, _) = profile.alpha_derivatives(x);
    profile.alpha(x) * (da - e1)
}

/// Weighted mean ∫g₁φ₋² / ∫αφ₋²; zero when e₁ solves the condition.
pub fn solvability_defect<T: Real>(e1: T, grid: &Grid<T>) -> Result<T> {
    let m = phi::<T>(Sign::Minus);
    let profile = AlphaProfile::unit(x_jordan::<T>());
    let closed = grid.closed_nodes();
    let g: Vec<T> = closed.iter().map(|&x| g1(e1, x) * m.value(x).powi(2)).collect();
    let a: Vec<T> = closed.iter().map(|&x| profile.alpha(x) * m.value(x).powi(2)).collect();
    Ok(simpson(&g, grid.spacing())? / simpson(&a, grid.spacing())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderCorrection<T> {
    pub e1: T,
    /// Closed-mesh coordinates 0..=L.
    pub x: Vec<T>,
    /// χ (C₁ = 1, C± = 0) in its decaying representation.
    pub chi: Vec<T>,
    /// Radius where φ₋ has fallen below 1e-9 of its peak; decay is
    /// certified there.
    pub radius: T,
    /// |χ(radius)| / max|χ| for the literal variation-of-parameters form.
    pub tail_ratio: T,
}

pub const CERTIFICATION_DROP: f64 = 1e-9;
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// χ = (1/W)[φ₋∫₀ˣ g₁φ₊φ₋ − φ₊∫₀ˣ g₁φ₋²].
///
/// The φ₊ term is evaluated as φ₊(∫ₓ^L − ∫₀^L) so the decaying part never
/// multiplies a large φ₊ by a small difference. The remainder −S·φ₊/W,
/// S = ∫₀^L g₁φ₋², is the growing mode: decay is certified at the radius
/// where φ₋ drops by 1e-9, beyond which rounding in S times e^{κx} would
/// swamp any test in double precision.
pub fn first_order_correction<T: Real>(e1: T, grid: &Grid<T>) -> Result<FirstOrderCorrection<T>> {
    let p = phi::<T>(Sign::Plus);
    let m = phi::<T>(Sign::Minus);
    let w = wronskian_jordan::<T>();
    let h = grid.spacing();
    let x = grid.closed_nodes();
    let fp: Vec<T> = x.iter().map(|&v| p.value(v)).collect();
    let fm: Vec<T> = x.iter().map(|&v| m.value(v)).collect();
    let g: Vec<T> = x.iter().map(|&v| g1(e1, v)).collect();

    let cross: Vec<T> = (0..x.len()).map(|j| g[j] * fp[j] * fm[j]).collect();
    let square: Vec<T> = (0..x.len()).map(|j| g[j] * fm[j] * fm[j]).collect();
    let a = cumulative_simpson(&cross, h)?;
    let reversed: Vec<T> = square.iter().rev().copied().collect();
    let mut upper = cumulative_simpson(&reversed, h)?;
    upper.reverse();
    // Same rule as `solvability_e1`, so the exact e₁ zeroes it to rounding.
    let total = simpson(&square, h)?;

    let chi: Vec<T> = (0..x.len()).map(|j| (fm[j] * a[j] + fp[j] * upper[j]) / w).collect();

    let peak = max_abs(&fm);
    let cut = lit::<T>(CERTIFICATION_DROP) * peak;
    let start = fm
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let jt = (start..x.len()).find(|&j| fm[j].abs() < cut).unwrap_or(x.len() - 1);
    let chi_max = max_abs(&chi[..=jt]);
    let literal = chi[jt] - total * fp[jt] / w;
    let tail_ratio = literal.abs() / chi_max;
    if !(tail_ratio < lit(TAIL_TOLERANCE)) {
        return Err(Error::SolvabilityViolation {
            ratio: to_f64(tail_ratio),
            radius: to_f64(x[jt]),
        });
    }
    Ok(FirstOrderCorrection {
        e1,
        radius: x[jt],
        tail_ratio,
        x,
        chi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow<T> {
    pub delta: T,
    pub epsilon_pencil: Option<T>,
    pub epsilon_linear: T,
    pub deviation: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeCheck<T> {
    pub rows: Vec<SlopeRow<T>>,
    /// max |ε + δ/2| / δ² over the rows with δ ≠ 0.
    pub c_bound: Option<T>,
    /// Least-squares c in ε + δ/2 ≈ cδ².
    pub c_fit: Option<T>,
}

/// Compares the pencil ε(x_J + δ) with −δ/2 for each δ.
pub fn local_slope_check<T: Real>(deltas: &[T], grid: &Grid<T>) -> Result<SlopeCheck<T>> {
    let xj = x_jordan::<T>();
    let half = lit::<T>(0.5);
    let rows: Vec<SlopeRow<T>> = deltas
        .par_iter()
        .map(|&delta| {
            let sol = solve_pencil(xj + delta, 0, grid)?;
            let linear = -half * delta;
            let eps = sol.map(|s| s.epsilon);
            Ok(SlopeRow {
                delta,
                epsilon_pencil: eps,
                epsilon_linear: linear,
                deviation: eps.map(|e| e - linear),
            })
        })
        .collect::<Result<_>>()?;
    let fitted: Vec<(T, T)> = rows
        .iter()
        .filter(|r| r.delta != T::zero())
        .filter_map(|r| r.deviation.map(|d| (r.delta, d)))
        .collect();
    let c_bound = fitted
        .iter()
        .map(|&(d, dev)| dev.abs() / (d * d))
        .fold(None, |acc: Option<T>, c| Some(acc.map_or(c, |a| a.max(c))));
    let c_fit = if fitted.is_empty() {
        None
    } else {
        let num: T = fitted.iter().map(|&(d, dev)| dev * d * d).sum();
        let den: T = fitted.iter().map(|&(d, _)| d.powi(4)).sum();
        Some(num / den)
    };
    Ok(SlopeCheck { rows, c_bound, c_fit })
}

/// First-order expansion record on the F₊ branch.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanExpansion<T> {
    pub x_j: T,
    pub lambda_j: T,
    pub e1: T,
    pub chi: FirstOrderCorrection<T>,
    /// Largest symmetric δ interval on which |ε + δ/2| ≤ c_max·δ² held.
    pub delta_range: (T, T),
    pub c1: T,
    pub slope: SlopeCheck<T>,
}

pub fn expand<T: Real>(grid: &Grid<T>, deltas: &[T], c_max: T) -> Result<JordanExpansion<T>> {
    let e1 = solvability_e1(grid)?.e1_plus;
    let chi = first_order_correction(e1, grid)?;
    let slope = local_slope_check(deltas, grid)?;
    let mut by_size: Vec<&SlopeRow<T>> = slope.rows.iter().collect();
    by_size.sort_by(|a, b| a.delta.abs().partial_cmp(&b.delta.abs()).unwrap_or(std::cmp::Ordering::Equal));
    let mut radius = T::zero();
    for r in by_size {
        let ok = r.deviation.is_some_and(|d| d.abs() <= c_max * r.delta * r.delta);
        if !ok {
            break;
        }
        radius = radius.max(r.delta.abs());
    }
    Ok(JordanExpansion {
        x_j: x_jordan(),
        lambda_j: lambda_jordan(),
        e1,
        chi,
        delta_range: (-radius, radius),
        c1: T::one(),
        slope,
    })
}
