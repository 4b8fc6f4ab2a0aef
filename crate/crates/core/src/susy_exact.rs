//! Closed-form reference layer.
//!
//! H₁ = −∂² − ½α² is the SUSY partner of H₀ = −∂² through L = −∂ + w with
//! w = tanh(x − x0) (seed u = cosh(x − x0), factorization energy −1):
//! L H₀ = H₁ L, L†L = H₀ + 1, L L† = H₁ + 1. Its solutions at E = −κ² are
//! φ± = L e^{±κx} = (∓κ + tanh(x − x0)) e^{±κx}.
//!
//! The module also integrates the zero-energy seed of
//! H₂,ₗ = −∂² + l(l+1)/x² − ½α² + ½, whose node count decides whether the
//! Dirac superpotential u'/u is regular.

use crate::error::{Error, Result};
use crate::kernels::{integrate_ivp, Grid};
use crate::profile::AlphaProfile;
use crate::scalar::{from_usize, lit, max_abs, norm, sech, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Data of the H₀/H₁ SUSY pair at a given test energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusyData<T> {
    pub x0: T,
    pub kappa: T,
    pub energy: T,
    pub factorization_energy: T,
}

impl<T: Real> SusyData<T> {
    /// Pair at energy `energy < 0`, κ = √(−E), factorization energy −1.
    pub fn new(x0: T, energy: T) -> Result<Self> {
        if !(energy < T::zero()) {
            return Err(Error::invalid("energy", format!("must be negative, got {energy}")));
        }
        Ok(Self {
            x0,
            kappa: (-energy).sqrt(),
            energy,
            factorization_energy: -T::one(),
        })
    }

    /// w(x) = ∂ₓ ln cosh(x − x0).
    pub fn superpotential(&self, x: T) -> T {
        (x - self.x0).tanh()
    }

    pub fn phi(&self, sign: Sign) -> ExactSolution<T> {
        ExactSolution {
            x0: self.x0,
            kappa: self.kappa,
            sign,
        }
    }
}

/// φ±(x) = (∓κ + tanh(x − x0)) e^{±κx} with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution<T> {
    pub x0: T,
    pub kappa: T,
    pub sign: Sign,
}

pub fn phi_exact<T: Real>(x0: T, kappa: T, sign: Sign) -> Result<ExactSolution<T>> {
    if !(kappa > T::zero() && kappa.is_finite()) {
        return Err(Error::invalid("kappa", format!("must be positive, got {kappa}")));
    }
    Ok(ExactSolution { x0, kappa, sign })
}

impl<T: Real> ExactSolution<T> {
    #[inline]
    fn parts(&self, x: T) -> (T, T, T, T) {
        let sg = self.sign.value::<T>();
        let t = x - self.x0;
        (sg, sech(t), t.tanh(), (sg * self.kappa * x).exp())
    }

    pub fn energy(&self) -> T {
        -self.kappa * self.kappa
    }

    pub fn value(&self, x: T) -> T {
        let (sg, _, th, e) = self.parts(x);
        (th - sg * self.kappa) * e
    }

    pub fn derivative(&self, x: T) -> T {
        let (sg, s, th, e) = self.parts(x);
        let k = self.kappa;
        (s * s - k * k + sg * k * th) * e
    }

    /// Obtained by differentiating `derivative` symbolically, not from the ODE.
    pub fn second_derivative(&self, x: T) -> T {
        let (sg, s, th, e) = self.parts(x);
        let k = self.kappa;
        let two = lit::<T>(2.0);
        (-two * s * s * th + two * sg * k * s * s - sg * k * k * k + k * k * th) * e
    }

    pub fn third_derivative(&self, x: T) -> T {
        let (sg, s, th, e) = self.parts(x);
        let k = self.kappa;
        let s2 = s * s;
        let (two, four) = (lit::<T>(2.0), lit::<T>(4.0));
        // d/dx of the bracket in `second_derivative`, plus sg·κ times it.
        let bracket = -two * s2 * th + two * sg * k * s2 - sg * k * k * k + k * k * th;
        let dbracket = four * s2 * th * th - two * s2 * s2 - four * sg * k * s2 * th + k * k * s2;
        (dbracket + sg * k * bracket) * e
    }

    /// (H₁ − E)φ evaluated with closed-form derivatives.
    pub fn schrodinger_residual(&self, x: T) -> T {
        let s = sech(x - self.x0);
        let well = lit::<T>(2.0) * s * s;
        -self.second_derivative(x) - well * self.value(x) - self.energy() * self.value(x)
    }
}

/// Smooth function supplied with its first three derivatives.
pub trait TestFunction<T> {
    /// (f, f', f'', f''') at `x`.
    fn jet(&self, x: T) -> [T; 4];
}

impl<T, F> TestFunction<T> for F
where
    F: Fn(T) -> [T; 4],
{
    fn jet(&self, x: T) -> [T; 4] {
        self(x)
    }
}

impl<T: Real> TestFunction<T> for ExactSolution<T> {
    fn jet(&self, x: T) -> [T; 4] {
        [
            self.value(x),
            self.derivative(x),
            self.second_derivative(x),
            self.third_derivative(x),
        ]
    }
}

fn soliton_w<T: Real>(x0: T, x: T) -> (T, T, T) {
    let s = sech(x - x0);
    let th = (x - x0).tanh();
    let s2 = s * s;
    (th, s2, -lit::<T>(2.0) * s2 * th)
}

/// ‖(L H₀ − H₁ L) f‖ / ‖f‖ over the grid nodes, for the pair centered at x0.
pub fn intertwining_residual<T: Real>(x0: T, test: &impl TestFunction<T>, grid: &Grid<T>) -> T {
    let two = lit::<T>(2.0);
    let mut diff = Vec::with_capacity(grid.len());
    let mut vals = Vec::with_capacity(grid.len());
    for x in grid.nodes() {
        let [f, f1, f2, f3] = test.jet(x);
        let (w, w1, w2) = soliton_w(x0, x);
        // L H₀ f = (−∂ + w)(−f'')
        let lh0 = f3 - w * f2;
        // g = L f and its derivatives
        let g = -f1 + w * f;
        let g2 = -f3 + w2 * f + two * w1 * f1 + w * f2;
        let well = two * w1; // ½α² = 2 sech²
        let h1l = -g2 - well * g;
        diff.push(lh0 - h1l);
        vals.push(f);
    }
    norm(&diff) / norm(&vals)
}

/// Residuals of L†L = H₀ + 1 and L L† = H₁ + 1 on `test`, relative to ‖f‖.
pub fn factorization_residuals<T: Real>(x0: T, test: &impl TestFunction<T>, grid: &Grid<T>) -> (T, T) {
    let two = lit::<T>(2.0);
    let mut r1 = Vec::with_capacity(grid.len());
    let mut r2 = Vec::with_capacity(grid.len());
    let mut vals = Vec::with_capacity(grid.len());
    for x in grid.nodes() {
        let [f, f1, f2, _] = test.jet(x);
        let (w, w1, _) = soliton_w(x0, x);
        // L†(L f): g = −f' + w f
        let g = -f1 + w * f;
        let g1 = -f2 + w1 * f + w * f1;
        let ldl = g1 + w * g;
        r1.push(ldl - (-f2 + f));
        // L(L† f): k = f' + w f
        let k = f1 + w * f;
        let k1 = f2 + w1 * f + w * f1;
        let lld = -k1 + w * k;
        r2.push(lld - (-f2 - two * w1 * f + f));
        vals.push(f);
    }
    let nf = norm(&vals);
    (norm(&r1) / nf, norm(&r2) / nf)
}

/// The single discrete level of H₁ on the half line with φ(0) = 0:
/// E = −tanh²(x0) for x0 > 0, none otherwise.
pub fn bound_state_level<T: Real>(x0: T) -> Option<T> {
    if x0 > T::zero() {
        let t = x0.tanh();
        Some(-t * t)
    } else {
        None
    }
}

/// Closed-form zero-energy seed of H₂,₀ (l = 0) with u(0) = 0:
/// φ₊(0)φ₋(x) − φ₋(0)φ₊(x) at κ = 2^{−1/2}.
pub fn l0_seed_closed_form<T: Real>(x0: T, x: T) -> T {
    let k = T::FRAC_1_SQRT_2();
    let p = ExactSolution { x0, kappa: k, sign: Sign::Plus };
    let m = ExactSolution { x0, kappa: k, sign: Sign::Minus };
    p.value(T::zero()) * m.value(x) - m.value(T::zero()) * p.value(x)
}

/// Zero-energy solution u of H₂,ₗ u = 0, regular at the origin.
#[derive(Debug, Clone)]
pub struct FactorizationSeed<T> {
    pub x0: T,
    pub l: usize,
    /// u at the interior grid nodes.
    pub u: Vec<T>,
    /// u' at the interior grid nodes.
    pub du: Vec<T>,
    /// Sign changes of u on (0, L).
    pub nodes: usize,
    pub node_positions: Vec<T>,
    /// |u| dropped below 1e-12 of its running maximum somewhere.
    pub near_zero: bool,
}

impl<T: Real> FactorizationSeed<T> {
    pub fn is_regular(&self) -> bool {
        self.nodes == 0 && !self.near_zero
    }

    /// w = u'/u at the grid nodes, or `None` when u has a node or comes too
    /// close to one.
    pub fn superpotential(&self) -> Option<Vec<T>> {
        self.is_regular()
            .then(|| self.u.iter().zip(&self.du).map(|(&u, &du)| du / u).collect())
    }
}

const SEED_SUBSTEPS: usize = 4;

/// Integrates H₂,ₗ u = 0 outward from x = h with u ~ x^{l+1}, by RK4 with
/// four substeps per grid cell, and counts the nodes of u.
pub fn h2l_factorization_seed<T: Real>(x0: T, l: usize, grid: &Grid<T>) -> Result<FactorizationSeed<T>> {
    let profile = AlphaProfile::unit(x0);
    let h = grid.spacing();
    let cent = from_usize::<T>(l * (l + 1));
    let half = lit::<T>(0.5);
    let rhs = |x: T, y: &[T], d: &mut [T]| {
        let a = profile.alpha(x);
        let q = cent / (x * x) - half * a * a + half;
        d[0] = y[1];
        d[1] = q * y[0];
    };
    let start = grid.node(0);
    let end = grid.node(grid.len() - 1);
    // Frobenius start u = x^{l+1}(1 + c₂x² + c₃x³) with Q ≈ q₀ + q₁x near 0.
    let a0 = profile.alpha(T::zero());
    let (da0, _) = profile.alpha_derivatives(T::zero());
    let c2 = (half - half * a0 * a0) / from_usize::<T>(4 * l + 6);
    let c3 = -a0 * da0 / from_usize::<T>(6 * l + 12);
    let p = from_usize::<T>(l + 1);
    let u0 = h.powi(l as i32 + 1) * (T::one() + c2 * h * h + c3 * h * h * h);
    let du0 = h.powi(l as i32)
        * (p + (p + lit(2.0)) * c2 * h * h + (p + lit(3.0)) * c3 * h * h * h);
    let step = h / from_usize::<T>(SEED_SUBSTEPS);
    let traj = integrate_ivp(rhs, start, end, &[u0, du0], step, &[0]).map_err(|e| match e {
        Error::BlowUp { last_x } => {
            Error::NumericalFailure(format!("seed integration blew up near x = {last_x}"))
        }
        other => other,
    })?;

    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    for (k, y) in traj.y.iter().enumerate().step_by(SEED_SUBSTEPS) {
        debug_assert!(k / SEED_SUBSTEPS < grid.len());
        u.push(y[0]);
        du.push(y[1]);
    }
    let guard = lit::<T>(1e-12);
    let mut running = T::zero();
    let mut near_zero = false;
    for y in &traj.y {
        let a = y[0].abs();
        if running > T::zero() && a < guard * running {
            near_zero = true;
            break;
        }
        running = running.max(a);
    }
    let node_positions: Vec<T> = traj.nodes_of(0).map(|s| s.x).collect();
    Ok(FactorizationSeed {
        x0,
        l,
        u,
        du,
        nodes: node_positions.len(),
        node_positions,
        near_zero,
    })
}

/// Largest-magnitude relative deviation between two sampled functions,
/// helper for comparisons in tests and reports.
pub fn relative_deviation<T: Real>(a: &[T], b: &[T]) -> T {
    let scale = max_abs(b).max(T::min_positive_value());
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
        / scale
}
