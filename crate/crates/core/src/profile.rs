//! The sech-shaped helical turbulence profile α(x) = 2a / cosh(a(x − x0)).
//!
//! This is the decaying branch of α'' + ½α³ − a²α = 0. All solver modules
//! work with a = 1; [`AlphaProfile::rescale_to_unit_a`] and [`UnitScale`]
//! translate between physical and unit-a quantities.

use crate::error::{Error, Result};
use crate::scalar::{lit, sech, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaProfile<T> {
    /// Inverse length scale, must be positive.
    pub a: T,
    /// Profile center.
    pub x0: T,
}

impl<T: Real> AlphaProfile<T> {
    pub fn new(a: T, x0: T) -> Result<Self> {
        validate_a(a)?;
        if !x0.is_finite() {
            return Err(Error::invalid("x0", "must be finite"));
        }
        Ok(Self { a, x0 })
    }

    /// Profile in a-units (a = 1) centered at `x0`.
    pub fn unit(x0: T) -> Self {
        Self { a: T::one(), x0 }
    }

    #[inline]
    fn phase(&self, x: T) -> T {
        self.a * (x - self.x0)
    }

    /// α(x) = 2a sech(a(x − x0)).
    #[inline]
    pub fn alpha(&self, x: T) -> T {
        lit::<T>(2.0) * self.a * sech(self.phase(x))
    }

    /// Closed-form (α'(x), α''(x)).
    pub fn alpha_derivatives(&self, x: T) -> (T, T) {
        let t = self.phase(x);
        let s = sech(t);
        let th = t.tanh();
        let two = lit::<T>(2.0);
        let a2 = self.a * self.a;
        let d1 = -two * a2 * s * th;
        let d2 = two * a2 * self.a * s * (th * th - s * s);
        (d1, d2)
    }

    /// Residual of the defining equation α'' + ½α³ − a²α.
    pub fn ode_residual(&self, x: T) -> T {
        let al = self.alpha(x);
        let (_, d2) = self.alpha_derivatives(x);
        d2 + lit::<T>(0.5) * al * al * al - self.a * self.a * al
    }

    /// The equivalent profile in a-units: a = 1 and center a·x0.
    pub fn rescale_to_unit_a(&self) -> Result<Self> {
        validate_a(self.a)?;
        Ok(Self {
            a: T::one(),
            x0: self.a * self.x0,
        })
    }

    pub fn unit_scale(&self) -> UnitScale<T> {
        UnitScale { a: self.a }
    }
}

fn validate_a<T: Real>(a: T) -> Result<()> {
    if !(a.is_finite() && a > T::zero()) {
        return Err(Error::invalid("a", format!("must be positive and finite, got {a}")));
    }
    Ok(())
}

/// Maps unit-a quantities (x, λ̃, ε̃, α̃) back to physical ones:
/// r = x/a, λ = a²λ̃, ε = aε̃, α = aα̃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScale<T> {
    pub a: T,
}

impl<T: Real> UnitScale<T> {
    pub fn radius(&self, x: T) -> T {
        x / self.a
    }

    pub fn unit_coordinate(&self, r: T) -> T {
        r * self.a
    }

    pub fn lambda(&self, unit_lambda: T) -> T {
        self.a * self.a * unit_lambda
    }

    pub fn epsilon(&self, unit_epsilon: T) -> T {
        self.a * unit_epsilon
    }

    pub fn alpha(&self, unit_alpha: T) -> T {
        self.a * unit_alpha
    }
}
