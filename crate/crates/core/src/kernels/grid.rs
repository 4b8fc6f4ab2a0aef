use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Uniform radial mesh on (0, L) with implicit Dirichlet values at both ends.
///
/// Interior nodes are x_i = i·h for i = 1..=n with h = L/(n + 1); the
/// boundary nodes x = 0 and x = L are not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    length: T,
    n: usize,
}

impl<T: Real> Grid<T> {
    pub const DEFAULT_LENGTH: f64 = 100.0;
    pub const DEFAULT_POINTS: usize = 8000;

    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(Error::invalid("L", format!("must be positive, got {length}")));
        }
        if n < 3 {
            return Err(Error::invalid("n", format!("need at least 3 interior points, got {n}")));
        }
        Ok(Self { length, n })
    }

    /// L = 100 with n = 8000 interior points (h = 0.0125).
    pub fn standard() -> Self {
        Self {
            length: lit(Self::DEFAULT_LENGTH),
            n: Self::DEFAULT_POINTS,
        }
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> T {
        self.length / from_usize::<T>(self.n + 1)
    }

    /// Coordinate of interior node `i` (zero-based, so `node(0) == h`).
    #[inline]
    pub fn node(&self, i: usize) -> T {
        from_usize::<T>(i + 1) * self.spacing()
    }

    /// Coordinate of any node on the closed mesh, `0 ..= n + 1`.
    #[inline]
    pub fn closed_node(&self, j: usize) -> T {
        from_usize::<T>(j) * self.spacing()
    }

    /// Midpoint between interior node `i - 1` and `i` on the closed mesh
    /// (`j` runs over `0 ..= n`, midpoint j + 1/2).
    #[inline]
    pub fn midpoint(&self, j: usize) -> T {
        (from_usize::<T>(j) + lit(0.5)) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// All n + 2 nodes including both boundary points.
    pub fn closed_nodes(&self) -> Vec<T> {
        (0..self.n + 2).map(|j| self.closed_node(j)).collect()
    }

    /// Index of the interior node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: T) -> usize {
        let k = (x / self.spacing()).round().to_f64().unwrap_or(1.0);
        (k.max(1.0) as usize).min(self.n) - 1
    }

    /// Same mesh length with a different resolution.
    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(self.length, n)
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..self.n).map(|i| f(self.node(i))).collect()
    }
}
