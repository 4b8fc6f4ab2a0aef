use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Rows are stored with room for the `kl` extra super-diagonals that
/// partial pivoting can fill in.
#[derive(Debug, Clone)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku + self.kl {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self.slot(i, j) {
            Some(s) if j <= i + self.ku => self.data[s],
            _ => T::zero(),
        }
    }

    /// Sets entry (i, j); panics when outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(
            i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j).unwrap();
        self.data[s] = v;
    }

    pub fn add_diagonal(&mut self, shift: T) {
        for i in 0..self.n {
            let s = self.slot(i, i).unwrap();
            self.data[s] += shift;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting. Pivots smaller in magnitude
    /// than `pivot_floor` are replaced by `±pivot_floor`; with a zero floor an
    /// exactly singular pivot is an error.
    pub fn lu(mut self, pivot_floor: T) -> Result<BandedLu<T>> {
        let n = self.n;
        let span = self.kl + self.ku;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k).unwrap()].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.slot(r, k).unwrap()].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            let last_col = (k + span).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j).unwrap();
                    let b = self.slot(p, j).unwrap();
                    self.data.swap(a, b);
                }
            }
            let kk = self.slot(k, k).unwrap();
            let mut piv = self.data[kk];
            if piv.abs() <= pivot_floor || piv == T::zero() {
                if pivot_floor == T::zero() {
                    return Err(Error::NumericalFailure(format!(
                        "singular pivot at row {k} in banded LU"
                    )));
                }
                piv = if piv < T::zero() { -pivot_floor } else { pivot_floor };
                self.data[kk] = piv;
            }
            for r in k + 1..=last_row {
                let rk = self.slot(r, k).unwrap();
                let factor = self.data[rk] / piv;
                self.data[rk] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.slot(k, j).unwrap();
                    let rj = self.slot(r, j).unwrap();
                    let u = self.data[kj];
                    self.data[rj] -= factor * u;
                }
            }
        }
        Ok(BandedLu {
            matrix: self,
            pivots,
        })
    }
}

/// Factorized banded matrix ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    matrix: BandedMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let m = &self.matrix;
        let n = m.n;
        assert_eq!(b.len(), n);
        let span = m.kl + m.ku;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + m.kl).min(n - 1) {
                b[r] -= m.data[m.slot(r, k).unwrap()] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + span).min(n - 1) {
                s -= m.data[m.slot(k, j).unwrap()] * b[j];
            }
            b[k] = s / m.data[m.slot(k, k).unwrap()];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
