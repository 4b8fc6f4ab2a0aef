use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// A recorded sign change of a watched component, located by one secant
/// step between the bracketing samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChange<T> {
    pub component: usize,
    pub x: T,
    /// Index of the first sample after the change.
    pub sample: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub x: Vec<T>,
    pub y: Vec<Vec<T>>,
    pub sign_changes: Vec<SignChange<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &[T] {
        self.y.last().expect("trajectory holds the initial state")
    }

    /// Samples of one component.
    pub fn component(&self, c: usize) -> Vec<T> {
        self.y.iter().map(|s| s[c]).collect()
    }

    pub fn nodes_of(&self, c: usize) -> impl Iterator<Item = &SignChange<T>> {
        self.sign_changes.iter().filter(move |s| s.component == c)
    }
}

const BLOW_UP: f64 = 1e290;

/// Fixed-step classical RK4 from `x_start` to `x_end`.
///
/// The step is adjusted so that an integer number of steps lands exactly on
/// `x_end`. Sign changes of the components listed in `watch` are recorded.
pub fn integrate_ivp<T: Real>(
    rhs: impl Fn(T, &[T], &mut [T]),
    x_start: T,
    x_end: T,
    y0: &[T],
    step: T,
    watch: &[usize],
) -> Result<Trajectory<T>> {
    if !(step.is_finite() && step > T::zero()) {
        return Err(Error::invalid("step", format!("must be positive, got {step}")));
    }
    if y0.is_empty() || watch.iter().any(|&c| c >= y0.len()) {
        return Err(Error::InvalidInput("bad state dimension or watch index".into()));
    }
    let span = x_end - x_start;
    let steps = (span.abs() / step).round().to_usize().unwrap_or(0).max(1);
    let h = span / from_usize::<T>(steps);
    let dim = y0.len();
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let two = lit::<T>(2.0);
    let limit = lit::<T>(BLOW_UP);

    let mut xs = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    let mut changes = Vec::new();
    xs.push(x_start);
    ys.push(y0.to_vec());

    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim]);
    let mut tmp = vec![T::zero(); dim];
    let mut y = y0.to_vec();
    for s in 0..steps {
        let x = x_start + from_usize::<T>(s) * h;
        rhs(x, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + half * h * k1[i];
        }
        rhs(x + half * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + half * h * k2[i];
        }
        rhs(x + half * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(x + h, &tmp, &mut k4);
        let mut next = vec![T::zero(); dim];
        for i in 0..dim {
            next[i] = y[i] + sixth * h * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        if next.iter().any(|v| !v.is_finite() || v.abs() > limit) {
            return Err(Error::BlowUp { last_x: to_f64(x) });
        }
        let x_next = if s + 1 == steps { x_end } else { x + h };
        for &c in watch {
            let (a, b) = (y[c], next[c]);
            let crossed = (a < T::zero() && b > T::zero()) || (a > T::zero() && b < T::zero());
            let landed = b == T::zero() && a != T::zero();
            if crossed || landed {
                let xr = if crossed { x - a * (x_next - x) / (b - a) } else { x_next };
                changes.push(SignChange {
                    component: c,
                    x: xr,
                    sample: s + 1,
                });
            }
        }
        xs.push(x_next);
        ys.push(next.clone());
        y = next;
    }
    Ok(Trajectory {
        x: xs,
        y: ys,
        sign_changes: changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let t = integrate_ivp(|_, y, d| d[0] = y[0], 0.0, 1.0, &[1.0], 1e-3, &[]).unwrap();
        assert!((t.last()[0] - std::f64::consts::E).abs() < 1e-8);
        assert_eq!(t.x.len(), 1001);
        assert_eq!(*t.x.last().unwrap(), 1.0);
    }

    #[test]
    fn hyperbolic_cosine_as_system() {
        let t = integrate_ivp(
            |_, y, d| {
                d[0] = y[1];
                d[1] = y[0];
            },
            0.0,
            1.0,
            &[1.0, 0.0],
            1e-3,
            &[],
        )
        .unwrap();
        assert!((t.last()[0] - 1f64.cosh()).abs() < 1e-10);
        assert!((t.last()[1] - 1f64.sinh()).abs() < 1e-10);
    }

    #[test]
    fn sine_nodes_are_located() {
        let t = integrate_ivp(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            0.0,
            10.0,
            &[0.0, 1.0],
            1e-2,
            &[0],
        )
        .unwrap();
        let nodes: Vec<f64> = t.nodes_of(0).map(|s| s.x).collect();
        assert_eq!(nodes.len(), 3);
        for (k, x) in nodes.iter().enumerate() {
            assert!((x - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-4);
        }
    }

    #[test]
    fn backward_integration() {
        let t = integrate_ivp(|_, y, d| d[0] = y[0], 1.0, 0.0, &[1.0], 1e-3, &[]).unwrap();
        assert!((t.last()[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_is_reported() {
        let err = integrate_ivp(|_, y, d| d[0] = y[0] * y[0], 0.0, 2.0, &[1.0], 1e-3, &[]).unwrap_err();
        match err {
            Error::BlowUp { last_x } => assert!(last_x > 0.9 && last_x < 1.01),
            e => panic!("unexpected {e:?}"),
        }
    }
}
