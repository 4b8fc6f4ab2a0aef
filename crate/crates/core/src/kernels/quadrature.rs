use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Composite Simpson rule on uniformly spaced samples.
///
/// An even sample count closes the last three intervals with Simpson's 3/8
/// rule, keeping the O(h⁴) error.
pub fn simpson<T: Real>(samples: &[T], h: T) -> Result<T> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "Simpson quadrature needs at least 3 samples, got {m}"
        )));
    }
    let third = h / lit(3.0);
    if m % 2 == 1 {
        return Ok(third * simpson_odd(samples));
    }
    if m == 4 {
        return Ok(three_eighths(samples, h));
    }
    let head = &samples[..m - 3];
    Ok(third * simpson_odd(head) + three_eighths(&samples[m - 4..], h))
}

fn simpson_odd<T: Real>(f: &[T]) -> T {
    let m = f.len();
    let mut s = f[0] + f[m - 1];
    for (i, &v) in f.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { lit::<T>(4.0) * v } else { lit::<T>(2.0) * v };
    }
    s
}

fn three_eighths<T: Real>(f: &[T], h: T) -> T {
    lit::<T>(3.0) * h / lit(8.0) * (f[0] + lit::<T>(3.0) * (f[1] + f[2]) + f[3])
}

/// Running integral ∫ from the first sample to each sample.
///
/// Even offsets use composite Simpson; odd offsets add the one-interval
/// formula h/12·(5f₀ + 8f₁ − f₂) (or its mirror at the right end), so every
/// entry is fourth-order accurate.
pub fn cumulative_simpson<T: Real>(samples: &[T], h: T) -> Result<Vec<T>> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "cumulative Simpson needs at least 3 samples, got {m}"
        )));
    }
    let f = samples;
    let twelfth = h / lit(12.0);
    let third = h / lit(3.0);
    let (five, eight, four) = (lit::<T>(5.0), lit::<T>(8.0), lit::<T>(4.0));
    let mut out = vec![T::zero(); m];
    let mut k = 2;
    while k < m {
        out[k] = out[k - 2] + third * (f[k - 2] + four * f[k - 1] + f[k]);
        k += 2;
    }
    let mut k = 1;
    while k < m {
        out[k] = if k + 1 < m {
            out[k - 1] + twelfth * (five * f[k - 1] + eight * f[k] - f[k + 1])
        } else {
            out[k - 1] + twelfth * (-f[k - 2] + eight * f[k - 1] + five * f[k])
        };
        k += 2;
    }
    Ok(out)
}
