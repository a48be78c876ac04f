//! Spherical Bessel functions of the first kind, `j_n`, for complex argument.
//!
//! Orders are generated from the closed-form pair `j_0`, `j_1` with the
//! three-term recurrence `j_{n+1} = (2n+1)/x · j_n − j_{n−1}`. Running that
//! recurrence upward is only stable while `|x|` is not small compared with
//! the order, so for `|x| < n_max` the two highest orders are taken from the
//! power series and the same recurrence is run downward instead.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this `|x|` the seeds switch to their leading series terms.
pub const SMALL_ARGUMENT_CUTOFF: f64 = 1e-6;

/// Highest order supported by [`spherical_bessel`].
pub const MAX_ORDER: usize = 8;

const SERIES_MAX_TERMS: usize = 200;

/// `(j_0(x), j_1(x))` from `sin x / x` and `sin x / x² − cos x / x`.
pub fn spherical_bessel_seed(x: Complex64) -> (Complex64, Complex64) {
    spherical_bessel_seed_with_cutoff(x, SMALL_ARGUMENT_CUTOFF)
}

/// Same as [`spherical_bessel_seed`] with an explicit small-argument cutoff.
///
/// For `|x| < cutoff` the limits `j_0 ≈ 1 − x²/6` and `j_1 ≈ x/3` are used to
/// avoid the cancellation in the closed forms.
pub fn spherical_bessel_seed_with_cutoff(x: Complex64, cutoff: f64) -> (Complex64, Complex64) {
    if x.norm() < cutoff {
        return (Complex64::new(1.0, 0.0) - x * x / 6.0, x / 3.0);
    }
    let (s, c) = (x.sin(), x.cos());
    (s / x, s / (x * x) - c / x)
}

/// `j_0(x), …, j_{n_max}(x)`.
pub fn spherical_bessel(x: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max > MAX_ORDER {
        return Err(Error::invalid(format!(
            "spherical Bessel order {n_max} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    let (j0, j1) = spherical_bessel_seed(x);
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    out[0] = j0;
    if n_max == 0 {
        return Ok(out);
    }
    out[1] = j1;
    if n_max == 1 {
        return Ok(out);
    }

    if x.norm() >= n_max as f64 {
        for n in 1..n_max {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
    } else if x.norm() < SMALL_ARGUMENT_CUTOFF {
        // Leading series term is exact to working precision here and avoids
        // dividing by a vanishing x.
        for (n, slot) in out.iter_mut().enumerate().skip(2) {
            *slot = spherical_bessel_series(x, n);
        }
    } else {
        out[n_max] = spherical_bessel_series(x, n_max);
        out[n_max - 1] = spherical_bessel_series(x, n_max - 1);
        for n in (2..n_max).rev() {
            out[n - 1] = (2 * n + 1) as f64 / x * out[n] - out[n + 1];
        }
        // Closed-form seeds are kept for the two lowest orders.
        out[0] = j0;
        out[1] = j1;
    }
    Ok(out)
}

/// Power series `j_n(x) = 2ⁿ xⁿ Σ_s (−1)ˢ (s+n)! / (s! (2s+2n+1)!) x^{2s}`,
/// summed until the terms drop below double precision.
pub fn spherical_bessel_series(x: Complex64, n: usize) -> Complex64 {
    // 2ⁿ n! / (2n+1)! = 1 / (2n+1)!!
    let double_factorial: f64 = (1..=n).map(|k| (2 * k + 1) as f64).product();
    let mut term = x.powu(n as u32) / double_factorial;
    let mut sum = term;
    let x2 = x * x;
    for s in 0..SERIES_MAX_TERMS {
        let s = s as f64;
        let nf = n as f64;
        term *= -x2 * (s + nf + 1.0) / ((s + 1.0) * (2.0 * s + 2.0 * nf + 2.0) * (2.0 * s + 2.0 * nf + 3.0));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn j0_vanishes_at_pi() {
        let (j0, _) = spherical_bessel_seed(c(PI));
        assert!(j0.norm() <= 1e-15, "{j0}");
    }

    #[test]
    fn seeds_tend_to_series_limits() {
        let (j0, j1) = spherical_bessel_seed(c(1e-9));
        assert!((j0 - 1.0).norm() < 1e-15);
        assert!(j1.norm() < 1e-9);
        let (j0, j1) = spherical_bessel_seed(Complex64::new(0.0, 0.0));
        assert_eq!(j0, c(1.0));
        assert_eq!(j1, c(0.0));
    }

    #[test]
    fn j1_at_one() {
        let (_, j1) = spherical_bessel_seed(c(1.0));
        // sin(1) − cos(1)
        assert!((j1.re - 0.301_168_678_939_756_7).abs() < 1e-15);
    }

    #[test]
    fn j2_at_two() {
        let j = spherical_bessel(c(2.0), 2).unwrap();
        // (3/x³ − 1/x) sin x − 3/x² cos x at x = 2, evaluated with mpmath
        assert!((j[2].re - 0.198_447_949_057_146_58).abs() < 1e-14, "{}", j[2]);
    }

    #[test]
    fn j3_at_one_and_a_half() {
        let x = 1.5_f64;
        let closed = (15.0 / x.powi(4) - 6.0 / x.powi(2)) * x.sin() - (15.0 / x.powi(3) - 1.0 / x) * x.cos();
        let j = spherical_bessel(c(x), 3).unwrap();
        assert!(((j[3].re - closed) / closed).abs() <= 1e-12);
        assert!((closed - 0.028_324_641_582_471_8).abs() < 1e-15);
    }

    #[test]
    fn low_orders_equal_seeds() {
        for &x in &[c(0.3), c(2.5), Complex64::new(1.0, -0.4), c(11.0)] {
            let (j0, j1) = spherical_bessel_seed(x);
            for n_max in 1..=MAX_ORDER {
                let j = spherical_bessel(x, n_max).unwrap();
                assert_eq!(j.len(), n_max + 1);
                assert_eq!(j[0], j0);
                assert_eq!(j[1], j1);
            }
        }
    }

    #[test]
    fn rejects_order_above_cap() {
        assert!(spherical_bessel(c(1.0), MAX_ORDER + 1).is_err());
    }

    #[test]
    fn orders_agree_across_n_max() {
        // The value of j_n must not depend on how many orders were requested.
        for &x in &[c(0.2), c(3.3), Complex64::new(0.17, -2.4e-5), c(7.5)] {
            let full = spherical_bessel(x, MAX_ORDER).unwrap();
            for n_max in 2..MAX_ORDER {
                let part = spherical_bessel(x, n_max).unwrap();
                for n in 0..=n_max {
                    let rel = (part[n] - full[n]).norm() / full[n].norm();
                    assert!(rel < 1e-12, "x={x} n={n} n_max={n_max} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn tiny_argument_leading_terms() {
        let x = c(1e-8);
        let j = spherical_bessel(x, 4).unwrap();
        // j_n(x) ≈ xⁿ / (2n+1)!!
        let expected = [1.0, 1e-8 / 3.0, 1e-16 / 15.0, 1e-24 / 105.0, 1e-32 / 945.0];
        for (n, e) in expected.iter().enumerate() {
            assert!(((j[n].re - e) / e).abs() < 1e-12, "n={n}");
        }
    }
}
