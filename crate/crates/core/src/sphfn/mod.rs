//! Spherical basis functions `f_l⁺(ρ, θ, φ) = j_n(ζρ)·Y_n^m(θ, φ)`.
//!
//! The linear index is `l = n² + n + m + 1` with `|m| ≤ n`, so orders
//! `0..=ñ` give `(ñ + 1)²` functions.

mod bessel;
mod legendre;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bessel::{
    spherical_bessel, spherical_bessel_seed, spherical_bessel_seed_with_cutoff, spherical_bessel_series, MAX_ORDER,
    SMALL_ARGUMENT_CUTOFF,
};
pub use legendre::{legendre_table, LegendreTable};

/// Wave number ζ of the Helmholtz equation, `ζ² = εμω² − iσωμ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumber {
    pub zeta: Complex64,
}

impl WaveNumber {
    /// Principal root (non-negative real part) of `εμω² − iσωμ`.
    pub fn from_physics(omega: f64, mu: f64, sigma: f64, epsilon: f64) -> Self {
        let squared = Complex64::new(epsilon * mu * omega * omega, -sigma * omega * mu);
        WaveNumber { zeta: squared.sqrt() }
    }

    pub fn squared(&self) -> Complex64 {
        self.zeta * self.zeta
    }
}

/// Order/degree pair `(n, m)` of a spherical basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub n: usize,
    pub m: i64,
}

impl BasisIndex {
    pub fn new(n: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > n {
            return Err(Error::invalid(format!("degree m={m} exceeds order n={n}")));
        }
        Ok(BasisIndex { n, m })
    }

    /// Decode the 1-based linear index `l`.
    pub fn from_linear(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("basis index l is 1-based"));
        }
        let k = l - 1;
        let mut n = (k as f64).sqrt() as usize;
        // guard against sqrt rounding
        while (n + 1) * (n + 1) <= k {
            n += 1;
        }
        while n * n > k {
            n -= 1;
        }
        let m = k as i64 - (n * n + n) as i64;
        Ok(BasisIndex { n, m })
    }

    /// `l = n² + n + m + 1`.
    pub fn linear(&self) -> usize {
        ((self.n * self.n + self.n) as i64 + self.m + 1) as usize
    }

    /// Number of basis functions with order at most `n_tilde`.
    pub fn count(n_tilde: usize) -> usize {
        (n_tilde + 1) * (n_tilde + 1)
    }
}

// n ≤ MAX_ORDER keeps every (n ± m)! below 17!, exactly representable in f64.
pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Normalisation `(−1)^m √((2n+1)/(4π) · (n−m)!/(n+m)!)` of `Y_n^m`.
pub fn harmonic_normalization(n: usize, m: i64) -> f64 {
    let ratio = factorial((n as i64 - m) as usize) / factorial((n as i64 + m) as usize);
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * ((2 * n + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// `Y_n^m(θ, φ)` with the Condon–Shortley phase.
pub fn spherical_harmonic(n: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let index = BasisIndex::new(n, m)?;
    let table = legendre_table(theta.cos().clamp(-1.0, 1.0), n)?;
    Ok(harmonic_from_table(&table, index, phi))
}

fn harmonic_from_table(table: &LegendreTable, index: BasisIndex, phi: f64) -> Complex64 {
    let BasisIndex { n, m } = index;
    let radial = harmonic_normalization(n, m) * table.get(n, m);
    Complex64::from_polar(radial, m as f64 * phi)
}

/// `f_l⁺(ρ, θ, φ) = j_n(ζρ)·Y_n^m(θ, φ)`.
pub fn basis_function(index: BasisIndex, zeta: WaveNumber, rho: f64, theta: f64, phi: f64) -> Result<Complex64> {
    let bessel = spherical_bessel(zeta.zeta * rho, index.n)?;
    let y = spherical_harmonic(index.n, index.m, theta, phi)?;
    Ok(bessel[index.n] * y)
}

/// All `f_1⁺, …, f_{(ñ+1)²}⁺` at one point, sharing one Bessel sequence and
/// one Legendre table.
pub fn basis_functions_at(zeta: WaveNumber, rho: f64, theta: f64, phi: f64, n_tilde: usize) -> Result<Vec<Complex64>> {
    let bessel = spherical_bessel(zeta.zeta * rho, n_tilde)?;
    let table = legendre_table(theta.cos().clamp(-1.0, 1.0), n_tilde)?;
    let mut out = Vec::with_capacity(BasisIndex::count(n_tilde));
    for (n, &j) in bessel.iter().enumerate().take(n_tilde + 1) {
        for m in -(n as i64)..=n as i64 {
            out.push(j * harmonic_from_table(&table, BasisIndex { n, m }, phi));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn wave_number_squares_back() {
        let (omega, mu, sigma, epsilon) = (42.58, 1.2566e-6, 0.6, 50.0);
        let k = WaveNumber::from_physics(omega, mu, sigma, epsilon);
        let target = Complex64::new(epsilon * mu * omega * omega, -sigma * omega * mu);
        assert!((k.squared() - target).norm() <= 1e-14 * target.norm());
        assert!(k.zeta.re >= 0.0);
    }

    #[test]
    fn lossless_wave_number_is_real() {
        let k = WaveNumber::from_physics(42.58, 1.2566e-6, 0.0, 50.0);
        assert_eq!(k.zeta.im, 0.0);
        assert!(k.zeta.re > 0.0);
    }

    #[test]
    fn y00_constant() {
        let y = spherical_harmonic(0, 0, 0.7, 2.1).unwrap();
        assert!((y.re - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!(y.im.abs() < 1e-15);
    }

    #[test]
    fn y11_on_equator() {
        let y = spherical_harmonic(1, 1, FRAC_PI_2, 0.0).unwrap();
        assert!((y.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((y.re + 0.345_494_149_471_335_5).abs() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        for &(theta, phi) in &[(0.3, 1.2), (2.0, 5.5), (1.1, 0.0)] {
            for n in 0..=MAX_ORDER {
                for m in 0..=n as i64 {
                    let pos = spherical_harmonic(n, m, theta, phi).unwrap();
                    let neg = spherical_harmonic(n, -m, theta, phi).unwrap();
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((neg - sign * pos.conj()).norm() < 1e-13, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn harmonic_rejects_bad_degree() {
        assert!(spherical_harmonic(2, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn linear_index_examples() {
        assert_eq!(BasisIndex::from_linear(1).unwrap(), BasisIndex { n: 0, m: 0 });
        assert_eq!(BasisIndex::from_linear(5).unwrap(), BasisIndex { n: 2, m: -2 });
        assert_eq!(BasisIndex::from_linear(16).unwrap(), BasisIndex { n: 3, m: 3 });
        assert!(BasisIndex::from_linear(0).is_err());
        assert_eq!(BasisIndex::count(2), 9);
        assert_eq!(BasisIndex::count(5), 36);
    }

    #[test]
    fn linear_index_roundtrip() {
        for l in 1..=81 {
            let idx = BasisIndex::from_linear(l).unwrap();
            assert!(idx.m.unsigned_abs() as usize <= idx.n);
            assert_eq!(idx.linear(), l);
        }
    }

    #[test]
    fn factorials_exact() {
        let mut exact: u64 = 1;
        for k in 0..=16u64 {
            if k > 0 {
                exact *= k;
            }
            assert_eq!(factorial(k as usize), exact as f64);
        }
    }

    #[test]
    fn first_basis_function() {
        let zeta = WaveNumber::from_physics(42.58, 1.2566e-6, 0.6, 50.0);
        let (rho, theta, phi) = (3.2, 0.9, -1.3);
        let f1 = basis_function(BasisIndex::from_linear(1).unwrap(), zeta, rho, theta, phi).unwrap();
        let (j0, _) = spherical_bessel_seed(zeta.zeta * rho);
        let expected = j0 / (4.0 * PI).sqrt();
        assert!((f1 - expected).norm() < 1e-15);
    }

    #[test]
    fn batched_matches_scalar() {
        let zeta = WaveNumber::from_physics(42.58, 1.2566e-6, 0.6, 50.0);
        let (rho, theta, phi) = (5.0, 1.4, 2.7);
        let all = basis_functions_at(zeta, rho, theta, phi, 5).unwrap();
        assert_eq!(all.len(), 36);
        for (k, value) in all.iter().enumerate() {
            let idx = BasisIndex::from_linear(k + 1).unwrap();
            let scalar = basis_function(idx, zeta, rho, theta, phi).unwrap();
            assert!((value - scalar).norm() <= 1e-15 * scalar.norm().max(1e-300));
        }
    }
}
