//! Reconstruction quality: PSNR and Gaussian-window SSIM on magnitude images.

use ndarray::{s, Array2, Zip};

use crate::error::{Error, Result};
use crate::{ComplexImage, RealImage};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr_db: f64,
    pub ssim: f64,
}

fn check_same(x: &RealImage, reference: &RealImage) -> Result<()> {
    if x.dim() != reference.dim() {
        return Err(Error::shape(
            "metrics",
            format!("{:?}", reference.dim()),
            format!("{:?}", x.dim()),
        ));
    }
    Ok(())
}

fn max_of(a: &RealImage) -> f64 {
    a.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(a: &RealImage) -> f64 {
    a.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `10·log10(peak² / MSE)`; `peak` defaults to `max(reference)`.
/// Identical images give `+∞`.
pub fn psnr(x: &RealImage, reference: &RealImage, peak: Option<f64>) -> Result<f64> {
    check_same(x, reference)?;
    let peak = peak.unwrap_or_else(|| max_of(reference));
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::invalid(format!("PSNR peak must be positive, got {peak}")));
    }
    let mse = Zip::from(x).and(reference).fold(0.0, |acc, a, b| acc + (a - b).powi(2)) / x.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    })
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, slot) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *slot = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = k.iter().sum();
    k.map(|v| v / total)
}

/// Separable Gaussian filter over the fully-contained ("valid") positions.
fn filter_valid(a: &RealImage) -> RealImage {
    let k = gaussian_kernel();
    let (r, c) = a.dim();
    let w = SSIM_WINDOW;
    let rows: RealImage = Array2::from_shape_fn((r - w + 1, c), |(i, j)| {
        (0..w).map(|t| k[t] * a[[i + t, j]]).sum::<f64>()
    });
    Array2::from_shape_fn((r - w + 1, c - w + 1), |(i, j)| {
        (0..w).map(|t| k[t] * rows[[i, j + t]]).sum::<f64>()
    })
}

/// Mean SSIM with dynamic range `max(ref) − min(ref)` (1 when the reference
/// is constant).
pub fn ssim(x: &RealImage, reference: &RealImage) -> Result<f64> {
    let range = max_of(reference) - min_of(reference);
    ssim_with_range(x, reference, if range > 0.0 { range } else { 1.0 })
}

/// Mean SSIM with an explicit dynamic range.
pub fn ssim_with_range(x: &RealImage, reference: &RealImage, range: f64) -> Result<f64> {
    check_same(x, reference)?;
    let (r, c) = x.dim();
    if r < SSIM_WINDOW || c < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}"
        )));
    }
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let mx = filter_valid(x);
    let my = filter_valid(reference);
    let mxx = filter_valid(&(x * x));
    let myy = filter_valid(&(reference * reference));
    let mxy = filter_valid(&(x * reference));
    let mut total = 0.0;
    Zip::from(&mx)
        .and(&my)
        .and(&mxx)
        .and(&myy)
        .and(&mxy)
        .for_each(|&ux, &uy, &xx, &yy, &xy| {
            let vx = xx - ux * ux;
            let vy = yy - uy * uy;
            let cov = xy - ux * uy;
            total += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        });
    Ok(total / mx.len() as f64)
}

/// `s·x` with `s ≥ 0` minimising `‖s·x − reference‖²`.
pub fn align_scale(x: &RealImage, reference: &RealImage) -> Result<RealImage> {
    check_same(x, reference)?;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let xr: f64 = Zip::from(x).and(reference).fold(0.0, |acc, a, b| acc + a * b);
    let s = if xx > 0.0 { (xr / xx).max(0.0) } else { 0.0 };
    Ok(x.mapv(|v| v * s))
}

/// Complex `s` minimising `‖s·x − reference‖²`.
pub fn complex_scale(x: &ComplexImage, reference: &ComplexImage) -> Result<num_complex::Complex64> {
    if x.dim() != reference.dim() {
        return Err(Error::shape(
            "complex_scale",
            format!("{:?}", reference.dim()),
            format!("{:?}", x.dim()),
        ));
    }
    let xx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let xr = Zip::from(x)
        .and(reference)
        .fold(num_complex::Complex64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b);
    if xx > 0.0 {
        Ok(xr / xx)
    } else {
        Err(Error::invalid("cannot align an all-zero image"))
    }
}

/// Magnitude of `x`, least-squares scaled onto `reference`, then PSNR
/// (peak = `max(reference)`) and SSIM.
pub fn evaluate(x: &ComplexImage, reference: &RealImage) -> Result<QualityReport> {
    let aligned = align_scale(&x.mapv(|v| v.norm()), reference)?;
    Ok(QualityReport {
        psnr_db: psnr(&aligned, reference, None)?,
        ssim: ssim(&aligned, reference)?,
    })
}

/// Central crop helper for region-of-interest scoring.
pub fn crop(a: &RealImage, margin: usize) -> RealImage {
    let (r, c) = a.dim();
    a.slice(s![margin..r - margin, margin..c - margin]).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn phantom() -> RealImage {
        crate::model::make_phantom(48).image
    }

    fn noisy(reference: &RealImage, sigma: f64, seed: u64) -> RealImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sigma).unwrap();
        reference.mapv(|v| v + d.sample(&mut rng))
    }

    #[test]
    fn psnr_examples() {
        let r = ndarray::array![[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(psnr(&r, &r, None).unwrap(), f64::INFINITY);
        let x = r.mapv(|v| v + 0.1);
        assert!((psnr(&x, &r, Some(1.0)).unwrap() - 20.0).abs() < 1e-12);
        let y = r.mapv(|v| v + 1.0);
        assert!(psnr(&y, &r, Some(1.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn psnr_drops_with_noise() {
        let r = phantom();
        let values: Vec<f64> = [0.01, 0.02, 0.05]
            .iter()
            .map(|&s| psnr(&noisy(&r, s, 3), &r, None).unwrap())
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
    }

    #[test]
    fn ssim_identity_and_inversion() {
        let r = phantom();
        assert!((ssim(&r, &r).unwrap() - 1.0).abs() < 1e-12);
        assert!(ssim(&noisy(&r, 1e-6, 1), &r).unwrap() >= 0.9999);
    }

    #[test]
    fn contrast_inversion_of_checkerboard_is_negative() {
        // local means vanish, so the structure term ≈ −1 dominates;
        // reference value from scikit-image (Gaussian weights, population covariance)
        let r = RealImage::from_shape_fn((24, 24), |(i, j)| if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
        let value = ssim(&r.mapv(|v| -v), &r).unwrap();
        assert!((value - -0.9964064683532637).abs() < 1e-10, "{value}");
    }

    #[test]
    fn matches_reference_implementation() {
        let r = RealImage::from_shape_fn((24, 24), |(i, j)| {
            let (i, j) = (i as f64, j as f64);
            (0.3 * i).sin() + 0.5 * (0.2 * j).cos() + 0.01 * i * j / 24.0
        });
        let x = RealImage::from_shape_fn((24, 24), |(i, j)| {
            r[[i, j]] + 0.2 * (1.7 * i as f64 + 0.4 * j as f64).sin()
        });
        let value = ssim(&x, &r).unwrap();
        assert!((value - 0.8650993643710029).abs() < 1e-10, "{value}");
    }

    #[test]
    fn ssim_symmetric_with_fixed_range() {
        let r = phantom();
        let x = noisy(&r, 0.05, 2);
        let a = ssim_with_range(&x, &r, 1.0).unwrap();
        let b = ssim_with_range(&r, &x, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ssim_rejects_tiny_images() {
        let r = RealImage::zeros((8, 8));
        assert!(ssim(&r, &r).is_err());
    }

    #[test]
    fn kernel_is_normalised() {
        assert!((gaussian_kernel().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alignment_removes_scale() {
        let r = phantom();
        let x = r.mapv(|v| 3.7 * v);
        let aligned = align_scale(&x, &r).unwrap();
        assert!(aligned.iter().zip(r.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
        let c = x.mapv(|v| num_complex::Complex64::from_polar(v, 0.4));
        let rc = r.mapv(|v| num_complex::Complex64::new(v, 0.0));
        let s = complex_scale(&c, &rc).unwrap();
        assert!((s - num_complex::Complex64::from_polar(1.0 / 3.7, -0.4)).norm() < 1e-12);
    }
}
