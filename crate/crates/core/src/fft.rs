//! Unitary 2D DFT on square complex images.
//!
//! Both directions are scaled by `1/N`, so `‖DFT2(x)‖ = ‖x‖` and the inverse
//! is the adjoint. Every module uses this single normalisation.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::ComplexImage;

/// Planned forward/inverse transforms for `N × N` images. Cheap to clone and
/// safe to share between threads.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&self, image: &ComplexImage) -> Result<ComplexImage> {
        self.transform(image, &self.forward)
    }

    pub fn inverse(&self, image: &ComplexImage) -> Result<ComplexImage> {
        self.transform(image, &self.inverse)
    }

    fn transform(&self, image: &ComplexImage, plan: &Arc<dyn Fft<f64>>) -> Result<ComplexImage> {
        let n = self.n;
        if image.dim() != (n, n) {
            return Err(Error::shape("fft2", format!("{n}x{n}"), format!("{:?}", image.dim())));
        }
        let mut buf: Vec<Complex64> = image.iter().copied().collect();
        plan.process(&mut buf);
        let mut transposed = transpose(&buf, n);
        plan.process(&mut transposed);
        let scale = 1.0 / n as f64;
        let out = transpose(&transposed, n);
        Ok(Array2::from_shape_vec((n, n), out.into_iter().map(|v| v * scale).collect()).expect("square buffer"))
    }
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = buf[i * n + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(n: usize, rng: &mut ChaCha8Rng) -> ComplexImage {
        Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[8, 15, 32] {
            let fft = Fft2::new(n);
            let x = random_image(n, &mut rng);
            let y = fft.forward(&x).unwrap();
            assert!((norm(&y) - norm(&x)).abs() <= 1e-12 * norm(&x));
            let back = fft.inverse(&y).unwrap();
            let err = norm(&(&back - &x));
            assert!(err <= 1e-12 * norm(&x));
        }
    }

    #[test]
    fn dc_of_constant() {
        let n = 6;
        let fft = Fft2::new(n);
        let x = Array2::from_elem((n, n), Complex64::new(1.0, 0.0));
        let y = fft.forward(&x).unwrap();
        assert!((y[[0, 0]] - Complex64::new(n as f64, 0.0)).norm() < 1e-12);
        assert!(y.iter().skip(1).all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn matches_naive_dft() {
        let n = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_image(n, &mut rng);
        let y = Fft2::new(n).forward(&x).unwrap();
        for k in 0..n {
            for l in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let angle = -2.0 * std::f64::consts::PI * ((k * i + l * j) as f64) / n as f64;
                        acc += x[[i, j]] * Complex64::from_polar(1.0, angle);
                    }
                }
                assert!((acc / n as f64 - y[[k, l]]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_wrong_shape() {
        let fft = Fft2::new(4);
        assert!(fft.forward(&Array2::zeros((4, 5))).is_err());
    }
}
