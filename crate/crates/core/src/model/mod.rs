//! Forward acquisition model `g_j = P ⊙ DFT2(u ⊙ c_j)` and the synthetic
//! data generators used by experiments.

mod coils;
mod mask;
mod phantom;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::ComplexImage;

pub use coils::{make_synthetic_coils, perturb_coils, sum_of_squares};
pub use mask::{fftshift, ifftshift, make_spiral_mask, SamplingMask};
pub use phantom::{make_phantom, Phantom, Tissue};

/// Per-coil k-space planes. Entries off the mask support are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceData {
    pub planes: Vec<ComplexImage>,
}

impl KSpaceData {
    pub fn coils(&self) -> usize {
        self.planes.len()
    }

    pub fn zeros(coils: usize, n: usize) -> Self {
        KSpaceData {
            planes: vec![Array2::zeros((n, n)); coils],
        }
    }
}

/// Mask plus planned transforms, reused across many forward/adjoint calls.
#[derive(Debug, Clone)]
pub struct Acquisition {
    fft: Fft2,
    mask: SamplingMask,
}

impl Acquisition {
    pub fn new(mask: SamplingMask) -> Self {
        Acquisition {
            fft: Fft2::new(mask.size()),
            mask,
        }
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn size(&self) -> usize {
        self.mask.size()
    }

    /// `P ⊙ DFT2(u ⊙ c_j)` for every coil.
    pub fn forward(&self, u: &ComplexImage, coils: &[ComplexImage]) -> Result<KSpaceData> {
        let n = self.size();
        check_square("forward: image", u, n)?;
        let mut planes = Vec::with_capacity(coils.len());
        for c in coils {
            check_square("forward: coil", c, n)?;
            let mut k = self.fft.forward(&(u * c))?;
            self.mask.apply(&mut k);
            planes.push(k);
        }
        Ok(KSpaceData { planes })
    }

    /// `Σ_j conj(c_j) ⊙ IDFT2(P ⊙ g_j)`.
    pub fn adjoint(&self, g: &KSpaceData, coils: &[ComplexImage]) -> Result<ComplexImage> {
        let n = self.size();
        if g.coils() != coils.len() {
            return Err(Error::shape("adjoint: coil count", coils.len(), g.coils()));
        }
        let mut out = Array2::zeros((n, n));
        for (plane, c) in g.planes.iter().zip(coils) {
            check_square("adjoint: k-space", plane, n)?;
            check_square("adjoint: coil", c, n)?;
            let mut masked = plane.clone();
            self.mask.apply(&mut masked);
            let img = self.fft.inverse(&masked)?;
            out.zip_mut_with(&(c.mapv(|v| v.conj()) * img), |o, v| *o += v);
        }
        Ok(out)
    }

    /// Zero-filled coil combination `adjoint(g, c) / Σ_j |c_j|²`.
    pub fn zero_filled(&self, g: &KSpaceData, coils: &[ComplexImage]) -> Result<ComplexImage> {
        let combined = self.adjoint(g, coils)?;
        let sos = sum_of_squares(coils);
        let floor = sos.iter().cloned().fold(0.0, f64::max) * 1e-12;
        Ok(Array2::from_shape_fn(combined.dim(), |ix| {
            combined[ix] / sos[ix].max(floor).max(f64::MIN_POSITIVE)
        }))
    }
}

pub(crate) fn check_square(context: &'static str, image: &ComplexImage, n: usize) -> Result<()> {
    if image.dim() != (n, n) {
        return Err(Error::shape(context, format!("{n}x{n}"), format!("{:?}", image.dim())));
    }
    Ok(())
}

/// `P ⊙ DFT2(u ⊙ c_j)`; plans a transform for this call only.
pub fn forward(u: &ComplexImage, coils: &[ComplexImage], mask: &SamplingMask) -> Result<KSpaceData> {
    Acquisition::new(mask.clone()).forward(u, coils)
}

/// `Σ_j conj(c_j) ⊙ IDFT2(P ⊙ g_j)`; plans a transform for this call only.
pub fn adjoint(g: &KSpaceData, coils: &[ComplexImage], mask: &SamplingMask) -> Result<ComplexImage> {
    Acquisition::new(mask.clone()).adjoint(g, coils)
}

/// Add complex Gaussian noise (standard deviation `sigma` per real and
/// imaginary component) on the mask support only.
pub fn add_noise(g: &KSpaceData, mask: &SamplingMask, sigma: f64, seed: u64) -> Result<KSpaceData> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::invalid(format!(
            "noise standard deviation must be >= 0, got {sigma}"
        )));
    }
    let mut out = g.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for plane in &mut out.planes {
        if plane.dim() != (mask.size(), mask.size()) {
            return Err(Error::shape("add_noise", mask.size(), plane.nrows()));
        }
        for (value, &sampled) in plane.iter_mut().zip(mask.values().iter()) {
            if sampled {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *value += Complex64::new(sigma * re, sigma * im);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot_re, norm, norm_sq};
    use rand::Rng;

    fn rand_image(n: usize, rng: &mut ChaCha8Rng) -> ComplexImage {
        Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn rand_mask(n: usize, rng: &mut ChaCha8Rng) -> SamplingMask {
        SamplingMask::new(Array2::from_shape_fn((n, n), |_| rng.random_bool(0.3)))
    }

    #[test]
    fn zero_image_gives_zero_data() {
        let n = 8;
        let mask = SamplingMask::full(n);
        let coils = vec![Array2::from_elem((n, n), Complex64::new(1.0, 0.5)); 2];
        let g = forward(&Array2::zeros((n, n)), &coils, &mask).unwrap();
        assert!(g.planes.iter().all(|p| p.iter().all(|v| v.norm() == 0.0)));
        assert!(adjoint(&KSpaceData::zeros(2, n), &coils, &mask)
            .unwrap()
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn full_mask_unit_coil_is_unitary() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = rand_image(n, &mut rng);
        let acq = Acquisition::new(SamplingMask::full(n));
        let ones = vec![Array2::from_elem((n, n), Complex64::new(1.0, 0.0))];
        let g = acq.forward(&u, &ones).unwrap();
        let back = acq.fft().inverse(&g.planes[0]).unwrap();
        assert!(norm(&(&back - &u)) <= 1e-12 * norm(&u));
        let adj = acq.adjoint(&g, &ones).unwrap();
        assert!(norm(&(&adj - &u)) <= 1e-12 * norm(&u));
    }

    #[test]
    fn single_pixel_roundtrip() {
        let n = 9;
        let mut u = Array2::zeros((n, n));
        u[[3, 7]] = Complex64::new(1.0, 0.0);
        let ones = vec![Array2::from_elem((n, n), Complex64::new(1.0, 0.0))];
        let mask = SamplingMask::full(n);
        let back = adjoint(&forward(&u, &ones, &mask).unwrap(), &ones, &mask).unwrap();
        assert!(norm(&(&back - &u)) < 1e-12);
    }

    #[test]
    fn forward_energy_bounded_by_coil_images() {
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let u = rand_image(n, &mut rng);
            let coils: Vec<_> = (0..3).map(|_| rand_image(n, &mut rng)).collect();
            let mask = rand_mask(n, &mut rng);
            let g = forward(&u, &coils, &mask).unwrap();
            let lhs: f64 = g.planes.iter().map(norm_sq).sum();
            let rhs: f64 = coils.iter().map(|c| norm_sq(&(&u * c))).sum();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn adjoint_identity() {
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let acq = Acquisition::new(rand_mask(n, &mut rng));
        for _ in 0..20 {
            let u = rand_image(n, &mut rng);
            let coils: Vec<_> = (0..3).map(|_| rand_image(n, &mut rng)).collect();
            let g = KSpaceData {
                planes: (0..3).map(|_| rand_image(n, &mut rng)).collect(),
            };
            let lhs: f64 = acq
                .forward(&u, &coils)
                .unwrap()
                .planes
                .iter()
                .zip(&g.planes)
                .map(|(a, b)| dot_re(a, b))
                .sum();
            let rhs = dot_re(&u, &acq.adjoint(&g, &coils).unwrap());
            let scale = norm(&u) * g.planes.iter().map(norm).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mask = SamplingMask::full(8);
        let coils = vec![Array2::zeros((8, 8))];
        assert!(forward(&Array2::zeros((7, 7)), &coils, &mask).is_err());
        assert!(forward(&Array2::zeros((8, 8)), &[Array2::zeros((8, 9))], &mask).is_err());
        assert!(adjoint(&KSpaceData::zeros(2, 8), &coils, &mask).is_err());
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mask = rand_mask(8, &mut rng);
        let g = KSpaceData {
            planes: vec![rand_image(8, &mut rng)],
        };
        assert_eq!(add_noise(&g, &mask, 0.0, 1).unwrap(), g);
        assert!(add_noise(&g, &mask, -1.0, 1).is_err());
    }

    #[test]
    fn noise_only_on_support_and_deterministic() {
        let n = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mask = rand_mask(n, &mut rng);
        let g = KSpaceData::zeros(2, n);
        let a = add_noise(&g, &mask, 0.1, 42).unwrap();
        let b = add_noise(&g, &mask, 0.1, 42).unwrap();
        assert_eq!(a, b);
        for plane in &a.planes {
            for (v, &s) in plane.iter().zip(mask.values().iter()) {
                assert_eq!(s, v.norm() > 0.0);
            }
        }
    }

    #[test]
    fn noise_statistics_at_spiral_scale() {
        let n = 190;
        let mask = make_spiral_mask(n, 0.25, 19, 1).unwrap();
        let g = KSpaceData::zeros(1, n);
        let noisy = add_noise(&g, &mask, 0.05, 3).unwrap();
        let samples: Vec<f64> = noisy.planes[0]
            .iter()
            .zip(mask.values().iter())
            .filter(|(_, &s)| s)
            .flat_map(|(v, _)| [v.re, v.im])
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        assert!((var.sqrt() - 0.05).abs() <= 0.05 * 0.05);
    }
}
