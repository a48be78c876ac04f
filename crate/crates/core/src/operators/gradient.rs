use ndarray::{s, Array2, Zip};
use num_complex::Complex64;

use crate::linalg::{slice, slice_mut, BlockVector};
use crate::ComplexImage;

/// Forward-difference gradient field `(∇₁u, ∇₂u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dx: ComplexImage,
    pub dy: ComplexImage,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Gradient {
            dx: Array2::zeros((n, n)),
            dy: Array2::zeros((n, n)),
        }
    }

    pub fn size(&self) -> usize {
        self.dx.nrows()
    }

    /// Pixelwise magnitude `√(|p₁|² + |p₂|²)`.
    pub fn magnitude(&self) -> Array2<f64> {
        Zip::from(&self.dx)
            .and(&self.dy)
            .map_collect(|a, b| (a.norm_sqr() + b.norm_sqr()).sqrt())
    }
}

impl BlockVector for Gradient {
    fn blocks(&self) -> Vec<&[Complex64]> {
        vec![slice(&self.dx), slice(&self.dy)]
    }

    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]> {
        vec![slice_mut(&mut self.dx), slice_mut(&mut self.dy)]
    }
}

/// `(∇₁u)_{i,j} = u_{i+1,j} − u_{i,j}` for `i < N−1`, 0 on the last row;
/// likewise along columns for `∇₂`.
pub fn gradient(u: &ComplexImage) -> Gradient {
    let (r, c) = u.dim();
    let mut dx = Array2::zeros((r, c));
    let mut dy = Array2::zeros((r, c));
    if r > 1 {
        dx.slice_mut(s![..r - 1, ..])
            .assign(&(&u.slice(s![1.., ..]) - &u.slice(s![..r - 1, ..])));
    }
    if c > 1 {
        dy.slice_mut(s![.., ..c - 1])
            .assign(&(&u.slice(s![.., 1..]) - &u.slice(s![.., ..c - 1])));
    }
    Gradient { dx, dy }
}

/// `∇*p = −div p`, the exact adjoint of [`gradient`].
pub fn gradient_adjoint(p: &Gradient) -> ComplexImage {
    let (r, c) = p.dx.dim();
    let mut out = Array2::zeros((r, c));
    if r > 1 {
        let dx = p.dx.slice(s![..r - 1, ..]);
        out.slice_mut(s![..r - 1, ..]).zip_mut_with(&dx, |o, v| *o -= v);
        out.slice_mut(s![1.., ..]).zip_mut_with(&dx, |o, v| *o += v);
    }
    if c > 1 {
        let dy = p.dy.slice(s![.., ..c - 1]);
        out.slice_mut(s![.., ..c - 1]).zip_mut_with(&dy, |o, v| *o -= v);
        out.slice_mut(s![.., 1..]).zip_mut_with(&dy, |o, v| *o += v);
    }
    out
}

pub fn divergence(p: &Gradient) -> ComplexImage {
    -gradient_adjoint(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot_re, inner};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, n: usize) -> ComplexImage {
        Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn constant_has_zero_gradient() {
        let u = Array2::from_elem((5, 5), Complex64::new(2.0, -1.0));
        let g = gradient(&u);
        assert!(g.dx.iter().chain(g.dy.iter()).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ramp() {
        let u = Array2::from_shape_fn((4, 4), |(i, _)| Complex64::new(i as f64, 0.0));
        let g = gradient(&u);
        assert_eq!(g.dx[[0, 0]], Complex64::new(1.0, 0.0));
        assert_eq!(g.dx[[3, 0]], Complex64::new(0.0, 0.0));
        assert!(g.dy.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 7, 16] {
            let u = random_image(&mut rng, n);
            let p = Gradient {
                dx: random_image(&mut rng, n),
                dy: random_image(&mut rng, n),
            };
            let lhs = inner(&gradient(&u), &p);
            let rhs = dot_re(&u, &gradient_adjoint(&p));
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{n}: {lhs} vs {rhs}");
        }
    }
}
