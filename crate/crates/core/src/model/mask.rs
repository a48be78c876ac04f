use std::collections::VecDeque;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ComplexImage;

/// Binary k-space sampling pattern in DFT index order (DC at `[0, 0]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    values: Array2<bool>,
}

impl SamplingMask {
    /// Panics if `values` is not square.
    pub fn new(values: Array2<bool>) -> Self {
        assert_eq!(values.nrows(), values.ncols(), "sampling mask must be square");
        SamplingMask { values }
    }

    pub fn full(n: usize) -> Self {
        SamplingMask {
            values: Array2::from_elem((n, n), true),
        }
    }

    /// Build from a display-order mask (DC in the middle).
    pub fn from_centered(values: Array2<bool>) -> Self {
        SamplingMask::new(ifftshift(&values))
    }

    /// Display-order copy (DC in the middle).
    pub fn to_centered(&self) -> Array2<bool> {
        fftshift(&self.values)
    }

    pub fn values(&self) -> &Array2<bool> {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.values.len() as f64
    }

    /// Zero every entry off the support, in place.
    pub fn apply(&self, kspace: &mut ComplexImage) {
        kspace.zip_mut_with(&self.values, |v, &keep| {
            if !keep {
                *v = Complex64::new(0.0, 0.0);
            }
        });
    }
}

/// Move index 0 to the middle (`⌊N/2⌋`).
pub fn fftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((r, c), |(i, j)| a[[(i + r - r / 2) % r, (j + c - c / 2) % c]].clone())
}

/// Inverse of [`fftshift`].
pub fn ifftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((r, c), |(i, j)| a[[(i + r / 2) % r, (j + c / 2) % c]].clone())
}

/// Archimedean spiral through the k-space centre, widened until exactly
/// `round(fraction·N²)` samples are selected.
///
/// The spiral (random starting angle from `seed`) is rasterised, then grown
/// by breadth-first 4-neighbour dilation. Within the dilation layer that
/// crosses the target, pixels closer to the centre are taken first; exact
/// radius ties are broken by a seeded shuffle.
pub fn make_spiral_mask(n: usize, fraction: f64, turns: usize, seed: u64) -> Result<SamplingMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "sampling fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("mask size must be positive"));
    }
    let total = n * n;
    let target = ((fraction * total as f64).round() as usize).clamp(1, total);
    if target == total {
        return Ok(SamplingMask::full(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let tiebreak: Vec<u64> = (0..total).map(|_| rng.random()).collect();

    let centre = (n / 2) as f64;
    let r_max = centre * std::f64::consts::SQRT_2;
    let turns = turns.max(1) as f64;
    // enough samples that consecutive points are well under a pixel apart
    let samples = (8.0 * std::f64::consts::PI * r_max * turns).ceil() as usize + 2;

    const UNSET: usize = usize::MAX;
    let mut layer = vec![UNSET; total];
    let mut queue = VecDeque::new();
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        let r = r_max * t;
        let angle = std::f64::consts::TAU * turns * t + phase;
        let i = (centre + r * angle.cos()).round();
        let j = (centre + r * angle.sin()).round();
        if i < 0.0 || j < 0.0 || i >= n as f64 || j >= n as f64 {
            continue;
        }
        let p = i as usize * n + j as usize;
        if layer[p] == UNSET {
            layer[p] = 0;
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        let (i, j) = (p / n, p % n);
        let next = layer[p] + 1;
        let mut visit = |q: usize| {
            if layer[q] == UNSET {
                layer[q] = next;
                queue.push_back(q);
            }
        };
        if i > 0 {
            visit(p - n);
        }
        if i + 1 < n {
            visit(p + n);
        }
        if j > 0 {
            visit(p - 1);
        }
        if j + 1 < n {
            visit(p + 1);
        }
    }

    let radius_sq = |p: usize| {
        let di = (p / n) as f64 - centre;
        let dj = (p % n) as f64 - centre;
        di * di + dj * dj
    };
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| {
        layer[a]
            .cmp(&layer[b])
            .then(radius_sq(a).total_cmp(&radius_sq(b)))
            .then(tiebreak[a].cmp(&tiebreak[b]))
    });
    let mut centred = Array2::from_elem((n, n), false);
    for &p in &order[..target] {
        centred[[p / n, p % n]] = true;
    }
    Ok(SamplingMask::from_centered(centred))
}
