use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::grid::{synthesize_coils, BasisTable};
use crate::sphfn::BasisIndex;
use crate::{ComplexImage, RealImage};

/// Magnitude ratio between consecutive orders of the synthetic coefficients.
pub const ORDER_DECAY: f64 = 0.3;

// Pixels whose sum-of-squares falls below this fraction of the peak trigger a redraw.
const MIN_SOS_RATIO: f64 = 1e-3;
const MAX_DRAWS: u64 = 64;

/// `Σ_j |c_j|²` per pixel.
pub fn sum_of_squares(coils: &[ComplexImage]) -> RealImage {
    let n = coils.first().map_or(0, |c| c.nrows());
    let mut out = RealImage::zeros((n, n));
    for c in coils {
        out.zip_mut_with(c, |o, v| *o += v.norm_sqr());
    }
    out
}

/// Random smooth coil maps `c_j = F·a^{(j)}`. Coefficient magnitudes are
/// uniform in `[0.5, 1]` times `0.3ⁿ` for order `n`, with uniform phases;
/// the whole set is then scaled so the peak root-sum-of-squares is 1.
///
/// Draws are repeated (advancing the stream) until the sum-of-squares is
/// at least `1e-3` of its peak on every pixel.
pub fn make_synthetic_coils(
    basis: &BasisTable,
    coils: usize,
    seed: u64,
) -> Result<(Vec<ComplexImage>, CoefficientVector)> {
    if coils == 0 {
        return Err(Error::invalid("at least one coil is required"));
    }
    let per_coil = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let values = Array1::from_shape_fn(coils * per_coil, |k| {
            let order = BasisIndex::from_linear(k % per_coil + 1).expect("positive index").n;
            let magnitude = rng.random_range(0.5..1.0) * ORDER_DECAY.powi(order as i32);
            Complex64::from_polar(magnitude, rng.random_range(0.0..std::f64::consts::TAU))
        });
        let mut a = CoefficientVector::from_values(per_coil, values)?;
        let maps = synthesize_coils(basis, &a)?;
        let sos = sum_of_squares(&maps);
        let peak = sos.iter().cloned().fold(0.0, f64::max);
        let floor = sos.iter().cloned().fold(f64::INFINITY, f64::min);
        if peak > 0.0 && floor >= MIN_SOS_RATIO * peak {
            let scale = 1.0 / peak.sqrt();
            a.values_mut().mapv_inplace(|v| v * scale);
            let maps = synthesize_coils(basis, &a)?;
            return Ok((maps, a));
        }
    }
    Err(Error::invalid(format!(
        "could not draw coil maps with full coverage in {MAX_DRAWS} attempts"
    )))
}

/// `c_j + γ·f_1⁺` for every coil.
pub fn perturb_coils(coils: &[ComplexImage], basis: &BasisTable, gamma: f64) -> Result<Vec<ComplexImage>> {
    let f1 = basis.column_image(1);
    coils
        .iter()
        .map(|c| {
            if c.dim() != f1.dim() {
                return Err(Error::shape(
                    "perturb_coils",
                    format!("{:?}", f1.dim()),
                    format!("{:?}", c.dim()),
                ));
            }
            Ok(c + &f1.mapv(|v| v * gamma))
        })
        .collect()
}
