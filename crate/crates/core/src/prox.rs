//! Closed-form resolvents `(I + τ∂F)⁻¹` of the separable objective blocks.

use ndarray::Zip;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::linalg::block_norm;
use crate::model::Acquisition;
use crate::operators::Gradient;
use crate::ComplexImage;

/// How a gradient field is shrunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shrinkage {
    /// Block soft-thresholding of each pixel's `(p₁, p₂)` pair.
    #[default]
    Pixelwise,
    /// One radial factor computed from the norm of the whole field.
    Global,
}

/// Weights of the objective `Σ_j α_j/2‖P·DFT(q_j) − g_j‖² + α₀·TV + α·‖a‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationParams {
    /// Per-coil data weights `α_j`.
    pub alpha_j: Vec<f64>,
    /// TV weight `α₀`.
    pub alpha0: f64,
    /// Coefficient sparsity weight `α` (proposed model).
    pub alpha: f64,
    /// Coil-gradient weight (baseline model).
    pub coil_smoothness: f64,
    pub tv_shrinkage: Shrinkage,
    pub coil_shrinkage: Shrinkage,
}

impl RegularizationParams {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .alpha_j
            .iter()
            .chain([&self.alpha0, &self.alpha, &self.coil_smoothness]);
        if self.alpha_j.is_empty() || all.clone().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("regularization weights must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Resolvent of `x ↦ α_j/2‖P·DFT(x) − g_j‖²`:
/// `IDFT((DFT x + α_jτ·P g_j) / (1 + α_jτ·P))`.
pub fn prox_data(
    acq: &Acquisition,
    x: &ComplexImage,
    g: &ComplexImage,
    alpha_j: f64,
    tau: f64,
) -> Result<ComplexImage> {
    if g.dim() != x.dim() {
        return Err(Error::shape(
            "prox_data",
            format!("{:?}", x.dim()),
            format!("{:?}", g.dim()),
        ));
    }
    let t = alpha_j * tau;
    let mut k = acq.fft().forward(x)?;
    Zip::from(&mut k)
        .and(g)
        .and(acq.mask().values())
        .for_each(|kv, gv, &on| {
            if on {
                *kv = (*kv + gv * t) / (1.0 + t);
            }
        });
    acq.fft().inverse(&k)
}

fn shrink_factor(r: f64, threshold: f64) -> f64 {
    if r > threshold {
        (r - threshold) / r
    } else {
        0.0
    }
}

/// Pixelwise isotropic shrinkage with threshold `α₀τ`.
pub fn prox_tv_isotropic(p: &Gradient, alpha0: f64, tau: f64) -> Gradient {
    let threshold = alpha0 * tau;
    let mut out = p.clone();
    Zip::from(&mut out.dx).and(&mut out.dy).for_each(|a, b| {
        let f = shrink_factor((a.norm_sqr() + b.norm_sqr()).sqrt(), threshold);
        *a *= f;
        *b *= f;
    });
    out
}

/// Radial shrinkage of the whole field: `p·max(‖p‖ − ατ, 0)/‖p‖`.
pub fn prox_global_norm(p: &Gradient, weight: f64, tau: f64) -> Gradient {
    let f = shrink_factor(block_norm(p), weight * tau);
    Gradient {
        dx: p.dx.mapv(|v| v * f),
        dy: p.dy.mapv(|v| v * f),
    }
}

/// TV resolvent in the requested shrinkage mode.
pub fn prox_tv(p: &Gradient, alpha0: f64, tau: f64, mode: Shrinkage) -> Gradient {
    match mode {
        Shrinkage::Pixelwise => prox_tv_isotropic(p, alpha0, tau),
        Shrinkage::Global => prox_global_norm(p, alpha0, tau),
    }
}

/// Complex soft-thresholding `aᵢ·max(|aᵢ| − ατ, 0)/|aᵢ|`.
pub fn prox_l1_coeff(a: &CoefficientVector, alpha: f64, tau: f64) -> CoefficientVector {
    let mut out = a.clone();
    out.values_mut().mapv_inplace(|v| soft_threshold(v, alpha * tau));
    out
}

pub fn soft_threshold(v: Complex64, threshold: f64) -> Complex64 {
    v * shrink_factor(v.norm(), threshold)
}

/// Resolvent of the baseline coil penalty `α‖∇c_j‖`.
pub fn prox_coil_gradient(p: &Gradient, weight: f64, tau: f64, mode: Shrinkage) -> Gradient {
    match mode {
        Shrinkage::Global => prox_global_norm(p, weight, tau),
        Shrinkage::Pixelwise => prox_tv_isotropic(p, weight, tau),
    }
}
