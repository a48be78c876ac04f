//! Small helpers over complex arrays under the real inner product `Re⟨x, y⟩`.

use ndarray::{ArrayBase, Data, Dimension};
use num_complex::Complex64;

/// `Re Σ conj(xᵢ)·yᵢ`.
pub fn dot_re<S1, S2, D>(x: &ArrayBase<S1, D>, y: &ArrayBase<S2, D>) -> f64
where
    S1: Data<Elem = Complex64>,
    S2: Data<Elem = Complex64>,
    D: Dimension,
{
    x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn norm_sq<S, D>(x: &ArrayBase<S, D>) -> f64
where
    S: Data<Elem = Complex64>,
    D: Dimension,
{
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn norm<S, D>(x: &ArrayBase<S, D>) -> f64
where
    S: Data<Elem = Complex64>,
    D: Dimension,
{
    norm_sq(x).sqrt()
}

pub fn all_finite<S, D>(x: &ArrayBase<S, D>) -> bool
where
    S: Data<Elem = Complex64>,
    D: Dimension,
{
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// A tuple of complex arrays treated as one vector in a real Hilbert space.
/// Block order and lengths define the structure; two values are compatible
/// when they expose the same number of blocks with matching lengths.
pub trait BlockVector {
    fn blocks(&self) -> Vec<&[Complex64]>;
    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]>;
}

fn pairs<'a, V: BlockVector>(x: &'a V, y: &'a V) -> impl Iterator<Item = (&'a Complex64, &'a Complex64)> {
    let (bx, by) = (x.blocks(), y.blocks());
    assert_eq!(bx.len(), by.len(), "block count mismatch");
    bx.into_iter().zip(by).flat_map(|(a, b)| {
        assert_eq!(a.len(), b.len(), "block length mismatch");
        a.iter().zip(b.iter())
    })
}

/// `Re⟨x, y⟩` summed over all blocks.
pub fn inner<V: BlockVector>(x: &V, y: &V) -> f64 {
    pairs(x, y).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn block_norm<V: BlockVector>(x: &V) -> f64 {
    x.blocks()
        .iter()
        .flat_map(|b| b.iter())
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `y ← y + α·x`.
pub fn axpy<V: BlockVector>(y: &mut V, alpha: f64, x: &V) {
    let bx = x.blocks();
    let by = y.blocks_mut();
    assert_eq!(bx.len(), by.len(), "block count mismatch");
    for (dst, src) in by.into_iter().zip(bx) {
        assert_eq!(dst.len(), src.len(), "block length mismatch");
        for (d, s) in dst.iter_mut().zip(src) {
            *d += s * alpha;
        }
    }
}

pub fn scale<V: BlockVector>(x: &mut V, alpha: f64) {
    for b in x.blocks_mut() {
        for v in b.iter_mut() {
            *v *= alpha;
        }
    }
}

/// `x − y` as a new value.
pub fn difference<V: BlockVector + Clone>(x: &V, y: &V) -> V {
    let mut out = x.clone();
    axpy(&mut out, -1.0, y);
    out
}

/// Index of the first block holding a NaN or infinity.
pub fn first_non_finite<V: BlockVector>(x: &V) -> Option<usize> {
    x.blocks()
        .iter()
        .position(|b| b.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())))
}

pub(crate) fn slice<D: Dimension>(a: &ndarray::Array<Complex64, D>) -> &[Complex64] {
    a.as_slice().expect("arrays are kept in standard layout")
}

pub(crate) fn slice_mut<D: Dimension>(a: &mut ndarray::Array<Complex64, D>) -> &mut [Complex64] {
    a.as_slice_mut().expect("arrays are kept in standard layout")
}

impl BlockVector for ndarray::Array2<Complex64> {
    fn blocks(&self) -> Vec<&[Complex64]> {
        vec![slice(self)]
    }

    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]> {
        vec![slice_mut(self)]
    }
}

/// Power iteration on a self-adjoint positive semi-definite map `A`.
///
/// Returns the sequence `√(Re⟨xₖ, A xₖ⟩ / ‖xₖ‖²)`, one entry per iteration;
/// for `A = J*J` this is a nondecreasing lower estimate of `‖J‖`.
pub fn power_iteration<V, F>(start: V, iters: usize, mut normal: F) -> crate::Result<Vec<f64>>
where
    V: BlockVector + Clone,
    F: FnMut(&V) -> crate::Result<V>,
{
    let mut x = start;
    let mut trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        let n = block_norm(&x);
        if n == 0.0 {
            trace.push(0.0);
            break;
        }
        scale(&mut x, 1.0 / n);
        let ax = normal(&x)?;
        trace.push(inner(&x, &ax).max(0.0).sqrt());
        x = ax;
    }
    Ok(trace)
}
