use ndarray::{Array1, ArrayView1, ArrayViewMut1};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphfn::BasisIndex;

/// Basis coefficients for `J` coils, stored coil-major:
/// `(a_1^{(1)}, …, a_L^{(1)}, a_1^{(2)}, …, a_L^{(J)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    per_coil: usize,
    values: Array1<Complex64>,
}

impl CoefficientVector {
    pub fn zeros(coils: usize, per_coil: usize) -> Self {
        CoefficientVector {
            per_coil,
            values: Array1::zeros(coils * per_coil),
        }
    }

    pub fn from_elem(coils: usize, per_coil: usize, value: Complex64) -> Self {
        CoefficientVector {
            per_coil,
            values: Array1::from_elem(coils * per_coil, value),
        }
    }

    pub fn from_values(per_coil: usize, values: Array1<Complex64>) -> Result<Self> {
        if per_coil == 0 || !values.len().is_multiple_of(per_coil) {
            return Err(Error::shape(
                "coefficient vector",
                format!("a multiple of {per_coil}"),
                values.len(),
            ));
        }
        Ok(CoefficientVector { per_coil, values })
    }

    pub fn coils(&self) -> usize {
        self.values.len() / self.per_coil
    }

    pub fn per_coil(&self) -> usize {
        self.per_coil
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array1<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<Complex64> {
        &mut self.values
    }

    pub fn coil(&self, j: usize) -> ArrayView1<'_, Complex64> {
        self.values
            .slice(ndarray::s![j * self.per_coil..(j + 1) * self.per_coil])
    }

    pub fn coil_mut(&mut self, j: usize) -> ArrayViewMut1<'_, Complex64> {
        let per = self.per_coil;
        self.values.slice_mut(ndarray::s![j * per..(j + 1) * per])
    }

    /// `a_l^{(j)}` with 1-based `l`.
    pub fn get(&self, coil: usize, l: usize) -> Complex64 {
        self.values[coil * self.per_coil + l - 1]
    }

    /// Mean `|a|` over the coefficients of order `n` for one coil.
    pub fn order_mean_magnitude(&self, coil: usize, n: usize) -> f64 {
        let first = n * n;
        let last = (n + 1) * (n + 1);
        let row = self.coil(coil);
        row.slice(ndarray::s![first..last])
            .iter()
            .map(|v| v.norm())
            .sum::<f64>()
            / (last - first) as f64
    }

    /// Highest order `ñ` represented, if `per_coil` is a perfect square.
    pub fn max_order(&self) -> Option<usize> {
        let n = (self.per_coil as f64).sqrt().round() as usize;
        (BasisIndex::count(n.saturating_sub(1)) == self.per_coil && n >= 1).then(|| n - 1)
    }
}

impl crate::linalg::BlockVector for CoefficientVector {
    fn blocks(&self) -> Vec<&[Complex64]> {
        vec![crate::linalg::slice(&self.values)]
    }

    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]> {
        vec![crate::linalg::slice_mut(&mut self.values)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn layout_is_coil_major_and_one_based() {
        let a = CoefficientVector::from_values(4, Array1::from_iter((0..8).map(|k| c(k as f64)))).unwrap();
        assert_eq!(a.coils(), 2);
        assert_eq!(a.get(0, 1), c(0.0));
        assert_eq!(a.get(1, 1), c(4.0));
        assert_eq!(a.get(1, 4), c(7.0));
        assert_eq!(a.coil(1).to_vec(), vec![c(4.0), c(5.0), c(6.0), c(7.0)]);
    }

    #[test]
    fn rejects_ragged_lengths() {
        assert!(CoefficientVector::from_values(4, Array1::zeros(6)).is_err());
        assert!(CoefficientVector::from_values(0, Array1::zeros(0)).is_err());
    }

    #[test]
    fn order_statistics() {
        let mut a = CoefficientVector::zeros(1, 9);
        a.values_mut().assign(&Array1::from_iter((1..=9).map(|k| c(k as f64))));
        assert_eq!(a.max_order(), Some(2));
        assert_eq!(a.order_mean_magnitude(0, 0), 1.0);
        assert_eq!(a.order_mean_magnitude(0, 1), 3.0);
        assert_eq!(a.order_mean_magnitude(0, 2), 7.0);
        assert_eq!(CoefficientVector::zeros(2, 5).max_order(), None);
    }
}
