//! Cartesian image grid, its spherical-coordinate view, and the sampled
//! basis matrix `F` whose column `l` holds `f_l⁺` over all pixels.
//!
//! Pixels are flattened column-major: pixel `(i, j)` is row `i + N·j` of `F`,
//! so the first index (along x) runs fastest.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::sphfn::{basis_functions_at, BasisIndex, WaveNumber, MAX_ORDER};
use crate::ComplexImage;

/// Square slice `z = z0` of a Cartesian grid. Image index `[i, j]` sits at
/// `(x_i, y_j, z0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    x: Vec<f64>,
    y: Vec<f64>,
    z0: f64,
}

impl ImageGrid {
    /// `x_i = y_i = 2·step·i/N − step` for `i = 1..=N`, so the grid spans
    /// `(−step, step]`. With `step = 10` this is the usual 20-unit field of view.
    pub fn centered(n: usize, step: f64, z0: f64) -> Result<Self> {
        let coords: Vec<f64> = (1..=n).map(|i| 2.0 * step * i as f64 / n as f64 - step).collect();
        Self::from_coordinates(coords.clone(), coords, z0)
    }

    /// `x_i = y_i = origin + spacing·i` for `i = 0..N`.
    pub fn affine(n: usize, origin: f64, spacing: f64, z0: f64) -> Result<Self> {
        let coords: Vec<f64> = (0..n).map(|i| origin + spacing * i as f64).collect();
        Self::from_coordinates(coords.clone(), coords, z0)
    }

    pub fn from_coordinates(x: Vec<f64>, y: Vec<f64>, z0: f64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::shape(
                "image grid",
                "equal non-empty axes",
                format!("{} x {}", x.len(), y.len()),
            ));
        }
        if z0 == 0.0 || !z0.is_finite() {
            return Err(Error::invalid("slice height z0 must be finite and non-zero"));
        }
        Ok(ImageGrid { x, y, z0 })
    }

    pub fn size(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }
}

/// `ρ, θ, φ` of every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGridView {
    pub rho: Array2<f64>,
    pub theta: Array2<f64>,
    pub phi: Array2<f64>,
}

impl SphericalGridView {
    pub fn size(&self) -> usize {
        self.rho.nrows()
    }
}

/// `ρ = √(x² + y² + z0²)`, `θ = arccos(z0/ρ)`, `φ = atan2(y, x)`.
pub fn build_spherical_view(grid: &ImageGrid) -> Result<SphericalGridView> {
    if grid.z0 == 0.0 {
        return Err(Error::invalid("slice height z0 must be non-zero"));
    }
    let n = grid.size();
    let z0 = grid.z0;
    let rho = Array2::from_shape_fn((n, n), |(i, j)| {
        (grid.x[i].powi(2) + grid.y[j].powi(2) + z0 * z0).sqrt()
    });
    let theta = rho.mapv(|r| (z0 / r).clamp(-1.0, 1.0).acos());
    let phi = Array2::from_shape_fn((n, n), |(i, j)| grid.y[j].atan2(grid.x[i]));
    Ok(SphericalGridView { rho, theta, phi })
}

/// `N² × L` matrix of sampled basis functions. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    n: usize,
    n_tilde: usize,
    matrix: Array2<Complex64>,
}

#[inline]
pub fn pixel_index(n: usize, i: usize, j: usize) -> usize {
    i + n * j
}

impl BasisTable {
    /// Image side length `N`.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde
    }

    /// Number of basis functions `L = (ñ + 1)²`.
    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// `f_l⁺` as an image, `l` 1-based.
    pub fn column_image(&self, l: usize) -> ComplexImage {
        let n = self.n;
        let col = self.matrix.column(l - 1);
        Array2::from_shape_fn((n, n), |(i, j)| col[pixel_index(n, i, j)])
    }

    /// `Σ_l coeffs_l · f_l⁺` as an image.
    pub fn synthesize(&self, coeffs: ArrayView1<'_, Complex64>) -> Result<ComplexImage> {
        if coeffs.len() != self.len() {
            return Err(Error::shape("basis synthesis", self.len(), coeffs.len()));
        }
        let n = self.n;
        let mut out = Array2::zeros((n, n));
        for j in 0..n {
            for i in 0..n {
                let row = self.matrix.row(pixel_index(n, i, j));
                out[[i, j]] = row.iter().zip(coeffs.iter()).map(|(f, a)| f * a).sum();
            }
        }
        Ok(out)
    }

    /// `Fᴴ · vec(image)`: the adjoint of [`BasisTable::synthesize`].
    pub fn analyze(&self, image: &ComplexImage) -> Result<ndarray::Array1<Complex64>> {
        let n = self.n;
        if image.dim() != (n, n) {
            return Err(Error::shape(
                "basis analysis",
                format!("{n}x{n}"),
                format!("{:?}", image.dim()),
            ));
        }
        let mut out = ndarray::Array1::zeros(self.len());
        for j in 0..n {
            for i in 0..n {
                let w = image[[i, j]];
                let row = self.matrix.row(pixel_index(n, i, j));
                for (acc, f) in out.iter_mut().zip(row.iter()) {
                    *acc += f.conj() * w;
                }
            }
        }
        Ok(out)
    }
}

/// Sample `f_1⁺, …, f_{(ñ+1)²}⁺` over every pixel of the view.
pub fn assemble_basis(view: &SphericalGridView, zeta: WaveNumber, n_tilde: usize) -> Result<BasisTable> {
    if n_tilde > MAX_ORDER {
        return Err(Error::invalid(format!(
            "basis order {n_tilde} exceeds maximum {MAX_ORDER}"
        )));
    }
    let n = view.size();
    let count = BasisIndex::count(n_tilde);
    let mut matrix = Array2::zeros((n * n, count));
    for j in 0..n {
        for i in 0..n {
            let values = basis_functions_at(zeta, view.rho[[i, j]], view.theta[[i, j]], view.phi[[i, j]], n_tilde)?;
            let mut row = matrix.row_mut(pixel_index(n, i, j));
            for (slot, v) in row.iter_mut().zip(values) {
                *slot = v;
            }
        }
    }
    Ok(BasisTable { n, n_tilde, matrix })
}

/// `c_j = F · a^{(j)}` for every coil.
pub fn synthesize_coils(basis: &BasisTable, a: &CoefficientVector) -> Result<Vec<ComplexImage>> {
    if a.per_coil() != basis.len() {
        return Err(Error::shape("coil synthesis", basis.len(), a.per_coil()));
    }
    (0..a.coils()).map(|j| basis.synthesize(a.coil(j))).collect()
}
