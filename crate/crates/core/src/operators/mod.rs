//! The splitting operator `B(v) = (G(v), ∇u, ·)` for both coil models, its
//! linearisation and adjoint under the real inner product `Re⟨·,·⟩`.

mod gradient;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::grid::{synthesize_coils, BasisTable};
use crate::linalg::{power_iteration, slice, slice_mut, BlockVector};
use crate::ComplexImage;

pub use gradient::{divergence, gradient, gradient_adjoint, Gradient};

/// Coil unknowns: basis coefficients (proposed model) or free maps (baseline).
#[derive(Debug, Clone, PartialEq)]
pub enum CoilVariable {
    Coefficients(CoefficientVector),
    Maps(Vec<ComplexImage>),
}

/// `v = (u, a)` or `v = (u, c_1, …, c_J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalVariable {
    pub u: ComplexImage,
    pub coils: CoilVariable,
}

/// Third block of `B(v)`: the coefficients themselves, or the coil gradients.
#[derive(Debug, Clone, PartialEq)]
pub enum CoilSplit {
    Coefficients(CoefficientVector),
    Gradients(Vec<Gradient>),
}

/// Element of the range of `B`: `(data_1..data_J, gradient, coil block)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVariable {
    pub data: Vec<ComplexImage>,
    pub grad: Gradient,
    pub coil: CoilSplit,
}

impl BlockVector for PrimalVariable {
    fn blocks(&self) -> Vec<&[Complex64]> {
        let mut out = vec![slice(&self.u)];
        match &self.coils {
            CoilVariable::Coefficients(a) => out.extend(a.blocks()),
            CoilVariable::Maps(maps) => out.extend(maps.iter().map(slice)),
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]> {
        let mut out = vec![slice_mut(&mut self.u)];
        match &mut self.coils {
            CoilVariable::Coefficients(a) => out.extend(a.blocks_mut()),
            CoilVariable::Maps(maps) => out.extend(maps.iter_mut().map(slice_mut)),
        }
        out
    }
}

impl BlockVector for SplitVariable {
    fn blocks(&self) -> Vec<&[Complex64]> {
        let mut out: Vec<&[Complex64]> = self.data.iter().map(slice).collect();
        out.extend(self.grad.blocks());
        match &self.coil {
            CoilSplit::Coefficients(a) => out.extend(a.blocks()),
            CoilSplit::Gradients(gs) => out.extend(gs.iter().flat_map(|g| g.blocks())),
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [Complex64]> {
        let mut out: Vec<&mut [Complex64]> = self.data.iter_mut().map(slice_mut).collect();
        out.extend(self.grad.blocks_mut());
        match &mut self.coil {
            CoilSplit::Coefficients(a) => out.extend(a.blocks_mut()),
            CoilSplit::Gradients(gs) => out.extend(gs.iter_mut().flat_map(|g| g.blocks_mut())),
        }
        out
    }
}

impl SplitVariable {
    /// Name of block `index` as exposed by [`BlockVector::blocks`].
    pub fn block_name(&self, index: usize) -> String {
        let j = self.data.len();
        match index {
            i if i < j => format!("data[{i}]"),
            i if i == j => "gradient.x".into(),
            i if i == j + 1 => "gradient.y".into(),
            i => match &self.coil {
                CoilSplit::Coefficients(_) => "coefficients".into(),
                CoilSplit::Gradients(_) => {
                    let k = i - j - 2;
                    format!(
                        "coil_gradient[{}].{}",
                        k / 2,
                        if k.is_multiple_of(2) { "x" } else { "y" }
                    )
                }
            },
        }
    }
}

impl PrimalVariable {
    pub fn block_name(&self, index: usize) -> String {
        match (index, &self.coils) {
            (0, _) => "u".into(),
            (_, CoilVariable::Coefficients(_)) => "a".into(),
            (i, CoilVariable::Maps(_)) => format!("c[{}]", i - 1),
        }
    }

    pub fn coefficients(&self) -> Option<&CoefficientVector> {
        match &self.coils {
            CoilVariable::Coefficients(a) => Some(a),
            CoilVariable::Maps(_) => None,
        }
    }
}

/// Which coil model the operator encodes.
#[derive(Debug, Clone, Copy)]
pub enum CoilModel<'a> {
    /// `c_j = F·a^{(j)}` with an ℓ¹ penalty on `a`.
    Spherical(&'a BasisTable),
    /// Free maps `c_j` with a gradient penalty.
    Free,
}

/// `B` for a fixed image size `N`, coil count `J` and coil model.
#[derive(Debug, Clone, Copy)]
pub struct SplittingOperator<'a> {
    model: CoilModel<'a>,
    n: usize,
    coils: usize,
}

impl<'a> SplittingOperator<'a> {
    pub fn new(model: CoilModel<'a>, n: usize, coils: usize) -> Result<Self> {
        if let CoilModel::Spherical(basis) = model {
            if basis.size() != n {
                return Err(Error::shape("splitting operator: basis size", n, basis.size()));
            }
        }
        if coils == 0 {
            return Err(Error::invalid("at least one coil is required"));
        }
        Ok(SplittingOperator { model, n, coils })
    }

    pub fn model(&self) -> CoilModel<'a> {
        self.model
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn coils(&self) -> usize {
        self.coils
    }

    /// `u = 0` with the given coil variable filled with `coil_value`
    /// (every coefficient, or every map pixel).
    pub fn primal_filled(&self, coil_value: Complex64) -> PrimalVariable {
        let n = self.n;
        let coils = match self.model {
            CoilModel::Spherical(basis) => {
                CoilVariable::Coefficients(CoefficientVector::from_elem(self.coils, basis.len(), coil_value))
            }
            CoilModel::Free => CoilVariable::Maps(vec![Array2::from_elem((n, n), coil_value); self.coils]),
        };
        PrimalVariable {
            u: Array2::zeros((n, n)),
            coils,
        }
    }

    pub fn primal_zeros(&self) -> PrimalVariable {
        self.primal_filled(Complex64::new(0.0, 0.0))
    }

    pub fn split_zeros(&self) -> SplitVariable {
        let n = self.n;
        let coil = match self.model {
            CoilModel::Spherical(basis) => CoilSplit::Coefficients(CoefficientVector::zeros(self.coils, basis.len())),
            CoilModel::Free => CoilSplit::Gradients(vec![Gradient::zeros(n); self.coils]),
        };
        SplitVariable {
            data: vec![Array2::zeros((n, n)); self.coils],
            grad: Gradient::zeros(n),
            coil,
        }
    }

    fn check_primal(&self, v: &PrimalVariable) -> Result<()> {
        let n = self.n;
        if v.u.dim() != (n, n) {
            return Err(Error::shape(
                "primal image",
                format!("{n}x{n}"),
                format!("{:?}", v.u.dim()),
            ));
        }
        match (&v.coils, self.model) {
            (CoilVariable::Coefficients(a), CoilModel::Spherical(basis)) => {
                if a.per_coil() != basis.len() || a.coils() != self.coils {
                    return Err(Error::shape(
                        "primal coefficients",
                        format!("{}x{}", self.coils, basis.len()),
                        format!("{}x{}", a.coils(), a.per_coil()),
                    ));
                }
            }
            (CoilVariable::Maps(maps), CoilModel::Free) => {
                if maps.len() != self.coils || maps.iter().any(|c| c.dim() != (n, n)) {
                    return Err(Error::shape(
                        "primal coil maps",
                        format!("{} maps of {n}x{n}", self.coils),
                        maps.len(),
                    ));
                }
            }
            _ => return Err(Error::invalid("primal variable does not match the coil model")),
        }
        Ok(())
    }

    fn check_split(&self, w: &SplitVariable) -> Result<()> {
        let reference = self.split_zeros();
        let (a, b) = (reference.blocks(), w.blocks());
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.len() != y.len()) {
            return Err(Error::shape(
                "split variable",
                format!("{} blocks", a.len()),
                format!("{} blocks", b.len()),
            ));
        }
        Ok(())
    }

    /// Coil maps `c_j(v)`.
    pub fn coil_maps(&self, v: &PrimalVariable) -> Result<Vec<ComplexImage>> {
        self.check_primal(v)?;
        match (&v.coils, self.model) {
            (CoilVariable::Coefficients(a), CoilModel::Spherical(basis)) => synthesize_coils(basis, a),
            (CoilVariable::Maps(maps), CoilModel::Free) => Ok(maps.clone()),
            _ => unreachable!("checked above"),
        }
    }

    /// `B(v)`.
    pub fn apply(&self, v: &PrimalVariable) -> Result<SplitVariable> {
        let maps = self.coil_maps(v)?;
        Ok(self.apply_with_maps(v, &maps))
    }

    /// `B(v)` reusing already synthesised coil maps.
    pub(crate) fn apply_with_maps(&self, v: &PrimalVariable, maps: &[ComplexImage]) -> SplitVariable {
        let data = maps.iter().map(|c| &v.u * c).collect();
        let coil = match &v.coils {
            CoilVariable::Coefficients(a) => CoilSplit::Coefficients(a.clone()),
            CoilVariable::Maps(maps) => CoilSplit::Gradients(maps.iter().map(gradient).collect()),
        };
        SplitVariable {
            data,
            grad: gradient(&v.u),
            coil,
        }
    }

    /// Freeze the derivative of `B` at `v0`.
    pub fn linearize(&self, v0: &PrimalVariable) -> Result<Linearization<'a>> {
        let maps = self.coil_maps(v0)?;
        Ok(Linearization {
            op: *self,
            u0: v0.u.clone(),
            maps,
        })
    }

    /// Directional derivative `B'(v0)·dv`.
    pub fn jacobian_apply(&self, v0: &PrimalVariable, dv: &PrimalVariable) -> Result<SplitVariable> {
        self.linearize(v0)?.apply(dv)
    }

    /// `B'(v0)*·w`.
    pub fn jacobian_adjoint_apply(&self, v0: &PrimalVariable, w: &SplitVariable) -> Result<PrimalVariable> {
        self.linearize(v0)?.adjoint(w)
    }

    /// Power-iteration estimate of `‖B'(v0)‖` from a seeded random start.
    pub fn operator_norm_estimate(&self, v0: &PrimalVariable, iters: usize, seed: u64) -> Result<f64> {
        let lin = self.linearize(v0)?;
        let start = self.random_primal(seed);
        lin.norm_estimate(start, iters)
    }

    /// Primal variable with independent uniform entries in the unit square.
    pub fn random_primal(&self, seed: u64) -> PrimalVariable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = self.primal_zeros();
        for block in v.blocks_mut() {
            for x in block.iter_mut() {
                *x = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        v
    }
}

/// `B'(v0)` with the coil maps at `v0` cached.
#[derive(Debug, Clone)]
pub struct Linearization<'a> {
    op: SplittingOperator<'a>,
    u0: ComplexImage,
    maps: Vec<ComplexImage>,
}

impl Linearization<'_> {
    /// Coil maps `c_j(v0)`.
    pub fn maps(&self) -> &[ComplexImage] {
        &self.maps
    }

    pub fn apply(&self, dv: &PrimalVariable) -> Result<SplitVariable> {
        let op = &self.op;
        op.check_primal(dv)?;
        let dmaps = op.coil_maps(dv)?;
        let data = self
            .maps
            .iter()
            .zip(&dmaps)
            .map(|(c, dc)| &dv.u * c + &self.u0 * dc)
            .collect();
        let coil = match &dv.coils {
            CoilVariable::Coefficients(da) => CoilSplit::Coefficients(da.clone()),
            CoilVariable::Maps(dc) => CoilSplit::Gradients(dc.iter().map(gradient).collect()),
        };
        Ok(SplitVariable {
            data,
            grad: gradient(&dv.u),
            coil,
        })
    }

    pub fn adjoint(&self, w: &SplitVariable) -> Result<PrimalVariable> {
        let op = &self.op;
        op.check_split(w)?;
        let mut u = gradient_adjoint(&w.grad);
        for (c, wj) in self.maps.iter().zip(&w.data) {
            Zip::from(&mut u).and(c).and(wj).for_each(|o, c, w| *o += c.conj() * w);
        }
        let u0_conj = self.u0.mapv(|v| v.conj());
        let coils = match (&w.coil, op.model) {
            (CoilSplit::Coefficients(wa), CoilModel::Spherical(basis)) => {
                let mut a = wa.clone();
                for (j, wj) in w.data.iter().enumerate() {
                    let back = basis.analyze(&(&u0_conj * wj))?;
                    a.coil_mut(j).zip_mut_with(&back, |o, v| *o += v);
                }
                CoilVariable::Coefficients(a)
            }
            (CoilSplit::Gradients(wg), CoilModel::Free) => CoilVariable::Maps(
                w.data
                    .iter()
                    .zip(wg)
                    .map(|(wj, gj)| &u0_conj * wj + gradient_adjoint(gj))
                    .collect(),
            ),
            _ => return Err(Error::invalid("split variable does not match the coil model")),
        };
        Ok(PrimalVariable { u, coils })
    }

    /// `B'(v0)* B'(v0) x`.
    pub fn normal(&self, x: &PrimalVariable) -> Result<PrimalVariable> {
        self.adjoint(&self.apply(x)?)
    }

    /// Power iteration on `B'*B'`; returns the final (largest) estimate of `‖B'‖`.
    pub fn norm_estimate(&self, start: PrimalVariable, iters: usize) -> Result<f64> {
        Ok(self.norm_trace(start, iters)?.last().copied().unwrap_or(0.0))
    }

    /// Every intermediate estimate of [`Linearization::norm_estimate`].
    pub fn norm_trace(&self, start: PrimalVariable, iters: usize) -> Result<Vec<f64>> {
        if iters == 0 {
            return Err(Error::invalid("power iteration needs at least one step"));
        }
        power_iteration(start, iters, |x| self.normal(x))
    }
}
