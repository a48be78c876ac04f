//! Experiment configuration. Every section has defaults matching the
//! reference experiment (190×190 grid, 8 coils, 25% spiral sampling).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::admm::{SolverConfig, StepRule};
use crate::error::{Error, Result};
use crate::prox::{RegularizationParams, Shrinkage};
use crate::sphfn::{WaveNumber, MAX_ORDER};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub data: DataSection,
    pub model: ModelSection,
    pub regularization: RegularizationSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Image side length `N`.
    pub size: usize,
    /// Half-width of the field of view: `x_i = 2·step·i/N − step`.
    pub step: f64,
    pub z0: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            size: 190,
            step: 10.0,
            z0: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega: f64,
    pub mu: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            omega: 42.58,
            mu: 1.2566e-6,
            sigma: 0.6,
            epsilon: 50.0,
        }
    }
}

impl PhysicsSection {
    pub fn wave_number(&self) -> WaveNumber {
        WaveNumber::from_physics(self.omega, self.mu, self.sigma, self.epsilon)
    }
}

/// How the perturbation weight `gamma` is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaScale {
    /// `c_j + γ·f_1⁺` as given.
    #[default]
    Absolute,
    /// `γ` is a fraction of the mean coil magnitude: the added term has
    /// mean magnitude `γ·mean|c|`.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Master seed; mask, coil and noise streams are derived from it.
    pub seed: u64,
    pub coils: usize,
    /// Highest basis order present in the synthetic ground-truth coils.
    pub truth_order: usize,
    pub mask_fraction: f64,
    pub mask_turns: usize,
    /// Standard deviation per real/imaginary component, absolute units.
    pub noise_sigma: f64,
    pub gamma: f64,
    pub gamma_scale: GammaScale,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phantom_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coil_files: Vec<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            seed: 1,
            coils: 8,
            truth_order: 2,
            mask_fraction: 0.25,
            mask_turns: 19,
            noise_sigma: 0.05,
            gamma: 0.0,
            gamma_scale: GammaScale::Absolute,
            phantom_file: None,
            mask_file: None,
            coil_files: Vec::new(),
        }
    }
}

const MASK_STREAM: u64 = 0x6d61_736b;
const COIL_STREAM: u64 = 0x636f_696c;
const NOISE_STREAM: u64 = 0x6e6f_6973;

impl DataSection {
    pub fn mask_seed(&self) -> u64 {
        self.seed ^ MASK_STREAM
    }

    pub fn coil_seed(&self) -> u64 {
        self.seed ^ COIL_STREAM
    }

    pub fn noise_seed(&self) -> u64 {
        self.seed ^ NOISE_STREAM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Coil maps expanded in spherical basis functions, ℓ¹ on coefficients.
    #[default]
    Proposed,
    /// Free coil maps with a gradient penalty.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Basis order `ñ` used for reconstruction.
    pub order: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::Proposed,
            order: 2,
        }
    }
}

/// A single weight shared by all coils, or one per coil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Uniform(f64),
    PerCoil(Vec<f64>),
}

impl Weights {
    pub fn expand(&self, coils: usize) -> Result<Vec<f64>> {
        match self {
            Weights::Uniform(w) => Ok(vec![*w; coils]),
            Weights::PerCoil(ws) if ws.len() == coils => Ok(ws.clone()),
            Weights::PerCoil(ws) => Err(Error::Config(format!(
                "regularization.alpha_j has {} entries for {coils} coils",
                ws.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationSection {
    pub alpha_j: Weights,
    pub alpha0: f64,
    pub alpha: f64,
    pub coil_smoothness: f64,
    pub tv_shrinkage: Shrinkage,
    pub coil_shrinkage: Shrinkage,
}

impl Default for RegularizationSection {
    fn default() -> Self {
        RegularizationSection {
            alpha_j: Weights::Uniform(0.4018),
            alpha0: 0.0062,
            alpha: 0.2149,
            coil_smoothness: 0.4018,
            tv_shrinkage: Shrinkage::Pixelwise,
            coil_shrinkage: Shrinkage::Global,
        }
    }
}

impl RegularizationSection {
    pub fn params(&self, coils: usize) -> Result<RegularizationParams> {
        let params = RegularizationParams {
            alpha_j: self.alpha_j.expand(coils)?,
            alpha0: self.alpha0,
            alpha: self.alpha,
            coil_smoothness: self.coil_smoothness,
            tv_shrinkage: self.tv_shrinkage,
            coil_shrinkage: self.coil_shrinkage,
        };
        params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepName {
    Adaptive,
}

/// A fixed step length or `"adaptive"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSetting {
    Fixed(f64),
    Named(StepName),
}

impl From<StepSetting> for StepRule {
    fn from(s: StepSetting) -> Self {
        match s {
            StepSetting::Fixed(t) => StepRule::Fixed(t),
            StepSetting::Named(StepName::Adaptive) => StepRule::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tau_v: StepSetting,
    pub tau_q: StepSetting,
    pub delta: f64,
    pub iterations: usize,
    pub log_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub power_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tau_v: StepSetting::Fixed(1.0 / 8.0),
            tau_q: StepSetting::Fixed(23.0),
            delta: 1.0 / 24.0,
            iterations: 1500,
            log_every: 10,
            tolerance: None,
            power_iters: 10,
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            delta: self.delta,
            tau_v: self.tau_v.into(),
            tau_q: self.tau_q.into(),
            max_iters: self.iterations,
            log_every: self.log_every,
            tolerance: self.tolerance,
            power_iters: self.power_iters,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and validate; relative data file paths resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.data.phantom_file.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.data.mask_file.as_mut() {
            resolve(p);
        }
        cfg.data.coil_files.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let g = &self.grid;
        if g.size < 2 {
            return fail(format!("grid.size must be at least 2, got {}", g.size));
        }
        if !(g.step.is_finite() && g.step > 0.0) {
            return fail(format!("grid.step must be positive, got {}", g.step));
        }
        if !(g.z0.is_finite() && g.z0 != 0.0) {
            return fail(format!("grid.z0 must be finite and nonzero, got {}", g.z0));
        }
        let p = &self.physics;
        if [p.omega, p.mu, p.sigma, p.epsilon]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return fail("physics parameters must be finite and non-negative".into());
        }
        let d = &self.data;
        if d.coils == 0 {
            return fail("data.coils must be at least 1".into());
        }
        if !(d.mask_fraction > 0.0 && d.mask_fraction <= 1.0) {
            return fail(format!(
                "data.mask_fraction must lie in (0, 1], got {}",
                d.mask_fraction
            ));
        }
        if !(d.noise_sigma.is_finite() && d.noise_sigma >= 0.0) {
            return fail(format!("data.noise_sigma must be non-negative, got {}", d.noise_sigma));
        }
        if !d.gamma.is_finite() {
            return fail("data.gamma must be finite".into());
        }
        if d.truth_order > MAX_ORDER || self.model.order > MAX_ORDER {
            return fail(format!("basis orders must not exceed {MAX_ORDER}"));
        }
        if !d.coil_files.is_empty() && d.coil_files.len() != d.coils {
            return fail(format!(
                "data.coil_files lists {} files for {} coils",
                d.coil_files.len(),
                d.coils
            ));
        }
        self.regularization.params(d.coils)?;
        self.solver.solver_config()?;
        Ok(())
    }

    /// Whether two configs describe the same acquired data.
    pub fn same_data(&self, other: &Self) -> bool {
        self.grid == other.grid && self.physics == other.physics && self.data == other.data
    }
}
