//! End-to-end experiment: synthesise data, reconstruct, score, write outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use num_complex::Complex64;

use crate::admm::{default_init, HistoryRecord, Problem, SolveOutput, Solver};
use crate::coefficients::CoefficientVector;
use crate::config::{ExperimentConfig, GammaScale, ModelKind};
use crate::error::{Error, Result};
use crate::grid::{assemble_basis, build_spherical_view, BasisTable, ImageGrid};
use crate::io;
use crate::metrics::{evaluate, QualityReport};
use crate::model::{
    add_noise, make_phantom, make_spiral_mask, make_synthetic_coils, perturb_coils, Acquisition, KSpaceData,
    SamplingMask,
};
use crate::operators::{CoilModel, SplittingOperator};
use crate::sphfn::BasisIndex;
use crate::{ComplexImage, RealImage};

/// Basis table for the configured grid and physics.
pub fn build_basis(cfg: &ExperimentConfig, n_tilde: usize) -> Result<BasisTable> {
    let grid = ImageGrid::centered(cfg.grid.size, cfg.grid.step, cfg.grid.z0)?;
    let view = build_spherical_view(&grid)?;
    assemble_basis(&view, cfg.physics.wave_number(), n_tilde)
}

/// Ground truth and measurements shared by every reconstruction of one
/// data section.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub phantom: RealImage,
    pub truth_coils: Vec<ComplexImage>,
    /// Present when the coils were synthesised from the basis.
    pub truth_coefficients: Option<CoefficientVector>,
    /// Absolute perturbation weight actually applied.
    pub gamma: f64,
    pub mask: SamplingMask,
    pub kspace: KSpaceData,
}

fn load_square(path: &Path, n: usize) -> Result<RealImage> {
    let img = io::read_real_image(path)?;
    if img.dim() != (n, n) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected {n}x{n}, found {:?}", img.dim()),
        });
    }
    Ok(img)
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<ExperimentData> {
    let n = cfg.grid.size;
    let d = &cfg.data;
    let phantom = match &d.phantom_file {
        Some(path) => load_square(path, n)?,
        None => make_phantom(n).image,
    };
    let mask = match &d.mask_file {
        Some(path) => {
            let m = io::read_mask(path)?;
            if m.size() != n {
                return Err(Error::Format {
                    path: path.clone(),
                    reason: format!("mask is {0}x{0}, grid is {n}x{n}", m.size()),
                });
            }
            m
        }
        None => make_spiral_mask(n, d.mask_fraction, d.mask_turns, d.mask_seed())?,
    };

    let basis = build_basis(cfg, 0)?;
    let (mut coils, mut coefficients) = if d.coil_files.is_empty() {
        let truth = build_basis(cfg, d.truth_order)?;
        let (maps, a) = make_synthetic_coils(&truth, d.coils, d.coil_seed())?;
        (maps, Some(a))
    } else {
        let maps = d
            .coil_files
            .iter()
            .map(|p| {
                let m = io::read_raw(p)?;
                if m.dim() != (n, n) {
                    return Err(Error::Format {
                        path: p.clone(),
                        reason: format!("expected {n}x{n}, found {:?}", m.dim()),
                    });
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        (maps, None)
    };

    let gamma = match d.gamma_scale {
        GammaScale::Absolute => d.gamma,
        GammaScale::Relative => {
            let f1 = basis.column_image(1);
            let mean_f1 = f1.iter().map(|v| v.norm()).sum::<f64>() / f1.len() as f64;
            let mean_c =
                coils.iter().flat_map(|c| c.iter()).map(|v| v.norm()).sum::<f64>() / (coils.len() * n * n) as f64;
            d.gamma * mean_c / mean_f1
        }
    };
    if gamma != 0.0 {
        coils = perturb_coils(&coils, &basis, gamma)?;
        if let Some(a) = coefficients.as_mut() {
            for j in 0..a.coils() {
                a.coil_mut(j)[0] += Complex64::new(gamma, 0.0);
            }
        }
    }

    let acq = Acquisition::new(mask.clone());
    let u = phantom.mapv(|v| Complex64::new(v, 0.0));
    let clean = acq.forward(&u, &coils)?;
    let kspace = add_noise(&clean, &mask, d.noise_sigma, d.noise_seed())?;
    Ok(ExperimentData {
        phantom,
        truth_coils: coils,
        truth_coefficients: coefficients,
        gamma,
        mask,
        kspace,
    })
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub solve: SolveOutput,
    pub coil_maps: Vec<ComplexImage>,
    pub coefficients: Option<CoefficientVector>,
    pub quality: QualityReport,
    pub zero_filled: ComplexImage,
    pub zero_filled_quality: QualityReport,
}

impl Reconstruction {
    pub fn image(&self) -> &ComplexImage {
        self.solve.u()
    }

    pub fn first(&self) -> &HistoryRecord {
        &self.solve.first
    }

    pub fn last(&self) -> &HistoryRecord {
        &self.solve.last
    }
}

/// Run the configured solver on prepared data.
pub fn reconstruct(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<Reconstruction> {
    let n = cfg.grid.size;
    let basis = match cfg.model.kind {
        ModelKind::Proposed => Some(build_basis(cfg, cfg.model.order)?),
        ModelKind::Baseline => None,
    };
    let model = match &basis {
        Some(b) => CoilModel::Spherical(b),
        None => CoilModel::Free,
    };
    let coils = data.kspace.coils();
    let operator = SplittingOperator::new(model, n, coils)?;
    let acq = Acquisition::new(data.mask.clone());
    let problem = Problem::new(operator, &acq, &data.kspace, cfg.regularization.params(coils)?)?;
    let mut solver = Solver::new(&problem, cfg.solver.solver_config()?)?;
    info!(
        "reconstructing {n}x{n}, {coils} coils, {:?} model, {} iterations",
        cfg.model.kind, cfg.solver.iterations
    );
    let solve = solver.solve(default_init(&operator))?;
    let coil_maps = operator.coil_maps(&solve.state.v)?;
    let coefficients = solve.state.v.coefficients().cloned();
    let quality = evaluate(solve.u(), &data.phantom)?;
    let zero_filled = acq.zero_filled(&data.kspace, &data.truth_coils)?;
    let zero_filled_quality = evaluate(&zero_filled, &data.phantom)?;
    info!(
        "PSNR {:.3} dB (zero-filled {:.3} dB), SSIM {:.4}",
        quality.psnr_db, zero_filled_quality.psnr_db, quality.ssim
    );
    Ok(Reconstruction {
        solve,
        coil_maps,
        coefficients,
        quality,
        zero_filled,
        zero_filled_quality,
    })
}

fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Proposed => "proposed",
        ModelKind::Baseline => "baseline",
    }
}

pub const METRICS_HEADER: &str = "method,model,order,iterations,psnr_db,ssim";
/// Wall-clock time is left out so identical runs give identical files.
pub const HISTORY_HEADER: &str = "iteration,objective,primal_residual,dual_residual";

/// Reconstruction row followed by the zero-filled reference row.
pub fn metrics_csv(cfg: &ExperimentConfig, rec: &Reconstruction) -> String {
    let mut out = String::new();
    writeln!(out, "{METRICS_HEADER}").unwrap();
    let order = match cfg.model.kind {
        ModelKind::Proposed => cfg.model.order.to_string(),
        ModelKind::Baseline => String::new(),
    };
    writeln!(
        out,
        "reconstruction,{},{order},{},{:.6},{:.6}",
        model_name(cfg.model.kind),
        rec.last().iteration,
        rec.quality.psnr_db,
        rec.quality.ssim
    )
    .unwrap();
    writeln!(
        out,
        "zero_filled,,,0,{:.6},{:.6}",
        rec.zero_filled_quality.psnr_db, rec.zero_filled_quality.ssim
    )
    .unwrap();
    out
}

pub fn history_csv(history: &[HistoryRecord]) -> String {
    let mut out = String::new();
    writeln!(out, "{HISTORY_HEADER}").unwrap();
    for r in history {
        writeln!(
            out,
            "{},{:.10e},{:.10e},{:.10e}",
            r.iteration, r.objective, r.primal_residual, r.dual_residual
        )
        .unwrap();
    }
    out
}

/// One row per (coil, order), columns `m = −ñ … ñ`; magnitudes to four
/// decimals, blank where `|m| > n`.
pub fn coefficients_csv(a: &CoefficientVector) -> String {
    let n_tilde = a.max_order().unwrap_or(0);
    let mut out = String::from("coil,order");
    for m in -(n_tilde as i64)..=n_tilde as i64 {
        write!(out, ",m={m}").unwrap();
    }
    out.push('\n');
    for j in 0..a.coils() {
        for n in 0..=n_tilde {
            write!(out, "{},{n}", j + 1).unwrap();
            for m in -(n_tilde as i64)..=n_tilde as i64 {
                out.push(',');
                if m.unsigned_abs() as usize <= n {
                    let l = BasisIndex { n, m }.linear();
                    write!(out, "{:.4}", a.get(j, l).norm()).unwrap();
                }
            }
            out.push('\n');
        }
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Write every run artifact into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, data: &ExperimentData, rec: &Reconstruction, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let mut manifest = cfg.clone();
    manifest.output.dir = dir.to_path_buf();
    write_text(&dir.join("manifest.toml"), &manifest.to_toml()?)?;

    io::write_raw(&dir.join("reconstruction.cimg"), rec.image())?;
    io::write_magnitude_png(&dir.join("reconstruction.png"), rec.image())?;
    io::write_magnitude_png(&dir.join("zero_filled.png"), &rec.zero_filled)?;
    io::write_png(&dir.join("phantom.png"), &data.phantom, 1.0)?;
    io::write_mask_png(&dir.join("mask.png"), &data.mask)?;

    let coil_dir = dir.join("coils");
    create_dir(&coil_dir)?;
    let peak = rec
        .coil_maps
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    for (j, c) in rec.coil_maps.iter().enumerate() {
        io::write_png(
            &coil_dir.join(format!("coil_{:02}.png", j + 1)),
            &c.mapv(|v| v.norm()),
            peak,
        )?;
        io::write_raw(&coil_dir.join(format!("coil_{:02}.cimg", j + 1)), c)?;
    }
    if let Some(a) = &rec.coefficients {
        write_text(&dir.join("coefficients.csv"), &coefficients_csv(a))?;
    }
    if let Some(a) = &data.truth_coefficients {
        write_text(&dir.join("true_coefficients.csv"), &coefficients_csv(a))?;
    }
    write_text(&dir.join("metrics.csv"), &metrics_csv(cfg, rec))?;
    write_text(&dir.join("history.csv"), &history_csv(&rec.solve.history))?;
    Ok(())
}

/// Full pipeline for one config; returns the reconstruction.
pub fn run(cfg: &ExperimentConfig) -> Result<(ExperimentData, Reconstruction)> {
    let data = prepare_data(cfg)?;
    let rec = reconstruct(cfg, &data)?;
    write_outputs(cfg, &data, &rec, &cfg.output.dir)?;
    Ok((data, rec))
}

/// Magnitude PNG of every basis column (`basis/f_XX.png`) plus a tiled
/// montage. Returns the number of basis images written.
pub fn write_basis_montage(cfg: &ExperimentConfig, dir: &Path) -> Result<usize> {
    let basis = build_basis(cfg, cfg.model.order)?;
    let sub = dir.join("basis");
    create_dir(&sub)?;
    let n = basis.size();
    let count = basis.len();
    let side = cfg.model.order + 1;
    let mut montage = RealImage::zeros((side * n, side * n));
    for l in 1..=count {
        let mag = basis.column_image(l).mapv(|v| v.norm());
        let peak = mag.iter().cloned().fold(0.0, f64::max);
        io::write_png(&sub.join(format!("f_{l:02}.png")), &mag, peak)?;
        let (row, col) = ((l - 1) / side, (l - 1) % side);
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        montage
            .slice_mut(ndarray::s![row * n..(row + 1) * n, col * n..(col + 1) * n])
            .assign(&mag.mapv(|v| v * scale));
    }
    io::write_png(&dir.join("basis_montage.png"), &montage, 1.0)?;
    Ok(count)
}

/// One row of a comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub label: String,
    pub kind: ModelKind,
    pub order: usize,
    pub iterations: usize,
    pub quality: QualityReport,
}

pub const COMPARISON_HEADER: &str = "config,model,order,iterations,psnr_db,ssim";

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{COMPARISON_HEADER}").unwrap();
    for r in rows {
        let order = match r.kind {
            ModelKind::Proposed => r.order.to_string(),
            ModelKind::Baseline => String::new(),
        };
        writeln!(
            out,
            "{},{},{order},{},{:.6},{:.6}",
            r.label,
            model_name(r.kind),
            r.iterations,
            r.quality.psnr_db,
            r.quality.ssim
        )
        .unwrap();
    }
    out
}

/// Run several configs against shared data; every config must describe the
/// same grid, physics and data. Each run writes into `dir/<label>/`, and the
/// table goes to `dir/comparison.csv`.
pub fn compare(configs: &[(String, ExperimentConfig)], dir: &Path) -> Result<Vec<ComparisonRow>> {
    let Some((_, first)) = configs.first() else {
        return Err(Error::Config("compare needs at least one config".into()));
    };
    for (label, cfg) in configs {
        if !cfg.same_data(first) {
            return Err(Error::Config(format!(
                "config `{label}` differs from the first in its grid, physics or data section"
            )));
        }
    }
    let data = prepare_data(first)?;
    create_dir(dir)?;
    let mut rows = Vec::with_capacity(configs.len());
    for (label, cfg) in configs {
        let rec = reconstruct(cfg, &data)?;
        let sub: PathBuf = dir.join(label);
        write_outputs(cfg, &data, &rec, &sub)?;
        rows.push(ComparisonRow {
            label: label.clone(),
            kind: cfg.model.kind,
            order: cfg.model.order,
            iterations: rec.last().iteration,
            quality: rec.quality,
        });
    }
    write_text(&dir.join("comparison.csv"), &comparison_csv(&rows))?;
    Ok(rows)
}
