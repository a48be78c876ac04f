//! `sphcoil` — synthetic parallel-MRI experiments with spherical-basis coil
//! sensitivities.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use sphcoil::config::ExperimentConfig;
use sphcoil::experiment;
use sphcoil::Error;

const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "sphcoil", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize data, reconstruct it and write every artifact.
    Run(Overrides),
    /// Write magnitude images of the spherical basis functions.
    Basis(Overrides),
    /// Run several configs on shared data and tabulate their metrics.
    Compare(Overrides),
}

#[derive(Debug, Args)]
struct Overrides {
    /// Experiment config (TOML); repeat for `compare`.
    #[arg(long = "config", value_name = "PATH", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory, replacing `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed, replacing `data.seed`.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Iteration count, replacing `solver.iterations`.
    #[arg(long, value_name = "INT")]
    iters: Option<usize>,
}

impl Overrides {
    fn load(&self, path: &Path) -> sphcoil::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.data.seed = seed;
        }
        if let Some(iters) = self.iters {
            cfg.solver.iterations = iters;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn single(&self, verb: &str) -> sphcoil::Result<ExperimentConfig> {
        match self.configs.as_slice() {
            [path] => self.load(path),
            _ => Err(Error::Config(format!("`{verb}` takes exactly one --config"))),
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::ShapeMismatch { .. } => EXIT_CONFIG,
        Error::NonFinite { .. } => EXIT_NUMERICAL,
        Error::Io { .. } | Error::Image { .. } | Error::Format { .. } => EXIT_IO,
    }
}

/// Table labels from file stems, suffixed where two stems coincide.
fn labels(paths: &[PathBuf]) -> Vec<String> {
    let mut seen = HashSet::new();
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stem = p
                .file_stem()
                .map_or_else(|| format!("config{}", i + 1), |s| s.to_string_lossy().into_owned());
            if seen.insert(stem.clone()) {
                stem
            } else {
                format!("{stem}_{}", i + 1)
            }
        })
        .collect()
}

fn execute(command: &Command) -> sphcoil::Result<()> {
    match command {
        Command::Run(o) => {
            let cfg = o.single("run")?;
            let (_, rec) = experiment::run(&cfg)?;
            println!(
                "PSNR {:.2} dB, SSIM {:.4} (zero-filled {:.2} dB, {:.4}) after {} iterations -> {}",
                rec.quality.psnr_db,
                rec.quality.ssim,
                rec.zero_filled_quality.psnr_db,
                rec.zero_filled_quality.ssim,
                rec.last().iteration,
                cfg.output.dir.display()
            );
        }
        Command::Basis(o) => {
            let cfg = o.single("basis")?;
            let count = experiment::write_basis_montage(&cfg, &cfg.output.dir)?;
            println!("{count} basis images -> {}", cfg.output.dir.display());
        }
        Command::Compare(o) => {
            let configs = o
                .configs
                .iter()
                .zip(labels(&o.configs))
                .map(|(path, label)| o.load(path).map(|cfg| (label, cfg)))
                .collect::<sphcoil::Result<Vec<_>>>()?;
            let dir = o.out.clone().unwrap_or_else(|| configs[0].1.output.dir.clone());
            info!("comparing {} configs into {}", configs.len(), dir.display());
            let rows = experiment::compare(&configs, &dir)?;
            print!("{}", experiment::comparison_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
