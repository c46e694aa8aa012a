//! `freqpix sweep`: paired connectivity over a `lambda1 x lambda2` grid.
//!
//! Writes `sweep.csv` plus two heatmaps, `alpha_over_gamma_aug.png` and
//! `beta_over_gamma_aug.png`, with one row per `lambda1` and one column per
//! `lambda2`. Undefined ratios are gray.

use std::path::PathBuf;

use anyhow::{ensure, Context};
use clap::Args;
use freqpix::connectivity::{augment_samples, run_connectivity_experiment, ConnectivityReport, Ratio};
use freqpix::dataset::{save_tensor, TensorFormat};
use freqpix::{load_config, RunConfig};

use crate::connectivity::{experiment_config, SampleSource};
use crate::render::heatmap;
use crate::{config_err, run_err, Failure};

pub const CSV_FILE: &str = "sweep.csv";
const CELL_PIXELS: usize = 32;

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// TOML synthetic dataset spec (default spec when omitted).
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub lambda1_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub lambda2_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seeds averaged per cell, `seed..seed + repeats`.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Run configuration supplying every knob except the two lambdas.
    #[arg(long)]
    pub augment_config: Option<PathBuf>,
    #[arg(long)]
    pub pairs_per_kind: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Averaged reports of one grid cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub raw: ConnectivityReport,
    pub augmented: ConnectivityReport,
}

fn check_grid(name: &str, grid: &[f64]) -> anyhow::Result<()> {
    ensure!(!grid.is_empty(), "{name} is empty");
    for v in grid {
        ensure!((0.0..=1.0).contains(v), "{name} value {v} is outside [0, 1]");
    }
    Ok(())
}

/// Runs every cell. Raw estimates are computed once per repeat and shared.
pub fn sweep(
    source: &SampleSource,
    base: &RunConfig,
    lambda1_grid: &[f64],
    lambda2_grid: &[f64],
    seed: u64,
    repeats: u64,
    pairs_per_kind: Option<usize>,
) -> anyhow::Result<Vec<SweepCell>> {
    let mut mixers = Vec::new();
    for &l1 in lambda1_grid {
        for &l2 in lambda2_grid {
            let cfg = RunConfig {
                lambda1: l1,
                lambda2: l2,
                ..base.clone()
            };
            mixers.push((l1, l2, cfg.mixer()?));
        }
    }
    let mut raw = Vec::new();
    let mut aug: Vec<Vec<ConnectivityReport>> = vec![Vec::new(); mixers.len()];
    for r in 0..repeats {
        let samples = source.samples(r)?;
        let cfg = experiment_config(seed.wrapping_add(r), pairs_per_kind);
        raw.push(run_connectivity_experiment(&samples, &cfg)?);
        for (k, (_, _, mixer)) in mixers.iter().enumerate() {
            let augmented = augment_samples(&samples, mixer, base.pairing, cfg.seed)?;
            aug[k].push(run_connectivity_experiment(&augmented, &cfg)?);
        }
    }
    let mean = |reports: &[ConnectivityReport]| {
        let mut m = ConnectivityReport::average(reports).expect("repeats >= 1");
        m.seed = seed;
        m
    };
    let raw = mean(&raw);
    Ok(mixers
        .iter()
        .zip(&aug)
        .map(|(&(lambda1, lambda2, _), reports)| SweepCell {
            lambda1,
            lambda2,
            raw: raw.clone(),
            augmented: mean(reports),
        })
        .collect())
}

pub fn write_csv(path: &std::path::Path, cells: &[SweepCell]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "lambda1",
        "lambda2",
        "alpha_over_gamma_raw",
        "alpha_over_gamma_aug",
        "beta_over_gamma_raw",
        "beta_over_gamma_aug",
    ])?;
    for c in cells {
        w.write_record([
            c.lambda1.to_string(),
            c.lambda2.to_string(),
            c.raw.alpha_over_gamma.to_string(),
            c.augmented.alpha_over_gamma.to_string(),
            c.raw.beta_over_gamma.to_string(),
            c.augmented.beta_over_gamma.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn grid_of(cells: &[SweepCell], cols: usize, metric: fn(&SweepCell) -> Ratio) -> Vec<Vec<Option<f64>>> {
    cells
        .chunks(cols)
        .map(|row| row.iter().map(|c| metric(c).value()).collect())
        .collect()
}

pub fn run(args: &SweepArgs) -> Result<(), Failure> {
    check_grid("lambda1-grid", &args.lambda1_grid).map_err(config_err)?;
    check_grid("lambda2-grid", &args.lambda2_grid).map_err(config_err)?;
    let source = SampleSource::load(None, args.synthetic.as_deref()).map_err(config_err)?;
    let base = match &args.augment_config {
        Some(p) => load_config(p).map_err(config_err)?,
        None => RunConfig::default(),
    };
    let cells = sweep(
        &source,
        &base,
        &args.lambda1_grid,
        &args.lambda2_grid,
        args.seed,
        args.repeats,
        args.pairs_per_kind,
    )
    .map_err(run_err)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(run_err)?;
    write_csv(&args.out.join(CSV_FILE), &cells).map_err(run_err)?;
    let cols = args.lambda2_grid.len();
    let maps: [(&str, fn(&SweepCell) -> Ratio); 2] = [
        ("alpha_over_gamma_aug.png", |c| c.augmented.alpha_over_gamma),
        ("beta_over_gamma_aug.png", |c| c.augmented.beta_over_gamma),
    ];
    for (name, metric) in maps {
        let image = heatmap(&grid_of(&cells, cols, metric), CELL_PIXELS).map_err(run_err)?;
        save_tensor(&image, args.out.join(name), TensorFormat::Png).map_err(run_err)?;
    }
    for c in &cells {
        println!(
            "lambda1={} lambda2={} alpha/gamma {} -> {}  beta/gamma {} -> {}",
            c.lambda1,
            c.lambda2,
            c.raw.alpha_over_gamma,
            c.augmented.alpha_over_gamma,
            c.raw.beta_over_gamma,
            c.augmented.beta_over_gamma
        );
    }
    Ok(())
}
