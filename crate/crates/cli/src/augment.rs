//! `freqpix augment`: batch augmentation of a manifest.
//!
//! Record `i` of the source manifest draws from `derive_stream(seed, i)`, so
//! outputs do not depend on the worker count or on completion order. Every
//! record gets one line in `audit.jsonl`, in manifest order, and that line is
//! enough to recompute the output with `--replay`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::Args;
use freqpix::dataset::{load_tensor, read_manifest, save_tensor, TensorFormat};
use freqpix::mixing::MixDraw;
use freqpix::pipeline::augment_one;
use freqpix::{
    derive_stream, load_config, CropMode, MixAudit, MixMode, MixParams, Mixer, PairingStrategy,
    RunConfig, SampleRecord,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{config_err, run_err, worker_pool, Failure, EXIT_FAILURES, EXIT_OK};

pub const AUDIT_FILE: &str = "audit.jsonl";

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    /// JSONL manifest of the images to augment.
    #[arg(long, required_unless_present = "replay")]
    pub source_manifest: Option<PathBuf>,
    /// JSONL manifest of mixing targets (defaults to the source manifest).
    #[arg(long)]
    pub pool_manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// TOML run configuration; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub crop_ratio: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub prob: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "FREQPIX_WORKERS")]
    pub workers: Option<usize>,
    /// cross-domain-train or unlabeled-pool.
    #[arg(long)]
    pub pairing: Option<PairingStrategy>,
    /// random or centered.
    #[arg(long)]
    pub crop_mode: Option<CropMode>,
    /// both, freq or pixel.
    #[arg(long, default_value = "both")]
    pub mode: MixMode,
    /// Largest tolerated imaginary residue of the frequency branch.
    #[arg(long)]
    pub resid_ceiling: Option<f64>,
    /// Recompute outputs from an audit file instead of drawing anew.
    #[arg(long, value_name = "AUDIT")]
    pub replay: Option<PathBuf>,
    /// With --replay, only recompute this record.
    #[arg(long, requires = "replay")]
    pub replay_id: Option<String>,
}

/// One line of `audit.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLine {
    pub id: String,
    pub source: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    /// File name inside the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(flatten)]
    pub mix: MixAudit,
    pub params: MixParams,
    pub mode: MixMode,
    pub crop_mode: CropMode,
    pub pairing: PairingStrategy,
    pub resid_ceiling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub processed: usize,
    pub augmented: usize,
    pub skipped: usize,
    pub errored: usize,
    pub wall_time_secs: f64,
    pub master_seed: u64,
    pub mode: MixMode,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Augmented,
    Skipped,
    Errored,
}

/// Merges the config file and the inline flags.
pub fn resolve_config(args: &AugmentArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let overrides = [
        (&mut cfg.eta, args.eta),
        (&mut cfg.crop_ratio, args.crop_ratio),
        (&mut cfg.lambda1, args.lambda1),
        (&mut cfg.lambda2, args.lambda2),
        (&mut cfg.prob, args.prob),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(pairing) = args.pairing {
        cfg.pairing = pairing;
    }
    if let Some(crop_mode) = args.crop_mode {
        cfg.crop_mode = crop_mode;
    }
    if let Some(ceiling) = args.resid_ceiling {
        cfg.resid_ceiling = ceiling;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_name(record: &SampleRecord) -> anyhow::Result<String> {
    let id = &record.id;
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        return Err(anyhow!("record id `{id}` is not usable as a file name"));
    }
    let format = TensorFormat::from_path(&record.path)?;
    Ok(format!("{id}.{}", format.extension()))
}

fn process_record(
    index: usize,
    source: &SampleRecord,
    pool: &[SampleRecord],
    mixer: &Mixer,
    cfg: &RunConfig,
    mode: MixMode,
    out_dir: &Path,
) -> (AuditLine, Outcome) {
    let mut line = AuditLine {
        id: source.id.clone(),
        source: source.path.clone(),
        target: None,
        output: None,
        mix: MixAudit::default(),
        params: cfg.params(),
        mode,
        crop_mode: cfg.crop_mode,
        pairing: cfg.pairing,
        resid_ceiling: cfg.resid_ceiling,
        error: None,
    };
    let mut target = None;
    let result = (|| -> anyhow::Result<MixAudit> {
        let name = output_name(source)?;
        let out_path = out_dir.join(&name);
        let x1 = load_tensor(&source.path)?;
        let mut rng = derive_stream(cfg.seed, index as u64);
        let (out, audit) = augment_one(mixer, source, &x1, pool, cfg.pairing, &mut rng, |t| {
            target = Some(t.path.clone());
            load_tensor(&t.path)
        })?;
        if audit.applied {
            save_tensor(&out, &out_path, TensorFormat::from_path(&source.path)?)?;
        } else {
            fs::copy(&source.path, &out_path)
                .with_context(|| format!("copying {} to {}", source.path.display(), out_path.display()))?;
        }
        line.output = Some(name);
        Ok(audit)
    })();
    line.target = target;
    let outcome = match result {
        Ok(audit) => {
            let outcome = if audit.applied { Outcome::Augmented } else { Outcome::Skipped };
            line.mix = audit;
            outcome
        }
        Err(e) => {
            log::warn!("record {}: {e:#}", source.id);
            line.error = Some(format!("{e:#}"));
            Outcome::Errored
        }
    };
    line.mix.master_seed = Some(cfg.seed);
    line.mix.sample_index = Some(index as u64);
    (line, outcome)
}

fn write_audit(out_dir: &Path, lines: &[AuditLine]) -> anyhow::Result<()> {
    let mut text = String::new();
    for line in lines {
        text.push_str(&serde_json::to_string(line)?);
        text.push('\n');
    }
    let path = out_dir.join(AUDIT_FILE);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &AugmentArgs) -> Result<i32, Failure> {
    if let Some(audit) = &args.replay {
        return replay(audit, args.replay_id.as_deref(), &args.out_dir);
    }
    let start = Instant::now();
    let cfg = resolve_config(args).map_err(config_err)?;
    let mixer = cfg.mixer().map_err(config_err)?.with_mode(args.mode);
    let source_path = args.source_manifest.as_ref().expect("clap requires it without --replay");
    let sources = read_manifest(source_path).map_err(config_err)?;
    let pool = match &args.pool_manifest {
        Some(p) => read_manifest(p).map_err(config_err)?,
        None => sources.clone(),
    };
    let workers = worker_pool(cfg.workers)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))
        .map_err(config_err)?;

    let results: Vec<(AuditLine, Outcome)> = workers.install(|| {
        sources
            .records
            .par_iter()
            .enumerate()
            .map(|(i, rec)| process_record(i, rec, &pool.records, &mixer, &cfg, args.mode, &args.out_dir))
            .collect()
    });

    let count = |o: Outcome| results.iter().filter(|(_, r)| *r == o).count();
    let summary = RunSummary {
        processed: results.len(),
        augmented: count(Outcome::Augmented),
        skipped: count(Outcome::Skipped),
        errored: count(Outcome::Errored),
        wall_time_secs: 0.0,
        master_seed: cfg.seed,
        mode: args.mode,
        config: cfg.clone(),
    };
    let lines: Vec<AuditLine> = results.into_iter().map(|(l, _)| l).collect();
    write_audit(&args.out_dir, &lines).map_err(run_err)?;
    let summary = RunSummary {
        wall_time_secs: start.elapsed().as_secs_f64(),
        ..summary
    };
    println!("{}", serde_json::to_string_pretty(&summary).map_err(run_err)?);
    Ok(if summary.errored == 0 { EXIT_OK } else { EXIT_FAILURES })
}

/// Recomputes one audited record into `out_dir`.
pub fn replay_line(line: &AuditLine, out_dir: &Path) -> anyhow::Result<PathBuf> {
    if let Some(e) = &line.error {
        return Err(anyhow!("record {} failed in the original run: {e}", line.id));
    }
    let name = line
        .output
        .as_ref()
        .ok_or_else(|| anyhow!("record {} has no output", line.id))?;
    let out_path = out_dir.join(name);
    if !line.mix.applied {
        fs::copy(&line.source, &out_path)
            .with_context(|| format!("copying {}", line.source.display()))?;
        return Ok(out_path);
    }
    let missing = |what: &str| anyhow!("record {} is applied but has no {what}", line.id);
    let draw = MixDraw {
        lambda: line.mix.lambda.ok_or_else(|| missing("lambda"))?,
        crop: line.mix.crop.ok_or_else(|| missing("crop"))?,
    };
    let target = line.target.as_ref().ok_or_else(|| missing("target"))?;
    let mixer = Mixer::new(line.params)?
        .with_mode(line.mode)
        .with_crop_mode(line.crop_mode)
        .with_residue_ceiling(line.resid_ceiling);
    let x1 = load_tensor(&line.source)?;
    let x2 = load_tensor(target)?;
    let (out, _) = mixer.apply(&x1, &x2, draw)?;
    save_tensor(&out, &out_path, TensorFormat::from_path(&line.source)?)?;
    Ok(out_path)
}

pub fn read_audit(path: &Path) -> anyhow::Result<Vec<AuditLine>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), n + 1)))
        .collect()
}

fn replay(audit: &Path, id: Option<&str>, out_dir: &Path) -> Result<i32, Failure> {
    let lines = read_audit(audit).map_err(config_err)?;
    let chosen: Vec<&AuditLine> = lines.iter().filter(|l| id.is_none_or(|id| l.id == id)).collect();
    if chosen.is_empty() {
        return Err(config_err(anyhow!("no audit line for id `{}`", id.unwrap_or_default())));
    }
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(config_err)?;
    let mut failed = 0;
    for line in chosen {
        match replay_line(line, out_dir) {
            Ok(path) => println!("{}", path.display()),
            Err(e) => {
                eprintln!("record {}: {e:#}", line.id);
                failed += 1;
            }
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURES })
}
