//! `freqpix connectivity`: rho/alpha/beta/gamma estimates as JSON reports.

use std::borrow::Cow;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use freqpix::connectivity::{
    generate_synthetic, run_connectivity_experiment, run_paired_experiment, ConnectivityReport,
    ExperimentConfig, LabeledSample, SynthSpec,
};
use freqpix::dataset::{load_tensor, read_manifest, resize_bilinear};
use freqpix::{load_config, Mixer, PairingStrategy};

use crate::{config_err, run_err, Failure};

#[derive(Debug, Clone, Args)]
pub struct ConnectivityArgs {
    /// JSONL manifest of labeled images. Images are resized to the first one's size.
    #[arg(long, conflicts_with = "synthetic")]
    pub manifest: Option<PathBuf>,
    /// TOML synthetic dataset spec. With neither source flag the default spec is used.
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Cap on pairs per kind (all pairs when omitted).
    #[arg(long)]
    pub pairs_per_kind: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run configuration for the augmented condition; adds a second report.
    #[arg(long)]
    pub augment_config: Option<PathBuf>,
    /// Report path. The augmented report goes next to it as `<stem>.augmented.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Average over this many seeds, `seed..seed + repeats`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
}

/// Where samples come from.
#[derive(Debug, Clone)]
pub enum SampleSource {
    Loaded(Vec<LabeledSample>),
    Synthetic(SynthSpec),
}

impl SampleSource {
    pub fn load(manifest: Option<&Path>, synthetic: Option<&Path>) -> anyhow::Result<Self> {
        match (manifest, synthetic) {
            (Some(m), _) => Ok(SampleSource::Loaded(load_labeled(m)?)),
            (None, Some(s)) => Ok(SampleSource::Synthetic(SynthSpec::load(s)?)),
            (None, None) => Ok(SampleSource::Synthetic(SynthSpec::default())),
        }
    }

    /// Samples for repeat `r`: synthetic data is regenerated with its seed offset by `r`.
    pub fn samples(&self, r: u64) -> anyhow::Result<Cow<'_, [LabeledSample]>> {
        match self {
            SampleSource::Loaded(s) => Ok(Cow::Borrowed(s)),
            SampleSource::Synthetic(spec) => {
                let spec = SynthSpec {
                    seed: spec.seed.wrapping_add(r),
                    ..spec.clone()
                };
                Ok(Cow::Owned(generate_synthetic(&spec)?))
            }
        }
    }
}

fn load_labeled(path: &Path) -> anyhow::Result<Vec<LabeledSample>> {
    let manifest = read_manifest(path)?;
    let mut shape = None;
    manifest
        .iter()
        .map(|rec| {
            let mut tensor = load_tensor(&rec.path)?;
            let (h, w) = *shape.get_or_insert((tensor.height(), tensor.width()));
            if (tensor.height(), tensor.width()) != (h, w) {
                tensor = resize_bilinear(&tensor, h, w)?;
            }
            Ok(LabeledSample {
                tensor,
                label: rec.label.clone(),
                domain: rec.domain.clone(),
            })
        })
        .collect()
}

/// Mixer and pairing from a run configuration file.
pub fn load_mixer(path: &Path) -> anyhow::Result<(Mixer, PairingStrategy)> {
    let cfg = load_config(path)?;
    Ok((cfg.mixer()?, cfg.pairing))
}

pub fn augmented_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.augmented.json"))
}

pub fn experiment_config(seed: u64, pairs_per_kind: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        pairs_per_kind,
        seed,
        ..ExperimentConfig::default()
    }
}

/// Mean report over the repeats, for raw data and (with a mixer) augmented data.
pub fn repeated(
    source: &SampleSource,
    seed: u64,
    repeats: u64,
    pairs_per_kind: Option<usize>,
    augment: Option<&(Mixer, PairingStrategy)>,
) -> anyhow::Result<(ConnectivityReport, Option<ConnectivityReport>)> {
    let mut raw = Vec::new();
    let mut aug = Vec::new();
    for r in 0..repeats {
        let samples = source.samples(r)?;
        let cfg = experiment_config(seed.wrapping_add(r), pairs_per_kind);
        match augment {
            Some((mixer, pairing)) => {
                let paired = run_paired_experiment(&samples, mixer, *pairing, &cfg)?;
                raw.push(paired.raw);
                aug.push(paired.augmented);
            }
            None => raw.push(run_connectivity_experiment(&samples, &cfg)?),
        }
    }
    let mean = |reports: &[ConnectivityReport]| {
        ConnectivityReport::average(reports).map(|mut r| {
            r.seed = seed;
            r
        })
    };
    Ok((mean(&raw).expect("repeats >= 1"), mean(&aug)))
}

pub fn ratio_table(raw: &ConnectivityReport, augmented: Option<&ConnectivityReport>) -> String {
    let mut out = format!(
        "{:<10} {:>7} {:>7} {:>7} {:>7} {:>11} {:>10}\n",
        "", "rho", "alpha", "beta", "gamma", "alpha/gamma", "beta/gamma"
    );
    let rows = std::iter::once(("raw", raw)).chain(augmented.map(|a| ("augmented", a)));
    for (name, r) in rows {
        out.push_str(&format!(
            "{:<10} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>11} {:>10}\n",
            name,
            r.rho,
            r.alpha,
            r.beta,
            r.gamma,
            r.alpha_over_gamma.to_string(),
            r.beta_over_gamma.to_string()
        ));
    }
    out
}

pub fn write_report(path: &Path, report: &ConnectivityReport) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &ConnectivityArgs) -> Result<(), Failure> {
    let source = SampleSource::load(args.manifest.as_deref(), args.synthetic.as_deref()).map_err(config_err)?;
    let augment = args
        .augment_config
        .as_deref()
        .map(load_mixer)
        .transpose()
        .map_err(config_err)?;
    let (raw, aug) = repeated(&source, args.seed, args.repeats, args.pairs_per_kind, augment.as_ref()).map_err(run_err)?;
    write_report(&args.out, &raw).map_err(run_err)?;
    if let Some(aug) = &aug {
        write_report(&augmented_path(&args.out), aug).map_err(run_err)?;
    }
    print!("{}", ratio_table(&raw, aug.as_ref()));
    Ok(())
}
