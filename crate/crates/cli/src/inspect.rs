//! `freqpix inspect`: the four panels of an amplitude/phase decomposition.
//!
//! For `--out-prefix p` it writes:
//!
//! * `p_amplitude.png`: `log(1 + A)` with DC at the center, divided by its max
//! * `p_phase.png`: phase mapped from `(-pi, pi]` to `(0, 1]`, DC at the center
//! * `p_amplitude_only.png`: inverse of the amplitude with zero phase
//! * `p_phase_only.png`: inverse of unit amplitude with the image's phase
//!
//! The reconstructions are min-max normalized. Each channel is handled on its own.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use freqpix::dataset::{load_tensor, save_tensor, TensorFormat};
use freqpix::spectral::{decompose, dft2, fftshift, idft2, recompose, AmplitudeGrid, Layout, PhaseGrid};
use freqpix::{Plane, Tensor};

use crate::render::{by_max, min_max, stack};
use crate::{config_err, run_err, Failure};

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output path prefix; suffixes and `.png` are appended.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

pub struct Panels {
    pub amplitude: Tensor,
    pub phase: Tensor,
    pub amplitude_only: Tensor,
    pub phase_only: Tensor,
}

pub const SUFFIXES: [&str; 4] = ["_amplitude", "_phase", "_amplitude_only", "_phase_only"];

pub fn panels(image: &Tensor) -> anyhow::Result<Panels> {
    let (h, w, _) = image.shape();
    let mut out: [Vec<Plane>; 4] = Default::default();
    for plane in image.planes() {
        let (amp, phase) = decompose(&dft2(&plane)?);
        let log_amp: Vec<f64> = amp.values().iter().map(|a| a.ln_1p()).collect();
        out[0].push(Plane::new(h, w, by_max(&fftshift(h, w, &log_amp)))?);
        let wrapped: Vec<f64> = phase.values().iter().map(|p| (p + PI) / (2.0 * PI)).collect();
        out[1].push(Plane::new(h, w, fftshift(h, w, &wrapped))?);

        let zero_phase = PhaseGrid::new(h, w, vec![0.0; h * w], Layout::Natural)?;
        let amp_only = idft2(&recompose(&amp, &zero_phase)?)?.plane;
        out[2].push(Plane::new(h, w, min_max(amp_only.data()))?);
        let unit_amp = AmplitudeGrid::new(h, w, vec![1.0; h * w], Layout::Natural)?;
        let phase_only = idft2(&recompose(&unit_amp, &phase)?)?.plane;
        out[3].push(Plane::new(h, w, min_max(phase_only.data()))?);
    }
    let [a, p, ao, po] = out;
    Ok(Panels {
        amplitude: stack(a)?,
        phase: stack(p)?,
        amplitude_only: stack(ao)?,
        phase_only: stack(po)?,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("{suffix}.png"));
    PathBuf::from(name)
}

pub fn run(args: &InspectArgs) -> Result<(), Failure> {
    let image = load_tensor(&args.input).map_err(config_err)?;
    let p = panels(&image).map_err(run_err)?;
    if let Some(dir) = args.out_prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(run_err)?;
    }
    for (suffix, tensor) in SUFFIXES.iter().zip([&p.amplitude, &p.phase, &p.amplitude_only, &p.phase_only]) {
        let path = with_suffix(&args.out_prefix, suffix);
        save_tensor(tensor, &path, TensorFormat::Png).map_err(run_err)?;
        println!("{}", path.display());
    }
    Ok(())
}
