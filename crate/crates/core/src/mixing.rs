//! Frequency-pixel mixing.
//!
//! Two images `x1` (the one being augmented) and `x2` (the mixing target)
//! go through two paths:
//!
//! * frequency: per channel, the DC-centered amplitude spectra are
//!   interpolated inside a crop, `(1 - lambda) A1 + lambda A2` with
//!   `lambda ~ U(0, eta)`, recombined with the phase of `x1` and inverted;
//! * pixel: `(1 - lambda1) x1 + lambda1 x2`.
//!
//! The two results are fused as `(1 - lambda2) freq + lambda2 pixel` and
//! clamped to `[0, 1]` once, at the end.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::resize_bilinear;
use crate::error::{Error, Result};
use crate::spectral::{self, AmplitudeGrid, Complex64, Layout, PhaseGrid, Spectrum};
use crate::tensor::{Plane, Tensor};

/// The full knob set of the augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixParams {
    /// Upper bound of the uniform law for the frequency mixing weight, in `(0, 1]`.
    pub eta: f64,
    /// Crop side as a fraction of each spectrum axis, in `(0, 1]`.
    pub crop_ratio: f64,
    /// Pixel blend weight, in `[0, 1]`.
    pub lambda1: f64,
    /// Fusion weight of the pixel branch, in `[0, 1]`.
    pub lambda2: f64,
    /// Per-sample probability of augmenting at all, in `[0, 1]`.
    pub prob: f64,
}

impl Default for MixParams {
    fn default() -> Self {
        MixParams {
            eta: 1.0,
            crop_ratio: 0.5,
            lambda1: 0.5,
            lambda2: 0.5,
            prob: 0.7,
        }
    }
}

impl MixParams {
    /// Range-checks every field, naming the first offender.
    pub fn validate(&self) -> Result<()> {
        let half_open = |field: &'static str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::ConfigRange {
                    field,
                    value: v.to_string(),
                    expected: "(0, 1]",
                })
            }
        };
        let closed = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::ConfigRange {
                    field,
                    value: v.to_string(),
                    expected: "[0, 1]",
                })
            }
        };
        half_open("eta", self.eta)?;
        half_open("crop_ratio", self.crop_ratio)?;
        closed("lambda1", self.lambda1)?;
        closed("lambda2", self.lambda2)?;
        closed("prob", self.prob)
    }
}

/// Placement of the amplitude crop on the centered spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CropMode {
    /// Uniform position anywhere it fits.
    #[default]
    Random,
    /// Centered on the DC bin.
    Centered,
}

impl FromStr for CropMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(CropMode::Random),
            "centered" => Ok(CropMode::Centered),
            other => Err(format!("unknown crop mode `{other}` (expected random or centered)")),
        }
    }
}

impl fmt::Display for CropMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CropMode::Random => "random",
            CropMode::Centered => "centered",
        })
    }
}

/// Which branches feed the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixMode {
    /// Fuse both branches with `lambda2`.
    #[default]
    Both,
    /// Frequency branch only (`lambda2` treated as 0).
    Freq,
    /// Pixel branch only (`lambda2` treated as 1).
    Pixel,
}

impl FromStr for MixMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "both" => Ok(MixMode::Both),
            "freq" => Ok(MixMode::Freq),
            "pixel" => Ok(MixMode::Pixel),
            other => Err(format!("unknown mode `{other}` (expected both, freq or pixel)")),
        }
    }
}

impl fmt::Display for MixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixMode::Both => "both",
            MixMode::Freq => "freq",
            MixMode::Pixel => "pixel",
        })
    }
}

/// Rectangle of bins, in centered-layout coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropRegion {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl fmt::Display for CropRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}+{}, {}+{}]", self.top, self.height, self.left, self.width)
    }
}

impl CropRegion {
    pub fn full(height: usize, width: usize) -> Self {
        CropRegion {
            top: 0,
            left: 0,
            height,
            width,
        }
    }

    /// `round(r * dim)` per axis, kept within `1..=dim`.
    pub fn sides(height: usize, width: usize, ratio: f64) -> (usize, usize) {
        let side = |dim: usize| ((ratio * dim as f64).round() as usize).clamp(1, dim);
        (side(height), side(width))
    }

    /// Crop whose center sits on the DC bin `(H / 2, W / 2)`.
    pub fn centered(height: usize, width: usize, ratio: f64) -> Self {
        let (sh, sw) = CropRegion::sides(height, width, ratio);
        CropRegion {
            top: height / 2 - sh / 2,
            left: width / 2 - sw / 2,
            height: sh,
            width: sw,
        }
    }

    /// Crop at a uniformly random position.
    pub fn random<R: Rng + ?Sized>(height: usize, width: usize, ratio: f64, rng: &mut R) -> Self {
        let (sh, sw) = CropRegion::sides(height, width, ratio);
        CropRegion {
            top: rng.random_range(0..=height - sh),
            left: rng.random_range(0..=width - sw),
            height: sh,
            width: sw,
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        mode: CropMode,
        height: usize,
        width: usize,
        ratio: f64,
        rng: &mut R,
    ) -> Self {
        match mode {
            CropMode::Random => CropRegion::random(height, width, ratio, rng),
            CropMode::Centered => CropRegion::centered(height, width, ratio),
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top
            && row < self.top + self.height
            && col >= self.left
            && col < self.left + self.width
    }

    pub fn check_fits(&self, height: usize, width: usize) -> Result<()> {
        if self.height == 0
            || self.width == 0
            || self.top + self.height > height
            || self.left + self.width > width
        {
            return Err(Error::RegionOutOfBounds {
                region: self.to_string(),
                height,
                width,
            });
        }
        Ok(())
    }
}

fn check_ratio(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Ratio { name, value })
    }
}

/// Interpolates amplitudes inside `region`; bins outside keep `a1` untouched.
pub fn mix_amplitude(
    a1: &AmplitudeGrid,
    a2: &AmplitudeGrid,
    lambda: f64,
    region: CropRegion,
) -> Result<AmplitudeGrid> {
    check_ratio("lambda", lambda)?;
    if a1.height() != a2.height() || a1.width() != a2.width() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a1.height(), a1.width()),
            actual: format!("{}x{}", a2.height(), a2.width()),
        });
    }
    for grid in [a1, a2] {
        if grid.layout() != Layout::Centered {
            return Err(Error::Layout {
                expected: Layout::Centered,
                actual: grid.layout(),
            });
        }
    }
    region.check_fits(a1.height(), a1.width())?;

    let width = a1.width();
    let mut values = a1.values().to_vec();
    if lambda != 0.0 {
        for r in region.top..region.top + region.height {
            for c in region.left..region.left + region.width {
                let i = r * width + c;
                values[i] = (1.0 - lambda) * a1.values()[i] + lambda * a2.values()[i];
            }
        }
    }
    Ok(AmplitudeGrid::from_raw(a1.height(), width, values, Layout::Centered))
}

/// Intermediate objects of the frequency path for one channel.
#[derive(Debug, Clone)]
pub struct ChannelMix {
    /// Phase of `x1`, centered.
    pub source_phase: PhaseGrid,
    /// Interpolated amplitude, centered.
    pub mixed_amplitude: AmplitudeGrid,
    /// `mixed_amplitude * exp(i source_phase)`, centered. Bins outside the
    /// crop hold the source bins themselves.
    pub spectrum: Spectrum,
}

/// Mixed spectrum of one channel, natural layout. `region` is in centered
/// coordinates and is mapped back, so nothing is shifted.
fn mix_channel(f1: &Spectrum, f2: &Spectrum, lambda: f64, region: CropRegion) -> Vec<Complex64> {
    let (h, w) = (f1.height(), f1.width());
    let mut out = f1.values().to_vec();
    if lambda == 0.0 {
        return out;
    }
    let (dr, dc) = (h - h / 2, w - w / 2);
    for rc in region.top..region.top + region.height {
        let row = (rc + dr) % h * w;
        for cc in region.left..region.left + region.width {
            let i = row + (cc + dc) % w;
            let (v1, v2) = (f1.values()[i], f2.values()[i]);
            let a1 = v1.norm_sqr().sqrt();
            let a = (1.0 - lambda) * a1 + lambda * v2.norm_sqr().sqrt();
            // a * exp(i P(v1)) without the round trip through the angle
            out[i] = if a1 > 0.0 {
                v1 * (a / a1)
            } else {
                Complex64::new(a, 0.0)
            };
        }
    }
    out
}

fn channel_spectra(x1: &Tensor, x2: &Tensor, c: usize) -> (Spectrum, Spectrum) {
    (spectral::dft2_channel(x1, c), spectral::dft2_channel(x2, c))
}

fn check_inputs(x1: &Tensor, x2: &Tensor, lambda: f64, region: CropRegion) -> Result<()> {
    x1.ensure_same_shape(x2)?;
    check_ratio("lambda", lambda)?;
    region.check_fits(x1.height(), x1.width())
}

/// Runs the frequency path up to the recombined spectrum, one entry per channel.
/// `x2` must already have `x1`'s shape.
pub fn frequency_spectra(
    x1: &Tensor,
    x2: &Tensor,
    lambda: f64,
    region: CropRegion,
) -> Result<Vec<ChannelMix>> {
    check_inputs(x1, x2, lambda, region)?;
    let (h, w) = (x1.height(), x1.width());
    (0..x1.channels())
        .map(|c| {
            let (f1, f2) = channel_spectra(x1, x2, c);
            let (a1, source_phase) = spectral::decompose(&spectral::shift(&f1));
            let (a2, _) = spectral::decompose(&spectral::shift(&f2));
            let mixed_amplitude = mix_amplitude(&a1, &a2, lambda, region)?;
            let natural = Spectrum::new(h, w, mix_channel(&f1, &f2, lambda, region), Layout::Natural)?;
            Ok(ChannelMix {
                source_phase,
                mixed_amplitude,
                spectrum: spectral::shift(&natural),
            })
        })
        .collect()
}

/// Unclamped frequency-path image plus the largest dropped imaginary part.
#[derive(Debug, Clone)]
pub struct FrequencyOutput {
    pub image: Tensor,
    pub max_imag_residue: f64,
}

/// Frequency path without the final clamp.
pub fn frequency_augment_unclamped(
    x1: &Tensor,
    x2: &Tensor,
    lambda: f64,
    region: CropRegion,
) -> Result<FrequencyOutput> {
    check_inputs(x1, x2, lambda, region)?;
    let (h, w) = (x1.height(), x1.width());
    let mut planes = Vec::with_capacity(x1.channels());
    let mut max_imag_residue = 0.0f64;
    for c in 0..x1.channels() {
        let (f1, f2) = channel_spectra(x1, x2, c);
        let mixed = Spectrum::new(h, w, mix_channel(&f1, &f2, lambda, region), Layout::Natural)?;
        let inverse = spectral::idft2(&mixed)?;
        max_imag_residue = max_imag_residue.max(inverse.max_imag_residue);
        planes.push(inverse.plane);
    }
    Ok(FrequencyOutput {
        image: tensor_from_planes(planes),
        max_imag_residue,
    })
}

fn tensor_from_planes(planes: Vec<Plane>) -> Tensor {
    Tensor::from_planes(&planes).expect("planes share one shape")
}

/// Frequency path, clamped to `[0, 1]`.
pub fn frequency_augment(x1: &Tensor, x2: &Tensor, lambda: f64, region: CropRegion) -> Result<Tensor> {
    Ok(frequency_augment_unclamped(x1, x2, lambda, region)?
        .image
        .clamp_unit())
}

/// `(1 - w) a + w b`, returning `a` or `b` verbatim at the endpoints.
fn blend(a: &Tensor, b: &Tensor, name: &'static str, w: f64) -> Result<Tensor> {
    check_ratio(name, w)?;
    a.ensure_same_shape(b)?;
    if w == 0.0 {
        return Ok(a.clone());
    }
    if w == 1.0 {
        return Ok(b.clone());
    }
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&p, &q)| (1.0 - w) * p + w * q)
        .collect();
    let (h, wd, c) = a.shape();
    Ok(Tensor::from_raw_unchecked(h, wd, c, data))
}

/// Pixel blend `(1 - lambda1) x1 + lambda1 x2`.
pub fn pixel_blend(x1: &Tensor, x2: &Tensor, lambda1: f64) -> Result<Tensor> {
    blend(x1, x2, "lambda1", lambda1)
}

/// Second-stage fusion `(1 - lambda2) xf + lambda2 xp`.
pub fn fuse(xf: &Tensor, xp: &Tensor, lambda2: f64) -> Result<Tensor> {
    blend(xf, xp, "lambda2", lambda2)
}

/// Reproducibility record for one augmentation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MixAudit {
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crop: Option<CropRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_imag_residue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_index: Option<u64>,
}

/// Per-call random choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixDraw {
    pub lambda: f64,
    pub crop: CropRegion,
}

pub const DEFAULT_RESIDUE_CEILING: f64 = 0.15;

/// Configured mixing engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixer {
    pub params: MixParams,
    pub crop_mode: CropMode,
    pub mode: MixMode,
    /// Largest tolerated imaginary residue, in pixel units (full scale is 1).
    pub residue_ceiling: f64,
}

impl Mixer {
    pub fn new(params: MixParams) -> Result<Self> {
        params.validate()?;
        Ok(Mixer {
            params,
            crop_mode: CropMode::default(),
            mode: MixMode::default(),
            residue_ceiling: DEFAULT_RESIDUE_CEILING,
        })
    }

    pub fn with_crop_mode(mut self, crop_mode: CropMode) -> Self {
        self.crop_mode = crop_mode;
        self
    }

    pub fn with_mode(mut self, mode: MixMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_residue_ceiling(mut self, ceiling: f64) -> Self {
        self.residue_ceiling = ceiling;
        self
    }

    fn effective_lambda2(&self) -> f64 {
        match self.mode {
            MixMode::Both => self.params.lambda2,
            MixMode::Freq => 0.0,
            MixMode::Pixel => 1.0,
        }
    }

    /// Probability gate. Consumes one draw.
    pub fn gate<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.params.prob
    }

    /// Draws `lambda ~ U(0, eta)` and a crop for an `height x width` image.
    pub fn draw<R: Rng + ?Sized>(&self, height: usize, width: usize, rng: &mut R) -> MixDraw {
        let lambda = rng.random::<f64>() * self.params.eta;
        let crop = CropRegion::sample(self.crop_mode, height, width, self.params.crop_ratio, rng);
        MixDraw { lambda, crop }
    }

    /// Deterministic part: mixes with fixed choices. Returns the clamped image
    /// and the imaginary residue (zero when the frequency branch is unused).
    pub fn apply(&self, x1: &Tensor, x2: &Tensor, draw: MixDraw) -> Result<(Tensor, f64)> {
        let x2 = match (x1.height(), x1.width()) == (x2.height(), x2.width()) {
            true => std::borrow::Cow::Borrowed(x2),
            false => std::borrow::Cow::Owned(resize_bilinear(x2, x1.height(), x1.width())?),
        };
        x1.ensure_same_shape(&x2)?;
        let lambda2 = self.effective_lambda2();

        let (freq, residue) = if lambda2 < 1.0 {
            let out = frequency_augment_unclamped(x1, &x2, draw.lambda, draw.crop)?;
            if out.max_imag_residue > self.residue_ceiling {
                return Err(Error::Residue {
                    residue: out.max_imag_residue,
                    ceiling: self.residue_ceiling,
                });
            }
            (Some(out.image), out.max_imag_residue)
        } else {
            (None, 0.0)
        };
        let pixel = if lambda2 > 0.0 {
            Some(pixel_blend(x1, &x2, self.params.lambda1)?)
        } else {
            None
        };
        let fused = match (freq, pixel) {
            (Some(f), Some(p)) => fuse(&f, &p, lambda2)?,
            (Some(f), None) => f,
            (None, Some(p)) => p,
            (None, None) => unreachable!("lambda2 selects at least one branch"),
        };
        Ok((fused.clamp_unit(), residue))
    }

    /// Gate, draw and apply. A closed gate returns `x1` unchanged.
    pub fn mix<R: Rng + ?Sized>(&self, x1: &Tensor, x2: &Tensor, rng: &mut R) -> Result<(Tensor, MixAudit)> {
        if !self.gate(rng) {
            return Ok((x1.clone(), MixAudit::default()));
        }
        let draw = self.draw(x1.height(), x1.width(), rng);
        let (out, residue) = self.apply(x1, x2, draw)?;
        Ok((
            out,
            MixAudit {
                applied: true,
                lambda: Some(draw.lambda),
                crop: Some(draw.crop),
                max_imag_residue: Some(residue),
                ..MixAudit::default()
            },
        ))
    }
}

/// One-call pipeline with default crop mode, both branches and the default residue ceiling.
pub fn frequency_pixel_mix<R: Rng + ?Sized>(
    x1: &Tensor,
    x2: &Tensor,
    params: MixParams,
    rng: &mut R,
) -> Result<(Tensor, MixAudit)> {
    Mixer::new(params)?.mix(x1, x2, rng)
}
