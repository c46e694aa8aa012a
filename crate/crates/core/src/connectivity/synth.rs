//! Synthetic images with a controlled feature decomposition.
//!
//! Every pixel is `0.5 + obj + robust + spu + noise`, clamped to `[0, 1]`:
//!
//! | block    | depends on      | rendering                                         |
//! |----------|-----------------|---------------------------------------------------|
//! | `obj`    | class           | a square at a class-specific position             |
//! | `robust` | class + domain  | global brightness offset, sign from `(c + d)`      |
//! | `spu`    | domain          | a cosine grating; its frequency is the domain's band |
//! | `noise`  | neither         | i.i.d. Gaussian                                    |
//!
//! The domain grating lives at a single conjugate pair of frequency bins and
//! the offset lives in the DC bin, so both are carried by amplitude. The class
//! square differs between classes only by position, which is carried by phase.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LabeledSample;
use crate::error::{Error, Result};
use crate::tensor::{Plane, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: usize,
    pub domains: usize,
    pub height: usize,
    pub width: usize,
    pub samples_per_cell: usize,
    /// Side of the class square, in pixels.
    pub obj_side: usize,
    /// Intensity of the class square.
    pub obj_separation: f64,
    /// Magnitude of the (class, domain) brightness offset.
    pub robust_separation: f64,
    /// Amplitude of the domain grating.
    pub spu_separation: f64,
    /// Grating frequency in cycles per image.
    pub spu_band: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 2,
            domains: 2,
            height: 32,
            width: 32,
            samples_per_cell: 100,
            obj_side: 8,
            obj_separation: 0.035,
            robust_separation: 0.008,
            spu_separation: 0.012,
            spu_band: 4,
            noise_std: 0.1,
            seed: 0,
        }
    }
}

/// The four additive blocks of one sample, before the 0.5 offset and clamping.
#[derive(Debug, Clone)]
pub struct SynthBlocks {
    pub obj: Plane,
    pub robust: Plane,
    pub spu: Plane,
    pub noise: Plane,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Synth(m.to_string()));
        if self.classes < 1 || self.domains < 1 {
            return fail("classes and domains must be >= 1");
        }
        if self.height < 4 || self.width < 4 {
            return fail("height and width must be >= 4");
        }
        if self.samples_per_cell == 0 {
            return fail("samples_per_cell must be >= 1");
        }
        if self.obj_side == 0 || self.obj_side > self.height.min(self.width) / 2 {
            return fail("obj_side must be in 1..=min(height, width) / 2");
        }
        if 2 * self.spu_band >= self.height.min(self.width) {
            return fail("spu_band must be below the Nyquist limit");
        }
        for (name, v) in [
            ("obj_separation", self.obj_separation),
            ("robust_separation", self.robust_separation),
            ("spu_separation", self.spu_separation),
            ("noise_std", self.noise_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Synth(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Parses a TOML spec; missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::ConfigParse(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::ConfigParse(m) => Error::ConfigParse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Top-left corner of the class square: classes sit on a ring around the center.
    pub fn obj_position(&self, class: usize) -> (usize, usize) {
        let angle = 2.0 * PI * class as f64 / self.classes as f64;
        let radius = (self.height.min(self.width) as f64 / 4.0).floor();
        let cy = self.height as f64 / 2.0 - radius * angle.cos();
        let cx = self.width as f64 / 2.0 + radius * angle.sin();
        let half = self.obj_side as f64 / 2.0;
        let top = (cy - half).round().clamp(0.0, (self.height - self.obj_side) as f64);
        let left = (cx - half).round().clamp(0.0, (self.width - self.obj_side) as f64);
        (top as usize, left as usize)
    }

    /// Frequency vector `(rows, cols)` of the domain grating, in cycles per image.
    pub fn spu_frequency(&self, domain: usize) -> (i64, i64) {
        let angle = PI * domain as f64 / self.domains as f64;
        let band = self.spu_band as f64;
        ((band * angle.sin()).round() as i64, (band * angle.cos()).round() as i64)
    }

    fn obj_mask(&self, class: usize) -> Plane {
        let (top, left) = self.obj_position(class);
        let side = self.obj_side;
        Plane::from_fn(self.height, self.width, |y, x| {
            let inside = y >= top && y < top + side && x >= left && x < left + side;
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .expect("validated dims")
    }

    /// Renders the blocks of one `(class, domain)` sample with noise from `rng`.
    pub fn render_blocks<R: Rng + ?Sized>(&self, class: usize, domain: usize, rng: &mut R) -> SynthBlocks {
        let (h, w) = (self.height, self.width);
        let mask = self.obj_mask(class);
        let obj = Plane::new(h, w, mask.data().iter().map(|m| m * self.obj_separation).collect())
            .expect("validated dims");
        let sign = if (class + domain).is_multiple_of(2) { 1.0 } else { -1.0 };
        let robust = Plane::new(h, w, vec![self.robust_separation * sign; h * w]).expect("validated dims");
        let (fy, fx) = self.spu_frequency(domain);
        let spu = Plane::from_fn(h, w, |y, x| {
            let turns = fy as f64 * y as f64 / h as f64 + fx as f64 * x as f64 / w as f64;
            self.spu_separation * (2.0 * PI * turns).cos()
        })
        .expect("validated dims");
        let normal = Normal::new(0.0, self.noise_std).expect("noise_std validated");
        let noise = Plane::from_fn(h, w, |_, _| normal.sample(rng)).expect("validated dims");
        SynthBlocks {
            obj,
            robust,
            spu,
            noise,
        }
    }

    pub fn compose(&self, blocks: &SynthBlocks) -> Tensor {
        let data = (0..self.height * self.width)
            .map(|i| {
                let v = 0.5
                    + blocks.obj.data()[i]
                    + blocks.robust.data()[i]
                    + blocks.spu.data()[i]
                    + blocks.noise.data()[i];
                v.clamp(0.0, 1.0)
            })
            .collect();
        Tensor::new(self.height, self.width, 1, data).expect("finite by construction")
    }
}

/// Generates `classes x domains x samples_per_cell` samples, cell by cell
/// (class-major). Labels are `"c{k}"`, domains `"d{k}"`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<LabeledSample>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.classes * spec.domains * spec.samples_per_cell);
    for class in 0..spec.classes {
        for domain in 0..spec.domains {
            for _ in 0..spec.samples_per_cell {
                let blocks = spec.render_blocks(class, domain, &mut rng);
                out.push(LabeledSample {
                    tensor: spec.compose(&blocks),
                    label: class_name(class),
                    domain: domain_name(domain),
                });
            }
        }
    }
    Ok(out)
}

pub fn class_name(class: usize) -> String {
    format!("c{class}")
}

pub fn domain_name(domain: usize) -> String {
    format!("d{domain}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::derive_stream;

    #[test]
    fn obj_pattern_ignores_noise_seed() {
        let spec = SynthSpec::default();
        let a = spec.render_blocks(1, 0, &mut derive_stream(1, 0));
        let b = spec.render_blocks(1, 0, &mut derive_stream(2, 0));
        assert_eq!(a.obj, b.obj);
        assert_ne!(a.noise, b.noise);
        // the same class in another domain keeps its square
        let c = spec.render_blocks(1, 1, &mut derive_stream(2, 0));
        assert_eq!(a.obj, c.obj);
        assert_ne!(a.spu, c.spu);
    }

    #[test]
    fn default_layout() {
        let spec = SynthSpec::default();
        assert_ne!(spec.obj_position(0), spec.obj_position(1));
        assert_eq!(spec.spu_frequency(0), (0, 4));
        assert_eq!(spec.spu_frequency(1), (4, 0));
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.len(), 400);
        assert_eq!(data[0].label, "c0");
        assert_eq!(data[100].domain, "d1");
        assert!(data.iter().all(|s| s.tensor.check_unit_range().is_ok()));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_synthetic(&SynthSpec { height: 2, ..SynthSpec::default() }).is_err());
        assert!(generate_synthetic(&SynthSpec { spu_band: 16, ..SynthSpec::default() }).is_err());
        assert!(generate_synthetic(&SynthSpec { noise_std: -1.0, ..SynthSpec::default() }).is_err());
        assert!(generate_synthetic(&SynthSpec { samples_per_cell: 0, ..SynthSpec::default() }).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = SynthSpec { samples_per_cell: 3, ..SynthSpec::default() };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.tensor == q.tensor));
    }

    #[test]
    fn toml_spec() {
        let spec = SynthSpec::from_toml_str("seed = 3\nsamples_per_cell = 10\n").unwrap();
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.samples_per_cell, 10);
        assert_eq!(spec.obj_side, SynthSpec::default().obj_side);
        assert!(matches!(SynthSpec::from_toml_str("sed = 3"), Err(Error::ConfigParse(_))));
        assert!(matches!(SynthSpec::from_toml_str("height = 2"), Err(Error::Synth(_))));
    }
}
