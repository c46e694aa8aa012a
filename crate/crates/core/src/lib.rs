//! Frequency-pixel mixing augmentation and a desk-scale connectivity lab.
//!
//! The augmentation mixes a source image with a target image from another
//! domain along two paths: the amplitude spectra are interpolated inside a
//! crop while the source keeps its phase, and the pixels are blended
//! directly. The two results are fused with a second weight.
//!
//! ```
//! use freqpix::{derive_stream, frequency_pixel_mix, MixParams, Tensor};
//!
//! let x1 = Tensor::filled(16, 16, 3, 0.2)?;
//! let x2 = Tensor::filled(16, 16, 3, 0.8)?;
//! let params = MixParams { prob: 1.0, ..MixParams::default() };
//! let (out, audit) = frequency_pixel_mix(&x1, &x2, params, &mut derive_stream(7, 0))?;
//! assert!(audit.applied);
//! assert_eq!(out.shape(), (16, 16, 3));
//! # Ok::<(), freqpix::Error>(())
//! ```
//!
//! Module map:
//!
//! * [`spectral`]: 2D DFT, amplitude/phase, layout shifts, naive reference.
//! * [`mixing`]: amplitude interpolation, pixel blend, fusion, the [`Mixer`].
//! * [`sampler`]: target selection and per-sample random streams.
//! * [`config`]: run configuration files.
//! * [`dataset`]: manifests, PNG and FPTX tensors, bilinear resize.
//! * [`connectivity`]: pair datasets, the linear probe, synthetic data, reports.
//!
//! A longer walk-through lives in the `book/` directory of the repository;
//! its code listings are compiled and run as doctests of this crate.

pub mod config;
pub mod connectivity;
pub mod dataset;
mod error;
pub mod mixing;
pub mod pipeline;
pub mod sampler;
pub mod spectral;
mod tensor;

pub use config::{load_config, RunConfig};
pub use error::{Error, Result};
pub use mixing::{
    frequency_pixel_mix, CropMode, CropRegion, MixAudit, MixMode, MixParams, Mixer,
};
pub use sampler::{derive_stream, select_target, PairingStrategy, SampleRecord, SampleRng};
pub use tensor::{Plane, Tensor};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/mixing.md")]
    mod mixing {}
    #[doc = include_str!("../../../book/src/streams.md")]
    mod streams {}
    #[doc = include_str!("../../../book/src/files.md")]
    mod files {}
    #[doc = include_str!("../../../book/src/connectivity.md")]
    mod connectivity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
