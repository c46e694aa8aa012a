use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("spectrum layout must be {expected:?}, found {actual:?}")]
    Layout {
        expected: crate::spectral::Layout,
        actual: crate::spectral::Layout,
    },

    #[error("crop region {region} does not fit in a {height}x{width} spectrum")]
    RegionOutOfBounds {
        region: String,
        height: usize,
        width: usize,
    },

    #[error("mixing ratio {name}={value} must lie in [0, 1]")]
    Ratio { name: &'static str, value: f64 },

    #[error("imaginary residue {residue:.4} exceeds ceiling {ceiling:.4}")]
    Residue { residue: f64, ceiling: f64 },

    #[error("no cross-domain candidate for `{source_id}` (domain `{domain}`)")]
    NoCrossDomainCandidate { source_id: String, domain: String },

    #[error("target pool is empty")]
    EmptyPool,

    #[error("config: {field} = {value} is out of range ({expected})")]
    ConfigRange {
        field: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("config: {0}")]
    ConfigParse(String),

    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty group for cell (class `{class}`, domain `{domain}`)")]
    EmptyGroup { class: String, domain: String },

    #[error("probe training split must contain both labels")]
    SingleLabel,

    #[error("empty {0} split")]
    EmptySplit(&'static str),

    #[error("data source has {classes} class(es) and {domains} domain(s); need at least 2 of each")]
    Diversity { classes: usize, domains: usize },

    #[error("pair kind {kind:?} is inconsistent with its cells")]
    PairKind { kind: crate::connectivity::PairKind },

    #[error("invalid synthetic spec: {0}")]
    Synth(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
