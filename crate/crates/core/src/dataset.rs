//! Manifests, tensor files and resampling.
//!
//! Two on-disk tensor formats are supported, picked by extension:
//!
//! * `.png`: 8-bit grayscale or RGB. Byte `v` loads as `v / 255`; saving
//!   quantizes with `floor(v * 255 + 0.5)`.
//! * `.fptx`: lossless raw floats. Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FPTX"
//! 4       1     version (1)
//! 5       4     height  u32
//! 9       4     width   u32
//! 13      4     channels u32
//! 17      4*N   f32 payload, row-major, channel-last, N = H*W*C
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::SampleRecord;
use crate::tensor::Tensor;

pub const FPTX_MAGIC: &[u8; 4] = b"FPTX";
pub const FPTX_VERSION: u8 = 1;
const FPTX_HEADER_LEN: usize = 17;

/// Ordered list of records read from a JSONL manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SampleRecord> {
        self.records.iter()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestLine {
    id: String,
    path: PathBuf,
    label: String,
    domain: String,
}

/// Reads a JSONL manifest: one `{"id", "path", "label", "domain"}` object per line.
///
/// Relative paths resolve against the manifest's directory. Blank lines are
/// skipped. Errors carry 1-based line numbers.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Manifest {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let parsed: ManifestLine = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        if parsed.id.is_empty() || parsed.label.is_empty() || parsed.domain.is_empty() {
            return Err(err("id, label and domain must be non-empty".into()));
        }
        if !seen.insert(parsed.id.clone()) {
            return Err(err(format!("duplicate id `{}`", parsed.id)));
        }
        let resolved = if parsed.path.is_absolute() {
            parsed.path
        } else {
            base.join(parsed.path)
        };
        if !resolved.is_file() {
            return Err(err(format!("unreadable path {}", resolved.display())));
        }
        records.push(SampleRecord {
            id: parsed.id,
            path: resolved,
            label: parsed.label,
            domain: parsed.domain,
        });
    }
    if records.is_empty() {
        log::warn!("manifest {} contains no records", path.display());
    }
    Ok(Manifest { records })
}

/// Writes records as JSONL. Paths are written as given.
pub fn write_manifest(path: impl AsRef<Path>, records: &[SampleRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorFormat {
    Png,
    Fptx,
}

impl TensorFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("png") => Ok(TensorFormat::Png),
            Some("fptx") => Ok(TensorFormat::Fptx),
            _ => Err(Error::format(path, "unsupported format (expected .png or .fptx)")),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            TensorFormat::Png => "png",
            TensorFormat::Fptx => "fptx",
        }
    }
}

/// Loads a `.png` or `.fptx` file into a tensor with values in `[0, 1]` (PNG)
/// or as stored (FPTX, which must be finite).
pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let format = TensorFormat::from_path(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        TensorFormat::Png => decode_png(&bytes, path),
        TensorFormat::Fptx => decode_fptx(&bytes, path),
    }
}

pub fn save_tensor(tensor: &Tensor, path: impl AsRef<Path>, format: TensorFormat) -> Result<()> {
    let path = path.as_ref();
    tensor.check_unit_range()?;
    let bytes = match format {
        TensorFormat::Png => encode_png(tensor, path)?,
        TensorFormat::Fptx => encode_fptx(tensor),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// `floor(v * 255 + 0.5)`, so 0.5 maps to 128.
pub fn quantize(v: f64) -> u8 {
    // the argument is positive, so truncation is the floor
    (v.clamp(0.0, 1.0) * 255.0 + 0.5) as u8
}

pub fn decode_png(bytes: &[u8], path: &Path) -> Result<Tensor> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("corrupt png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "png too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, format!("corrupt png: {e}")))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(path, format!("unsupported bit depth {:?}", info.bit_depth)));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(Error::format(path, format!("unsupported color type {other:?}"))),
    };
    let (h, w) = (info.height as usize, info.width as usize);
    let mut data = Vec::with_capacity(h * w * channels);
    for row in buf.chunks_exact(info.line_size).take(h) {
        data.extend(row[..w * channels].iter().map(|&b| f64::from(b) / 255.0));
    }
    Ok(Tensor::from_raw_unchecked(h, w, channels, data))
}

fn encode_png(tensor: &Tensor, path: &Path) -> Result<Vec<u8>> {
    let color = match tensor.channels() {
        1 => png::ColorType::Grayscale,
        3 => png::ColorType::Rgb,
        c => return Err(Error::format(path, format!("png output needs 1 or 3 channels, got {c}"))),
    };
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, tensor.width() as u32, tensor.height() as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::format(path, e.to_string()))?;
        let bytes: Vec<u8> = tensor.data().iter().map(|&v| quantize(v)).collect();
        writer
            .write_image_data(&bytes)
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    Ok(out)
}

pub fn decode_fptx(bytes: &[u8], path: &Path) -> Result<Tensor> {
    if bytes.len() < FPTX_HEADER_LEN {
        return Err(Error::format(path, "truncated FPTX header"));
    }
    if &bytes[..4] != FPTX_MAGIC {
        return Err(Error::format(path, "bad FPTX magic"));
    }
    if bytes[4] != FPTX_VERSION {
        return Err(Error::format(path, format!("unsupported FPTX version {}", bytes[4])));
    }
    let dim = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (h, w, c) = (dim(5), dim(9), dim(13));
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(c))
        .ok_or_else(|| Error::format(path, "FPTX dims overflow"))?;
    let payload = &bytes[FPTX_HEADER_LEN..];
    if payload.len() != expected * 4 {
        let kind = if payload.len() < expected * 4 { "truncated" } else { "oversized" };
        return Err(Error::format(
            path,
            format!(
                "{kind} FPTX payload: {h}x{w}x{c} needs {expected} floats, found {} bytes",
                payload.len()
            ),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
        .collect();
    Tensor::new(h, w, c, data).map_err(|e| Error::format(path, e.to_string()))
}

/// Values are narrowed to `f32`; tensors loaded from FPTX survive unchanged.
pub fn encode_fptx(tensor: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(FPTX_HEADER_LEN + tensor.data().len() * 4);
    out.extend_from_slice(FPTX_MAGIC);
    out.push(FPTX_VERSION);
    for d in [tensor.height(), tensor.width(), tensor.channels()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in tensor.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Bilinear resampling with half-pixel centers and edge clamping.
/// Returns a clone when the size is unchanged.
pub fn resize_bilinear(tensor: &Tensor, new_h: usize, new_w: usize) -> Result<Tensor> {
    if new_h == 0 || new_w == 0 {
        return Err(Error::Dimension(format!("resize target {new_h}x{new_w} has a zero extent")));
    }
    let (h, w, c) = tensor.shape();
    if (h, w) == (new_h, new_w) {
        return Ok(tensor.clone());
    }
    let taps = |out_len: usize, in_len: usize| -> Vec<(usize, usize, f64)> {
        let scale = in_len as f64 / out_len as f64;
        (0..out_len)
            .map(|i| {
                let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
                let lo = src.floor() as usize;
                let hi = (lo + 1).min(in_len - 1);
                (lo, hi, src - lo as f64)
            })
            .collect()
    };
    let rows = taps(new_h, h);
    let cols = taps(new_w, w);
    let src = tensor.data();
    let mut data = Vec::with_capacity(new_h * new_w * c);
    for &(r0, r1, fy) in &rows {
        for &(c0, c1, fx) in &cols {
            for ch in 0..c {
                let at = |r: usize, col: usize| src[(r * w + col) * c + ch];
                let top = at(r0, c0) * (1.0 - fx) + at(r0, c1) * fx;
                let bottom = at(r1, c0) * (1.0 - fx) + at(r1, c1) * fx;
                data.push(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    Tensor::new(new_h, new_w, c, data)
}
