//! Real-valued image carriers.
//!
//! A [`Tensor`] is an `H x W x C` grid stored row-major with channels last,
//! the layout used by every loader, saver and transform in the crate. A
//! [`Plane`] is a single channel of it, the unit the 2D transforms work on.

use crate::error::{Error, Result};

/// `H x W x C` real grid, row-major, channel-last. Nominal value range is `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, checking the length and that every value is finite.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, channels)?;
        if data.len() != height * width * channels {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values ({height}x{width}x{channels})", height * width * channels),
                actual: format!("{} values", data.len()),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Tensor {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        check_dims(height, width, channels)?;
        Tensor::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Tensor::filled(height, width, channels, 0.0)
    }

    /// Interleaves single-channel planes into one tensor. All planes must share a shape.
    pub fn from_planes(planes: &[Plane]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::Dimension("no planes given".into()))?;
        let (height, width) = (first.height, first.width);
        let channels = planes.len();
        let mut data = vec![0.0; height * width * channels];
        for (c, plane) in planes.iter().enumerate() {
            if plane.height != height || plane.width != width {
                return Err(Error::ShapeMismatch {
                    expected: format!("{height}x{width}"),
                    actual: format!("{}x{}", plane.height, plane.width),
                });
            }
            for (i, &v) in plane.data.iter().enumerate() {
                data[i * channels + c] = v;
            }
        }
        Tensor::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(height, width, channels)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Copies channel `channel` out as a plane.
    pub fn plane(&self, channel: usize) -> Plane {
        assert!(channel < self.channels, "channel {channel} out of range");
        let data = self
            .data
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect();
        Plane {
            height: self.height,
            width: self.width,
            data,
        }
    }

    pub fn planes(&self) -> Vec<Plane> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    /// Clamps every value into `[0, 1]`.
    pub fn clamp_unit(mut self) -> Self {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }

    /// Fails with [`Error::OutOfRange`] on the first value outside `[0, 1]`.
    pub fn check_unit_range(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|v| !(0.0..=1.0).contains(v))
        {
            Some(index) => Err(Error::OutOfRange {
                index,
                value: self.data[index],
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: shape_str(self.shape()),
                actual: shape_str(other.shape()),
            });
        }
        Ok(())
    }

    pub(crate) fn from_raw_unchecked(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        Tensor {
            height,
            width,
            channels,
            data,
        }
    }
}

fn shape_str((h, w, c): (usize, usize, usize)) -> String {
    format!("{h}x{w}x{c}")
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 || channels == 0 {
        return Err(Error::Dimension(format!(
            "{height}x{width}x{channels} has a zero extent"
        )));
    }
    Ok(())
}

/// Single-channel `H x W` real grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Builds a plane. Unlike [`Tensor::new`] this does not check finiteness;
    /// the transforms do that where it matters.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!("{height}x{width} grid is empty")));
        }
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", height * width),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(Plane {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Plane::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}
