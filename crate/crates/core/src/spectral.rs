//! Exact 2D discrete Fourier analysis.
//!
//! The forward transform is unnormalized,
//! `F(u, v) = sum_h sum_w x(h, w) exp(-2 pi i (h u / H + w v / W))`,
//! and the inverse carries the `1 / (H W)` factor. Any grid size is accepted;
//! `rustfft` picks mixed-radix or Bluestein plans as needed. The [`naive`]
//! module keeps a quadratic-time double sum around as an independent check.
//!
//! Amplitude and phase use the four-quadrant angle, so [`decompose`] and
//! [`recompose`] are exact inverses wherever the amplitude is non-zero.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{Plane, Tensor};

/// Where the zero-frequency bin lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// DC at `(0, 0)`, the transform's native order.
    Natural,
    /// DC at `(H / 2, W / 2)` (integer division).
    Centered,
}

impl Layout {
    pub fn toggled(self) -> Layout {
        match self {
            Layout::Natural => Layout::Centered,
            Layout::Centered => Layout::Natural,
        }
    }
}

/// Complex `H x W` grid of frequency bins with an explicit layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    values: Vec<Complex64>,
    layout: Layout,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, values: Vec<Complex64>, layout: Layout) -> Result<Self> {
        check_grid(height, width, values.len())?;
        Ok(Spectrum {
            height,
            width,
            values,
            layout,
        })
    }

    pub fn zeros(height: usize, width: usize, layout: Layout) -> Result<Self> {
        Spectrum::new(height, width, vec![Complex64::new(0.0, 0.0); height * width], layout)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.width + col]
    }

    /// Bin index of the DC term under the current layout.
    pub fn dc_index(&self) -> (usize, usize) {
        match self.layout {
            Layout::Natural => (0, 0),
            Layout::Centered => (self.height / 2, self.width / 2),
        }
    }
}

/// Per-bin magnitude, always non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    height: usize,
    width: usize,
    values: Vec<f64>,
    layout: Layout,
}

impl AmplitudeGrid {
    pub fn new(height: usize, width: usize, values: Vec<f64>, layout: Layout) -> Result<Self> {
        check_grid(height, width, values.len())?;
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Dimension(format!(
                "amplitude at index {index} is {} (must be finite and >= 0)",
                values[index]
            )));
        }
        Ok(AmplitudeGrid {
            height,
            width,
            values,
            layout,
        })
    }

    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<f64>, layout: Layout) -> Self {
        AmplitudeGrid {
            height,
            width,
            values,
            layout,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Per-bin angle in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    height: usize,
    width: usize,
    values: Vec<f64>,
    layout: Layout,
}

impl PhaseGrid {
    pub fn new(height: usize, width: usize, values: Vec<f64>, layout: Layout) -> Result<Self> {
        check_grid(height, width, values.len())?;
        if let Some(index) = values.iter().position(|v| !(*v > -PI && *v <= PI)) {
            return Err(Error::Dimension(format!(
                "phase at index {index} is {} (must lie in (-pi, pi])",
                values[index]
            )));
        }
        Ok(PhaseGrid {
            height,
            width,
            values,
            layout,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

fn check_grid(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!("{height}x{width} grid is empty")));
    }
    if len != height * width {
        return Err(Error::ShapeMismatch {
            expected: format!("{} bins ({height}x{width})", height * width),
            actual: format!("{len} bins"),
        });
    }
    Ok(())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Row transforms in place, then column transforms through a gather buffer
/// that holds a block of columns at a time.
fn fft2_in_place(height: usize, width: usize, buf: &mut [Complex64], direction: FftDirection) {
    const BLOCK: usize = 8;
    let row_fft = plan(width, direction);
    let col_fft = plan(height, direction);
    let scratch_len = row_fft
        .get_inplace_scratch_len()
        .max(col_fft.get_inplace_scratch_len());
    let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

    row_fft.process_with_scratch(buf, &mut scratch);

    let mut columns = vec![Complex64::new(0.0, 0.0); height * BLOCK];
    for c0 in (0..width).step_by(BLOCK) {
        let n = BLOCK.min(width - c0);
        let block = &mut columns[..height * n];
        for (r, row) in buf.chunks_exact(width).enumerate() {
            for (k, v) in row[c0..c0 + n].iter().enumerate() {
                block[k * height + r] = *v;
            }
        }
        col_fft.process_with_scratch(block, &mut scratch);
        for (r, row) in buf.chunks_exact_mut(width).enumerate() {
            for (k, v) in row[c0..c0 + n].iter_mut().enumerate() {
                *v = block[k * height + r];
            }
        }
    }
}

/// Forward 2D DFT of one channel. The result is in [`Layout::Natural`].
pub fn dft2(grid: &Plane) -> Result<Spectrum> {
    if let Some(index) = grid.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(dft2_real(grid.height(), grid.width(), grid.data().iter().copied()))
}

/// [`dft2`] of channel `c` of a tensor, read in place.
pub fn dft2_channel(tensor: &Tensor, c: usize) -> Spectrum {
    assert!(c < tensor.channels(), "channel {c} out of range");
    let values = tensor.data()[c..].iter().step_by(tensor.channels()).copied();
    dft2_real(tensor.height(), tensor.width(), values)
}

fn dft2_real(height: usize, width: usize, values: impl Iterator<Item = f64>) -> Spectrum {
    let mut values: Vec<Complex64> = values.map(|v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(height, width, &mut values, FftDirection::Forward);
    Spectrum {
        height,
        width,
        values,
        layout: Layout::Natural,
    }
}

/// Output of [`idft2`]: the real part, and how much imaginary part was dropped.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub plane: Plane,
    /// Largest `|Im|` over all pixels. Near zero for Hermitian-symmetric input.
    pub max_imag_residue: f64,
}

/// Inverse 2D DFT (with the `1 / (H W)` factor). Requires [`Layout::Natural`].
pub fn idft2(spectrum: &Spectrum) -> Result<Inverse> {
    if spectrum.layout != Layout::Natural {
        return Err(Error::Layout {
            expected: Layout::Natural,
            actual: spectrum.layout,
        });
    }
    let (height, width) = (spectrum.height, spectrum.width);
    let mut values = spectrum.values.clone();
    fft2_in_place(height, width, &mut values, FftDirection::Inverse);
    let scale = 1.0 / (height * width) as f64;
    let mut max_imag_residue = 0.0f64;
    let real = values
        .iter()
        .map(|v| {
            max_imag_residue = max_imag_residue.max((v.im * scale).abs());
            v.re * scale
        })
        .collect();
    Ok(Inverse {
        plane: Plane::new(height, width, real)?,
        max_imag_residue,
    })
}

/// Four-quadrant angle in `(-pi, pi]`; the degenerate bin `(0, 0)` maps to 0.
pub fn phase_of(v: Complex64) -> f64 {
    if v.re == 0.0 && v.im == 0.0 {
        return 0.0;
    }
    let p = v.im.atan2(v.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// Splits a spectrum into amplitude and phase grids sharing its layout.
pub fn decompose(spectrum: &Spectrum) -> (AmplitudeGrid, PhaseGrid) {
    let (amp, phase) = spectrum
        .values
        .iter()
        .map(|v| (v.norm(), phase_of(*v)))
        .unzip();
    (
        AmplitudeGrid::from_raw(spectrum.height, spectrum.width, amp, spectrum.layout),
        PhaseGrid {
            height: spectrum.height,
            width: spectrum.width,
            values: phase,
            layout: spectrum.layout,
        },
    )
}

/// `amplitude * exp(+i phase)` per bin. Zero amplitude yields an exact zero bin.
pub fn recompose(amplitude: &AmplitudeGrid, phase: &PhaseGrid) -> Result<Spectrum> {
    if amplitude.height != phase.height || amplitude.width != phase.width {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", amplitude.height, amplitude.width),
            actual: format!("{}x{}", phase.height, phase.width),
        });
    }
    if amplitude.layout != phase.layout {
        return Err(Error::Layout {
            expected: amplitude.layout,
            actual: phase.layout,
        });
    }
    let values = amplitude
        .values
        .iter()
        .zip(&phase.values)
        .map(|(&a, &p)| polar(a, p))
        .collect();
    Spectrum::new(amplitude.height, amplitude.width, values, amplitude.layout)
}

/// `a * exp(+i p)`, with an exact zero for `a == 0`.
fn polar(a: f64, p: f64) -> Complex64 {
    if a == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (s, c) = p.sin_cos();
    Complex64::new(a * c, a * s)
}

/// Toggles the layout: natural spectra are centered, centered ones are restored.
pub fn shift(spectrum: &Spectrum) -> Spectrum {
    let values = match spectrum.layout {
        Layout::Natural => fftshift(spectrum.height, spectrum.width, &spectrum.values),
        Layout::Centered => ifftshift(spectrum.height, spectrum.width, &spectrum.values),
    };
    Spectrum {
        height: spectrum.height,
        width: spectrum.width,
        values,
        layout: spectrum.layout.toggled(),
    }
}

/// Moves the element at `(0, 0)` to `(H / 2, W / 2)`, cyclically.
pub fn fftshift<T: Copy>(height: usize, width: usize, grid: &[T]) -> Vec<T> {
    roll(height, width, grid, height / 2, width / 2)
}

/// Exact inverse of [`fftshift`], also for odd extents.
pub fn ifftshift<T: Copy>(height: usize, width: usize, grid: &[T]) -> Vec<T> {
    roll(height, width, grid, height - height / 2, width - width / 2)
}

fn roll<T: Copy>(height: usize, width: usize, grid: &[T], dr: usize, dc: usize) -> Vec<T> {
    assert_eq!(grid.len(), height * width);
    let mut out = grid.to_vec();
    for r in 0..height {
        let dst_row = (r + dr) % height;
        for c in 0..width {
            out[dst_row * width + (c + dc) % width] = grid[r * width + c];
        }
    }
    out
}

/// Straight double-sum transforms, `O((H W)^2)`. Slow on purpose: they exist to
/// check the fast path, so they share nothing with it.
pub mod naive {
    use super::{Complex64, Layout, Spectrum};
    use crate::tensor::Plane;
    use std::f64::consts::PI;

    /// Forward DFT evaluated term by term.
    pub fn dft2(grid: &Plane) -> Spectrum {
        let (h, w) = (grid.height(), grid.width());
        let mut out = Vec::with_capacity(h * w);
        for u in 0..h {
            for v in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        // reduce the exponent mod 1 before scaling to keep the angle small
                        let turns = ((y * u) % h) as f64 / h as f64 + ((x * v) % w) as f64 / w as f64;
                        let angle = -2.0 * PI * turns;
                        acc += grid.get(y, x) * Complex64::new(angle.cos(), angle.sin());
                    }
                }
                out.push(acc);
            }
        }
        Spectrum::new(h, w, out, Layout::Natural).expect("plane dims are valid")
    }

    /// Inverse DFT evaluated term by term, returning the full complex result.
    pub fn idft2(spectrum: &Spectrum) -> Vec<Complex64> {
        let (h, w) = (spectrum.height(), spectrum.width());
        let mut out = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for u in 0..h {
                    for v in 0..w {
                        let turns = ((y * u) % h) as f64 / h as f64 + ((x * v) % w) as f64 / w as f64;
                        let angle = 2.0 * PI * turns;
                        acc += spectrum.get(u, v) * Complex64::new(angle.cos(), angle.sin());
                    }
                }
                out.push(acc / (h * w) as f64);
            }
        }
        out
    }
}
