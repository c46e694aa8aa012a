//! Turning numeric grids into images.

use freqpix::{Plane, Tensor};

/// Min-max normalization to `[0, 1]`; a constant grid maps to zeros.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / range).collect()
}

/// Divides by the maximum; an all-zero grid stays zero.
pub fn by_max(values: &[f64]) -> Vec<f64> {
    let hi = values.iter().copied().fold(0.0, f64::max);
    if hi > 0.0 {
        values.iter().map(|v| v / hi).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Stacks planes whose values are already in `[0, 1]` into a tensor.
pub fn stack(planes: Vec<Plane>) -> anyhow::Result<Tensor> {
    Ok(Tensor::from_planes(&planes)?)
}

const UNDEFINED_GRAY: [f64; 3] = [0.5, 0.5, 0.5];

/// Blue (low) to red (high) ramp.
fn ramp(t: f64) -> [f64; 3] {
    let t = t.clamp(0.0, 1.0);
    [t, 0.2 * (1.0 - (2.0 * t - 1.0).abs()), 1.0 - t]
}

/// Renders a `rows x cols` grid as an RGB heatmap with `cell`-pixel squares.
/// `None` cells are gray; defined cells are scaled between the grid's min and max.
pub fn heatmap(grid: &[Vec<Option<f64>>], cell: usize) -> anyhow::Result<Tensor> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    anyhow::ensure!(rows > 0 && cols > 0 && grid.iter().all(|r| r.len() == cols), "heatmap grid must be rectangular and non-empty");
    let defined: Vec<f64> = grid.iter().flatten().flatten().copied().collect();
    let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (h, w) = (rows * cell, cols * cell);
    let mut data = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            let rgb = match grid[y / cell][x / cell] {
                None => UNDEFINED_GRAY,
                Some(v) if hi > lo => ramp((v - lo) / (hi - lo)),
                Some(_) => ramp(0.5),
            };
            data.extend_from_slice(&rgb);
        }
    }
    Ok(Tensor::new(h, w, 3, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizers() {
        assert_eq!(min_max(&[2.0, 4.0, 3.0]), vec![0.0, 1.0, 0.5]);
        assert_eq!(min_max(&[1.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(by_max(&[0.0, 2.0]), vec![0.0, 1.0]);
        assert_eq!(by_max(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn heatmap_cells() {
        let t = heatmap(&[vec![Some(0.0), None], vec![Some(1.0), Some(0.5)]], 2).unwrap();
        assert_eq!(t.shape(), (4, 4, 3));
        assert_eq!(t.get(0, 3, 0), 0.5);
        assert_eq!(t.get(0, 0, 2), 1.0);
        assert_eq!(t.get(3, 0, 0), 1.0);
        assert!(heatmap(&[], 2).is_err());
    }
}
