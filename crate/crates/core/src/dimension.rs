//! Box-counting dimension on dyadic grids over the unit square.
//!
//! Grid cells at scale `m` have side `2^-m`, so their edges fall on the
//! same dyadic lattice as the triangle vertices and every intersection
//! test is an integer comparison.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::gasket::{initial_state, DyadicTriangle, GasketState};

/// `log 3 / log 2`.
pub const SIERPINSKI_DIMENSION: f64 = 1.584_962_500_721_156_3;

/// Finest grid scale accepted (a `2^14 × 2^14` bitmap is 32 MiB).
pub const MAX_SCALE: u32 = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("scale {m} is finer than the gasket depth {depth}")]
    ScaleFinerThanDepth { m: u32, depth: u32 },
    #[error("window {m_min}..={m_max} needs at least three scales")]
    InsufficientScales { m_min: u32, m_max: u32 },
    #[error("scale {0} exceeds the supported maximum {MAX_SCALE}")]
    ScaleTooLarge(u32),
    #[error("point ({0}, {1}) lies outside the unit square")]
    OutsideUnitSquare(f64, f64),
}

/// Which cells count as occupied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellConvention {
    /// The open interior of the cell meets the set.
    #[default]
    Interior,
    /// The closed cell meets the closed set; touching along an edge or at
    /// a corner counts.
    Closed,
}

struct Bitmap {
    side: i64,
    words: Vec<u64>,
}

impl Bitmap {
    fn new(m: u32) -> Self {
        let side = 1i64 << m;
        let bits = (side * side) as usize;
        Bitmap {
            side,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn set(&mut self, x: i64, y: i64) {
        if (0..self.side).contains(&x) && (0..self.side).contains(&y) {
            let i = (y * self.side + x) as usize;
            self.words[i / 64] |= 1 << (i % 64);
        }
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Closed intersection of cell `(gx, gy)` at scale `m` with a triangle,
/// in integer units of `2^-fine` where `fine ≥ max(m, leg_log2)`.
fn closed_hit(t: &DyadicTriangle, m: u32, fine: u32, gx: i64, gy: i64) -> bool {
    let (sx, sy) = t.orientation.signs();
    let px = t.corner.0.numerator_at(fine).expect("corner on lattice") as i128;
    let py = t.corner.1.numerator_at(fine).expect("corner on lattice") as i128;
    let leg = 1i128 << (fine - t.leg_log2);
    let c = 1i128 << (fine - m);
    let (x0, x1) = (gx as i128 * c, (gx as i128 + 1) * c);
    let (y0, y1) = (gy as i128 * c, (gy as i128 + 1) * c);
    // the cell in the triangle's (u, v) frame
    let (u0, u1) = if sx > 0 {
        (x0 - px, x1 - px)
    } else {
        (px - x1, px - x0)
    };
    let (v0, v1) = if sy > 0 {
        (y0 - py, y1 - py)
    } else {
        (py - y1, py - y0)
    };
    u1 >= 0 && v1 >= 0 && u0.max(0) + v0.max(0) <= leg
}

fn mark_triangle(t: &DyadicTriangle, m: u32, conv: CellConvention, grid: &mut Bitmap) {
    let k = t.leg_log2;
    let (cx, cy) = t.cell().expect("triangle corner on its own lattice");
    let fine = m.max(k);
    if m <= k {
        let shift = k - m;
        let (gx, gy) = (cx >> shift, cy >> shift);
        match conv {
            CellConvention::Interior => grid.set(gx, gy),
            CellConvention::Closed => {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if closed_hit(t, m, fine, gx + dx, gy + dy) {
                            grid.set(gx + dx, gy + dy);
                        }
                    }
                }
            }
        }
        return;
    }
    let n = 1i64 << (m - k);
    let (bx, by) = (cx * n, cy * n);
    let (sx, sy) = t.orientation.signs();
    match conv {
        CellConvention::Interior => {
            // a cell a steps along x and b steps along y from the right
            // angle has interior points in the triangle iff a + b < n
            for b in 0..n {
                for a in 0..n - b {
                    let gx = if sx > 0 { bx + a } else { bx + n - 1 - a };
                    let gy = if sy > 0 { by + b } else { by + n - 1 - b };
                    grid.set(gx, gy);
                }
            }
        }
        CellConvention::Closed => {
            for gy in by - 1..=by + n {
                for gx in bx - 1..=bx + n {
                    if closed_hit(t, m, fine, gx, gy) {
                        grid.set(gx, gy);
                    }
                }
            }
        }
    }
}

/// Occupied cells of the `2^m × 2^m` grid for a union of solid triangles
/// inside the unit square. Valid at any scale up to [`MAX_SCALE`].
pub fn box_count_triangles(
    triangles: &[DyadicTriangle],
    m: u32,
    conv: CellConvention,
) -> Result<u64, DimensionError> {
    if m > MAX_SCALE {
        return Err(DimensionError::ScaleTooLarge(m));
    }
    let mut grid = Bitmap::new(m);
    for t in triangles {
        mark_triangle(t, m, conv, &mut grid);
    }
    Ok(grid.count())
}

/// Box count of a gasket state at scale `m ≤ depth` (interior convention).
pub fn box_count(gasket: &GasketState, m: u32) -> Result<u64, DimensionError> {
    box_count_with(gasket, m, CellConvention::Interior)
}

pub fn box_count_with(
    gasket: &GasketState,
    m: u32,
    conv: CellConvention,
) -> Result<u64, DimensionError> {
    if m > gasket.depth() {
        return Err(DimensionError::ScaleFinerThanDepth {
            m,
            depth: gasket.depth(),
        });
    }
    box_count_triangles(gasket.triangles(), m, conv)
}

/// Half-open cell convention: a point belongs to exactly one cell, the one
/// with index `floor(x · 2^m)` (the right and top edges fold into the last
/// cell).
pub fn box_count_points(points: &[(f64, f64)], m: u32) -> Result<u64, DimensionError> {
    if m > MAX_SCALE {
        return Err(DimensionError::ScaleTooLarge(m));
    }
    let side = (1u64 << m) as f64;
    let last = (1u64 << m) - 1;
    let cell = |v: f64| ((v * side).floor() as u64).min(last);
    let mut occupied = HashSet::new();
    for &(x, y) in points {
        if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
            return Err(DimensionError::OutsideUnitSquare(x, y));
        }
        occupied.insert((cell(x), cell(y)));
    }
    Ok(occupied.len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountFit {
    /// `(m, N(m))` pairs over the window.
    pub samples: Vec<(u32, u64)>,
    /// Least-squares slope of `log N` against `m · log 2`.
    pub dimension: f64,
    /// Coefficient of determination of that regression.
    pub fit_quality: f64,
    pub scale_window: (u32, u32),
    pub convention: CellConvention,
}

fn check_window(window: (u32, u32)) -> Result<(), DimensionError> {
    let (m_min, m_max) = window;
    if m_max < m_min || m_max - m_min < 2 {
        return Err(DimensionError::InsufficientScales { m_min, m_max });
    }
    if m_max > MAX_SCALE {
        return Err(DimensionError::ScaleTooLarge(m_max));
    }
    Ok(())
}

/// Ordinary least squares in base-2 logs: the slope of `log2 N` against
/// `m` equals the slope of `ln N` against `m · ln 2`, and for exact powers
/// of two it is computed without rounding.
pub fn fit_samples(
    samples: Vec<(u32, u64)>,
    convention: CellConvention,
) -> Result<BoxCountFit, DimensionError> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) if samples.len() >= 3 => (f.0, l.0),
        _ => {
            let m = samples.first().map_or(0, |s| s.0);
            return Err(DimensionError::InsufficientScales {
                m_min: m,
                m_max: samples.last().map_or(m, |s| s.0),
            });
        }
    };
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|s| (s.1 as f64).log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let fit_quality = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(BoxCountFit {
        samples,
        dimension: slope,
        fit_quality,
        scale_window: (first, last),
        convention,
    })
}

/// Fits the gasket's dimension over `window = (m_min, m_max)`.
pub fn fit_dimension(
    gasket: &GasketState,
    window: (u32, u32),
) -> Result<BoxCountFit, DimensionError> {
    fit_dimension_with(gasket, window, CellConvention::Interior)
}

pub fn fit_dimension_with(
    gasket: &GasketState,
    window: (u32, u32),
    conv: CellConvention,
) -> Result<BoxCountFit, DimensionError> {
    check_window(window)?;
    let samples = (window.0..=window.1)
        .map(|m| box_count_with(gasket, m, conv).map(|n| (m, n)))
        .collect::<Result<Vec<_>, _>>()?;
    fit_samples(samples, conv)
}

/// Control case: the filled unit square, counted at any scale.
pub fn fit_filled_square(window: (u32, u32)) -> Result<BoxCountFit, DimensionError> {
    check_window(window)?;
    let square = initial_state();
    let samples = (window.0..=window.1)
        .map(|m| {
            box_count_triangles(square.triangles(), m, CellConvention::Interior).map(|n| (m, n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    fit_samples(samples, CellConvention::Interior)
}

pub fn fit_points(
    points: &[(f64, f64)],
    window: (u32, u32),
) -> Result<BoxCountFit, DimensionError> {
    check_window(window)?;
    let samples = (window.0..=window.1)
        .map(|m| box_count_points(points, m).map(|n| (m, n)))
        .collect::<Result<Vec<_>, _>>()?;
    fit_samples(samples, CellConvention::Interior)
}

/// Default window: skip the coarse scales `0..=2` and the depth-limited
/// finest scale.
pub fn default_window(depth: u32) -> Result<(u32, u32), DimensionError> {
    let window = (3, depth.saturating_sub(1));
    check_window(window)?;
    Ok(window)
}
