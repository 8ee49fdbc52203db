//! The risk-box gasket: the unit square split along `d = e` into two right
//! isosceles triangles, each refined by removing its medial triangle and
//! keeping the three corner triangles.
//!
//! Coordinates are exact dyadic rationals, areas exact rationals and
//! perimeters exact multiples of `2 + √2`, so every count, area and
//! perimeter identity can be checked without a tolerance.

use std::fmt;
use std::io::{self, Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{Dyadic, Pow2Tally, MAX_EXP};

pub const DEFAULT_DEPTH_CAP: u32 = 12;
/// Caps are refused above this depth (2·3^16 ≈ 86M triangles).
pub const HARD_DEPTH_LIMIT: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GasketError {
    #[error("depth {requested} exceeds the depth cap {cap}")]
    DepthLimit { requested: u32, cap: u32 },
    #[error("depth cap {0} exceeds the hard limit {HARD_DEPTH_LIMIT}")]
    CapTooLarge(u32),
}

/// Which corner of its bounding cell holds the right angle. The legs run
/// from that corner along +/- x and +/- y into the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    BottomLeft,
    BottomRight,
    TopLeft,
    TopRight,
}

impl Orientation {
    /// Leg directions `(sx, sy)`.
    pub fn signs(self) -> (i64, i64) {
        match self {
            Orientation::BottomLeft => (1, 1),
            Orientation::BottomRight => (-1, 1),
            Orientation::TopLeft => (1, -1),
            Orientation::TopRight => (-1, -1),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Orientation::BottomLeft => Orientation::TopRight,
            Orientation::BottomRight => Orientation::TopLeft,
            Orientation::TopLeft => Orientation::BottomRight,
            Orientation::TopRight => Orientation::BottomLeft,
        }
    }

    fn code(self) -> u8 {
        match self {
            Orientation::BottomLeft => 0,
            Orientation::BottomRight => 1,
            Orientation::TopLeft => 2,
            Orientation::TopRight => 3,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => Orientation::BottomLeft,
            1 => Orientation::BottomRight,
            2 => Orientation::TopLeft,
            3 => Orientation::TopRight,
            _ => return None,
        })
    }
}

/// Right isosceles triangle with axis-parallel legs of length `2^-leg_log2`
/// and its right angle at `corner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicTriangle {
    pub leg_log2: u32,
    pub corner: (Dyadic, Dyadic),
    pub orientation: Orientation,
}

fn scaled(sign: i64, v: Dyadic) -> Dyadic {
    if sign < 0 {
        -v
    } else {
        v
    }
}

impl DyadicTriangle {
    pub fn new(leg_log2: u32, corner: (Dyadic, Dyadic), orientation: Orientation) -> Self {
        Self {
            leg_log2,
            corner,
            orientation,
        }
    }

    pub fn leg(&self) -> Dyadic {
        Dyadic::pow2_neg(self.leg_log2)
    }

    /// Right-angle corner first, then the ends of the x leg and the y leg.
    pub fn vertices(&self) -> [(Dyadic, Dyadic); 3] {
        let (sx, sy) = self.orientation.signs();
        let (x, y) = self.corner;
        let l = self.leg();
        [(x, y), (x + scaled(sx, l), y), (x, y + scaled(sy, l))]
    }

    /// `2^-(2m+1)`.
    pub fn area(&self) -> BigRational {
        BigRational::new(
            BigInt::one(),
            BigInt::one() << (2 * self.leg_log2 + 1) as usize,
        )
    }

    /// Coefficient `q` of the perimeter `q·(2 + √2)`, i.e. the leg length.
    pub fn perimeter_coefficient(&self) -> BigRational {
        self.leg().to_ratio()
    }

    /// Image of the triangle under the contraction `p ↦ (p + v)/2` toward
    /// vertex `index` (0 = right angle, 1 = x leg end, 2 = y leg end).
    pub fn contract_toward(&self, index: usize) -> DyadicTriangle {
        let (sx, sy) = self.orientation.signs();
        let (x, y) = self.corner;
        let h = Dyadic::pow2_neg(self.leg_log2 + 1);
        let corner = match index {
            0 => (x, y),
            1 => (x + scaled(sx, h), y),
            2 => (x, y + scaled(sy, h)),
            _ => panic!("triangle has three vertices, got index {index}"),
        };
        DyadicTriangle::new(self.leg_log2 + 1, corner, self.orientation)
    }

    /// The three corner triangles kept by one refinement step.
    pub fn children(&self) -> [DyadicTriangle; 3] {
        [0, 1, 2].map(|i| self.contract_toward(i))
    }

    /// The triangle on the edge midpoints, removed by one refinement step.
    pub fn medial(&self) -> DyadicTriangle {
        let (sx, sy) = self.orientation.signs();
        let (x, y) = self.corner;
        let h = Dyadic::pow2_neg(self.leg_log2 + 1);
        DyadicTriangle::new(
            self.leg_log2 + 1,
            (x + scaled(sx, h), y + scaled(sy, h)),
            self.orientation.opposite(),
        )
    }

    /// Exact closed point-in-triangle test.
    pub fn contains(&self, px: Dyadic, py: Dyadic) -> bool {
        let (sx, sy) = self.orientation.signs();
        let u = scaled(sx, px - self.corner.0);
        let v = scaled(sy, py - self.corner.1);
        u >= Dyadic::ZERO && v >= Dyadic::ZERO && u + v <= self.leg()
    }

    /// Integer index of the grid cell of side `2^-leg_log2` covered by the
    /// triangle's bounding square.
    pub fn cell(&self) -> Option<(i64, i64)> {
        let (sx, sy) = self.orientation.signs();
        let cx = self.corner.0.numerator_at(self.leg_log2)?;
        let cy = self.corner.1.numerator_at(self.leg_log2)?;
        Some((
            if sx > 0 { cx } else { cx - 1 },
            if sy > 0 { cy } else { cy - 1 },
        ))
    }

    pub fn vertices_f64(&self) -> [(f64, f64); 3] {
        self.vertices().map(|(x, y)| (x.to_f64(), y.to_f64()))
    }
}

/// An exact perimeter `coefficient · (2 + √2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perimeter {
    pub coefficient: BigRational,
}

impl Perimeter {
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.coefficient) * (2.0 + std::f64::consts::SQRT_2)
    }
}

impl fmt::Display for Perimeter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*(2+sqrt2)", ratio_string(&self.coefficient))
    }
}

/// `num/den`, always with an explicit denominator.
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Triangles remaining after `depth` refinement steps, with removal totals.
#[derive(Debug, Clone, PartialEq)]
pub struct GasketState {
    depth: u32,
    remaining: Vec<DyadicTriangle>,
    removed_count_total: u64,
    area_removed: BigRational,
}

/// The depth-0 state: the unit square split along the diagonal `d = e`
/// into the triangles below (right angle at (1, 0)) and above (right angle
/// at (0, 1)) it.
pub fn initial_state() -> GasketState {
    let zero = Dyadic::ZERO;
    let one = Dyadic::ONE;
    GasketState {
        depth: 0,
        remaining: vec![
            DyadicTriangle::new(0, (one, zero), Orientation::BottomRight),
            DyadicTriangle::new(0, (zero, one), Orientation::TopLeft),
        ],
        removed_count_total: 0,
        area_removed: BigRational::zero(),
    }
}

fn check_cap(depth_cap: u32) -> Result<(), GasketError> {
    if depth_cap > HARD_DEPTH_LIMIT || depth_cap as u64 >= MAX_EXP as u64 {
        Err(GasketError::CapTooLarge(depth_cap))
    } else {
        Ok(())
    }
}

impl GasketState {
    /// Refines from depth 0 up to `depth`.
    pub fn at_depth(depth: u32, depth_cap: u32) -> Result<GasketState, GasketError> {
        check_cap(depth_cap)?;
        if depth > depth_cap {
            return Err(GasketError::DepthLimit {
                requested: depth,
                cap: depth_cap,
            });
        }
        let mut state = initial_state();
        while state.depth < depth {
            state = state.iterate(depth_cap)?;
        }
        Ok(state)
    }

    /// Replaces each triangle by its three corner triangles. Fails when the
    /// next depth would exceed `depth_cap`.
    pub fn iterate(&self, depth_cap: u32) -> Result<GasketState, GasketError> {
        check_cap(depth_cap)?;
        let next = self.depth + 1;
        if next > depth_cap {
            return Err(GasketError::DepthLimit {
                requested: next,
                cap: depth_cap,
            });
        }
        let mut remaining = Vec::with_capacity(self.remaining.len() * 3);
        let mut removed = Pow2Tally::default();
        for t in &self.remaining {
            remaining.extend(t.children());
            removed.add(2 * (t.leg_log2 + 1) + 1, 1);
        }
        Ok(GasketState {
            depth: next,
            remaining,
            removed_count_total: self.removed_count_total + self.remaining.len() as u64,
            area_removed: &self.area_removed + removed.total(),
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn triangles(&self) -> &[DyadicTriangle] {
        &self.remaining
    }

    pub fn removed_count_total(&self) -> u64 {
        self.removed_count_total
    }

    /// Accumulated exact area of all removed medial triangles.
    pub fn area_removed(&self) -> &BigRational {
        &self.area_removed
    }

    /// Exact area of the remaining triangles, summed triangle by triangle.
    pub fn remaining_area(&self) -> BigRational {
        let mut tally = Pow2Tally::default();
        for t in &self.remaining {
            tally.add(2 * t.leg_log2 + 1, 1);
        }
        tally.total()
    }

    /// Exact total perimeter of the remaining triangles, shared edges
    /// counted once per triangle.
    pub fn perimeter_total(&self) -> Perimeter {
        let mut tally = Pow2Tally::default();
        for t in &self.remaining {
            tally.add(t.leg_log2, 1);
        }
        Perimeter {
            coefficient: tally.total(),
        }
    }
}

fn three_quarters_pow(k: u32) -> BigRational {
    BigRational::new(
        num_traits::pow(BigInt::from(3), k as usize),
        num_traits::pow(BigInt::from(4), k as usize),
    )
}

fn three_halves_pow(k: u32) -> BigRational {
    BigRational::new(
        num_traits::pow(BigInt::from(3), k as usize),
        num_traits::pow(BigInt::from(2), k as usize),
    )
}

/// `1 − (3/4)^k`.
pub fn closed_form_area_removed(k: u32) -> BigRational {
    BigRational::one() - three_quarters_pow(k)
}

/// `(3/4)^k`.
pub fn closed_form_remaining_area(k: u32) -> BigRational {
    three_quarters_pow(k)
}

/// `2·(3/2)^k · (2 + √2)`: `2·3^k` triangles of perimeter `(2 + √2)/2^k`.
pub fn closed_form_perimeter(k: u32) -> Perimeter {
    Perimeter {
        coefficient: BigRational::from_integer(2.into()) * three_halves_pow(k),
    }
}

/// `3·((3/2)^k − 1)`, the partial sum `3/2 + 9/4 + … + (3/2)^k` scaled by
/// 2. This sums per-step perimeters rather than measuring the depth-k set,
/// so it differs from [`closed_form_perimeter`] for every `k ≥ 1`.
pub fn cumulative_perimeter_series(k: u32) -> BigRational {
    BigRational::from_integer(3.into()) * (three_halves_pow(k) - BigRational::one())
}

/// Smallest depth whose perimeter exceeds `bound`.
pub fn depth_exceeding_perimeter(bound: f64) -> u32 {
    let base = 2.0 * (2.0 + std::f64::consts::SQRT_2);
    if bound < base {
        return 0;
    }
    let k = ((bound / base).ln() / 1.5f64.ln()).floor() as u32 + 1;
    // guard against rounding in the logarithms
    (k.saturating_sub(1)..=k + 1)
        .find(|&j| closed_form_perimeter(j).to_f64() > bound)
        .unwrap_or(k + 1)
}

const MAGIC: &[u8; 4] = b"IRBG";
const VERSION: u16 = 1;

/// Writes a triangle list:
///
/// ```text
/// header:   "IRBG" | version u16 | reserved u16 | depth u32 | count u64
/// triangle: leg_log2 u32 | orientation u8 | pad [u8; 3]
///           | x_num i64 | x_exp u32 | y_num i64 | y_exp u32
/// ```
///
/// All integers little-endian; `(x, y)` is the right-angle corner and the
/// orientation codes are 0 bottom-left, 1 bottom-right, 2 top-left,
/// 3 top-right.
pub fn write_triangles<W: Write>(
    mut w: W,
    depth: u32,
    triangles: &[DyadicTriangle],
) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&depth.to_le_bytes())?;
    w.write_all(&(triangles.len() as u64).to_le_bytes())?;
    for t in triangles {
        w.write_all(&t.leg_log2.to_le_bytes())?;
        w.write_all(&[t.orientation.code(), 0, 0, 0])?;
        for c in [t.corner.0, t.corner.1] {
            w.write_all(&c.numerator().to_le_bytes())?;
            w.write_all(&c.exponent().to_le_bytes())?;
        }
    }
    w.flush()
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads a list written by [`write_triangles`], returning `(depth, triangles)`.
pub fn read_triangles<R: Read>(mut r: R) -> io::Result<(u32, Vec<DyadicTriangle>)> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(invalid("not a triangle list (bad magic)"));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(invalid(format!(
            "unsupported triangle list version {version}"
        )));
    }
    let depth = u32::from_le_bytes(head[8..12].try_into().unwrap());
    let count = u64::from_le_bytes(head[12..20].try_into().unwrap());
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut rec = [0u8; 32];
    for _ in 0..count {
        r.read_exact(&mut rec)?;
        let leg_log2 = u32::from_le_bytes(rec[0..4].try_into().unwrap());
        let orientation = Orientation::from_code(rec[4])
            .ok_or_else(|| invalid(format!("bad orientation code {}", rec[4])))?;
        let coord = |at: usize| -> io::Result<Dyadic> {
            let num = i64::from_le_bytes(rec[at..at + 8].try_into().unwrap());
            let exp = u32::from_le_bytes(rec[at + 8..at + 12].try_into().unwrap());
            if exp > MAX_EXP {
                return Err(invalid(format!("exponent {exp} out of range")));
            }
            Ok(Dyadic::new(num, exp))
        };
        if leg_log2 >= MAX_EXP {
            return Err(invalid(format!("leg exponent {leg_log2} out of range")));
        }
        out.push(DyadicTriangle::new(
            leg_log2,
            (coord(8)?, coord(20)?),
            orientation,
        ));
    }
    Ok((depth, out))
}
