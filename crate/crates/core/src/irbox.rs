//! The insolvency risk box: a square in `(e, d)` coordinates (equity on
//! the horizontal axis, debt on the vertical axis) that contains every
//! observation of a panel, together with its isoclines and the geometric
//! insolvency probability.

use serde::Serialize;
use thiserror::Error;

use crate::model::{BalanceSheetRecord, Panel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("no record has positive debt")]
    NoDebtPositiveRecords,
    #[error("box has no negative-equity extension")]
    NoDistressExtension,
}

/// A point in the box, `e` horizontal and `d` vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub e: f64,
    pub d: f64,
}

impl Point {
    pub fn new(e: f64, d: f64) -> Self {
        Self { e, d }
    }

    pub fn of(rec: &BalanceSheetRecord) -> Self {
        Self::new(rec.equity(), rec.debt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

impl Segment {
    /// Slope `Δd / Δe`, infinite for a vertical segment.
    pub fn slope(&self) -> f64 {
        (self.to.d - self.from.d) / (self.to.e - self.from.e)
    }
}

/// Insolvency risk box. `side` is the largest debt or equity in the panel;
/// `e_min` extends the equity axis to the left when the panel admits
/// negative equity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrBox {
    pub side: f64,
    pub area: f64,
    pub e_min: Option<f64>,
}

impl IrBox {
    pub fn new(side: f64, e_min: Option<f64>) -> Self {
        Self {
            side,
            area: side * side,
            e_min: e_min.filter(|&e| e < 0.0),
        }
    }

    /// Left edge of the equity axis (0 without a distress extension).
    pub fn e_low(&self) -> f64 {
        self.e_min.unwrap_or(0.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.e >= self.e_low() && p.e <= self.side && p.d >= 0.0 && p.d <= self.side
    }

    /// Share of the extended rectangle `[e_min, side] × (0, side]` lying at
    /// `e ≤ 0`, under the uniform measure.
    pub fn uniform_insolvency_probability(&self) -> Result<f64, GeometryError> {
        let e_min = self.e_min.ok_or(GeometryError::NoDistressExtension)?;
        Ok(-e_min / (self.side - e_min))
    }
}

/// Box with side `max(d, e)` over the panel (no padding). The negative
/// equity extent is recorded only for distress-mode panels.
pub fn build_irbox(panel: &Panel) -> IrBox {
    let side = panel
        .records()
        .iter()
        .map(|r| r.debt().max(r.equity()))
        .fold(0.0, f64::max);
    let e_min = if panel.distress_mode() {
        panel
            .records()
            .iter()
            .map(BalanceSheetRecord::equity)
            .filter(|&e| e < 0.0)
            .reduce(f64::min)
    } else {
        None
    };
    IrBox::new(side, e_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoclineKind {
    /// `d + e = c`
    TotalRisk,
    /// `|d − e| = c`
    NetRisk,
    /// `2·min(d, e) = c`, an L through `(c/2, c/2)`
    AssetCapitalOverlap,
    /// `firi = c`, two rays through the origin
    FiriRay,
}

impl IsoclineKind {
    pub fn name(self) -> &'static str {
        match self {
            IsoclineKind::TotalRisk => "tr",
            IsoclineKind::NetRisk => "nr",
            IsoclineKind::AssetCapitalOverlap => "aco",
            IsoclineKind::FiriRay => "firi",
        }
    }
}

/// One isocline clipped to a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoclineSpec {
    pub kind: IsoclineKind,
    pub level: f64,
    pub segments: Vec<Segment>,
}

/// Slopes `(c/(2−c), (2−c)/c)` of the two rays on which `firi = c`. The
/// rays mirror each other across `d = e`, so the slopes multiply to 1.
pub fn firi_ray_slopes(c: f64) -> Result<(f64, f64), GeometryError> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(GeometryError::OutOfRange {
            what: "firi level",
            value: c,
            range: "(0, 1]",
        });
    }
    Ok((c / (2.0 - c), (2.0 - c) / c))
}

/// Liang–Barsky clip of a segment to `[e0, e1] × [d0, d1]`.
fn clip(seg: Segment, e0: f64, e1: f64, d0: f64, d1: f64) -> Option<Segment> {
    let (de, dd) = (seg.to.e - seg.from.e, seg.to.d - seg.from.d);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [
        (-de, seg.from.e - e0),
        (de, e1 - seg.from.e),
        (-dd, seg.from.d - d0),
        (dd, d1 - seg.from.d),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let at = |t: f64| Point::new(seg.from.e + t * de, seg.from.d + t * dd);
    Some(Segment {
        from: at(t0),
        to: at(t1),
    })
}

/// Builds the isocline of `kind` at `level`, clipped to the box.
pub fn isocline(bx: &IrBox, kind: IsoclineKind, level: f64) -> Result<IsoclineSpec, GeometryError> {
    let (e0, e1, d0, d1) = (bx.e_low(), bx.side, 0.0, bx.side);
    let check = |ok: bool, range| {
        if ok {
            Ok(())
        } else {
            Err(GeometryError::OutOfRange {
                what: "isocline level",
                value: level,
                range,
            })
        }
    };
    let line = |a: Point, b: Point| Segment { from: a, to: b };
    let raw: Vec<Segment> = match kind {
        IsoclineKind::TotalRisk => {
            check(level > 0.0, "(0, inf)")?;
            vec![line(Point::new(e0, level - e0), Point::new(e1, level - e1))]
        }
        IsoclineKind::NetRisk => {
            check(level >= 0.0, "[0, inf)")?;
            let upper = line(Point::new(e0, e0 + level), Point::new(e1, e1 + level));
            let lower = line(Point::new(e0, e0 - level), Point::new(e1, e1 - level));
            if level == 0.0 {
                vec![upper]
            } else {
                vec![upper, lower]
            }
        }
        IsoclineKind::AssetCapitalOverlap => {
            check(level > 0.0, "(0, inf)")?;
            let h = level / 2.0;
            vec![
                line(Point::new(h, h), Point::new(e1, h)),
                line(Point::new(h, h), Point::new(h, d1)),
            ]
        }
        IsoclineKind::FiriRay => {
            let (lo, hi) = firi_ray_slopes(level)?;
            let far = e1.max(d1);
            let ray = |s: f64| line(Point::new(0.0, 0.0), Point::new(far, s * far));
            if lo == hi {
                vec![ray(lo)]
            } else {
                vec![ray(lo), ray(hi)]
            }
        }
    };
    let segments = raw
        .into_iter()
        .filter_map(|s| clip(s, e0, e1, d0, d1))
        .collect();
    Ok(IsoclineSpec {
        kind,
        level,
        segments,
    })
}

/// Position of a record relative to the balanced-risk diagonal `d = e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `d > e`: equity deficit.
    AboveUnity,
    /// `d = e`.
    OnUnity,
    /// `e > d`: equity surplus.
    BelowUnity,
    /// `e ≤ 0`.
    Distress,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::AboveUnity => "above-unity",
            Region::OnUnity => "on-unity",
            Region::BelowUnity => "below-unity",
            Region::Distress => "distress",
        }
    }
}

pub fn classify_point(rec: &BalanceSheetRecord) -> Region {
    classify(Point::of(rec))
}

pub fn classify(p: Point) -> Region {
    if p.e <= 0.0 {
        Region::Distress
    } else if p.d > p.e {
        Region::AboveUnity
    } else if p.d == p.e {
        Region::OnUnity
    } else {
        Region::BelowUnity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityMethod {
    /// Share of debt-positive observations with `e ≤ 0`.
    Empirical,
    /// Area share of the extended box at `e ≤ 0`, uniform measure.
    UniformGeometric,
}

/// `P(e ≤ 0 | d > 0)` with the data behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub method: ProbabilityMethod,
    pub probability: f64,
    /// Observations with `d > 0` (empirical only).
    pub conditioning_count: Option<usize>,
    /// Of those, observations with `e ≤ 0` (empirical only).
    pub insolvent_count: Option<usize>,
    /// Binomial standard error `sqrt(p(1−p)/n)` (empirical only).
    pub standard_error: Option<f64>,
    pub e_min: Option<f64>,
    pub side: Option<f64>,
}

/// Empirical `P(e ≤ 0 | d > 0)` over arbitrary points.
pub fn empirical_probability<I>(points: I) -> Result<ProbabilityEstimate, GeometryError>
where
    I: IntoIterator<Item = Point>,
{
    let (mut n, mut hits) = (0usize, 0usize);
    for p in points {
        if p.d > 0.0 {
            n += 1;
            if p.e <= 0.0 {
                hits += 1;
            }
        }
    }
    if n == 0 {
        return Err(GeometryError::NoDebtPositiveRecords);
    }
    let p = hits as f64 / n as f64;
    Ok(ProbabilityEstimate {
        method: ProbabilityMethod::Empirical,
        probability: p,
        conditioning_count: Some(n),
        insolvent_count: Some(hits),
        standard_error: Some((p * (1.0 - p) / n as f64).sqrt()),
        e_min: None,
        side: None,
    })
}

pub fn insolvency_probability(
    panel: &Panel,
    method: ProbabilityMethod,
) -> Result<ProbabilityEstimate, GeometryError> {
    match method {
        ProbabilityMethod::Empirical => {
            empirical_probability(panel.records().iter().map(Point::of))
        }
        ProbabilityMethod::UniformGeometric => geometric_probability(&build_irbox(panel)),
    }
}

pub fn geometric_probability(bx: &IrBox) -> Result<ProbabilityEstimate, GeometryError> {
    Ok(ProbabilityEstimate {
        method: ProbabilityMethod::UniformGeometric,
        probability: bx.uniform_insolvency_probability()?,
        conditioning_count: None,
        insolvent_count: None,
        standard_error: None,
        e_min: bx.e_min,
        side: Some(bx.side),
    })
}
