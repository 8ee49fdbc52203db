//! The insolvency risk index family for a single balance sheet.
//!
//! With debt `d`, equity `e` and assets `a`:
//!
//! | index    | formula                     |
//! |----------|-----------------------------|
//! | `tr`     | `d + e`                     |
//! | `nr`     | `|d − e|`                   |
//! | `aco`    | `tr − nr = 2·min(d, e)`     |
//! | `firi`   | `aco / tr = 1 − nr / tr`    |
//! | `firi_h` | `1 − (d − e) / (d + e)`     |
//! | `firi_v` | `1 + (d − e) / (d + e)`     |
//! | `gear`   | `d / e`                     |
//! | `pi`     | `(a − (e − d)) / a`         |
//!
//! The ratios are evaluated in the cancellation-free forms `2·min/(d+e)`,
//! `2e/(d+e)` and `2d/(d+e)` with a corrected division, so each is within
//! about one ulp of the exact value.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{BalanceSheetRecord, Panel, RecordKey};
use crate::numeric::{corrected_div, div_by_sum, two_sum, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("debt + equity is not positive{}", .0.as_ref().map(|k| format!(" for {k}")).unwrap_or_default())]
    DegenerateRecord(Option<RecordKey>),
    #[error("assets are zero")]
    ZeroAssets,
    #[error("assets are negative")]
    NegativeAssets,
    #[error("non-finite input")]
    NonFinite,
}

/// Gearing ratio `d / e`; undefined at zero equity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gear {
    Ratio(f64),
    Undefined,
}

impl Gear {
    pub fn value(self) -> Option<f64> {
        match self {
            Gear::Ratio(g) => Some(g),
            Gear::Undefined => None,
        }
    }
}

impl std::fmt::Display for Gear {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gear::Ratio(g) => write!(f, "{g}"),
            Gear::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Gear {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Gear::Ratio(g) => s.serialize_f64(*g),
            Gear::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// All indices derived from one record.
///
/// For a distress record (`e < 0`) the same formulas are applied as written,
/// so `firi` and `firi_h` go negative and `pi` exceeds 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskIndexSet {
    pub tr: f64,
    pub nr: f64,
    pub aco: f64,
    pub firi: f64,
    pub firi_h: f64,
    pub firi_v: f64,
    pub gear: Gear,
    pub pi: f64,
}

/// Computes the index set from raw debt and equity, taking `a = d + e`.
pub fn indices_from_parts(d: f64, e: f64) -> Result<RiskIndexSet, IndexError> {
    if !(d.is_finite() && e.is_finite()) {
        return Err(IndexError::NonFinite);
    }
    let (tr, tr_err) = two_sum(d, e);
    if tr + tr_err <= 0.0 || tr <= 0.0 {
        return Err(IndexError::DegenerateRecord(None));
    }
    let low = d.min(e);
    let aco = 2.0 * low;
    Ok(RiskIndexSet {
        tr,
        nr: (d - e).abs(),
        aco,
        firi: div_by_sum(aco, d, e),
        firi_h: div_by_sum(2.0 * e, d, e),
        firi_v: div_by_sum(2.0 * d, d, e),
        gear: if e == 0.0 {
            Gear::Undefined
        } else {
            Gear::Ratio(d / e)
        },
        pi: pi_from_split_assets(tr, tr_err, d, e),
    })
}

/// Computes the index set of a record. `pi` uses `a = d + e`, which makes
/// it coincide with `firi_v`.
pub fn compute_indices(rec: &BalanceSheetRecord) -> Result<RiskIndexSet, IndexError> {
    indices_from_parts(rec.debt(), rec.equity()).map_err(|err| match err {
        IndexError::DegenerateRecord(_) => IndexError::DegenerateRecord(Some(rec.key())),
        other => other,
    })
}

/// Fractional insolvency risk `(a − (e − d)) / a`.
///
/// Not clamped: values above 1 mean debt exceeds equity.
pub fn pi_fraction(a: f64, d: f64, e: f64) -> Result<f64, IndexError> {
    if !(a.is_finite() && d.is_finite() && e.is_finite()) {
        return Err(IndexError::NonFinite);
    }
    if a == 0.0 {
        return Err(IndexError::ZeroAssets);
    }
    if a < 0.0 {
        return Err(IndexError::NegativeAssets);
    }
    Ok(pi_from_split_assets(a, 0.0, d, e))
}

/// `(a − (e − d)) / a` where `a = a_hi + a_lo` exactly.
fn pi_from_split_assets(a_hi: f64, a_lo: f64, d: f64, e: f64) -> f64 {
    let num: CompensatedSum = [a_hi, a_lo, -e, d].into_iter().collect();
    corrected_div(num.head(), num.tail(), a_hi, a_lo)
}

/// Index sets for every record of a panel, in panel order.
pub fn score_panel(panel: &Panel) -> Result<Vec<(RecordKey, RiskIndexSet)>, IndexError> {
    panel
        .records()
        .iter()
        .map(|rec| compute_indices(rec).map(|set| (rec.key(), set)))
        .collect()
}

/// Panel-level summary of the `firi` column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiriSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn summarize<'a, I>(sets: I) -> Option<FiriSummary>
where
    I: IntoIterator<Item = &'a RiskIndexSet>,
{
    let mut count = 0usize;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = CompensatedSum::new();
    for set in sets {
        count += 1;
        min = min.min(set.firi);
        max = max.max(set.firi);
        sum.add(set.firi);
    }
    (count > 0).then(|| FiriSummary {
        count,
        min,
        max,
        mean: sum.value() / count as f64,
    })
}
