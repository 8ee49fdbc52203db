//! Balance-sheet observations and panels.

use std::collections::HashSet;
use std::fmt;

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for the accounting identity `a = d + e`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Identifies one record inside a panel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordKey {
    pub firm_id: String,
    pub period: u64,
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.firm_id, self.period)
    }
}

/// One firm-period observation of debt, equity and total assets.
///
/// Amounts are kept as exact decimals for the identity check; the binary
/// floating point copies used by the index formulas are fixed at
/// construction so every consumer sees the same values.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSheetRecord {
    firm_id: String,
    period: u64,
    debt: Decimal,
    equity: Decimal,
    assets: Decimal,
    assets_synthesized: bool,
    values: [f64; 3],
}

impl BalanceSheetRecord {
    /// Builds a record from exact decimals. A missing `assets` is
    /// synthesized as `debt + equity` and flagged as such.
    pub fn new(
        firm_id: impl Into<String>,
        period: u64,
        debt: Decimal,
        equity: Decimal,
        assets: Option<Decimal>,
    ) -> Self {
        let (assets, assets_synthesized) = match assets {
            Some(a) => (a, false),
            None => (debt.saturating_add(equity), true),
        };
        let values = [to_f64(debt), to_f64(equity), to_f64(assets)];
        Self {
            firm_id: firm_id.into(),
            period,
            debt,
            equity,
            assets,
            assets_synthesized,
            values,
        }
    }

    /// Builds a record from binary amounts, with assets synthesized as
    /// `d + e`. The floating point values are kept bit-for-bit.
    pub fn from_f64(firm_id: impl Into<String>, period: u64, debt: f64, equity: f64) -> Self {
        let d = Decimal::from_f64_retain(debt).unwrap_or_default();
        let e = Decimal::from_f64_retain(equity).unwrap_or_default();
        let mut rec = Self::new(firm_id, period, d, e, None);
        rec.values = [debt, equity, debt + equity];
        rec
    }

    pub fn firm_id(&self) -> &str {
        &self.firm_id
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn key(&self) -> RecordKey {
        RecordKey {
            firm_id: self.firm_id.clone(),
            period: self.period,
        }
    }

    pub fn debt_decimal(&self) -> Decimal {
        self.debt
    }

    pub fn equity_decimal(&self) -> Decimal {
        self.equity
    }

    pub fn assets_decimal(&self) -> Decimal {
        self.assets
    }

    pub fn assets_synthesized(&self) -> bool {
        self.assets_synthesized
    }

    /// Debt `d` as binary floating point.
    pub fn debt(&self) -> f64 {
        self.values[0]
    }

    /// Equity `e` as binary floating point.
    pub fn equity(&self) -> f64 {
        self.values[1]
    }

    /// Total assets `a` as binary floating point.
    pub fn assets(&self) -> f64 {
        self.values[2]
    }
}

fn to_f64(x: Decimal) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("assets {assets} differ from debt + equity = {sum} beyond tolerance")]
    IdentityViolation { assets: Decimal, sum: Decimal },
    #[error("debt {0} is negative")]
    NegativeDebt(Decimal),
    #[error("equity {0} is negative and the panel is not in distress mode")]
    NegativeEquityOutsideDistressMode(Decimal),
    #[error("debt + equity is not positive")]
    DegenerateRecord,
    #[error("tolerance {0} must be a finite non-negative number")]
    InvalidTolerance(f64),
}

/// Checks the record invariants: non-negative debt, non-negative equity
/// (unless `distress_mode`), positive `d + e` and the accounting identity
/// `|a − (d + e)| ≤ tol_rel · max(1, a)`.
pub fn validate_record(
    rec: &BalanceSheetRecord,
    tol_rel: f64,
    distress_mode: bool,
) -> Result<(), ValidationError> {
    if !(tol_rel.is_finite() && tol_rel >= 0.0) {
        return Err(ValidationError::InvalidTolerance(tol_rel));
    }
    if rec.debt.is_sign_negative() && !rec.debt.is_zero() {
        return Err(ValidationError::NegativeDebt(rec.debt));
    }
    if rec.equity.is_sign_negative() && !rec.equity.is_zero() && !distress_mode {
        return Err(ValidationError::NegativeEquityOutsideDistressMode(
            rec.equity,
        ));
    }
    let sum = rec
        .debt
        .checked_add(rec.equity)
        .ok_or(ValidationError::DegenerateRecord)?;
    if sum <= Decimal::ZERO {
        return Err(ValidationError::DegenerateRecord);
    }
    let tol = Decimal::from_f64(tol_rel).ok_or(ValidationError::InvalidTolerance(tol_rel))?;
    let scale = rec.assets.max(Decimal::ONE);
    let gap = rec.assets.checked_sub(sum).map(|g| g.abs());
    let bound = tol.checked_mul(scale);
    match (gap, bound) {
        (Some(gap), Some(bound)) if gap <= bound => Ok(()),
        _ => Err(ValidationError::IdentityViolation {
            assets: rec.assets,
            sum,
        }),
    }
}

/// Axis along which a panel is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanelMode {
    /// One firm over strictly increasing periods.
    TimeSeries,
    /// Many distinct firms at one period.
    CrossSection,
}

impl PanelMode {
    /// Picks the mode implied by the records: a single firm is a time
    /// series, a single period a cross section. `None` for mixed axes.
    pub fn infer(records: &[BalanceSheetRecord]) -> Option<PanelMode> {
        let first = records.first()?;
        if records.iter().all(|r| r.firm_id == first.firm_id) {
            Some(PanelMode::TimeSeries)
        } else if records.iter().all(|r| r.period == first.period) {
            Some(PanelMode::CrossSection)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("panel has no records")]
    Empty,
    #[error("record {index} ({key}): {source}")]
    InvalidRecord {
        index: usize,
        key: RecordKey,
        source: ValidationError,
    },
    #[error("time-series panel mixes firms {first:?} and {other:?}")]
    MixedFirms { first: String, other: String },
    #[error("cross-section panel mixes periods {first} and {other}")]
    MixedPeriods { first: u64, other: u64 },
    #[error("duplicate record key {0}")]
    DuplicateKey(RecordKey),
    #[error("time-series periods must be strictly increasing ({previous} then {next})")]
    PeriodsNotIncreasing { previous: u64, next: u64 },
}

/// A validated, immutable collection of records along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    records: Vec<BalanceSheetRecord>,
    mode: PanelMode,
    distress_mode: bool,
}

impl Panel {
    pub fn records(&self) -> &[BalanceSheetRecord] {
        &self.records
    }

    pub fn mode(&self) -> PanelMode {
        self.mode
    }

    pub fn distress_mode(&self) -> bool {
        self.distress_mode
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<BalanceSheetRecord> {
        self.records
    }
}

/// Validates every record and the axis invariants of `mode`, keeping the
/// input order.
pub fn build_panel(
    records: Vec<BalanceSheetRecord>,
    mode: PanelMode,
    distress_mode: bool,
    tol_rel: f64,
) -> Result<Panel, PanelError> {
    let first = records.first().ok_or(PanelError::Empty)?;

    for (index, rec) in records.iter().enumerate() {
        validate_record(rec, tol_rel, distress_mode).map_err(|source| {
            PanelError::InvalidRecord {
                index,
                key: rec.key(),
                source,
            }
        })?;
    }

    match mode {
        PanelMode::TimeSeries => {
            if let Some(other) = records.iter().find(|r| r.firm_id != first.firm_id) {
                return Err(PanelError::MixedFirms {
                    first: first.firm_id.clone(),
                    other: other.firm_id.clone(),
                });
            }
            for pair in records.windows(2) {
                let (prev, next) = (pair[0].period, pair[1].period);
                if prev == next {
                    return Err(PanelError::DuplicateKey(pair[1].key()));
                }
                if prev > next {
                    return Err(PanelError::PeriodsNotIncreasing {
                        previous: prev,
                        next,
                    });
                }
            }
        }
        PanelMode::CrossSection => {
            // duplicates first: a repeated firm at a mixed period is still a duplicate
            let mut seen = HashSet::with_capacity(records.len());
            for rec in &records {
                if !seen.insert(rec.firm_id.as_str()) {
                    return Err(PanelError::DuplicateKey(rec.key()));
                }
            }
            if let Some(other) = records.iter().find(|r| r.period != first.period) {
                return Err(PanelError::MixedPeriods {
                    first: first.period,
                    other: other.period,
                });
            }
        }
    }

    Ok(Panel {
        records,
        mode,
        distress_mode,
    })
}
