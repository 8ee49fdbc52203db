//! CSV ingestion: `firm_id,period,debt,equity[,assets]` with a header row.
//!
//! Columns are located by header name, so their order is free and extra
//! columns are ignored (an `indices` report can be read back as input).

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rust_decimal::Decimal;
use thiserror::Error;

use crate::model::{validate_record, BalanceSheetRecord, RecordKey};

pub const REQUIRED_COLUMNS: [&str; 4] = ["firm_id", "period", "debt", "equity"];
pub const OPTIONAL_COLUMNS: [&str; 1] = ["assets"];

/// A problem tied to one line of the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    pub line: u64,
    pub key: Option<RecordKey>,
    pub message: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "line {} ({}): {}", self.line, key, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

fn join(diags: &[RowDiagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema violations:\n{}", join(.0))]
    Schema(Vec<RowDiagnostic>),
    #[error("validation failures:\n{}", join(.0))]
    Validation(Vec<RowDiagnostic>),
}

impl IngestError {
    /// True when the input did not match the schema (as opposed to rows
    /// that parsed but broke a record invariant).
    pub fn is_schema(&self) -> bool {
        !matches!(self, IngestError::Validation(_))
    }
}

/// A parsed record with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedRecord {
    pub line: u64,
    pub record: BalanceSheetRecord,
}

struct Columns {
    firm_id: usize,
    period: usize,
    debt: usize,
    equity: usize,
    assets: Option<usize>,
}

fn locate(headers: &csv::StringRecord) -> Result<Columns, IngestError> {
    let find = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &'static str| find(name).ok_or(IngestError::MissingColumn(name));
    Ok(Columns {
        firm_id: need("firm_id")?,
        period: need("period")?,
        debt: need("debt")?,
        equity: need("equity")?,
        assets: find("assets"),
    })
}

fn parse_decimal(field: &str, name: &str) -> Result<Decimal, String> {
    if field.is_empty() {
        return Err(format!("`{name}` is empty"));
    }
    Decimal::from_str(field).map_err(|_| format!("`{name}` value {field:?} is not a decimal"))
}

/// Parses rows without checking record invariants. Every malformed row is
/// reported, not just the first.
pub fn parse_records<R: Read>(reader: R) -> Result<Vec<LocatedRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let cols = locate(rdr.headers()?)?;

    let mut out = Vec::new();
    let mut problems = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");

        let firm_id = field(cols.firm_id).to_string();
        let mut errs = Vec::new();
        if firm_id.is_empty() {
            errs.push("`firm_id` is empty".to_string());
        }
        let period = field(cols.period).parse::<u64>().map_err(|_| {
            format!(
                "`period` value {:?} is not a non-negative integer",
                field(cols.period)
            )
        });
        let debt = parse_decimal(field(cols.debt), "debt");
        let equity = parse_decimal(field(cols.equity), "equity");
        let assets = match cols.assets.map(field) {
            None | Some("") => Ok(None),
            Some(s) => parse_decimal(s, "assets").map(Some),
        };

        match (period, debt, equity, assets) {
            (Ok(period), Ok(d), Ok(e), Ok(a)) if errs.is_empty() => out.push(LocatedRecord {
                line,
                record: BalanceSheetRecord::new(firm_id, period, d, e, a),
            }),
            (period, debt, equity, assets) => {
                errs.extend(period.err());
                errs.extend(debt.err());
                errs.extend(equity.err());
                errs.extend(assets.err());
                problems.push(RowDiagnostic {
                    line,
                    key: None,
                    message: errs.join("; "),
                });
            }
        }
    }

    if problems.is_empty() {
        Ok(out)
    } else {
        Err(IngestError::Schema(problems))
    }
}

/// Parses and validates every row, returning the records in file order.
pub fn read_records<R: Read>(
    reader: R,
    tol_rel: f64,
    distress_mode: bool,
) -> Result<Vec<BalanceSheetRecord>, IngestError> {
    let located = parse_records(reader)?;
    let failures: Vec<_> = located
        .iter()
        .filter_map(|lr| {
            validate_record(&lr.record, tol_rel, distress_mode)
                .err()
                .map(|e| RowDiagnostic {
                    line: lr.line,
                    key: Some(lr.record.key()),
                    message: e.to_string(),
                })
        })
        .collect();
    if !failures.is_empty() {
        return Err(IngestError::Validation(failures));
    }
    Ok(located.into_iter().map(|lr| lr.record).collect())
}
