//! C ABI over the `irbox` library.
//!
//! Every fallible function returns an [`IrboxStatus`] and writes its result
//! through an out pointer. On failure, [`irbox_last_error`] returns a
//! message for the calling thread. Handles are opaque and must be released
//! with the matching `_free` function; strings returned by the library are
//! released with [`irbox_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use irbox::dimension::{box_count_with, fit_dimension_with};
use irbox::gasket::ratio_string;
use irbox::ingest::read_records;
use irbox::irbox::{insolvency_probability, ProbabilityMethod};
use irbox::{
    build_panel, compute_indices, firi_ray_slopes, optimize_firm, pi_fraction, CellConvention,
    DimensionError, EconomyParams, GasketError, GasketState, Gear, Panel, PanelMode, RiskIndexSet,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrboxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Limit = 4,
    Panic = 5,
}

/// Index set of one record. `gear` is meaningful only when `gear_defined`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IrboxIndices {
    pub tr: f64,
    pub nr: f64,
    pub aco: f64,
    pub firi: f64,
    pub firi_h: f64,
    pub firi_v: f64,
    pub gear: f64,
    pub gear_defined: bool,
    pub pi: f64,
}

impl From<RiskIndexSet> for IrboxIndices {
    fn from(s: RiskIndexSet) -> Self {
        let (gear, gear_defined) = match s.gear {
            Gear::Ratio(g) => (g, true),
            Gear::Undefined => (f64::NAN, false),
        };
        IrboxIndices {
            tr: s.tr,
            nr: s.nr,
            aco: s.aco,
            firi: s.firi,
            firi_h: s.firi_h,
            firi_v: s.firi_v,
            gear,
            gear_defined,
            pi: s.pi,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrboxEconomyParams {
    pub r: f64,
    pub z: f64,
    pub tau: f64,
    pub p: f64,
    pub pi_store: f64,
}

/// `bound`: 0 interior, 1 at zero, 2 at the debt limit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IrboxFirmDecision {
    pub y: f64,
    pub objective: f64,
    pub pi_store: f64,
    pub unconstrained_y: f64,
    pub y_max: f64,
    pub bound: u32,
    pub risk_free_debt: bool,
}

pub const IRBOX_METHOD_EMPIRICAL: u32 = 0;
pub const IRBOX_METHOD_GEOMETRIC: u32 = 1;

/// Built gasket.
pub struct IrboxGasket(GasketState);

/// Validated balance-sheet panel.
pub struct IrboxPanel(Panel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(IrboxStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(IrboxStatus::InvalidArgument, msg.into())
    }

    fn validation(err: impl std::fmt::Display) -> Self {
        Failure(IrboxStatus::Validation, err.to_string())
    }
}

impl From<GasketError> for Failure {
    fn from(e: GasketError) -> Self {
        Failure(IrboxStatus::Limit, e.to_string())
    }
}

impl From<DimensionError> for Failure {
    fn from(e: DimensionError) -> Self {
        let status = match e {
            DimensionError::ScaleTooLarge(_) => IrboxStatus::Limit,
            _ => IrboxStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IrboxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IrboxStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IrboxStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a pointer valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure(IrboxStatus::NullPointer, "null out pointer".into()))
}

fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles come from this library and are still live.
    unsafe { p.as_ref() }.ok_or(Failure(IrboxStatus::NullPointer, "null handle".into()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn irbox_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn irbox_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Risk indices of one `(d, e)` pair, with `a = d + e`.
#[no_mangle]
pub extern "C" fn irbox_compute_indices(d: f64, e: f64, result: *mut IrboxIndices) -> IrboxStatus {
    guard(|| {
        let slot = out(result)?;
        let set = irbox::indices::indices_from_parts(d, e).map_err(Failure::validation)?;
        *slot = set.into();
        Ok(())
    })
}

/// `(a − (e − d)) / a`.
#[no_mangle]
pub extern "C" fn irbox_pi_fraction(a: f64, d: f64, e: f64, result: *mut f64) -> IrboxStatus {
    guard(|| {
        let slot = out(result)?;
        *slot = pi_fraction(a, d, e).map_err(Failure::validation)?;
        Ok(())
    })
}

/// Slopes `d/e` of the two rays where FIRI equals `c`, for `c` in `(0, 1]`.
#[no_mangle]
pub extern "C" fn irbox_firi_ray_slopes(c: f64, low: *mut f64, high: *mut f64) -> IrboxStatus {
    guard(|| {
        let (lo, hi) = (out(low)?, out(high)?);
        let (a, b) = firi_ray_slopes(c).map_err(|e| Failure::invalid(e.to_string()))?;
        *lo = a;
        *hi = b;
        Ok(())
    })
}

/// Builds the gasket at `depth`, refusing depths above `depth_cap`.
#[no_mangle]
pub extern "C" fn irbox_gasket_new(
    depth: u32,
    depth_cap: u32,
    result: *mut *mut IrboxGasket,
) -> IrboxStatus {
    guard(|| {
        let slot = out(result)?;
        let state = GasketState::at_depth(depth, depth_cap)?;
        *slot = Box::into_raw(Box::new(IrboxGasket(state)));
        Ok(())
    })
}

/// # Safety
/// `gasket` must be null or a live handle from [`irbox_gasket_new`].
#[no_mangle]
pub unsafe extern "C" fn irbox_gasket_free(gasket: *mut IrboxGasket) {
    if !gasket.is_null() {
        drop(Box::from_raw(gasket));
    }
}

#[no_mangle]
pub extern "C" fn irbox_gasket_depth(gasket: *const IrboxGasket, result: *mut u32) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        *out(result)? = g.0.depth();
        Ok(())
    })
}

/// Number of remaining triangles.
#[no_mangle]
pub extern "C" fn irbox_gasket_triangle_count(
    gasket: *const IrboxGasket,
    result: *mut u64,
) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        *out(result)? = g.0.triangles().len() as u64;
        Ok(())
    })
}

/// Exact removed area as `"num/den"`; free with [`irbox_string_free`].
#[no_mangle]
pub extern "C" fn irbox_gasket_area_removed(
    gasket: *const IrboxGasket,
    result: *mut *mut c_char,
) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        *out(result)? = into_c_string(ratio_string(g.0.area_removed()));
        Ok(())
    })
}

/// Exact perimeter in units of `2 + sqrt(2)`, as `"num/den"`.
#[no_mangle]
pub extern "C" fn irbox_gasket_perimeter_coefficient(
    gasket: *const IrboxGasket,
    result: *mut *mut c_char,
) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        *out(result)? = into_c_string(ratio_string(&g.0.perimeter_total().coefficient));
        Ok(())
    })
}

fn convention(closed: bool) -> CellConvention {
    if closed {
        CellConvention::Closed
    } else {
        CellConvention::Interior
    }
}

/// Occupied cells of the `2^m` grid.
#[no_mangle]
pub extern "C" fn irbox_gasket_box_count(
    gasket: *const IrboxGasket,
    m: u32,
    closed_cells: bool,
    result: *mut u64,
) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        let slot = out(result)?;
        *slot = box_count_with(&g.0, m, convention(closed_cells))?;
        Ok(())
    })
}

/// Box-counting dimension over scales `m_min..=m_max`.
#[no_mangle]
pub extern "C" fn irbox_gasket_fit_dimension(
    gasket: *const IrboxGasket,
    m_min: u32,
    m_max: u32,
    closed_cells: bool,
    dimension: *mut f64,
    fit_quality: *mut f64,
) -> IrboxStatus {
    guard(|| {
        let g = handle(gasket)?;
        let (dim, r2) = (out(dimension)?, out(fit_quality)?);
        let fit = fit_dimension_with(&g.0, (m_min, m_max), convention(closed_cells))?;
        *dim = fit.dimension;
        *r2 = fit.fit_quality;
        Ok(())
    })
}

/// Parses and validates a balance-sheet CSV held in memory. The panel
/// axis is inferred from the records.
///
/// # Safety
/// `csv` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn irbox_panel_from_csv(
    csv: *const c_char,
    distress_mode: bool,
    tolerance: f64,
    result: *mut *mut IrboxPanel,
) -> IrboxStatus {
    guard(|| {
        let slot = out(result)?;
        if csv.is_null() {
            return Err(Failure(IrboxStatus::NullPointer, "null csv".into()));
        }
        let text = CStr::from_ptr(csv)
            .to_str()
            .map_err(|_| Failure::invalid("csv is not UTF-8"))?;
        let records = read_records(text.as_bytes(), tolerance, distress_mode).map_err(|e| {
            if e.is_schema() {
                Failure::invalid(e.to_string())
            } else {
                Failure::validation(e)
            }
        })?;
        let mode = PanelMode::infer(&records)
            .ok_or_else(|| Failure::validation("records mix several firms and periods"))?;
        let panel =
            build_panel(records, mode, distress_mode, tolerance).map_err(Failure::validation)?;
        *slot = Box::into_raw(Box::new(IrboxPanel(panel)));
        Ok(())
    })
}

/// # Safety
/// `panel` must be null or a live handle from [`irbox_panel_from_csv`].
#[no_mangle]
pub unsafe extern "C" fn irbox_panel_free(panel: *mut IrboxPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

#[no_mangle]
pub extern "C" fn irbox_panel_len(panel: *const IrboxPanel, result: *mut usize) -> IrboxStatus {
    guard(|| {
        let p = handle(panel)?;
        *out(result)? = p.0.len();
        Ok(())
    })
}

/// Indices of the record at `index`, in panel order.
#[no_mangle]
pub extern "C" fn irbox_panel_indices(
    panel: *const IrboxPanel,
    index: usize,
    result: *mut IrboxIndices,
) -> IrboxStatus {
    guard(|| {
        let p = handle(panel)?;
        let slot = out(result)?;
        let rec = p.0.records().get(index).ok_or_else(|| {
            Failure::invalid(format!(
                "index {index} out of range for {} records",
                p.0.len()
            ))
        })?;
        *slot = compute_indices(rec).map_err(Failure::validation)?.into();
        Ok(())
    })
}

/// `P(e <= 0 | d > 0)` by [`IRBOX_METHOD_EMPIRICAL`] or
/// [`IRBOX_METHOD_GEOMETRIC`].
#[no_mangle]
pub extern "C" fn irbox_panel_probability(
    panel: *const IrboxPanel,
    method: u32,
    result: *mut f64,
) -> IrboxStatus {
    guard(|| {
        let p = handle(panel)?;
        let slot = out(result)?;
        let method = match method {
            IRBOX_METHOD_EMPIRICAL => ProbabilityMethod::Empirical,
            IRBOX_METHOD_GEOMETRIC => ProbabilityMethod::UniformGeometric,
            other => return Err(Failure::invalid(format!("unknown method {other}"))),
        };
        *slot = insolvency_probability(&p.0, method)
            .map_err(Failure::validation)?
            .probability;
        Ok(())
    })
}

/// Optimal risky position for one firm.
///
/// # Safety
/// `params` must be null or point to a readable parameter block.
#[no_mangle]
pub unsafe extern "C" fn irbox_optimize_firm(
    d: f64,
    e: f64,
    x: f64,
    params: *const IrboxEconomyParams,
    result: *mut IrboxFirmDecision,
) -> IrboxStatus {
    guard(|| {
        let prm = handle(params)?;
        let slot = out(result)?;
        let params = EconomyParams {
            r: prm.r,
            z: prm.z,
            tau: prm.tau,
            p: prm.p,
            pi_store: prm.pi_store,
        };
        let dec = optimize_firm(d, e, x, &params).map_err(Failure::validation)?;
        *slot = IrboxFirmDecision {
            y: dec.choice.y,
            objective: dec.objective,
            pi_store: dec.choice.pi_store,
            unconstrained_y: dec.unconstrained_y,
            y_max: dec.y_max,
            bound: match dec.bound {
                irbox::economy::Bound::Interior => 0,
                irbox::economy::Bound::Zero => 1,
                irbox::economy::Bound::DebtLimit => 2,
            },
            risk_free_debt: dec.risk_free_debt,
        };
        Ok(())
    })
}
