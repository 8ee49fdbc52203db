//! Insolvency risk measurement on the balance sheet.
//!
//! * [`model`] and [`ingest`]: balance-sheet records, panels, CSV input.
//! * [`indices`]: TR, NR, ACO, FIRI and its decomposition, gearing, `pi`.
//! * [`irbox`]: the risk box, isoclines, region classification and the
//!   geometric insolvency probability.
//! * [`gasket`] and [`dyadic`]: exact construction of the box's fractal
//!   gasket.
//! * [`dimension`]: box-counting dimension on dyadic grids.
//! * [`economy`]: firm optimisation and regulator welfare.
//! * [`render`]: SVG figures.
//! * [`cli`]: the `irbox` command-line front end.

pub mod cli;
pub mod dimension;
pub mod dyadic;
pub mod economy;
pub mod gasket;
pub mod indices;
pub mod ingest;
pub mod irbox;
pub mod model;
pub mod numeric;
pub mod render;

pub use dimension::{box_count, fit_dimension, BoxCountFit, CellConvention, DimensionError};
pub use economy::{
    expected_payoff, optimize_firm, utility, welfare, EconomyError, EconomyParams, FirmChoice,
    FirmDecision, WelfareReport,
};
pub use gasket::{
    closed_form_area_removed, closed_form_perimeter, initial_state, DyadicTriangle, GasketError,
    GasketState, Perimeter,
};
pub use indices::{compute_indices, pi_fraction, score_panel, Gear, IndexError, RiskIndexSet};
pub use irbox::{
    build_irbox, classify_point, firi_ray_slopes, insolvency_probability, IrBox, ProbabilityMethod,
    Region,
};
pub use model::{
    build_panel, validate_record, BalanceSheetRecord, Panel, PanelError, PanelMode,
    ValidationError, DEFAULT_TOLERANCE,
};
