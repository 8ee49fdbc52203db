//! Two-date firm model: a firm funds `y` risky units at `x` each out of
//! debt and equity, keeps the rest in a safe asset, and has mean-variance
//! preferences over the payoff. The regulator's welfare adds the firms'
//! utilities to an aggregate equity-surplus balance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{corrected_div, CompensatedSum};

/// Relative tolerance for the budget identity `a = d + e`.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomyError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("budget violated: risky assets x*y = {risky} but pi*(d+e) = {funded}")]
    BudgetViolation { risky: f64, funded: f64 },
    #[error("r = {r} <= z = {z} with positive drift: the debt constraint does not bound y")]
    UnboundedProgram { r: f64, z: f64 },
    #[error("aggregate assets are zero")]
    ZeroAggregateAssets,
}

/// Return `r` uniform on `[r − z, r + z]`, risk tolerance `tau`, unit price
/// `p`, and the funding fraction `pi_store` placed in risky assets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomyParams {
    pub r: f64,
    pub z: f64,
    pub tau: f64,
    pub p: f64,
    pub pi_store: f64,
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> EconomyError {
    EconomyError::InvalidParameter {
        name,
        value,
        reason,
    }
}

impl EconomyParams {
    pub fn validate(&self) -> Result<(), EconomyError> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, v, "must be finite and positive"))
            }
        };
        positive("r", self.r)?;
        positive("z", self.z)?;
        positive("tau", self.tau)?;
        if !self.p.is_finite() {
            return Err(invalid("p", self.p, "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.pi_store) {
            return Err(invalid("pi_store", self.pi_store, "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Variance of the unit return, `z²/3`.
    pub fn return_variance(&self) -> f64 {
        self.z * self.z / 3.0
    }

    /// Support `[r − z, r + z]` of the unit return.
    pub fn return_support(&self) -> (f64, f64) {
        (self.r - self.z, self.r + self.z)
    }
}

/// A firm's position: `y` risky units at `x` each, funded by debt `d` and
/// equity `e`, with `pi_store` the fraction of `d + e` in risky assets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmChoice {
    pub x: f64,
    pub y: f64,
    pub d: f64,
    pub e: f64,
    pub pi_store: f64,
}

impl FirmChoice {
    /// Risky assets `x·y`.
    pub fn risky_assets(&self) -> f64 {
        self.x * self.y
    }

    /// Total assets `x·y + (1 − π)(d + e)`.
    pub fn assets(&self) -> f64 {
        self.risky_assets() + (1.0 - self.pi_store) * self.funding()
    }

    pub fn funding(&self) -> f64 {
        self.d + self.e
    }

    /// Budget identity `a = d + e`, equivalently `x·y = π(d + e)`.
    pub fn budget_holds(&self) -> bool {
        let funded = self.pi_store * self.funding();
        (self.risky_assets() - funded).abs() <= BUDGET_TOLERANCE * funded.abs().max(1.0)
    }

    /// Debt is risk free when the worst-case return covers it:
    /// `(r − z)·y ≤ d`.
    pub fn risk_free_debt(&self, params: &EconomyParams) -> bool {
        (params.r - params.z) * self.y <= self.d
    }

    fn check_budget(&self) -> Result<(), EconomyError> {
        if self.budget_holds() {
            Ok(())
        } else {
            Err(EconomyError::BudgetViolation {
                risky: self.risky_assets(),
                funded: self.pi_store * self.funding(),
            })
        }
    }
}

/// Expected payoff `x·y·r + (1 − π)(d + e) + [p·y − (d + e)]`.
pub fn expected_payoff(choice: &FirmChoice, params: &EconomyParams) -> Result<f64, EconomyError> {
    choice.check_budget()?;
    Ok(payoff_terms(
        choice.x,
        choice.y,
        choice.funding(),
        choice.pi_store,
        params,
    ))
}

fn payoff_terms(x: f64, y: f64, funding: f64, pi: f64, params: &EconomyParams) -> f64 {
    x * y * params.r + (1.0 - pi) * funding + (params.p * y - funding)
}

fn variance_penalty(y: f64, params: &EconomyParams) -> f64 {
    params.z * params.z * y * y / (3.0 * params.tau)
}

/// Mean-variance utility: expected payoff minus `z²y²/(3τ)`.
pub fn utility(choice: &FirmChoice, params: &EconomyParams) -> Result<f64, EconomyError> {
    Ok(expected_payoff(choice, params)? - variance_penalty(choice.y, params))
}

/// The objective maximised over `y`, with `π = params.pi_store` held fixed.
pub fn objective(y: f64, x: f64, d: f64, e: f64, params: &EconomyParams) -> f64 {
    payoff_terms(x, y, d + e, params.pi_store, params) - variance_penalty(y, params)
}

/// Where the optimum sits on the feasible interval `[0, d/(r − z)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    Interior,
    Zero,
    DebtLimit,
}

/// Result of [`optimize_firm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirmDecision {
    /// The chosen position. Its `pi_store` is the funding split the choice
    /// actually implies, `x·y / (d + e)`, so `a = d + e` holds.
    pub choice: FirmChoice,
    /// Maximised objective (payoff priced at `params.pi_store`).
    pub objective: f64,
    /// Unclipped stationary point `3τ(x·r + p)/(2z²)`.
    pub unconstrained_y: f64,
    /// Upper end of the feasible interval, `d/(r − z)`.
    pub y_max: f64,
    pub bound: Bound,
    pub risk_free_debt: bool,
}

/// Maximises the concave quadratic objective over `y ∈ [0, d/(r − z)]`
/// for exogenous `x`, `d` and `e`.
pub fn optimize_firm(
    d: f64,
    e: f64,
    x: f64,
    params: &EconomyParams,
) -> Result<FirmDecision, EconomyError> {
    params.validate()?;
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid("d", d, "must be finite and non-negative"));
    }
    if !(e.is_finite() && e >= 0.0) {
        return Err(invalid("e", e, "must be finite and non-negative"));
    }
    if d + e <= 0.0 {
        return Err(invalid("d + e", d + e, "must be positive"));
    }
    if !x.is_finite() {
        return Err(invalid("x", x, "must be finite"));
    }
    let drift = x * params.r + params.p;
    let unconstrained_y = 3.0 * params.tau * drift / (2.0 * params.z * params.z);
    let margin = params.r - params.z;
    if margin <= 0.0 && drift > 0.0 {
        return Err(EconomyError::UnboundedProgram {
            r: params.r,
            z: params.z,
        });
    }
    let y_max = if margin > 0.0 {
        debt_limit(d, margin)
    } else {
        0.0
    };
    let (y, bound) = if unconstrained_y <= 0.0 {
        (0.0, Bound::Zero)
    } else if unconstrained_y >= y_max {
        (
            y_max,
            if y_max == 0.0 {
                Bound::Zero
            } else {
                Bound::DebtLimit
            },
        )
    } else {
        (unconstrained_y, Bound::Interior)
    };
    let choice = FirmChoice {
        x,
        y,
        d,
        e,
        pi_store: x * y / (d + e),
    };
    Ok(FirmDecision {
        choice,
        objective: objective(y, x, d, e, params),
        unconstrained_y,
        y_max,
        bound,
        risk_free_debt: choice.risk_free_debt(params),
    })
}

/// Largest `y` with `margin · y ≤ d` in floating point; the rounded quotient
/// can overshoot by an ulp.
fn debt_limit(d: f64, margin: f64) -> f64 {
    let mut y = d / margin;
    while y > 0.0 && margin * y > d {
        y = f64::from_bits(y.to_bits() - 1);
    }
    y
}

/// Regulator's welfare over a panel of firm choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareReport {
    /// Sum of firm utilities.
    pub p1: f64,
    /// Equilibrium value of the balance term, `Σ(e − d)`.
    pub p2: f64,
    /// `p1 + p2`.
    pub w: f64,
    /// The balance term read as the minimised quantity `Σ(a − π·a)` at the
    /// policy fraction `params.pi_store`.
    pub p2_at_policy_pi: f64,
    /// `p1 + p2_at_policy_pi`.
    pub w_at_policy_pi: f64,
    /// `π` solving `Σ(a − π·a) = Σ(e − d)`, i.e. `1 − Σ(e − d)/Σa`.
    pub equilibrium_pi: f64,
}

pub fn welfare(
    choices: &[FirmChoice],
    params: &EconomyParams,
) -> Result<WelfareReport, EconomyError> {
    params.validate()?;
    let mut p1 = CompensatedSum::new();
    let mut assets = CompensatedSum::new();
    let mut surplus = CompensatedSum::new();
    // Σa − Σ(e − d), accumulated term by term
    let mut at_risk = CompensatedSum::new();
    for c in choices {
        p1.add(utility(c, params)?);
        let a = c.funding();
        assets.add(a);
        surplus.add(c.e);
        surplus.add(-c.d);
        at_risk.add(a);
        at_risk.add(-c.e);
        at_risk.add(c.d);
    }
    if assets.value() == 0.0 {
        return Err(EconomyError::ZeroAggregateAssets);
    }
    let p1 = p1.value();
    let p2 = surplus.value();
    let p2_at_policy_pi = (1.0 - params.pi_store) * assets.value();
    Ok(WelfareReport {
        p1,
        p2,
        w: p1 + p2,
        p2_at_policy_pi,
        w_at_policy_pi: p1 + p2_at_policy_pi,
        equilibrium_pi: corrected_div(at_risk.head(), at_risk.tail(), assets.head(), assets.tail()),
    })
}
