//! Moving a marker from a source population to a target population.
//!
//! Three assumptions about what stays fixed across populations:
//!
//! * predictive values: PPV and NPV carry over, the target's marker
//!   positivity P(T=1) is supplied;
//! * accuracy: SE and SP carry over, the target's prevalence is supplied
//!   (equivalently, Bayes' rule with likelihood ratios);
//! * proportional odds: one common odds ratio shifts all three cause
//!   probabilities until the target prevalence is matched.

use serde::Serialize;

use crate::error::{Result, SccError};
use crate::model::{
    causes_to_table, prevalence_from_causes, CauseProbabilities, ContingencyTable,
    PerformanceMetrics,
};

/// Default solver tolerance on the prevalence scale.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Geometric growth of the bracket per expansion step.
pub const BRACKET_FACTOR: f64 = 4.0;
pub const MAX_EXPANSIONS: usize = 64;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMethod {
    PredictiveValues,
    Accuracy,
    ProportionalOdds,
}

impl TransportMethod {
    pub const ALL: [TransportMethod; 3] = [
        TransportMethod::PredictiveValues,
        TransportMethod::Accuracy,
        TransportMethod::ProportionalOdds,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TransportMethod::PredictiveValues => "predictive_values",
            TransportMethod::Accuracy => "accuracy",
            TransportMethod::ProportionalOdds => "proportional_odds",
        }
    }
}

impl std::fmt::Display for TransportMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The target-population quantity a transport was conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetInput {
    MarkerPositivity(f64),
    Prevalence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportResult {
    pub implied_table: ContingencyTable,
    pub method: TransportMethod,
    /// Common odds ratio; only set for [`TransportMethod::ProportionalOdds`].
    pub fitted_odds_ratio: Option<f64>,
    pub target_input: TargetInput,
}

/// Likelihood ratios and the predictive values they imply at a new prevalence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitAdjustment {
    pub positive_lr: f64,
    pub negative_lr: f64,
    pub adjusted_ppv: f64,
    pub adjusted_one_minus_npv: f64,
}

/// Coefficients of `a x³ + b x² + c x + d = 0`, whose positive root is the
/// common odds ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicCoefficients {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }
}

fn check_unit(name: &'static str, p: f64) -> Result<f64> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SccError::NotAProbability { name, value: p })
    }
}

pub fn transport_by_predictive_values(
    source: &PerformanceMetrics,
    target_p_t: f64,
) -> Result<TransportResult> {
    let ppv = source.ppv()?;
    let npv = source.npv()?;
    let p_t = check_unit("target_p_t", target_p_t)?;
    let table = ContingencyTable::from_cells(
        p_t * ppv,
        p_t * (1.0 - ppv),
        (1.0 - p_t) * (1.0 - npv),
        (1.0 - p_t) * npv,
    );
    Ok(TransportResult {
        implied_table: table,
        method: TransportMethod::PredictiveValues,
        fitted_odds_ratio: None,
        target_input: TargetInput::MarkerPositivity(p_t),
    })
}

pub fn transport_by_accuracy(
    source: &PerformanceMetrics,
    target_prevalence: f64,
) -> Result<TransportResult> {
    let se = source.se()?;
    let sp = source.sp()?;
    let prev = check_unit("target_prevalence", target_prevalence)?;
    let table = ContingencyTable::from_cells(
        prev * se,
        (1.0 - prev) * (1.0 - sp),
        prev * (1.0 - se),
        (1.0 - prev) * sp,
    );
    Ok(TransportResult {
        implied_table: table,
        method: TransportMethod::Accuracy,
        fitted_odds_ratio: None,
        target_input: TargetInput::Prevalence(prev),
    })
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Prevalence adjustment on the logit scale:
/// `logit P(D=1|T) = logit π* + log LR(T)`.
pub fn logit_adjustment_check(
    source: &PerformanceMetrics,
    target_prevalence: f64,
) -> Result<LogitAdjustment> {
    let se = source.se()?;
    let sp = source.sp()?;
    if !(se > 0.0 && se < 1.0 && sp > 0.0 && sp < 1.0) {
        return Err(SccError::DegenerateAccuracy { se, sp });
    }
    if !(target_prevalence > 0.0 && target_prevalence < 1.0) {
        return Err(SccError::TargetOutOfRange(target_prevalence));
    }
    let positive_lr = se / (1.0 - sp);
    let negative_lr = (1.0 - se) / sp;
    let base = logit(target_prevalence);
    Ok(LogitAdjustment {
        positive_lr,
        negative_lr,
        adjusted_ppv: expit(base + positive_lr.ln()),
        adjusted_one_minus_npv: expit(base + negative_lr.ln()),
    })
}

/// Probability after multiplying its odds by `x`: `p x / (1 - p + p x)`.
pub fn apply_odds_ratio(p: f64, x: f64) -> f64 {
    let px = p * x;
    px / (1.0 - p + px)
}

pub fn shift_causes(c: &CauseProbabilities, x: f64) -> CauseProbabilities {
    CauseProbabilities {
        p_t: apply_odds_ratio(c.p_t, x),
        p_u: apply_odds_ratio(c.p_u, x),
        p_v: apply_odds_ratio(c.p_v, x),
    }
}

fn require_nondegenerate(c: &CauseProbabilities) -> Result<()> {
    let open = |p: f64| p > 0.0 && p < 1.0;
    if c.as_array().into_iter().all(open) {
        Ok(())
    } else {
        Err(SccError::DegenerateCauses)
    }
}

/// Prevalence of the population obtained by shifting every cause by odds
/// ratio `x`. Strictly increasing in `x`, from 0 at `x → 0` to 1 at `x → ∞`.
pub fn proportional_odds_objective(c: &CauseProbabilities, x: f64) -> Result<f64> {
    require_nondegenerate(c)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(SccError::InvalidOddsRatio(x));
    }
    Ok(prevalence_from_causes(&shift_causes(c, x)))
}

/// Finds the common odds ratio whose shifted population has prevalence
/// `target_prevalence`.
///
/// The bracket starts at `[1, 1]` and grows geometrically (factor
/// [`BRACKET_FACTOR`], at most [`MAX_EXPANSIONS`] steps) on the side where
/// the target lies. Bisection at the geometric midpoint then runs until
/// `|f(x) - target| <= tol`, capped at [`MAX_ITERATIONS`].
pub fn solve_common_odds_ratio(
    c: &CauseProbabilities,
    target_prevalence: f64,
    tol: f64,
) -> Result<f64> {
    require_nondegenerate(c)?;
    if !(target_prevalence > 0.0 && target_prevalence < 1.0) {
        return Err(SccError::TargetOutOfRange(target_prevalence));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SccError::InvalidTolerance(tol));
    }
    let f = |x: f64| prevalence_from_causes(&shift_causes(c, x)) - target_prevalence;

    let at_one = f(1.0);
    if at_one.abs() <= tol {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let mut bracketed = false;
    for _ in 0..MAX_EXPANSIONS {
        if at_one < 0.0 {
            lo = hi;
            hi *= BRACKET_FACTOR;
            if f(hi) >= 0.0 {
                bracketed = true;
                break;
            }
        } else {
            hi = lo;
            lo /= BRACKET_FACTOR;
            if f(lo) <= 0.0 {
                bracketed = true;
                break;
            }
        }
    }
    if !bracketed {
        return Err(SccError::BracketFailure {
            target: target_prevalence,
        });
    }

    let mut best = (f64::INFINITY, 1.0);
    for iter in 0..MAX_ITERATIONS {
        let mid = (lo * hi).sqrt();
        let value = f(mid);
        if value.abs() < best.0 {
            best = (value.abs(), mid);
        }
        if value.abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            // interval exhausted at double precision
            return Err(SccError::NoConvergence {
                residual: best.0,
                iterations: iter + 1,
            });
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(SccError::NoConvergence {
        residual: best.0,
        iterations: MAX_ITERATIONS,
    })
}

pub fn cubic_coefficients(
    c: &CauseProbabilities,
    target_prevalence: f64,
) -> Result<CubicCoefficients> {
    require_nondegenerate(c)?;
    if !(target_prevalence > 0.0 && target_prevalence < 1.0) {
        return Err(SccError::TargetOutOfRange(target_prevalence));
    }
    let CauseProbabilities { p_t, p_u, p_v } = *c;
    let pi = target_prevalence;
    let tuv = p_t * p_u * p_v;
    let pairs = p_t * p_u + p_t * p_v + p_u * p_v;
    Ok(CubicCoefficients {
        a: (1.0 - pi) * tuv,
        b: (3.0 * pi - 2.0) * tuv - pi * pairs + p_t * p_u + p_u * p_v,
        c: -pi * (3.0 * tuv - 2.0 * pairs + p_t + p_u + p_v),
        d: -pi * (1.0 - p_t) * (1.0 - p_u) * (1.0 - p_v),
    })
}

/// Positive real root of the cubic, by the closed-form (trigonometric or
/// Cardano) solution followed by Newton polishing.
///
/// With `a > 0`, `c < 0`, `d < 0` the coefficient signs change exactly once,
/// so there is exactly one positive root. Returns `None` if no positive real
/// root is found.
pub fn cubic_positive_root(k: &CubicCoefficients) -> Option<f64> {
    if k.a.is_nan() || k.a <= 0.0 {
        return None;
    }
    let (b, c, d) = (k.b / k.a, k.c / k.a, k.d / k.a);
    // x = t - b/3 gives t³ + p t + q = 0
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut roots: Vec<f64> = Vec::with_capacity(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        roots.push((-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - shift);
    } else if p == 0.0 {
        roots.push(-shift);
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) / r).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for j in 0..3 {
            let angle = phi - 2.0 * std::f64::consts::PI * j as f64 / 3.0;
            roots.push(2.0 * r * angle.cos() - shift);
        }
    }
    let root = roots.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if root.is_nan() || root <= 0.0 {
        return None;
    }
    let mut x = root;
    for _ in 0..4 {
        let deriv = (3.0 * k.a * x + 2.0 * k.b) * x + k.c;
        if deriv == 0.0 {
            break;
        }
        let next = x - k.eval(x) / deriv;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        x = next;
    }
    Some(x)
}

pub fn transport_proportional_odds(
    c: &CauseProbabilities,
    target_prevalence: f64,
) -> Result<TransportResult> {
    transport_proportional_odds_with_tol(c, target_prevalence, DEFAULT_TOL)
}

pub fn transport_proportional_odds_with_tol(
    c: &CauseProbabilities,
    target_prevalence: f64,
    tol: f64,
) -> Result<TransportResult> {
    let x = solve_common_odds_ratio(c, target_prevalence, tol)?;
    Ok(TransportResult {
        implied_table: causes_to_table(&shift_causes(c, x)),
        method: TransportMethod::ProportionalOdds,
        fitted_odds_ratio: Some(x),
        target_input: TargetInput::Prevalence(target_prevalence),
    })
}
