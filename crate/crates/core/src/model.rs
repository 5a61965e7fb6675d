//! The reference SCC setup for a prognostic marker.
//!
//! The outcome occurs when the universal cause `U` is present together with
//! either the marker `T` or the alternative cause `V`:
//!
//! ```text
//! D = (T ∨ V) ∧ U
//! ```
//!
//! With `T`, `U`, `V` independent Bernoulli variables the joint distribution
//! of marker and outcome is a function of the three cause probabilities, and
//! the mapping is invertible for every table the model can produce.

use serde::Serialize;

use crate::error::{IndexKind, Result, SccError};

/// Cell sums within this distance of 1 are accepted as-is.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Cell sums within this distance of 1 are rescaled; anything further is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(SccError::NotAProbability { name, value })
    }
}

/// Joint probabilities of marker status by outcome status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContingencyTable {
    tp: f64,
    fp: f64,
    #[serde(rename = "fn")]
    fn_: f64,
    tn: f64,
}

impl ContingencyTable {
    /// Validates the four cells. Sums off by at most [`RENORMALIZE_TOL`] are
    /// rescaled to 1; larger deviations are rejected.
    pub fn new(tp: f64, fp: f64, fn_: f64, tn: f64) -> Result<Self> {
        let tp = check_probability("tp", tp)?;
        let fp = check_probability("fp", fp)?;
        let fn_ = check_probability("fn", fn_)?;
        let tn = check_probability("tn", tn)?;
        let sum = tp + fp + fn_ + tn;
        let dev = (sum - 1.0).abs();
        if dev <= NORMALIZATION_TOL {
            Ok(Self { tp, fp, fn_, tn })
        } else if dev <= RENORMALIZE_TOL {
            Ok(Self {
                tp: tp / sum,
                fp: fp / sum,
                fn_: fn_ / sum,
                tn: tn / sum,
            })
        } else {
            Err(SccError::TableNotNormalized { sum })
        }
    }

    /// Cells produced by closed-form constructions that already sum to one.
    pub(crate) fn from_cells(tp: f64, fp: f64, fn_: f64, tn: f64) -> Self {
        debug_assert!(
            ((tp + fp + fn_ + tn) - 1.0).abs() <= NORMALIZATION_TOL,
            "cells sum to {}",
            tp + fp + fn_ + tn
        );
        Self { tp, fp, fn_, tn }
    }

    pub fn tp(&self) -> f64 {
        self.tp
    }

    pub fn fp(&self) -> f64 {
        self.fp
    }

    pub fn fn_(&self) -> f64 {
        self.fn_
    }

    pub fn tn(&self) -> f64 {
        self.tn
    }

    /// Cells in the order TP, FP, FN, TN.
    pub fn cells(&self) -> [f64; 4] {
        [self.tp, self.fp, self.fn_, self.tn]
    }

    /// P(D=1) = TP + FN.
    pub fn prevalence(&self) -> f64 {
        self.tp + self.fn_
    }

    /// P(T=1) = TP + FP.
    pub fn marker_positivity(&self) -> f64 {
        self.tp + self.fp
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.cells()
            .iter()
            .zip(other.cells())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Bernoulli parameters of the marker, the universal cause and the
/// alternative cause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauseProbabilities {
    pub p_t: f64,
    pub p_u: f64,
    pub p_v: f64,
}

impl CauseProbabilities {
    pub fn new(p_t: f64, p_u: f64, p_v: f64) -> Result<Self> {
        Ok(Self {
            p_t: check_probability("p_t", p_t)?,
            p_u: check_probability("p_u", p_u)?,
            p_v: check_probability("p_v", p_v)?,
        })
    }

    /// True when any probability sits exactly on 0 or 1.
    pub fn is_degenerate(&self) -> bool {
        self.as_array().iter().any(|&p| p == 0.0 || p == 1.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_t, self.p_u, self.p_v]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// SE, SP, PPV, NPV and prevalence of a table. A metric whose denominator
/// is zero is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerformanceMetrics {
    pub se: Option<f64>,
    pub sp: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub prevalence: f64,
}

impl PerformanceMetrics {
    pub fn se(&self) -> Result<f64> {
        self.se.ok_or(SccError::UndefinedMetric("SE"))
    }

    pub fn sp(&self) -> Result<f64> {
        self.sp.ok_or(SccError::UndefinedMetric("SP"))
    }

    pub fn ppv(&self) -> Result<f64> {
        self.ppv.ok_or(SccError::UndefinedMetric("PPV"))
    }

    pub fn npv(&self) -> Result<f64> {
        self.npv.ok_or(SccError::UndefinedMetric("NPV"))
    }
}

/// Per-metric constants: a metric is transportable across a family of
/// populations iff its index is constant over that family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityIndices {
    pub ppv_index: f64,
    pub npv_index: f64,
    pub se_index: f64,
    pub sp_index: f64,
}

/// Risk as a linear function of the binary marker:
/// `P(D=1|T) = intercept + slope * T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEquation {
    pub intercept: f64,
    pub slope: f64,
}

impl RiskEquation {
    pub fn risk(&self, marker_positive: bool) -> f64 {
        if marker_positive {
            self.intercept + self.slope
        } else {
            self.intercept
        }
    }
}

pub fn causes_to_table(c: &CauseProbabilities) -> ContingencyTable {
    let CauseProbabilities { p_t, p_u, p_v } = *c;
    let tp = p_t * p_u;
    let fp = p_t * (1.0 - p_u);
    let fn_ = (1.0 - p_t) * p_u * p_v;
    // product form keeps tn nonnegative when p_u*p_v = 1
    let tn = (1.0 - p_t) * (1.0 - p_u * p_v);
    ContingencyTable::from_cells(tp, fp, fn_, tn)
}

pub fn table_to_causes(t: &ContingencyTable) -> Result<CauseProbabilities> {
    let p_t = t.marker_positivity();
    if p_t <= 0.0 {
        return Err(SccError::DegenerateMarker);
    }
    let p_u = (t.tp / p_t).min(1.0);
    let p_v = if t.fn_ == 0.0 {
        0.0
    } else {
        let denom = (1.0 - p_t) * p_u;
        if denom <= 0.0 {
            return Err(SccError::DegenerateUniversalCause { fn_: t.fn_ });
        }
        let p_v = t.fn_ / denom;
        if p_v > 1.0 + NORMALIZATION_TOL {
            return Err(SccError::InconsistentTable { p_v });
        }
        p_v.min(1.0)
    };
    Ok(CauseProbabilities {
        p_t: p_t.min(1.0),
        p_u,
        p_v,
    })
}

fn ratio(num: f64, denom: f64) -> Option<f64> {
    if denom > 0.0 {
        Some(num / denom)
    } else {
        None
    }
}

pub fn metrics(t: &ContingencyTable) -> PerformanceMetrics {
    PerformanceMetrics {
        se: ratio(t.tp, t.tp + t.fn_),
        sp: ratio(t.tn, t.fp + t.tn),
        ppv: ratio(t.tp, t.tp + t.fp),
        npv: ratio(t.tn, t.fn_ + t.tn),
        prevalence: t.prevalence(),
    }
}

/// `P_U (P_T + P_V - P_T P_V)`, written so that it reproduces `tp + fn` of
/// [`causes_to_table`] bit for bit.
pub fn prevalence_from_causes(c: &CauseProbabilities) -> f64 {
    let t = causes_to_table(c);
    t.tp + t.fn_
}

pub fn stability_indices(c: &CauseProbabilities) -> Result<StabilityIndices> {
    let CauseProbabilities { p_t, p_u, p_v } = *c;
    if p_t <= 0.0 {
        return Err(SccError::UndefinedIndex(IndexKind::Se));
    }
    let sp_denom = (1.0 - p_t) * (1.0 - p_u * p_v);
    if sp_denom <= 0.0 {
        return Err(SccError::UndefinedIndex(IndexKind::Sp));
    }
    Ok(StabilityIndices {
        ppv_index: p_u,
        npv_index: p_u * p_v,
        se_index: p_v * (1.0 - p_t) / p_t,
        sp_index: p_t * (1.0 - p_u) / sp_denom,
    })
}

pub fn risk_equation(m: &PerformanceMetrics) -> Result<RiskEquation> {
    let ppv = m.ppv()?;
    let npv = m.npv()?;
    let intercept = 1.0 - npv;
    Ok(RiskEquation {
        intercept,
        slope: ppv - intercept,
    })
}

/// Table for the mirrored setup `D = (T ∧ V) ∨ U` with independent causes.
pub fn symmetric_setup_table(c: &CauseProbabilities) -> ContingencyTable {
    let CauseProbabilities { p_t, p_u, p_v } = *c;
    let none = (1.0 - p_u) * (1.0 - p_v);
    ContingencyTable::from_cells(
        p_t * (1.0 - none),
        p_t * none,
        (1.0 - p_t) * p_u,
        (1.0 - p_t) * (1.0 - p_u),
    )
}
