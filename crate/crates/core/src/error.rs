use thiserror::Error;

/// Which entry of [`StabilityIndices`](crate::model::StabilityIndices) failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Ppv,
    Npv,
    Se,
    Sp,
}

impl std::fmt::Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            IndexKind::Ppv => "PPV",
            IndexKind::Npv => "NPV",
            IndexKind::Se => "SE",
            IndexKind::Sp => "SP",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SccError {
    #[error("{name} = {value} is not a probability in [0,1]")]
    NotAProbability { name: &'static str, value: f64 },

    #[error("cells sum to {}, expected 1", round_for_display(*sum))]
    TableNotNormalized { sum: f64 },

    #[error("DegenerateMarker: no marker-positive mass (tp+fp = 0), P_U is undefined")]
    DegenerateMarker,

    #[error("DegenerateUniversalCause: fn = {fn_} > 0 but (1-P_T)*P_U = 0, P_V is undefined")]
    DegenerateUniversalCause { fn_: f64 },

    #[error("table is inconsistent with the SCC model: implied P_V = {p_v} > 1")]
    InconsistentTable { p_v: f64 },

    #[error("UndefinedIndex: {0} stability index has a zero denominator")]
    UndefinedIndex(IndexKind),

    #[error("UndefinedMetric: {0} is undefined (zero denominator)")]
    UndefinedMetric(&'static str),

    #[error("DegenerateAccuracy: SE and SP must lie strictly inside (0,1), got SE = {se}, SP = {sp}")]
    DegenerateAccuracy { se: f64, sp: f64 },

    #[error("DegenerateCauses: cause probabilities must lie strictly inside (0,1)")]
    DegenerateCauses,

    #[error("TargetOutOfRange: target prevalence {0} must lie strictly inside (0,1)")]
    TargetOutOfRange(f64),

    #[error("invalid odds ratio {0}: must be finite and positive")]
    InvalidOddsRatio(f64),

    #[error("invalid tolerance {0}: must be finite and positive")]
    InvalidTolerance(f64),

    #[error("invalid correlation {0}: must lie in [0,1]")]
    InvalidCorrelation(f64),

    #[error("UnsupportedScenario: {0}")]
    UnsupportedScenario(&'static str),

    #[error("solver failed to bracket the target prevalence {target}")]
    BracketFailure { target: f64 },

    #[error("solver did not converge: |f(x) - target| = {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
}

impl SccError {
    /// True for failures of the numerical solver rather than invalid input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            SccError::BracketFailure { .. } | SccError::NoConvergence { .. }
        )
    }
}

/// Rounds to 12 decimals so diagnostics read `0.98`, not `0.9799999999999999`.
fn round_for_display(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub type Result<T> = std::result::Result<T, SccError>;
