//! Population-generating mechanisms.
//!
//! Deterministic sweeps shift the varying causes of a base population by a
//! grid of odds ratios. Random scenarios draw the varying causes from a
//! standard logit-normal distribution (optionally equicorrelated on the
//! logit scale), or all three from independent uniforms.
//!
//! Random draws come from ChaCha8 keyed by the master seed, with one ChaCha
//! stream per substream index. Normal deviates use the Box–Muller transform on
//! 53-bit uniforms in the open interval (0, 1). This generator layout is
//! [`GENERATOR_VERSION`]; changing any part of it must bump the version.

use nalgebra::Matrix3;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SccError};
use crate::model::CauseProbabilities;
use crate::transport::apply_odds_ratio;

pub const GENERATOR_VERSION: &str = "chacha8-boxmuller-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    VaryT,
    VaryU,
    VaryV,
    VaryTU,
    VaryTV,
    VaryUV,
    /// All three causes vary with pairwise latent correlation `rho`.
    VaryAll { rho: f64 },
    /// All three causes independent uniform on (0, 1).
    MaxEntropy,
}

impl ScenarioKind {
    /// Which of (T, U, V) vary.
    pub fn varying(&self) -> [bool; 3] {
        match self {
            ScenarioKind::VaryT => [true, false, false],
            ScenarioKind::VaryU => [false, true, false],
            ScenarioKind::VaryV => [false, false, true],
            ScenarioKind::VaryTU => [true, true, false],
            ScenarioKind::VaryTV => [true, false, true],
            ScenarioKind::VaryUV => [false, true, true],
            ScenarioKind::VaryAll { .. } | ScenarioKind::MaxEntropy => [true, true, true],
        }
    }

    pub fn label(&self) -> String {
        match self {
            ScenarioKind::VaryT => "t".into(),
            ScenarioKind::VaryU => "u".into(),
            ScenarioKind::VaryV => "v".into(),
            ScenarioKind::VaryTU => "tu".into(),
            ScenarioKind::VaryTV => "tv".into(),
            ScenarioKind::VaryUV => "uv".into(),
            ScenarioKind::VaryAll { rho } => format!("all(rho={rho})"),
            ScenarioKind::MaxEntropy => "maxent".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub base: CauseProbabilities,
}

impl Scenario {
    pub fn default_base() -> CauseProbabilities {
        CauseProbabilities {
            p_t: 0.25,
            p_u: 0.75,
            p_v: 0.5,
        }
    }

    /// Scenario over the default base {0.25, 0.75, 0.5}.
    pub fn new(kind: ScenarioKind) -> Result<Self> {
        Self::with_base(kind, Self::default_base())
    }

    pub fn with_base(kind: ScenarioKind, base: CauseProbabilities) -> Result<Self> {
        if let ScenarioKind::VaryAll { rho } = kind {
            if !(0.0..=1.0).contains(&rho) {
                return Err(SccError::InvalidCorrelation(rho));
            }
        }
        if base.is_degenerate() {
            return Err(SccError::DegenerateCauses);
        }
        Ok(Self { kind, base })
    }
}

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub master_seed: u64,
    pub substream_index: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        Self {
            master_seed,
            substream_index,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.substream_index);
        rng
    }
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn standard_normals(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut out = [0.0; 4];
    for pair in out.chunks_mut(2) {
        let r = (-2.0 * open_uniform(rng).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * open_uniform(rng);
        pair[0] = r * theta.cos();
        pair[1] = r * theta.sin();
    }
    [out[0], out[1], out[2]]
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Lower Cholesky factor of the 3×3 equicorrelation matrix, for `0 <= rho < 1`.
fn equicorrelation_factor(rho: f64) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|i, j| if i == j { 1.0 } else { rho });
    m.cholesky()
        .expect("equicorrelation matrix is positive definite for rho in [0, 1)")
        .l()
}

/// Latent standard-normal vector for a scenario (before the logistic map).
pub fn sample_latent(kind: &ScenarioKind, stream: SeededStream) -> [f64; 3] {
    let mut rng = stream.rng();
    let z = standard_normals(&mut rng);
    match *kind {
        ScenarioKind::VaryAll { rho } if rho >= 1.0 => [z[0]; 3],
        ScenarioKind::VaryAll { rho } if rho > 0.0 => {
            let l = equicorrelation_factor(rho);
            let v = l * nalgebra::Vector3::from(z);
            [v[0], v[1], v[2]]
        }
        _ => z,
    }
}

pub fn sample_causes(scenario: &Scenario, stream: SeededStream) -> CauseProbabilities {
    if scenario.kind == ScenarioKind::MaxEntropy {
        let mut rng = stream.rng();
        return CauseProbabilities {
            p_t: open_uniform(&mut rng),
            p_u: open_uniform(&mut rng),
            p_v: open_uniform(&mut rng),
        };
    }
    let z = sample_latent(&scenario.kind, stream);
    let base = scenario.base.as_array();
    let vary = scenario.kind.varying();
    let pick = |i: usize| if vary[i] { logistic(z[i]) } else { base[i] };
    CauseProbabilities {
        p_t: pick(0),
        p_u: pick(1),
        p_v: pick(2),
    }
}

/// Independent source and target draws for pair `pair_index`, on substreams
/// `2·i` and `2·i + 1`.
pub fn sample_population_pair(
    scenario: &Scenario,
    master_seed: u64,
    pair_index: u64,
) -> (CauseProbabilities, CauseProbabilities) {
    let source = sample_causes(scenario, SeededStream::new(master_seed, 2 * pair_index));
    let target = sample_causes(scenario, SeededStream::new(master_seed, 2 * pair_index + 1));
    (source, target)
}

/// Shifts the varying causes of `scenario.base` by each odds ratio.
pub fn odds_ratio_sweep(
    scenario: &Scenario,
    or_values: &[f64],
) -> Result<Vec<(f64, CauseProbabilities)>> {
    if scenario.kind == ScenarioKind::MaxEntropy {
        return Err(SccError::UnsupportedScenario(
            "odds-ratio sweeps need a base population; max-entropy has none",
        ));
    }
    let vary = scenario.kind.varying();
    let base = scenario.base.as_array();
    or_values
        .iter()
        .map(|&x| {
            if !(x.is_finite() && x > 0.0) {
                return Err(SccError::InvalidOddsRatio(x));
            }
            let shift = |i: usize| {
                if vary[i] {
                    apply_odds_ratio(base[i], x)
                } else {
                    base[i]
                }
            };
            Ok((
                x,
                CauseProbabilities {
                    p_t: shift(0),
                    p_u: shift(1),
                    p_v: shift(2),
                },
            ))
        })
        .collect()
}

/// `steps` points spaced evenly in log scale from `min` to `max` inclusive.
pub fn log_spaced_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    for x in [min, max] {
        if !(x.is_finite() && x > 0.0) {
            return Err(SccError::InvalidOddsRatio(x));
        }
    }
    if steps <= 1 {
        return Ok(vec![min; steps]);
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    Ok((0..steps)
        .map(|i| {
            if i == 0 {
                min
            } else if i == steps - 1 {
                max
            } else {
                (lmin + (lmax - lmin) * i as f64 / (steps - 1) as f64).exp()
            }
        })
        .collect())
}
