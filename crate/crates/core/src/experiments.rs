//! End-to-end runners: the five-row worked example, prevalence sweeps, and
//! the information-loss simulation.

use rayon::prelude::*;
use serde::Serialize;

use crate::divergence::{kl_divergence, DivergenceBits};
use crate::error::{Result, SccError};
use crate::model::{causes_to_table, metrics, table_to_causes, CauseProbabilities, ContingencyTable, PerformanceMetrics};
use crate::popgen::{odds_ratio_sweep, sample_population_pair, Scenario};
use crate::transport::{
    transport_by_accuracy, transport_by_predictive_values, transport_proportional_odds,
    TransportMethod, TransportResult,
};

pub const DEFAULT_N_PAIRS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleRow {
    pub description: &'static str,
    pub causes: CauseProbabilities,
    pub table: ContingencyTable,
    pub metrics: PerformanceMetrics,
    pub fitted_odds_ratio: Option<f64>,
}

fn example_row(
    description: &'static str,
    table: ContingencyTable,
    fitted_odds_ratio: Option<f64>,
) -> Result<ExampleRow> {
    Ok(ExampleRow {
        description,
        causes: table_to_causes(&table)?,
        table,
        metrics: metrics(&table),
        fitted_odds_ratio,
    })
}

/// Source {0.25, 0.75, 0.5}, target {1/3, 0.8, 2/3}, and the three ways of
/// transporting the marker from one to the other.
pub fn reproduce_worked_example() -> Result<Vec<ExampleRow>> {
    let source = CauseProbabilities::new(0.25, 0.75, 0.5)?;
    let target = CauseProbabilities::new(1.0 / 3.0, 0.8, 2.0 / 3.0)?;
    let source_table = causes_to_table(&source);
    let target_table = causes_to_table(&target);
    let source_metrics = metrics(&source_table);
    let target_prev = target_table.prevalence();

    let pv = transport_by_predictive_values(&source_metrics, target.p_t)?;
    let acc = transport_by_accuracy(&source_metrics, target_prev)?;
    let po = transport_proportional_odds(&source, target_prev)?;

    Ok(vec![
        ExampleRow {
            description: "Source population",
            causes: source,
            table: source_table,
            metrics: source_metrics,
            fitted_odds_ratio: None,
        },
        ExampleRow {
            description: "Target population",
            causes: target,
            table: target_table,
            metrics: metrics(&target_table),
            fitted_odds_ratio: None,
        },
        example_row("By predictive values", pv.implied_table, None)?,
        example_row("By accuracy", acc.implied_table, None)?,
        example_row("Proportional odds", po.implied_table, po.fitted_odds_ratio)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub odds_ratio: f64,
    pub prevalence: f64,
    pub se: f64,
    pub sp: f64,
    pub ppv: f64,
    pub npv: f64,
}

/// One row per odds ratio, sorted ascending by odds ratio.
pub fn prevalence_sweep(scenario: &Scenario, or_grid: &[f64]) -> Result<Vec<SweepRow>> {
    let mut grid = or_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    odds_ratio_sweep(scenario, &grid)?
        .into_iter()
        .map(|(odds_ratio, causes)| {
            let m = metrics(&causes_to_table(&causes));
            Ok(SweepRow {
                odds_ratio,
                prevalence: m.prevalence,
                se: m.se()?,
                sp: m.sp()?,
                ppv: m.ppv()?,
                npv: m.npv()?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimRecord {
    pub pair_index: u64,
    pub method: TransportMethod,
    pub d_kl_bits: DivergenceBits,
    pub target_prevalence: f64,
    pub fitted_or: Option<f64>,
    /// P(T=1) of the true target population.
    #[serde(skip)]
    pub target_marker_positivity: f64,
    #[serde(skip)]
    pub implied_table: ContingencyTable,
}

/// A (pair, method) evaluation that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedDraw {
    pub pair_index: u64,
    pub method: TransportMethod,
    pub reason: SccError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: TransportMethod,
    /// Records scored, finite or infinite.
    pub n: usize,
    pub n_infinite: usize,
    pub n_skipped: usize,
    pub mean_bits: Option<f64>,
    pub median_bits: Option<f64>,
    pub p25_bits: Option<f64>,
    pub p75_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub n_pairs: usize,
    pub methods: Vec<MethodSummary>,
}

impl SimSummary {
    pub fn method(&self, method: TransportMethod) -> &MethodSummary {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .expect("summary covers every method")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    /// Sorted by pair index, then method.
    pub records: Vec<SimRecord>,
    pub skipped: Vec<SkippedDraw>,
    pub summary: SimSummary,
}

/// Linear interpolation between order statistics (R's default, type 7).
/// `sorted` must be ascending and nonempty.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(n_pairs: usize, records: &[SimRecord], skipped: &[SkippedDraw]) -> SimSummary {
    let methods = TransportMethod::ALL
        .iter()
        .map(|&method| {
            let mine: Vec<f64> = records
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.d_kl_bits.value())
                .collect();
            let mut finite: Vec<f64> = mine.iter().copied().filter(|v| v.is_finite()).collect();
            finite.sort_by(f64::total_cmp);
            let stats = (!finite.is_empty()).then(|| {
                (
                    finite.iter().sum::<f64>() / finite.len() as f64,
                    quantile(&finite, 0.5),
                    quantile(&finite, 0.25),
                    quantile(&finite, 0.75),
                )
            });
            MethodSummary {
                method,
                n: mine.len(),
                n_infinite: mine.len() - finite.len(),
                n_skipped: skipped.iter().filter(|s| s.method == method).count(),
                mean_bits: stats.map(|s| s.0),
                median_bits: stats.map(|s| s.1),
                p25_bits: stats.map(|s| s.2),
                p75_bits: stats.map(|s| s.3),
            }
        })
        .collect();
    SimSummary { n_pairs, methods }
}

fn evaluate_pair(
    scenario: &Scenario,
    master_seed: u64,
    pair_index: u64,
) -> Vec<std::result::Result<SimRecord, SkippedDraw>> {
    let (source, target) = sample_population_pair(scenario, master_seed, pair_index);
    let truth = causes_to_table(&target);
    let source_metrics = metrics(&causes_to_table(&source));
    let target_prev = truth.prevalence();

    TransportMethod::ALL
        .iter()
        .map(|&method| {
            let result: Result<TransportResult> = match method {
                TransportMethod::PredictiveValues => {
                    transport_by_predictive_values(&source_metrics, target.p_t)
                }
                TransportMethod::Accuracy => transport_by_accuracy(&source_metrics, target_prev),
                TransportMethod::ProportionalOdds => {
                    transport_proportional_odds(&source, target_prev)
                }
            };
            match result {
                Ok(r) => Ok(SimRecord {
                    pair_index,
                    method,
                    d_kl_bits: kl_divergence(&truth, &r.implied_table),
                    target_prevalence: target_prev,
                    fitted_or: r.fitted_odds_ratio,
                    target_marker_positivity: target.p_t,
                    implied_table: r.implied_table,
                }),
                Err(reason) => Err(SkippedDraw {
                    pair_index,
                    method,
                    reason,
                }),
            }
        })
        .collect()
}

/// Draws `n_pairs` source/target populations, transports the source marker
/// to each target with all three methods and scores each implied table
/// against the true target table.
///
/// Pairs are evaluated in parallel; every draw is addressed by
/// `(master_seed, pair_index)` so the output does not depend on scheduling.
pub fn information_loss_sim(scenario: &Scenario, n_pairs: usize, master_seed: u64) -> SimRun {
    let outcomes: Vec<_> = (0..n_pairs as u64)
        .into_par_iter()
        .flat_map_iter(|i| evaluate_pair(scenario, master_seed, i))
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    let summary = summarize(n_pairs, &records, &skipped);
    SimRun {
        records,
        skipped,
        summary,
    }
}
