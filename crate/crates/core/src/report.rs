//! Text, CSV and JSON renderings of results.
//!
//! CSV numbers carry 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::experiments::{ExampleRow, SimRecord, SimSummary, SweepRow};
use crate::model::{CauseProbabilities, ContingencyTable, PerformanceMetrics};

pub const RECORDS_HEADER: [&str; 5] = [
    "pair_index",
    "method",
    "d_kl_bits",
    "target_prevalence",
    "fitted_or",
];
pub const SWEEP_HEADER: [&str; 6] = ["odds_ratio", "prevalence", "se", "sp", "ppv", "npv"];

/// Decimal text with 17 significant digits. Scientific notation outside
/// `[1e-5, 1e17)`; `inf`/`-inf`/`NaN` as Rust spells them.
pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..17).contains(&mag) {
        let decimals = (16 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(format_decimal).unwrap_or_default()
}

fn write_csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

pub fn records_csv(records: &[SimRecord]) -> String {
    write_csv(
        &RECORDS_HEADER,
        records.iter().map(|r| {
            vec![
                r.pair_index.to_string(),
                r.method.as_str().to_string(),
                format_decimal(r.d_kl_bits.value()),
                format_decimal(r.target_prevalence),
                fmt_opt(r.fitted_or),
            ]
        }),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    write_csv(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            [r.odds_ratio, r.prevalence, r.se, r.sp, r.ppv, r.npv]
                .into_iter()
                .map(format_decimal)
                .collect()
        }),
    )
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    method: &'a str,
    n: usize,
    n_infinite: usize,
    n_skipped: usize,
    mean_bits: Option<f64>,
    median_bits: Option<f64>,
    p25_bits: Option<f64>,
    p75_bits: Option<f64>,
}

/// JSON array with one object per method.
pub fn summary_json(summary: &SimSummary) -> String {
    let entries: Vec<SummaryEntry> = summary
        .methods
        .iter()
        .map(|m| SummaryEntry {
            method: m.method.as_str(),
            n: m.n,
            n_infinite: m.n_infinite,
            n_skipped: m.n_skipped,
            mean_bits: m.mean_bits,
            median_bits: m.median_bits,
            p25_bits: m.p25_bits,
            p75_bits: m.p75_bits,
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&entries).expect("summary serializes");
    out.push('\n');
    out
}

pub fn summary_text(summary: &SimSummary) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
    let mut out = String::new();
    writeln!(
        out,
        "{:<18} {:>7} {:>10} {:>9} {:>12} {:>12} {:>12} {:>12}",
        "method", "n", "n_infinite", "n_skipped", "mean_bits", "median_bits", "p25_bits", "p75_bits"
    )
    .unwrap();
    for m in &summary.methods {
        writeln!(
            out,
            "{:<18} {:>7} {:>10} {:>9} {:>12} {:>12} {:>12} {:>12}",
            m.method.as_str(),
            m.n,
            m.n_infinite,
            m.n_skipped,
            opt(m.mean_bits),
            opt(m.median_bits),
            opt(m.p25_bits),
            opt(m.p75_bits)
        )
        .unwrap();
    }
    out
}

fn three(x: f64) -> String {
    format!("{x:.3}")
}

fn three_opt(x: Option<f64>) -> String {
    x.map(three).unwrap_or_else(|| "undef".into())
}

pub fn causes_text(c: &CauseProbabilities) -> String {
    format!("{{{},{},{}}}", three(c.p_t), three(c.p_u), three(c.p_v))
}

pub fn table_text(t: &ContingencyTable) -> String {
    let cells: Vec<String> = t.cells().into_iter().map(three).collect();
    format!("{{{}}}", cells.join(","))
}

/// The worked example as an aligned table, rounded to 3 decimals.
pub fn example_text(rows: &[ExampleRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<22} {:<21} {:<29} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "Description", "{P_T,P_U,P_V}", "Contingency table", "SE", "SP", "PPV", "NPV", "prev", "OR"
    )
    .unwrap();
    for r in rows {
        let m = &r.metrics;
        writeln!(
            out,
            "{:<22} {:<21} {:<29} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
            r.description,
            causes_text(&r.causes),
            table_text(&r.table),
            three_opt(m.se),
            three_opt(m.sp),
            three_opt(m.ppv),
            three_opt(m.npv),
            three(m.prevalence),
            r.fitted_odds_ratio.map(three).unwrap_or_else(|| "-".into()),
        )
        .unwrap();
    }
    out
}

pub fn metrics_text(m: &PerformanceMetrics) -> String {
    format!(
        "se={} sp={} ppv={} npv={} prevalence={}",
        m.se.map(format_decimal).unwrap_or_else(|| "undefined".into()),
        m.sp.map(format_decimal).unwrap_or_else(|| "undefined".into()),
        m.ppv.map(format_decimal).unwrap_or_else(|| "undefined".into()),
        m.npv.map(format_decimal).unwrap_or_else(|| "undefined".into()),
        format_decimal(m.prevalence)
    )
}
