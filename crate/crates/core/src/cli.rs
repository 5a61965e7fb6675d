//! The `scc` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::SccError;
use crate::experiments::{information_loss_sim, prevalence_sweep, reproduce_worked_example};
use crate::model::{causes_to_table, metrics, table_to_causes, CauseProbabilities, ContingencyTable, PerformanceMetrics};
use crate::popgen::{log_spaced_grid, Scenario, ScenarioKind};
use crate::report;
use crate::transport::{
    transport_by_accuracy, transport_by_predictive_values, transport_proportional_odds_with_tol,
    TransportResult, DEFAULT_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scc", version, about = "Sufficient-component-cause marker transport toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between cause probabilities and a contingency table.
    Map(MapArgs),
    /// Transport a marker to a target population.
    Transport(TransportArgs),
    /// Metrics along an odds-ratio sweep of a base population (CSV).
    Sweep(SweepArgs),
    /// Information-loss simulation over random source/target pairs.
    Simulate(SimulateArgs),
    /// Print the five-row worked example.
    Example,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// tp,fp,fn,tn
    #[arg(long, value_parser = parse_list::<4>, conflicts_with = "from_causes", required_unless_present = "from_causes")]
    pub from_table: Option<[f64; 4]>,
    /// p_t,p_u,p_v
    #[arg(long, value_parser = parse_list::<3>)]
    pub from_causes: Option<[f64; 3]>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// predictive values
    Pv,
    /// accuracy (Bayes rule)
    Acc,
    /// proportional odds
    Po,
}

#[derive(Debug, Args)]
pub struct TransportArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// p_t,p_u,p_v of the source population
    #[arg(long, value_parser = parse_list::<3>, conflicts_with = "source_table", required_unless_present = "source_table")]
    pub source_causes: Option<[f64; 3]>,
    /// tp,fp,fn,tn of the source population
    #[arg(long, value_parser = parse_list::<4>)]
    pub source_table: Option<[f64; 4]>,
    /// P(T=1) in the target population (pv)
    #[arg(long)]
    pub target_pt: Option<f64>,
    /// outcome prevalence in the target population (acc, po)
    #[arg(long)]
    pub target_prev: Option<f64>,
    /// solver tolerance on the prevalence scale (po)
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepScenario {
    T,
    U,
    V,
    Tu,
    Tv,
    Uv,
    #[value(alias = "all")]
    Tuv,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub scenario: SweepScenario,
    /// p_t,p_u,p_v of the base population
    #[arg(long, value_parser = parse_list::<3>)]
    pub base: Option<[f64; 3]>,
    #[arg(long, default_value_t = 0.0625)]
    pub or_min: f64,
    #[arg(long, default_value_t = 16.0)]
    pub or_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimScenario {
    T,
    U,
    V,
    Tu,
    Tv,
    Uv,
    All,
    Maxent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimOutput {
    Records,
    Summary,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: SimScenario,
    /// latent correlation in [0,1], or `maxent` (scenario `all` only)
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long, default_value_t = crate::experiments::DEFAULT_N_PAIRS)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SimOutput::Records)]
    pub out: SimOutput,
    /// summary format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

/// A failed command: the exit code plus a one-line diagnostic.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<SccError> for Failure {
    fn from(e: SccError) -> Self {
        let code = if e.is_numeric_failure() {
            EXIT_NUMERIC
        } else {
            EXIT_USAGE
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<String, Failure>;

#[derive(Serialize)]
struct Mapped {
    table: ContingencyTable,
    causes: Option<CauseProbabilities>,
    metrics: PerformanceMetrics,
}

fn mapped_csv(m: &Mapped) -> String {
    let opt = |x: Option<f64>| x.map(report::format_decimal).unwrap_or_default();
    let c = m.causes.map(|c| c.as_array().map(Some)).unwrap_or([None; 3]);
    let mut fields: Vec<String> = m.table.cells().into_iter().map(report::format_decimal).collect();
    fields.extend(c.into_iter().map(opt));
    fields.extend([m.metrics.se, m.metrics.sp, m.metrics.ppv, m.metrics.npv].into_iter().map(opt));
    fields.push(report::format_decimal(m.metrics.prevalence));
    format!(
        "tp,fp,fn,tn,p_t,p_u,p_v,se,sp,ppv,npv,prevalence\n{}\n",
        fields.join(",")
    )
}

fn mapped_text(m: &Mapped) -> String {
    let t = m.table.cells().map(report::format_decimal);
    let mut out = format!("table: tp={} fp={} fn={} tn={}\n", t[0], t[1], t[2], t[3]);
    if let Some(c) = m.causes {
        let c = c.as_array().map(report::format_decimal);
        out.push_str(&format!("causes: p_t={} p_u={} p_v={}\n", c[0], c[1], c[2]));
    }
    out.push_str(&format!("metrics: {}\n", report::metrics_text(&m.metrics)));
    out
}

fn render_mapped(m: &Mapped, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => mapped_text(m),
        OutputFormat::Json => serde_json::to_string_pretty(m).expect("serializable") + "\n",
        OutputFormat::Csv => mapped_csv(m),
    }
}

fn table_from(cells: [f64; 4]) -> Result<ContingencyTable, SccError> {
    ContingencyTable::new(cells[0], cells[1], cells[2], cells[3])
}

fn causes_from(p: [f64; 3]) -> Result<CauseProbabilities, SccError> {
    CauseProbabilities::new(p[0], p[1], p[2])
}

fn cmd_map(args: &MapArgs) -> CmdResult {
    let mapped = match (args.from_table, args.from_causes) {
        (Some(cells), None) => {
            let table = table_from(cells)?;
            let causes = table_to_causes(&table)?;
            Mapped {
                table,
                causes: Some(causes),
                metrics: metrics(&table),
            }
        }
        (None, Some(p)) => {
            let causes = causes_from(p)?;
            let table = causes_to_table(&causes);
            Mapped {
                table,
                causes: Some(causes),
                metrics: metrics(&table),
            }
        }
        _ => return Err(Failure::usage("exactly one of --from-table or --from-causes is required")),
    };
    Ok(render_mapped(&mapped, args.format))
}

#[derive(Serialize)]
struct Transported {
    #[serde(flatten)]
    result: TransportResult,
    implied_causes: Option<CauseProbabilities>,
    metrics: PerformanceMetrics,
}

fn cmd_transport(args: &TransportArgs) -> CmdResult {
    let (source_causes, source_table) = match (args.source_causes, args.source_table) {
        (Some(p), None) => {
            let c = causes_from(p)?;
            (Some(c), causes_to_table(&c))
        }
        (None, Some(cells)) => {
            let t = table_from(cells)?;
            (None, t)
        }
        _ => {
            return Err(Failure::usage(
                "exactly one of --source-causes or --source-table is required",
            ))
        }
    };
    let source_metrics = metrics(&source_table);
    let result = match args.method {
        MethodArg::Pv => {
            if args.target_prev.is_some() {
                return Err(Failure::usage("--target-prev does not apply to method pv"));
            }
            let p_t = args
                .target_pt
                .ok_or_else(|| Failure::usage("method pv requires --target-pt"))?;
            transport_by_predictive_values(&source_metrics, p_t)?
        }
        MethodArg::Acc | MethodArg::Po => {
            if args.target_pt.is_some() {
                return Err(Failure::usage("--target-pt applies only to method pv"));
            }
            let prev = args
                .target_prev
                .ok_or_else(|| Failure::usage("methods acc and po require --target-prev"))?;
            if args.method == MethodArg::Acc {
                transport_by_accuracy(&source_metrics, prev)?
            } else {
                let c = match source_causes {
                    Some(c) => c,
                    None => table_to_causes(&source_table)?,
                };
                transport_proportional_odds_with_tol(&c, prev, args.tol)?
            }
        }
    };
    let t = result.implied_table;
    let out = Transported {
        result,
        implied_causes: table_to_causes(&t).ok(),
        metrics: metrics(&t),
    };
    Ok(match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&out).expect("serializable") + "\n",
        fmt => {
            let mut s = format!("method: {}\n", out.result.method);
            if let Some(x) = out.result.fitted_odds_ratio {
                s.push_str(&format!("fitted_or: {}\n", report::format_decimal(x)));
            }
            let mapped = Mapped {
                table: t,
                causes: out.implied_causes,
                metrics: out.metrics,
            };
            if fmt == OutputFormat::Csv {
                mapped_csv(&mapped)
            } else {
                s + &mapped_text(&mapped)
            }
        }
    })
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let kind = match args.scenario {
        SweepScenario::T => ScenarioKind::VaryT,
        SweepScenario::U => ScenarioKind::VaryU,
        SweepScenario::V => ScenarioKind::VaryV,
        SweepScenario::Tu => ScenarioKind::VaryTU,
        SweepScenario::Tv => ScenarioKind::VaryTV,
        SweepScenario::Uv => ScenarioKind::VaryUV,
        SweepScenario::Tuv => ScenarioKind::VaryAll { rho: 1.0 },
    };
    let base = match args.base {
        Some(p) => causes_from(p)?,
        None => Scenario::default_base(),
    };
    if args.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    if args.or_min > args.or_max {
        return Err(Failure::usage("--or-min must not exceed --or-max"));
    }
    let scenario = Scenario::with_base(kind, base)?;
    let grid = log_spaced_grid(args.or_min, args.or_max, args.steps)?;
    let rows = prevalence_sweep(&scenario, &grid)?;
    Ok(report::sweep_csv(&rows))
}

fn sim_scenario(args: &SimulateArgs) -> Result<Scenario, Failure> {
    let single = |kind| {
        if args.rho.is_some() {
            Err(Failure::usage("--rho applies only to scenario all"))
        } else {
            Ok(kind)
        }
    };
    let kind = match args.scenario {
        SimScenario::T => single(ScenarioKind::VaryT)?,
        SimScenario::U => single(ScenarioKind::VaryU)?,
        SimScenario::V => single(ScenarioKind::VaryV)?,
        SimScenario::Tu => single(ScenarioKind::VaryTU)?,
        SimScenario::Tv => single(ScenarioKind::VaryTV)?,
        SimScenario::Uv => single(ScenarioKind::VaryUV)?,
        SimScenario::Maxent => match args.rho.as_deref() {
            None | Some("maxent") => ScenarioKind::MaxEntropy,
            Some(_) => return Err(Failure::usage("--rho does not apply to scenario maxent")),
        },
        SimScenario::All => match args.rho.as_deref() {
            None => return Err(Failure::usage("scenario all requires --rho R|maxent")),
            Some("maxent") => ScenarioKind::MaxEntropy,
            Some(r) => {
                let rho: f64 = r
                    .parse()
                    .map_err(|_| Failure::usage(format!("--rho: `{r}` is neither a number nor maxent")))?;
                ScenarioKind::VaryAll { rho }
            }
        },
    };
    Ok(Scenario::new(kind)?)
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let scenario = sim_scenario(args)?;
    if args.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let run = information_loss_sim(&scenario, args.n, args.seed);
    Ok(match args.out {
        SimOutput::Records => report::records_csv(&run.records),
        SimOutput::Summary => match args.format {
            OutputFormat::Text => report::summary_text(&run.summary),
            OutputFormat::Json => report::summary_json(&run.summary),
            OutputFormat::Csv => {
                return Err(Failure::usage("summary output supports --format json or text"))
            }
        },
    })
}

fn cmd_example() -> CmdResult {
    let rows = reproduce_worked_example()?;
    Ok(report::example_text(&rows))
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = match &cli.command {
        Command::Map(a) => cmd_map(a),
        Command::Transport(a) => cmd_transport(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Example => cmd_example(),
    };
    match result {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
