//! Command-line front end.
//!
//! Exit codes: 0 when the run completed with PASS or REPRODUCED, 1 when it
//! completed with FAIL or DISCREPANCY, 2 for usage and parse errors, 3 for
//! numerical failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{
    check_property, implication_battery, BatteryOptions, BatteryReport, ClassificationReport, Property, PropertyKind,
    SamplingPlan,
};
use crate::error::{Error, Result};
use crate::expr::{parse_nodes, FunctionSpec, Interval};
use crate::matrices::{
    derivative_matrix_in, kraus_in, loewner_in, special_in, DerivativeKind, SpecialKind, SymmetricMatrix,
};
use crate::mollify::{mollify_table, parse_table, MollifiedSample};
use crate::report::{to_json, Envelope};
use crate::repro::{list_scenarios, run_scenario, ClaimStatus, ScenarioReport};
use crate::scalar::{PrecisionCfg, Scalar};
use crate::spectra::{cpsd_verdict, psd_verdict, PsdVerdict};
use crate::witness::{operator_witness_search, OperatorKind, SearchLimits, WitnessSearchReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "loewner-lab",
    version,
    about = "Tests scalar functions for matrix monotonicity, matrix convexity and the class Q_n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sampled test of one property on an interval.
    Check(CheckArgs),
    /// Conditions (1)_n, (1)_{n+1}, (1)_{n/2}, (2)_n, (3)_n on [0, alpha).
    Battery(BatteryArgs),
    /// Random search for operator inequalities that fail.
    Witness(WitnessArgs),
    /// Builds and dumps one matrix.
    Matrix(MatrixArgs),
    /// Runs the claim-reproduction scenarios.
    Repro(ReproArgs),
    /// Regularizes a tabulated function with the bump mollifier.
    Mollify(MollifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Grid points for pointwise criteria.
    #[arg(long, default_value_t = 257)]
    pub grid: usize,
    /// Random node sets for divided-difference criteria.
    #[arg(long, default_value_t = 200)]
    pub nodesets: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl PlanArgs {
    fn plan(&self) -> SamplingPlan {
        SamplingPlan {
            grid_points: self.grid,
            node_sets: self.nodesets,
            seed: self.seed,
            ..SamplingPlan::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Run at big precision with this many significant digits.
    #[arg(long)]
    pub digits: Option<u32>,
    /// Also write the JSON report to this file.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Format of standard output.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

impl OutputArgs {
    fn precision(&self) -> Result<PrecisionCfg> {
        match self.digits {
            Some(d) => PrecisionCfg::big(d),
            None => Ok(PrecisionCfg::Machine),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Monotone,
    Convex,
    Qn,
}

impl From<PropertyArg> for PropertyKind {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Monotone => PropertyKind::Monotone,
            PropertyArg::Convex => PropertyKind::Convex,
            PropertyArg::Qn => PropertyKind::Qn,
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Function of t, e.g. "t^0.5" or "-log(1+t)".
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    /// Interval `a,b`, open unless --closed-left.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: String,
    /// Include the left endpoint, as in [a, b).
    #[arg(long)]
    pub closed_left: bool,
    #[arg(long)]
    pub order: usize,
    #[arg(long, value_enum)]
    pub property: PropertyArg,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BatteryArgs {
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    /// Right end of [0, alpha).
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub order: usize,
    /// Samples for the contraction search.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKindArg {
    Monotone,
    Convex,
    Contraction,
}

impl From<WitnessKindArg> for OperatorKind {
    fn from(k: WitnessKindArg) -> Self {
        match k {
            WitnessKindArg::Monotone => OperatorKind::Monotone,
            WitnessKindArg::Convex => OperatorKind::Convex,
            WitnessKindArg::Contraction => OperatorKind::Contraction,
        }
    }
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub interval: String,
    #[arg(long)]
    pub closed_left: bool,
    #[arg(long)]
    pub order: usize,
    #[arg(long, value_enum)]
    pub kind: WitnessKindArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Certified witnesses to keep.
    #[arg(long, default_value_t = 16)]
    pub max_witnesses: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKindArg {
    Loewner,
    Kraus,
    Dobsch,
    Hansen,
    Cauchy,
    Indexsum,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long, value_enum)]
    pub kind: MatrixKindArg,
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: Option<String>,
    /// Point of a Dobsch or Hansen matrix.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "nodes")]
    pub at: Option<f64>,
    /// Comma-separated nodes of a Loewner or Kraus matrix.
    #[arg(long, allow_hyphen_values = true)]
    pub nodes: Option<String>,
    /// Base node of a Kraus matrix; defaults to the first node.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Domain of the function; the real line when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    #[arg(long)]
    pub closed_left: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub dump: Format,
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Run every scenario.
    #[arg(long, conflicts_with_all = ["id", "list"])]
    pub all: bool,
    /// Run one scenario.
    #[arg(long)]
    pub id: Option<String>,
    /// List scenario identifiers.
    #[arg(long)]
    pub list: bool,
    /// Directory for per-scenario `(t, value)` curve CSV files.
    #[arg(long, value_name = "DIR")]
    pub curves: Option<PathBuf>,
    /// Reference precision in significant digits.
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MollifyArgs {
    /// CSV table of `t,f` rows.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

/// Everything that determines a report, serialized next to it.
#[derive(Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(rename = "fn", skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplingPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    pub precision: PrecisionCfg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: Option<Format>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Output goes to standard output, diagnostics to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Outcome { stdout, passed }) => {
            print!("{stdout}");
            if passed {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

struct Outcome {
    stdout: String,
    passed: bool,
}

fn execute(cmd: Command) -> Result<Outcome> {
    let start = Instant::now();
    match cmd {
        Command::Check(a) => cmd_check(a, start),
        Command::Battery(a) => cmd_battery(a, start),
        Command::Witness(a) => cmd_witness(a, start),
        Command::Matrix(a) => cmd_matrix(a, start),
        Command::Repro(a) => cmd_repro(a, start),
        Command::Mollify(a) => cmd_mollify(a, start),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn total_timing(start: Instant) -> BTreeMap<String, f64> {
    BTreeMap::from([("total".to_string(), elapsed_ms(start))])
}

fn parse_fn(text: &str, domain: Interval) -> Result<FunctionSpec> {
    FunctionSpec::parse_on(text, domain)
}

/// Writes the JSON file if requested and returns the JSON text when standard
/// output is JSON.
fn emit_json<R: Serialize>(
    config: &RunConfig,
    report: &R,
    timings: BTreeMap<String, f64>,
    path: Option<&PathBuf>,
    format: Format,
) -> Result<Option<String>> {
    let json = to_json(&Envelope::new(config, report, timings))?;
    if let Some(p) = path {
        std::fs::write(p, &json)?;
    }
    Ok((format == Format::Json).then_some(json))
}

fn reject_csv(format: Format, command: &str) -> Result<()> {
    if format == Format::Csv {
        return Err(Error::InvalidInput(format!(
            "{command} has no csv output; use text or json"
        )));
    }
    Ok(())
}

fn cmd_check(a: CheckArgs, start: Instant) -> Result<Outcome> {
    reject_csv(a.out.format, "check")?;
    let precision = a.out.precision()?;
    let interval = Interval::parse(&a.interval, a.closed_left)?;
    let f = parse_fn(&a.function, interval)?;
    let property = Property {
        kind: a.property.into(),
        n: a.order,
    };
    let plan = a.plan.plan();
    let report = check_property(&f, property, &plan, precision)?;
    let config = RunConfig {
        command: "check",
        function: Some(a.function.clone()),
        interval: Some(interval.to_string()),
        order: Some(a.order),
        property: Some(property.to_string()),
        plan: Some(plan),
        seed: Some(a.plan.seed),
        precision,
        output: a.out.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.out.format),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &report, total_timing(start), a.out.json.as_ref(), a.out.format)?;
    Ok(Outcome {
        stdout: json.unwrap_or_else(|| check_text(&report)),
        passed: report.verdict.is_pass(),
    })
}

fn check_text(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} of {} on {}", r.verdict, r.property, r.function, r.interval);
    let _ = writeln!(
        s,
        "margin {:e}  tolerance {:e}  precision {}  certified at {}",
        r.margin, r.tolerance, r.precision, r.certification_precision
    );
    for c in &r.criteria {
        let z = c.z.map(|z| format!(" z={z:e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "  {}{} ({:?}): {} probes, {} screened failures, {} certified, min eigenvalue {:e}",
            c.criterion.name(),
            z,
            c.role,
            c.probes,
            c.screened_failures,
            c.certified_failures,
            c.min_screen_eigenvalue
        );
    }
    for w in r.witnesses.iter().take(5) {
        let _ = writeln!(s, "  witness {} {:?}: margin {:e}", w.criterion, w.payload, w.margin);
    }
    if !r.note.is_empty() {
        let _ = writeln!(s, "note: {}", r.note);
    }
    s
}

fn cmd_battery(a: BatteryArgs, start: Instant) -> Result<Outcome> {
    reject_csv(a.out.format, "battery")?;
    let precision = a.out.precision()?;
    let f = FunctionSpec::parse(&a.function)?;
    let plan = a.plan.plan();
    let opts = BatteryOptions {
        n: a.order,
        alpha: a.alpha,
        plan: plan.clone(),
        precision,
        contraction_samples: a.samples,
    };
    let report = implication_battery(&f, &opts)?;
    let config = RunConfig {
        command: "battery",
        function: Some(a.function.clone()),
        alpha: Some(a.alpha),
        order: Some(a.order),
        plan: Some(plan),
        samples: Some(a.samples),
        seed: Some(a.plan.seed),
        precision,
        output: a.out.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.out.format),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &report, total_timing(start), a.out.json.as_ref(), a.out.format)?;
    Ok(Outcome {
        stdout: json.unwrap_or_else(|| battery_text(&report)),
        passed: report.flags.is_empty(),
    })
}

fn battery_text(r: &BatteryReport) -> String {
    let mut s = format!("{} on [0, {}), n = {}\n", r.function, r.alpha, r.n);
    for c in &r.conditions {
        let _ = writeln!(s, "  {:8} {}  {}", c.label, c.verdict, c.statement);
    }
    for c in &r.consistent_with {
        let _ = writeln!(s, "  consistent: {c}");
    }
    for f in &r.flags {
        let _ = writeln!(s, "  FLAG: {f}");
    }
    s
}

fn cmd_witness(a: WitnessArgs, start: Instant) -> Result<Outcome> {
    reject_csv(a.out.format, "witness")?;
    let precision = a.out.precision()?;
    let interval = Interval::parse(&a.interval, a.closed_left)?;
    let f = parse_fn(&a.function, interval)?;
    let limits = SearchLimits {
        max_witnesses: a.max_witnesses,
        ..SearchLimits::default()
    };
    let report = operator_witness_search(
        &f,
        &interval,
        a.order,
        a.kind.into(),
        a.samples,
        a.seed,
        precision,
        &limits,
    )?;
    let config = RunConfig {
        command: "witness",
        function: Some(a.function.clone()),
        interval: Some(interval.to_string()),
        order: Some(a.order),
        kind: Some(format!("{:?}", a.kind).to_lowercase()),
        samples: Some(a.samples),
        seed: Some(a.seed),
        precision,
        output: a.out.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.out.format),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &report, total_timing(start), a.out.json.as_ref(), a.out.format)?;
    Ok(Outcome {
        stdout: json.unwrap_or_else(|| witness_text(&report)),
        passed: report.witnesses.is_empty(),
    })
}

fn witness_text(r: &WitnessSearchReport) -> String {
    let mut s = format!(
        "{:?} order {} on {}: {} samples, {} candidates, {} certification attempts, {} witnesses (certified at {})\n",
        r.kind,
        r.order,
        r.interval,
        r.samples,
        r.candidates,
        r.certification_attempts,
        r.witnesses.len(),
        r.certification_precision
    );
    for w in &r.witnesses {
        let _ = writeln!(
            s,
            "  margin {:e} (screen {:e}) sample {}",
            w.margin, w.screen_margin, w.seed_index
        );
    }
    s
}

#[derive(Debug, Serialize)]
struct MatrixDump {
    kind: &'static str,
    order: usize,
    meta: crate::matrices::MatrixMeta,
    /// Entries at full working precision.
    rows: Vec<Vec<String>>,
    psd: PsdVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional_psd: Option<PsdVerdict>,
    precision: PrecisionCfg,
}

fn build_matrix<S: Scalar>(
    a: &MatrixArgs,
    f: Option<&FunctionSpec>,
    nodes: &[f64],
    ctx: S::Ctx,
) -> Result<SymmetricMatrix<S>> {
    let need_fn = || f.ok_or_else(|| Error::InvalidInput("this matrix kind needs --fn".into()));
    let need_order = || {
        a.order
            .ok_or_else(|| Error::InvalidInput("this matrix kind needs --order".into()))
    };
    match a.kind {
        MatrixKindArg::Loewner | MatrixKindArg::Kraus => {
            if nodes.is_empty() {
                return Err(Error::InvalidInput("loewner and kraus matrices need --nodes".into()));
            }
            if let Some(n) = a.order {
                if n != nodes.len() {
                    return Err(Error::InvalidInput(format!(
                        "--order {n} does not match {} nodes",
                        nodes.len()
                    )));
                }
            }
            let f = need_fn()?;
            for &t in nodes.iter().chain(a.base.iter()) {
                if !f.domain.contains_closure(t) {
                    return Err(Error::OutsideDomain {
                        t,
                        domain: f.domain.to_string(),
                    });
                }
            }
            if a.kind == MatrixKindArg::Loewner {
                loewner_in(f, nodes, ctx)
            } else {
                kraus_in(f, a.base.unwrap_or(nodes[0]), nodes, ctx)
            }
        }
        MatrixKindArg::Dobsch | MatrixKindArg::Hansen => {
            let t =
                a.at.ok_or_else(|| Error::InvalidInput("dobsch and hansen matrices need --at".into()))?;
            let kind = if a.kind == MatrixKindArg::Dobsch {
                DerivativeKind::Dobsch
            } else {
                DerivativeKind::Hansen
            };
            derivative_matrix_in(need_fn()?, t, need_order()?, kind, ctx)
        }
        MatrixKindArg::Cauchy => special_in(SpecialKind::Cauchy, need_order()?, ctx),
        MatrixKindArg::Indexsum => special_in(SpecialKind::IndexSum, need_order()?, ctx),
    }
}

fn cmd_matrix(a: MatrixArgs, start: Instant) -> Result<Outcome> {
    let precision = match a.digits {
        Some(d) => PrecisionCfg::big(d)?,
        None => PrecisionCfg::Machine,
    };
    let domain = match &a.interval {
        Some(text) => Interval::parse(text, a.closed_left)?,
        None => Interval::real_line(),
    };
    let f = a.function.as_deref().map(|text| parse_fn(text, domain)).transpose()?;
    let nodes = a.nodes.as_deref().map(parse_nodes).transpose()?.unwrap_or_default();
    let tol = precision.default_tol_rel();
    let (csv, dump) = crate::with_precision!(precision, S, ctx => {
        let m: SymmetricMatrix<S> = build_matrix(&a, f.as_ref(), &nodes, ctx)?;
        let conditional_psd = if m.order() >= 2 { Some(cpsd_verdict(&m, tol)?) } else { None };
        let dump = MatrixDump {
            kind: m.kind.name(),
            order: m.order(),
            meta: m.meta.clone(),
            rows: m.rows().iter().map(|r| r.iter().map(Scalar::to_sci_string).collect()).collect(),
            psd: psd_verdict(&m, tol)?,
            conditional_psd,
            precision,
        };
        (m.to_csv(), dump)
    });
    let config = RunConfig {
        command: "matrix",
        function: a.function.clone(),
        interval: a.interval.as_ref().map(|_| domain.to_string()),
        order: Some(dump.order),
        kind: Some(dump.kind.to_string()),
        at: a.at,
        nodes: (!nodes.is_empty()).then(|| nodes.clone()),
        base: a.base,
        precision,
        output: a.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.dump),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &dump, total_timing(start), a.json.as_ref(), a.dump)?;
    let stdout = match a.dump {
        Format::Json => json.unwrap_or_default(),
        Format::Csv => csv,
        Format::Text => {
            let mut s = format!("{} matrix of order {} ({})\n", dump.kind, dump.order, precision);
            for r in &dump.rows {
                let _ = writeln!(s, "  {}", r.join("  "));
            }
            let _ = writeln!(s, "psd {}  min eigenvalue {:e}", dump.psd.psd, dump.psd.min_eigenvalue);
            if let Some(c) = &dump.conditional_psd {
                let _ = writeln!(s, "conditionally psd {}  min eigenvalue {:e}", c.psd, c.min_eigenvalue);
            }
            s
        }
    };
    Ok(Outcome { stdout, passed: true })
}

#[derive(Debug, Serialize)]
struct ReproReport {
    status: ClaimStatus,
    scenarios: Vec<ScenarioReport>,
}

fn cmd_repro(a: ReproArgs, start: Instant) -> Result<Outcome> {
    reject_csv(a.format, "repro")?;
    if a.list {
        let mut s = String::new();
        for (id, title) in list_scenarios() {
            let _ = writeln!(s, "{id:8} {title}");
        }
        return Ok(Outcome {
            stdout: s,
            passed: true,
        });
    }
    let ids: Vec<String> = match (&a.id, a.all) {
        (Some(id), false) => vec![id.clone()],
        (None, true) => list_scenarios().iter().map(|s| s.0.to_string()).collect(),
        _ => {
            return Err(Error::InvalidInput(
                "repro needs exactly one of --all, --id ID or --list".into(),
            ))
        }
    };
    let precision = match a.digits {
        Some(d) => PrecisionCfg::big(d)?,
        None => PrecisionCfg::default_big(),
    };
    let results: Vec<(ScenarioReport, f64)> = ids
        .par_iter()
        .map(|id| {
            let t = Instant::now();
            run_scenario(id, precision).map(|r| (r, elapsed_ms(t)))
        })
        .collect::<Result<_>>()?;
    let mut timings = BTreeMap::new();
    let mut scenarios = Vec::new();
    for (r, ms) in results {
        timings.insert(r.id.clone(), ms);
        scenarios.push(r);
    }
    if let Some(dir) = &a.curves {
        std::fs::create_dir_all(dir)?;
        for r in &scenarios {
            if let Some(csv) = r.curve_csv() {
                std::fs::write(dir.join(format!("{}.csv", r.id)), csv)?;
            }
        }
    }
    let status = if scenarios.iter().any(|r| r.status() == ClaimStatus::Discrepancy) {
        ClaimStatus::Discrepancy
    } else {
        ClaimStatus::Reproduced
    };
    let report = ReproReport { status, scenarios };
    timings.insert("total".into(), elapsed_ms(start));
    let config = RunConfig {
        command: "repro",
        scenarios: Some(ids),
        precision,
        output: a.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.format),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &report, timings, a.json.as_ref(), a.format)?;
    Ok(Outcome {
        stdout: json.unwrap_or_else(|| repro_text(&report)),
        passed: status != ClaimStatus::Discrepancy,
    })
}

fn repro_text(r: &ReproReport) -> String {
    let mut s = String::new();
    for sc in &r.scenarios {
        let _ = writeln!(
            s,
            "{:8} {:12} {} claims  {}",
            sc.id,
            sc.status().name(),
            sc.claims.len(),
            sc.title
        );
        for c in sc.discrepancies() {
            let claimed = c
                .claimed_value
                .map(|v| format!("{v:e}"))
                .or_else(|| c.claimed_sign.map(|g| format!("{g:?}")))
                .or_else(|| c.claimed_text.clone())
                .unwrap_or_default();
            let computed = c
                .computed_text
                .clone()
                .or_else(|| c.computed_value.map(|v| format!("{v:e}")))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "    DISCREPANCY {}: claimed {claimed}, computed {computed}",
                c.description
            );
        }
        for o in &sc.observations {
            match o.value {
                Some(v) => {
                    let _ = writeln!(s, "    note: {} = {v:e}", o.description);
                }
                None => {
                    let _ = writeln!(s, "    note: {}", o.description);
                }
            }
        }
        if let Some(st) = &sc.study {
            let _ = writeln!(s, "    precision study of {} at t = {:e}", st.quantity, st.t);
            for row in &st.rows {
                let _ = writeln!(
                    s,
                    "      {:12} {:12} {}",
                    row.route,
                    row.precision.to_string(),
                    row.text
                );
            }
            let _ = writeln!(
                s,
                "      binary64 unstable: {}  10-digit blow-up: {}",
                st.instability, st.rounded_blowup
            );
        }
    }
    let _ = writeln!(s, "overall: {}", r.status.name());
    s
}

fn cmd_mollify(a: MollifyArgs, start: Instant) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let table = parse_table(&text)?;
    let samples: Vec<MollifiedSample> = mollify_table(&table, a.epsilon, a.grid)?;
    let config = RunConfig {
        command: "mollify",
        input: Some(a.input.display().to_string()),
        epsilon: Some(a.epsilon),
        grid: Some(a.grid),
        precision: PrecisionCfg::Machine,
        output: a.json.as_ref().map(|p| p.display().to_string()),
        format: Some(a.format),
        ..RunConfig::default()
    };
    let json = emit_json(&config, &samples, total_timing(start), a.json.as_ref(), a.format)?;
    let stdout = match a.format {
        Format::Json => json.unwrap_or_default(),
        Format::Csv | Format::Text => {
            let mut s = String::from("t,f,f_eps\n");
            for p in &samples {
                let _ = writeln!(s, "{:e},{:e},{:e}", p.t, p.f, p.f_eps);
            }
            s
        }
    };
    Ok(Outcome { stdout, passed: true })
}
