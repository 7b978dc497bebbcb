//! Command-line interface: instance generation, selection, adaptive policy
//! evaluation, seed-set evaluation and the verification battery.
//!
//! Every command prints one JSON [`RunReport`] (or CSV with `--csv`). Reported
//! revenue is scaled by the instance's cost per engagement.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::adaptive::{
    compute_params, evaluate_policy, exact_policy_value, AdaptiveError, Policy,
};
use crate::estimator::{build_pool, EstimatorError, Evaluator, DEFAULT_SAMPLES};
use crate::network::{
    generate_random_instance, load_instance, GenerateError, Instance, InstanceError, LoadError,
    NodeSet, RandomInstanceSpec,
};
use crate::nonadaptive::{select, select_deterministic, SelectionError, SelectionResult};
use crate::oracle::{
    enumerate_realizations, realization_count, AdaptiveOracle, OracleError,
    DEFAULT_REALIZATION_CAP,
};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyOptions};

pub const DEFAULT_EPISODES: usize = 10_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Args(#[from] clap::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: LoadError },
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "seedsel", version, about = "Budgeted seed selection under Independent Cascade")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance.
    Gen(GenArgs),
    /// Choose a non-adaptive seed set.
    Select(SelectArgs),
    /// Evaluate an adaptive policy.
    Adaptive(AdaptiveArgs),
    /// Run the randomized property battery.
    Verify(VerifyArgs),
    /// Evaluate a given seed set.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(short = 'n', long)]
    pub nodes: usize,
    #[arg(short = 'm', long)]
    pub edges: usize,
    #[arg(long)]
    pub budget: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cpe: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge probability range.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub prob: Option<Vec<f64>>,
    /// Node cost range; defaults to [1, budget].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub cost: Option<Vec<f64>>,
    /// Instance file to write; stdout when omitted.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(short = 'i', long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte-Carlo realizations.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Require exact evaluation over all realizations.
    #[arg(long, conflicts_with = "monte_carlo")]
    pub exact: bool,
    /// Sample even when exact evaluation is affordable.
    #[arg(long)]
    pub monte_carlo: bool,
    #[arg(long)]
    pub csv: bool,
    /// Report file; stdout when omitted.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: Common,
    /// Use the selector for instances whose edges are all live or blocked.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct AdaptiveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = Policy::Pis)]
    pub policy: Policy,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    pub episodes: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated node ids.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub seeds: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per suite, replacing each suite's default.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Run only these suites.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<Suite>,
    #[arg(long)]
    pub csv: bool,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Replace every approximation constant (harness self-test).
    #[arg(long, hide = true)]
    pub ratio_override: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub m: usize,
    pub budget: f64,
    pub cpe: f64,
}

impl From<&Instance> for InstanceSummary {
    fn from(inst: &Instance) -> Self {
        InstanceSummary {
            n: inst.node_count(),
            m: inst.edge_count(),
            budget: inst.budget(),
            cpe: inst.cpe(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub success: bool,
    pub instance: Option<InstanceSummary>,
    pub mode: Option<Mode>,
    pub seed: u64,
    pub wall_time_ms: f64,
    pub payload: Value,
}

/// Parses `args` (including the program name) and runs the command, writing
/// the report to `out` or the `-o` path. Returns whether the command succeeded.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<bool, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(&cli, out)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let start = Instant::now();
    let (mut report, tables, csv, dest) = match &cli.command {
        Command::Gen(a) => return cmd_gen(a, out, start),
        Command::Select(a) => {
            let (r, t) = cmd_select(a)?;
            (r, t, a.common.csv, a.common.output.clone())
        }
        Command::Adaptive(a) => {
            let (r, t) = cmd_adaptive(a)?;
            (r, t, a.common.csv, a.common.output.clone())
        }
        Command::Eval(a) => {
            let (r, t) = cmd_eval(a)?;
            (r, t, a.common.csv, a.common.output.clone())
        }
        Command::Verify(a) => {
            let (r, t) = cmd_verify(a)?;
            (r, t, a.csv, a.output.clone())
        }
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let text = if csv {
        to_csv(&tables)?
    } else {
        serde_json::to_string_pretty(&report)? + "\n"
    };
    emit(&text, dest.as_deref(), out)?;
    Ok(report.success)
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Rows for `--csv`: a header followed by records.
type Table = Vec<Vec<String>>;

fn to_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn field_table(fields: &[(&str, String)]) -> Table {
    let mut t = vec![vec!["field".to_string(), "value".to_string()]];
    t.extend(fields.iter().map(|(k, v)| vec![k.to_string(), v.clone()]));
    t
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_instance(&text).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

fn choose_mode(inst: &Instance, common: &Common) -> Result<Mode, CliError> {
    let affordable = realization_count(inst).is_some_and(|c| c <= DEFAULT_REALIZATION_CAP);
    if common.exact {
        if !affordable {
            return Err(OracleError::CapExceeded {
                what: "realization count",
                size: realization_count(inst).unwrap_or(usize::MAX),
                cap: DEFAULT_REALIZATION_CAP,
            }
            .into());
        }
        Ok(Mode::Exact)
    } else if affordable && !common.monte_carlo {
        Ok(Mode::Exact)
    } else {
        Ok(Mode::MonteCarlo)
    }
}

fn report(command: &'static str, inst: &Instance, mode: Mode, seed: u64, payload: Value) -> RunReport {
    RunReport {
        command,
        success: true,
        instance: Some(inst.into()),
        mode: Some(mode),
        seed,
        wall_time_ms: 0.0,
        payload,
    }
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write, start: Instant) -> Result<bool, CliError> {
    let mut spec = RandomInstanceSpec::new(a.nodes, a.edges, a.budget, a.seed);
    spec.cpe = a.cpe;
    if let Some(p) = &a.prob {
        spec = spec.probabilities(p[0], p[1]);
    }
    if let Some(c) = &a.cost {
        spec = spec.costs(c[0], c[1]);
    }
    let inst = generate_random_instance(&spec)?;
    let text = inst.to_text();
    match &a.output {
        None => out.write_all(text.as_bytes())?,
        Some(path) => {
            emit(&text, Some(path), out)?;
            let r = RunReport {
                command: "gen",
                success: true,
                instance: Some((&inst).into()),
                mode: None,
                seed: a.seed,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                payload: json!({ "path": path }),
            };
            out.write_all((serde_json::to_string_pretty(&r)? + "\n").as_bytes())?;
        }
    }
    Ok(true)
}

fn selection_payload(inst: &Instance, r: &SelectionResult) -> Value {
    json!({
        "seeds": inst.names_of(&r.seeds),
        "revenue": r.objective_estimate * inst.cpe(),
        "normalized_revenue": r.objective_estimate,
        "total_cost": r.total_cost,
        "provenance": r.provenance,
    })
}

fn selection_table(inst: &Instance, r: &SelectionResult) -> Table {
    field_table(&[
        ("seeds", inst.names_of(&r.seeds).join(" ")),
        ("revenue", (r.objective_estimate * inst.cpe()).to_string()),
        ("normalized_revenue", r.objective_estimate.to_string()),
        ("total_cost", r.total_cost.to_string()),
    ])
}

fn cmd_select(a: &SelectArgs) -> Result<(RunReport, Table), CliError> {
    let c = &a.common;
    let inst = read_instance(&c.instance)?;
    let (mode, result) = if a.deterministic {
        (Mode::Exact, select_deterministic(&inst)?)
    } else {
        match choose_mode(&inst, c)? {
            Mode::Exact => (Mode::Exact, select(&enumerate_realizations(&inst)?)),
            Mode::MonteCarlo => (Mode::MonteCarlo, select(&build_pool(&inst, c.samples, c.seed)?)),
        }
    };
    let mut payload = selection_payload(&inst, &result);
    if mode == Mode::MonteCarlo {
        payload["samples"] = json!(c.samples);
    }
    let table = selection_table(&inst, &result);
    Ok((report("select", &inst, mode, c.seed, payload), table))
}

fn cmd_adaptive(a: &AdaptiveArgs) -> Result<(RunReport, Table), CliError> {
    let c = &a.common;
    let inst = read_instance(&c.instance)?;
    let mode = choose_mode(&inst, c)?;
    let params = compute_params(&inst, c.samples);
    let b = inst.budget();
    let cpe = inst.cpe();

    let mut payload = json!({
        "policy": a.policy.to_string(),
        "cost_cap": params.cost_cap,
        "alpha": params.alpha,
        "guarantee_constant": params.guarantee(b),
        "bound_vacuous": params.bound_vacuous,
    });
    let f_avg = match mode {
        Mode::Exact => {
            let v = exact_policy_value(&inst, a.policy, &params)?;
            payload["h_avg"] = json!(v.h_avg * cpe);
            v.f_avg
        }
        Mode::MonteCarlo => {
            payload["episodes"] = json!(a.episodes);
            payload["samples"] = json!(c.samples);
            evaluate_policy(&inst, a.policy, a.episodes, c.seed, &params)?
        }
    };
    payload["f_avg"] = json!(f_avg * cpe);
    payload["normalized_f_avg"] = json!(f_avg);

    let mut fields = vec![
        ("policy", a.policy.to_string()),
        ("f_avg", (f_avg * cpe).to_string()),
        ("cost_cap", params.cost_cap.to_string()),
        ("alpha", params.alpha.to_string()),
        ("guarantee_constant", params.guarantee(b).to_string()),
    ];
    match AdaptiveOracle::new(&inst, true).and_then(|mut o| o.optimum()) {
        Ok(opt) => {
            let lower = params.guarantee(b) * opt;
            payload["optimal_policy_value"] = json!(opt * cpe);
            payload["lower_bound"] = json!(lower * cpe);
            fields.push(("optimal_policy_value", (opt * cpe).to_string()));
            fields.push(("lower_bound", (lower * cpe).to_string()));
        }
        Err(OracleError::CapExceeded { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    Ok((
        report("adaptive", &inst, mode, c.seed, payload),
        field_table(&fields),
    ))
}

fn cmd_eval(a: &EvalArgs) -> Result<(RunReport, Table), CliError> {
    let c = &a.common;
    let inst = read_instance(&c.instance)?;
    let names: Vec<&str> = a.seeds.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    let seeds: NodeSet = inst.node_set(&names)?;
    let mode = choose_mode(&inst, c)?;
    let (revenue, engagements) = match mode {
        Mode::Exact => {
            let d = enumerate_realizations(&inst)?;
            (d.expected_revenue(&seeds), d.expected_engagements(&seeds))
        }
        Mode::MonteCarlo => {
            let p = build_pool(&inst, c.samples, c.seed)?;
            (p.expected_revenue(&seeds), p.expected_engagements(&seeds))
        }
    };
    let cost = inst.set_cost(&seeds);
    let cpe = inst.cpe();
    let payload = json!({
        "seeds": inst.names_of(&seeds),
        "revenue": revenue * cpe,
        "normalized_revenue": revenue,
        "expected_engagements": engagements,
        "total_cost": cost,
        "feasible": cost <= inst.budget(),
    });
    let table = field_table(&[
        ("seeds", inst.names_of(&seeds).join(" ")),
        ("revenue", (revenue * cpe).to_string()),
        ("expected_engagements", engagements.to_string()),
        ("total_cost", cost.to_string()),
        ("feasible", (cost <= inst.budget()).to_string()),
    ]);
    Ok((report("eval", &inst, mode, c.seed, payload), table))
}

fn cmd_verify(a: &VerifyArgs) -> Result<(RunReport, Table), CliError> {
    let opts = VerifyOptions {
        seed: a.seed,
        trials: a.trials,
        ratio_override: a.ratio_override,
    };
    if a.trials == Some(0) {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let suites = if a.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suite.clone()
    };
    let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite(s, &opts)).collect();
    let success = reports.iter().all(|r| r.passed);

    let mut table = vec![[
        "suite", "passed", "trials", "failures", "allowed", "checks", "statistic", "value",
    ]
    .map(String::from)
    .to_vec()];
    for r in &reports {
        let (name, value) = r
            .statistic
            .as_ref()
            .map(|s| (s.name.to_string(), s.value.to_string()))
            .unwrap_or_default();
        table.push(vec![
            r.suite.to_string(),
            r.passed.to_string(),
            r.trials.to_string(),
            r.failures.to_string(),
            r.allowed_failures.to_string(),
            r.checks.to_string(),
            name,
            value,
        ]);
    }
    let r = RunReport {
        command: "verify",
        success,
        instance: None,
        mode: Some(Mode::Exact),
        seed: a.seed,
        wall_time_ms: 0.0,
        payload: json!({ "suites": reports }),
    };
    Ok((r, table))
}
