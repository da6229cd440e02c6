//! `finicheck`: checks theorems and procedure contracts of a specification
//! on all inputs, generates verification conditions, and exports traces
//! and evaluation trees.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::RangedU64ValueParser;
use clap::{ArgAction, Parser, ValueEnum};

use finicheck_core::check::{format_failure, format_report, run_operation, CheckConfig, RunReport};
use finicheck_core::eval::{EvalMode, Value};
use finicheck_core::sema::{resolve, ConstBinding, SemaError, TypedSpec};
use finicheck_core::syntax::{parse_spec, to_ascii, SourceMap, Span, Spec};
use finicheck_core::vcg::{check_vcs, generate_all, generate_vcs, vcs_to_json, VcStatus, VerificationCondition};
use finicheck_core::viz::{
    build_eval_tree, build_trace, emit_dot, emit_json, record_formula_run, record_run, Export, DEFAULT_LAYER_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Det,
    Nondet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "finicheck", version, about = "Exhaustive checker for finite-domain specifications")]
struct Cli {
    /// Specification file.
    spec: PathBuf,

    /// Value of a constant, e.g. `--const N=20` (repeatable).
    #[arg(long = "const", value_name = "NAME=VALUE", value_parser = parse_const, action = ArgAction::Append)]
    consts: Vec<ConstBinding>,

    /// Operation to check; by default every operation is checked.
    #[arg(long, value_name = "NAME")]
    op: Option<String>,

    #[arg(long, value_enum, default_value_t = Mode::Det, conflicts_with = "nondet")]
    mode: Mode,

    /// Same as `--mode nondet`.
    #[arg(long)]
    nondet: bool,

    /// Only report failures and the summary.
    #[arg(long)]
    silent: bool,

    /// Stop at the first failing input.
    #[arg(long)]
    fail_fast: bool,

    /// Print the verification conditions of the procedures.
    #[arg(long)]
    vcg: bool,

    /// Write the verification conditions as JSON.
    #[arg(long, value_name = "PATH")]
    vcg_json: Option<PathBuf>,

    /// Check one verification condition, or `all`.
    #[arg(long, value_name = "ID|all")]
    check_vc: Option<String>,

    /// Write the execution trace of one run of `--op`.
    #[arg(long, value_name = "PATH", requires = "op")]
    trace: Option<PathBuf>,

    /// Enumeration index of the input to trace; by default the first
    /// failing input, else the first admissible one.
    #[arg(long, value_name = "K", requires = "trace")]
    input: Option<u64>,

    /// Write the evaluation tree of the predicate or theorem `--op`.
    #[arg(long, value_name = "PATH", requires = "op")]
    tree: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,

    /// Maximum number of nodes on one layer of an evaluation tree.
    #[arg(long, value_name = "K", default_value_t = DEFAULT_LAYER_CAP, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    max_layer_nodes: usize,

    /// Keep every evaluated child in evaluation trees.
    #[arg(long)]
    no_prune: bool,

    /// Write the run reports as JSON.
    #[arg(long, value_name = "PATH")]
    report_json: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N", value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    workers: Option<usize>,

    /// Time budget per input in milliseconds (0: none).
    #[arg(long, value_name = "MS", default_value_t = 0)]
    timeout: u64,

    /// Print ASCII shortcuts instead of mathematical symbols.
    #[arg(long)]
    ascii: bool,
}

fn parse_const(s: &str) -> Result<ConstBinding, String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: i64 = value.trim().parse().map_err(|e| format!("bad value `{value}`: {e}"))?;
    Ok(ConstBinding::new(name.trim(), value))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Located(String),
    #[error("{0}")]
    Usage(String),
}

/// Output of a run: what was printed and whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

struct Loaded {
    path: String,
    map: SourceMap,
    spec: Spec,
}

impl Loaded {
    fn locate(&self, span: Option<Span>, msg: impl std::fmt::Display) -> CliError {
        match span {
            Some(s) => CliError::Located(format!("{}:{}: {msg}", self.path, self.map.render(s))),
            None => CliError::Located(format!("{}: {msg}", self.path)),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(cli: &Cli) -> Result<Loaded, CliError> {
    let path = cli.spec.display().to_string();
    let text = fs::read_to_string(&cli.spec).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let map = SourceMap::new(&text);
    let spec = parse_spec(&text)
        .map_err(|e| CliError::Located(format!("{path}:{}: {e}", map.render(e.span()))))?;
    Ok(Loaded { path, map, spec })
}

fn typecheck(cli: &Cli, l: &Loaded) -> Result<TypedSpec, CliError> {
    resolve(&l.spec, &cli.consts).map_err(|e: SemaError| l.locate(e.span(), &e))
}

fn config(cli: &Cli, op: &str) -> CheckConfig {
    let mut cfg = CheckConfig::new(op);
    cfg.mode = if cli.nondet || cli.mode == Mode::Nondet {
        EvalMode::Nondet
    } else {
        EvalMode::Det
    };
    cfg.silent = cli.silent;
    cfg.fail_fast = cli.fail_fast;
    cfg.timeout_ms = cli.timeout;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg
}

fn export<G: Export>(g: &G, path: &Path, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Dot => emit_dot(g),
        Format::Json => emit_json(g),
    };
    write_file(path, &text)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let l = load(cli)?;
    let vc_task = cli.vcg || cli.vcg_json.is_some() || cli.check_vc.is_some();
    if vc_task && cli.check_vc.is_none() {
        return vc_run(cli, &l);
    }
    let typed = typecheck(cli, &l)?;
    if let Some(op) = &cli.op {
        if typed.op_id(op).is_none() {
            return Err(CliError::Usage(format!("no operation named `{op}` is declared")));
        }
    }
    if vc_task {
        return vc_run(cli, &l);
    }

    let ops: Vec<String> = match &cli.op {
        Some(op) => vec![op.clone()],
        None => typed.ops.iter().map(|o| o.name.clone()).collect(),
    };
    let mut out = Outcome {
        text: String::new(),
        passed: true,
    };
    let mut reports = Vec::new();
    for op in &ops {
        match run_operation(&typed, &config(cli, op)) {
            Ok(r) => {
                out.passed &= r.passed();
                out.text.push_str(&format_report(&r, Some(&l.map)));
                reports.push(r);
            }
            Err(e) if cli.op.is_none() => out.text.push_str(&format!("Skipping {op}: {e}\n")),
            Err(e) => return Err(CliError::Usage(e.to_string())),
        }
    }
    if let Some(p) = &cli.report_json {
        write_file(p, &reports_json(&reports))?;
    }
    if let Some(path) = &cli.trace {
        trace(cli, &typed, reports.first(), path)?;
    }
    if let Some(path) = &cli.tree {
        let op = cli.op.as_deref().expect("clap requires --op");
        let o = typed.op(op).expect("checked above");
        if !o.kind.is_boolean() {
            return Err(CliError::Usage(format!(
                "`{op}` is a {}; evaluation trees need a predicate or theorem",
                o.kind.keyword()
            )));
        }
        let run = record_formula_run(&typed, op, cli.max_layer_nodes)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        export(&build_eval_tree(&run, !cli.no_prune, cli.max_layer_nodes), path, cli.format)?;
    }
    Ok(out)
}

fn reports_json(reports: &[RunReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn trace(cli: &Cli, typed: &TypedSpec, report: Option<&RunReport>, path: &Path) -> Result<(), CliError> {
    let op = cli.op.as_deref().expect("clap requires --op");
    let o = typed.op(op).expect("checked above");
    let total = o.input_count().unwrap_or(0);
    let args: Vec<Value> = match (cli.input, report.and_then(|r| r.failures.first())) {
        (Some(k), _) if k < total => o.nth_input(k),
        (Some(k), _) => {
            return Err(CliError::Usage(format!("`{op}` has {total} inputs; --input {k} is out of range")));
        }
        (None, Some(f)) => f.input.iter().map(|(_, v)| v.clone()).collect(),
        (None, None) => {
            let first = (0..total)
                .map(|i| o.nth_input(i))
                .find(|a| record_run(typed, op, a).map_or(true, |r| !r.inadmissible));
            first.unwrap_or_else(|| o.nth_input(0))
        }
    };
    let run = record_run(typed, op, &args).map_err(|e| CliError::Usage(e.to_string()))?;
    export(&build_trace(&run), path, cli.format)
}

fn vc_run(cli: &Cli, l: &Loaded) -> Result<Outcome, CliError> {
    let generated = match &cli.op {
        Some(op) => generate_vcs(&l.spec, op),
        None => generate_all(&l.spec),
    };
    let mut vcs = generated.map_err(|e| match &e {
        finicheck_core::vcg::VcgError::UnsupportedConstruct { span, .. } => l.locate(Some(*span), &e),
        _ => CliError::Usage(e.to_string()),
    })?;
    let mut out = Outcome {
        text: String::new(),
        passed: true,
    };
    if cli.vcg {
        for vc in &vcs {
            out.text.push_str(&format!(
                "{} ({}) {}\n  {}\n",
                vc.id,
                vc.procedure,
                vc.question(),
                vc.text()
            ));
        }
    }
    if let Some(sel) = &cli.check_vc {
        let chosen: Vec<usize> = if sel == "all" {
            (0..vcs.len()).collect()
        } else {
            match vcs.iter().position(|v| &v.id == sel) {
                Some(i) => vec![i],
                None => return Err(CliError::Usage(format!("no verification condition named `{sel}`"))),
            }
        };
        let mut picked: Vec<VerificationCondition> = chosen.iter().map(|&i| vcs[i].clone()).collect();
        let reports = check_vcs(&mut picked, &l.spec, &cli.consts, &config(cli, ""))
            .map_err(|e| l.locate(None, e))?;
        for (vc, r) in picked.iter().zip(&reports) {
            let verdict = match vc.status {
                VcStatus::Valid => "valid",
                VcStatus::Invalid => "INVALID",
                VcStatus::Unchecked => "unchecked",
            };
            let failed = match r.failures.len() {
                0 => String::new(),
                n => format!(", {n} failed"),
            };
            out.text.push_str(&format!(
                "{}: {} ({} ms, {} checked, {} inadmissible{failed})\n",
                vc.id, verdict, r.duration_ms, r.checked, r.inadmissible
            ));
            if let Some(f) = r.failures.first() {
                out.text.push_str(&format!("  counterexample: {}", format_failure(&vc.id, f, None)));
            }
            out.passed &= vc.status == VcStatus::Valid;
        }
        let valid = picked.iter().filter(|v| v.status == VcStatus::Valid).count();
        out.text.push_str(&format!("{valid} of {} verification conditions valid.\n", picked.len()));
        for (i, vc) in chosen.into_iter().zip(picked) {
            vcs[i] = vc;
        }
        if let Some(p) = &cli.report_json {
            write_file(p, &reports_json(&reports))?;
        }
    }
    if let Some(p) = &cli.vcg_json {
        write_file(p, &vcs_to_json(&vcs))?;
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.ascii { to_ascii(&out.text) } else { out.text };
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
