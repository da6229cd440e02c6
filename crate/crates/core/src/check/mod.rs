//! Whole-operation checking: every input tuple of an operation is
//! enumerated, classified as inadmissible, checked or failed, and the
//! outcomes are gathered into a [`RunReport`].

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::machine::Invoked;
use crate::eval::{format_bindings, Bindings, EvalMode, Machine, RuntimeError, Value};
use crate::sema::{OpId, OpKind, TypedSpec};
use crate::syntax::SourceMap;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("no operation named `{0}` is declared")]
    UnknownOperation(String),
    #[error("`{0}` has too many inputs to enumerate")]
    TooManyInputs(String),
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub operation: String,
    pub mode: EvalMode,
    /// Suppress the per-input result lines.
    pub silent: bool,
    /// Per-input time budget in milliseconds; 0 means none.
    pub timeout_ms: u64,
    pub workers: usize,
    /// Stop at the first failing input (in enumeration order).
    pub fail_fast: bool,
}

impl CheckConfig {
    pub fn new(operation: impl Into<String>) -> Self {
        CheckConfig {
            operation: operation.into(),
            mode: EvalMode::Det,
            silent: true,
            timeout_ms: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            fail_fast: false,
        }
    }
}

/// A counterexample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub input: Bindings,
    pub error: RuntimeError,
}

/// What happened on one input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum InputOutcome {
    Inadmissible,
    /// All outcomes (one in Det mode).
    Checked { results: Vec<Value> },
    Failed { error: RuntimeError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputLine {
    pub input: Bindings,
    pub outcome: InputOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub operation: String,
    /// Header form, e.g. `gcd2(ℤ,ℤ)`.
    pub signature: String,
    pub kind: String,
    pub mode: EvalMode,
    pub total_inputs: u64,
    pub checked: u64,
    pub inadmissible: u64,
    pub failures: Vec<Failure>,
    /// Per-input lines; empty in silent mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<InputLine>,
    pub duration_ms: u64,
}

impl RunReport {
    pub fn processed(&self) -> u64 {
        self.checked + self.inadmissible + self.failures.len() as u64
    }

    /// Every input was processed and none failed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.processed() == self.total_inputs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Classifies one input. In Nondet mode every outcome is examined; the
/// input counts once however many outcomes it has.
pub fn check_input(machine: &mut Machine<'_>, id: OpId, args: &[Value], timeout_ms: u64) -> InputOutcome {
    let op = &machine.spec.ops[id];
    let theorem = op.kind == OpKind::Theorem;
    let span = op.span;
    let env: Bindings = op
        .params
        .iter()
        .zip(args)
        .map(|(p, a)| (p.name.clone(), a.clone()))
        .collect();
    machine.set_timeout(timeout_ms);
    let mut run = |m: &mut Machine<'_>| m.invoke(id, args, span, true);
    let mut next = Some(Vec::new());
    let mut results = Vec::new();
    while let Some(r) = machine.step_paths(&mut run, &mut next) {
        match r {
            Ok(Invoked::Inadmissible) => return InputOutcome::Inadmissible,
            Ok(Invoked::Value(v)) => {
                if theorem && v == Value::Bool(false) {
                    let error = RuntimeError::NotTrue {
                        span,
                        env: env.clone(),
                    };
                    return InputOutcome::Failed { error };
                }
                results.push(v);
            }
            Err(error) => return InputOutcome::Failed { error },
        }
    }
    InputOutcome::Checked { results }
}

/// Runs `cfg.operation` on all of its inputs.
pub fn run_operation(spec: &TypedSpec, cfg: &CheckConfig) -> Result<RunReport, CheckError> {
    let start = Instant::now();
    let id = spec
        .op_id(&cfg.operation)
        .ok_or_else(|| CheckError::UnknownOperation(cfg.operation.clone()))?;
    let op = &spec.ops[id];
    let total = op
        .input_count()
        .ok_or_else(|| CheckError::TooManyInputs(cfg.operation.clone()))?;

    let workers = cfg.workers.max(1);
    // Contiguous blocks keep each worker's call memo useful.
    let blocks = if workers == 1 { 1 } else { (workers as u64 * 4).min(total.max(1)) };
    let per_block = total.div_ceil(blocks.max(1)).max(1);
    let first_failure = AtomicU64::new(u64::MAX);

    let run_block = |b: u64| -> Vec<(u64, InputOutcome)> {
        let mut m = Machine::new(spec, cfg.mode);
        let mut out = Vec::new();
        let lo = b * per_block;
        let hi = (lo + per_block).min(total);
        for i in lo..hi {
            if cfg.fail_fast && i > first_failure.load(Ordering::Relaxed) {
                break;
            }
            let args = op.nth_input(i);
            let o = check_input(&mut m, id, &args, cfg.timeout_ms);
            let failed = matches!(o, InputOutcome::Failed { .. });
            out.push((i, o));
            if failed && cfg.fail_fast {
                first_failure.fetch_min(i, Ordering::Relaxed);
                break;
            }
        }
        out
    };

    let results: Vec<Vec<(u64, InputOutcome)>> = if workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| (0..blocks).into_par_iter().map(run_block).collect()),
            Err(_) => (0..blocks).map(run_block).collect(),
        }
    };

    let stop = first_failure.load(Ordering::Relaxed);
    let mut report = RunReport {
        operation: op.name.clone(),
        signature: op.signature(),
        kind: op.kind.keyword().to_string(),
        mode: cfg.mode,
        total_inputs: total,
        checked: 0,
        inadmissible: 0,
        failures: Vec::new(),
        lines: Vec::new(),
        duration_ms: 0,
    };
    for (i, outcome) in results.into_iter().flatten() {
        if cfg.fail_fast && i > stop {
            break;
        }
        let input = || -> Bindings {
            op.params
                .iter()
                .zip(op.nth_input(i))
                .map(|(p, v)| (p.name.clone(), v))
                .collect()
        };
        match &outcome {
            InputOutcome::Inadmissible => report.inadmissible += 1,
            InputOutcome::Checked { .. } => report.checked += 1,
            InputOutcome::Failed { error } => report.failures.push(Failure {
                input: input(),
                error: error.clone(),
            }),
        }
        if !cfg.silent {
            report.lines.push(InputLine {
                input: input(),
                outcome,
            });
        }
    }
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn call_text(operation: &str, input: &Bindings) -> String {
    let args: Vec<String> = input.iter().map(|(_, v)| v.to_string()).collect();
    format!("{operation}({})", args.join(","))
}

fn location(span: Option<crate::syntax::Span>, source: Option<&SourceMap>) -> String {
    match (span, source) {
        (Some(s), Some(map)) => format!(" at {}", map.render(s)),
        _ => String::new(),
    }
}

/// Describes one failure on a few lines.
pub fn format_failure(operation: &str, f: &Failure, source: Option<&SourceMap>) -> String {
    let mut s = format!(
        "ERROR in execution of {}: {}{}\n",
        call_text(operation, &f.input),
        f.error,
        location(f.error.span(), source)
    );
    if !f.error.env().is_empty() {
        s.push_str(&format!("  where {}\n", format_bindings(f.error.env())));
    }
    s
}

/// Text form of a report. `source` enables `line:column` locations.
pub fn format_report(r: &RunReport, source: Option<&SourceMap>) -> String {
    let mut s = format!("Executing {} with all {} inputs.\n", r.signature, r.total_inputs);
    for line in &r.lines {
        let call = call_text(&r.operation, &line.input);
        match &line.outcome {
            InputOutcome::Inadmissible => s.push_str(&format!("{call}: inadmissible\n")),
            InputOutcome::Checked { results } => {
                let vs: Vec<String> = results.iter().map(Value::to_string).collect();
                s.push_str(&format!("{call} = {}\n", vs.join(" | ")));
            }
            InputOutcome::Failed { .. } => {}
        }
    }
    for f in &r.failures {
        s.push_str(&format_failure(&r.operation, f, source));
    }
    if r.passed() {
        s.push_str(&format!(
            "Execution completed for ALL inputs ({} ms, {} checked, {} inadmissible).\n",
            r.duration_ms, r.checked, r.inadmissible
        ));
    } else {
        s.push_str(&format!(
            "FAILURE: {} of {} inputs failed ({} ms, {} checked, {} inadmissible, {} not run).\n",
            r.failures.len(),
            r.total_inputs,
            r.duration_ms,
            r.checked,
            r.inadmissible,
            r.total_inputs - r.processed()
        ));
    }
    s
}
