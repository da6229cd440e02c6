use serde::{Deserialize, Serialize};

use super::value::{Bindings, Value};
use crate::syntax::Span;

/// Failure of an evaluation. Every variant except `Timeout` carries the
/// source span it refers to and the variable bindings at the failure point.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RuntimeError {
    #[error("no value satisfies the condition of choose")]
    ChooseFailure { span: Span, env: Bindings },
    #[error("precondition of `{operation}` is violated")]
    PreconditionViolation {
        span: Span,
        operation: String,
        env: Bindings,
    },
    #[error("postcondition of `{operation}` is violated")]
    PostconditionViolation {
        span: Span,
        operation: String,
        env: Bindings,
    },
    #[error("loop invariant {} is violated in iteration {iteration}", index + 1)]
    InvariantViolation {
        span: Span,
        /// 0-based position among the loop's invariants.
        index: usize,
        iteration: u64,
        env: Bindings,
    },
    #[error("termination measure is negative ({value})")]
    MeasureNegative { span: Span, value: i64, env: Bindings },
    #[error("termination measure is not decreased ({before} before, {after} after)")]
    MeasureNotDecreased {
        span: Span,
        before: i64,
        after: i64,
        env: Bindings,
    },
    #[error("value {value} is not in {expected}")]
    RangeViolation {
        span: Span,
        value: Value,
        expected: String,
        env: Bindings,
    },
    #[error("assertion is violated")]
    AssertionViolation { span: Span, env: Bindings },
    #[error("formula is false")]
    NotTrue { span: Span, env: Bindings },
    #[error("integer overflow")]
    ArithmeticOverflow { span: Span, env: Bindings },
    #[error("evaluation exceeded {millis} ms")]
    Timeout { millis: u64 },
}

impl RuntimeError {
    pub fn span(&self) -> Option<Span> {
        use RuntimeError::*;
        match self {
            ChooseFailure { span, .. }
            | PreconditionViolation { span, .. }
            | PostconditionViolation { span, .. }
            | InvariantViolation { span, .. }
            | MeasureNegative { span, .. }
            | MeasureNotDecreased { span, .. }
            | RangeViolation { span, .. }
            | AssertionViolation { span, .. }
            | NotTrue { span, .. }
            | ArithmeticOverflow { span, .. } => Some(*span),
            Timeout { .. } => None,
        }
    }

    pub fn env(&self) -> &[(String, Value)] {
        use RuntimeError::*;
        match self {
            ChooseFailure { env, .. }
            | PreconditionViolation { env, .. }
            | PostconditionViolation { env, .. }
            | InvariantViolation { env, .. }
            | MeasureNegative { env, .. }
            | MeasureNotDecreased { env, .. }
            | RangeViolation { env, .. }
            | AssertionViolation { env, .. }
            | NotTrue { env, .. }
            | ArithmeticOverflow { env, .. } => env,
            Timeout { .. } => &[],
        }
    }

    /// Variant name, as used in JSON reports.
    pub fn kind(&self) -> &'static str {
        use RuntimeError::*;
        match self {
            ChooseFailure { .. } => "ChooseFailure",
            PreconditionViolation { .. } => "PreconditionViolation",
            PostconditionViolation { .. } => "PostconditionViolation",
            InvariantViolation { .. } => "InvariantViolation",
            MeasureNegative { .. } => "MeasureNegative",
            MeasureNotDecreased { .. } => "MeasureNotDecreased",
            RangeViolation { .. } => "RangeViolation",
            AssertionViolation { .. } => "AssertionViolation",
            NotTrue { .. } => "NotTrue",
            ArithmeticOverflow { .. } => "ArithmeticOverflow",
            Timeout { .. } => "Timeout",
        }
    }
}
