//! Finite-domain checker for specifications written in a small typed
//! first-order language of theories and algorithms.
//!
//! Every type has finite bounds once the specification's constants are
//! fixed, so theorems and procedure contracts are decided by evaluating them
//! on every admissible input. The crate is organized along the pipeline:
//!
//! * [`syntax`]: tokenizer, parser and printer;
//! * [`sema`]: constant binding, type resolution and checking, carriers;
//! * [`eval`]: the evaluator (deterministic and nondeterministic modes);
//! * [`check`]: whole-operation runs and reports;
//! * [`vcg`]: weakest-precondition verification conditions;
//! * [`viz`]: execution traces and evaluation trees as DOT/JSON.

pub mod check;
pub mod eval;
pub mod sema;
pub mod syntax;
pub mod vcg;
pub mod viz;
