//! strsolve — a string-constraint solver built on regular-language
//! propagation.
//!
//! The solver decides satisfiability of quantifier-free constraints over
//! strings and linear integer arithmetic: word equations built from
//! concatenation and string transformations (`str.replace`,
//! `str.substr`, `str.reverse`, …), regular-language membership, string
//! length, and integer reasoning connected to strings through `str.len`,
//! `str.to_int`, `str.indexof`, and friends.
//!
//! The core inference loop maintains, for every string variable, a set of
//! interval automata constraining it, and saturates those sets by pushing
//! languages forward through function applications (images) and backward
//! (pre-images), splitting disjunctions and word equations into branches,
//! and closing branches whose automata intersect to the empty language.
//! Integer atoms are handled by interval constraint propagation with
//! branch-and-prune subdivision.
//!
//! Entry points:
//! - [`frontend::driver::run_script`] runs a parsed script end to end.
//! - [`cli::main_with_args`] is the command-line interface.
//! - [`engine::solve`] exposes the solving loop programmatically.

pub mod automata;
pub mod cli;
pub mod engine;
pub mod frontend;
pub mod ir;
pub mod lia;
pub mod rewriter;
pub mod oracle;
pub mod regexc;
pub mod strings;
pub mod xform;
