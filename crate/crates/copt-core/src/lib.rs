//! Core library of the `copt` C source optimizer.
//!
//! The pipeline is built from five largely independent pieces:
//!
//! * [`frontend`] — lexer, minimal preprocessor, parser and canonical
//!   pretty-printer for the supported C subset;
//! * [`analysis`] — detectors for the optimization catalog, each finding
//!   carrying a safety verdict;
//! * [`rewrite`] — source-to-source transformations driven by findings;
//! * [`interp`] — a deterministic tree-walking interpreter with an abstract
//!   cost model, used both to run programs and to check that rewrites
//!   preserve behavior;
//! * [`profile`] — sampling-log parsing and hotspot-table arithmetic.

pub mod analysis;
pub mod frontend;
pub mod interp;
pub mod profile;
pub mod rewrite;
pub mod span;

#[doc(hidden)]
pub mod testgen;
