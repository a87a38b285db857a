//! Command-line front end for steerkit: parses `steerkit/1` task documents,
//! runs each task and emits a JSON report.
//!
//! Reports round every floating-point value to 12 significant digits and
//! keep input order, so output is byte-identical for the same document and
//! seed regardless of thread count.

#![forbid(unsafe_code)]

pub mod document;
pub mod format;
pub mod runner;
pub mod templates;

pub use document::{parse_document, resolve, Document, DocumentError, TaskDocument, SCHEMA};
pub use runner::{run, run_with, ErrorClass, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
