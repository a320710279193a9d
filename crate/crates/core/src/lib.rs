//! Core library of the wasubench toolkit.
//!
//! The crate is organized around the benchmarking pipeline:
//!
//! * [`registry`] — JSON-backed definitions of engines (runtimes and their
//!   subruntimes) and benchmark groups, plus command-line resolution.
//! * [`executor`] — measured child-process execution: wall time, peak
//!   RSS/VMS, timeouts, repetitions, output validation, score extraction.
//! * [`results`] — results persistence (JSON), CSV export, and per
//!   benchmark×runtime aggregation.
//! * [`check`] — engine feature-support matrices built from payload sets.
//! * [`analysis`] — dynamic-execution metrics computed from instruction
//!   profiles (hotness reach, coverage, opcode-class tallies, CDFs).
//! * [`pca`] — standardization and principal component analysis of the
//!   benchmark×metric matrix, implemented with cyclic Jacobi rotations.
//! * [`plot`] — deterministic SVG charts (grouped bars, scatter, CDF) and
//!   raw distribution export.

pub mod analysis;
pub mod check;
pub mod csvutil;
pub mod executor;
pub mod pca;
pub mod plot;
pub mod registry;
pub mod results;
