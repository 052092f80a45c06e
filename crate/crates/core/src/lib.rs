//! Entropy-bump maximal functions, sparse bilinear forms and weighted
//! endpoint experiments on one-dimensional dyadic grids.
//!
//! Every object lives on `[0, 1)` discretized into `2^N` cells of equal
//! width. Functions are step functions on that grid ([`GridFunction`]),
//! cubes are dyadic intervals ([`DyadicCube`]), and every integral is a
//! finite sum, so the weighted inequalities checked by [`lab`] are exact
//! up to floating-point rounding.
//!
//! Module map:
//!
//! - [`grid`]: cubes, averages, integrals, distribution functions, weak-L¹.
//! - [`weights`]: dyadic maximal functions, the entropy functional `ρ_w(Q)`,
//!   `A₁` and Wilson `A_∞` characteristics, weight generators.
//! - [`bumps`]: the shifted logarithm, `ε` bump catalog and `K_ε`, entropy
//!   and Orlicz bump norms and their maximal functions.
//! - [`sparse`]: sparse collections, the eight-way split, sparse forms and
//!   operators, martingale transforms, stopping cubes, proof replay.
//! - [`lab`]: seeded experiment harness and reports.
//! - [`io`]: the flat text and CSV file formats.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bumps;
pub mod error;
pub mod grid;
pub mod io;
pub mod lab;
pub mod sparse;
pub mod weights;

pub use bumps::{shifted_log, EntropyVariant, EpsilonSpec, KEpsilonResult, OrliczSpec};
pub use error::{Error, Result};
pub use grid::{CellSet, DyadicCube, GridFunction};
pub use sparse::SparseCollection;
pub use weights::{RhoTable, Weight};
