//! Explicit, easily computable generalization-error bounds for differentially
//! private learning algorithms over finite data alphabets.
//!
//! The crate is organized bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`typespace`] | method-of-types combinatorics: enumeration, counting bounds, distance, typicality |
//! | [`mechanisms`] | permutation-invariant mechanisms over types, exact KL / MI / maximal-leakage oracles, ε auditing, mixture lemmas |
//! | [`bounds`] | closed-form mutual-information and maximal-leakage bounds with exhaustive grid-parameter search |
//! | [`repset`] | representative-set grids over the count space and their covering properties |
//! | [`experiments`] | verification battery, Monte Carlo generalization experiments, figure sweeps |
//!
//! All information quantities are in nats.
//!
//! ```
//! use genbound::bounds::{bound_thm1, BoundQuery};
//!
//! let q = BoundQuery::new(1000, 2, 0.001, 0.5).unwrap();
//! let report = bound_thm1(&q).unwrap();
//! assert_eq!(report.argmin_t, Some(2));
//! assert!((report.value - 0.87989).abs() < 1e-4);
//! ```

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod mechanisms;
pub mod numeric;
pub mod repset;
pub mod typespace;

pub use error::{Error, Result};
