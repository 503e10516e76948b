//! Partitionable sets over cyclic groups, their constructions and searches,
//! and the whist tournaments, difference matrices and optical orthogonal
//! codes they give rise to.

#![allow(clippy::manual_is_multiple_of)]

pub mod catalog;
pub mod construct;
pub mod designs;
pub mod error;
pub mod kramer_mesner;
pub mod modarith;
pub mod ooc;
pub mod parallel;
pub mod pps;

pub use error::{Error, Result};
pub use pps::{
    admissible_params, admissible_witness, aps_necessary, exhaustive_search, infer_params,
    nonexistence_case, scale_set, verify_pps, Classification, ExhaustiveBudget, NonexistenceCase,
    PairSet, PpsSpec, VerifyReport,
};
