//! Performance analysis of opportunistic two-way fixed-gain amplify-and-forward
//! relaying when the relay is picked from outdated channel estimates.
//!
//! The crate has two independent halves that are meant to be checked against
//! each other:
//!
//! * an analytic engine ([`order_stats`], [`e2e`]) evaluating closed-form
//!   expressions for the statistics of the selected relay's gains, the
//!   end-to-end SNR CDF, outage, MGF and symbol error rate;
//! * a Monte-Carlo channel simulator ([`mcsim`]) that draws correlated
//!   Rayleigh channels, performs max-min selection on the outdated gains and
//!   measures the same quantities empirically.
//!
//! [`specfun`] holds the special-function kernel both halves rely on,
//! [`sweep`] and [`validate`] drive parameter studies and self-checks for the
//! `afrelay` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod e2e;
pub mod error;
pub mod mcsim;
pub mod order_stats;
pub mod specfun;
mod sum;
pub mod sweep;
pub mod table;
pub mod validate;

pub use config::{correlation_from_doppler, derive, DerivedParams, GainConvention, SystemConfig};
pub use e2e::{E2eModel, EvalPath, ModulationKind, ModulationSpec};
pub use error::{Error, Result};
pub use mcsim::McEstimate;
pub use order_stats::{CoefficientTable, Hop, TermSet};
