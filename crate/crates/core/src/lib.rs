//! Analytic performance metrics for downlink MIMO cellular networks whose base
//! stations form a Poisson point process.
//!
//! Every MIMO configuration is reduced to an equivalent single-antenna link in
//! which the intended channel power gain is `Gamma(m_o, 1)` and each interfering
//! gain is `Gamma(m_i, 1)`. The crate evaluates, for that reduced model:
//!
//! - the Laplace transform of the aggregate interference and its derivatives
//!   ([`interference`]), for one slot and jointly for two correlated slots;
//! - average symbol error probability, outage, ergodic rate, coverage with one
//!   retransmission and throughput ([`metrics`]);
//! - the inverse problem of picking antenna counts for a reliability target
//!   ([`design`]).
//!
//! The crate is `no_std` (with `alloc`). Monte-Carlo validation, configuration
//! files and the command line live in the companion `sgmimo` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod design;
pub mod interference;
pub mod metrics;
pub mod schemes;
pub mod specfun;

pub use design::{AntennaBudget, Constraint, DesignAnswer, DesignOption, DesignQuery};
pub use error::{Error, Result};
pub use interference::{LtQuery, NetworkModel};
pub use metrics::{AsepMethod, Diagnostic, MetricResult, RetxConfig, RetxMode};
pub use schemes::{Exactness, GammaParams, MimoScheme, Modulation, SchemeTag};
pub use specfun::{BiJet, Jet, QuadratureSpec};
