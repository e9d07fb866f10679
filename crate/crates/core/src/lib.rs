//! Quasi-static brittle damage of a one-dimensional bar.
//!
//! The [`eps`] module evolves the damage model at a fixed scale ε by
//! incremental energy minimization over relaxed (convexified) cell energies;
//! [`limit`] evolves its effective limit, a damage model whose stress obeys
//! the yield bound of perfect plasticity. [`diagnostics`] decides from the
//! boundary datum alone when that limit actually is a perfect-plasticity
//! evolution.

pub mod datum;
pub mod diagnostics;
pub mod envelope;
pub mod eps;
pub mod error;
pub mod limit;
pub mod material;
pub mod output;
pub mod scenarios;

pub use datum::BoundaryDatum;
pub use diagnostics::{cns_classify, Classification, ClassifyReport, Verdict};
pub use envelope::TwoWellParams;
pub use eps::{run_eps, EpsState, EpsTrajectory};
pub use error::{Error, Result};
pub use limit::{run_limit, LimitState, LimitTrajectory};
pub use material::MaterialParams;
pub use scenarios::ScenarioConfig;
