//! Uplink power allocation for user equipment with dual connectivity in a
//! two-tier cellular network with capacity-limited backhaul.
//!
//! The crate is organised bottom-up:
//!
//! * [`net_model`]: the immutable [`Scenario`] description and its validation.
//! * [`channel_metrics`]: normalized cross-gain matrices, effective
//!   interference, SINR and link rates.
//! * [`backhaul_flow`]: max-flow network capacity, per-PoA rate differentials
//!   and the nine-state backhaul classification.
//! * [`power_control`]: waterfilling, backhaul state driven (BDT), greedy and
//!   fixed-target-SINR update rules.
//! * [`equilibrium`]: the linear iteration `P1 <- N + M P1`, its spectral
//!   radius and closed-form fixed point.
//! * [`scenario_gen`]: random drops and the two-UE convergence example.
//! * [`sim_engine`]: synchronous iteration, convergence detection, metrics and
//!   Monte Carlo sweeps; [`presets`] holds the figure sweeps.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the bottom of this file pin the common instantiations.

// `!(x > 0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backhaul_flow;
pub mod channel_metrics;
pub mod equilibrium;
mod error;
pub mod linalg;
pub mod net_model;
pub mod power_control;
pub mod presets;
mod scalar;
pub mod scenario_gen;
pub mod sim_engine;

pub use backhaul_flow::{BackhaulReport, BackhaulState};
pub use channel_metrics::{CrossGainMatrices, PowerState};
pub use equilibrium::IterationSystem;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use net_model::{Channel, GainEntry, Link, Poa, PoaKind, Scenario, Ue, Violation};
pub use power_control::PolicyKind;
pub use scalar::Scalar;
pub use scenario_gen::{GenParams, WorkedCase};
pub use sim_engine::{Metrics, RunConfig, Trace, Verdict};

/// Double precision scenario, the default for I/O and experiments.
pub type Scenario64 = Scenario<f64>;
/// Single precision scenario.
pub type Scenario32 = Scenario<f32>;
pub type Matrices64 = CrossGainMatrices<f64>;
pub type Matrices32 = CrossGainMatrices<f32>;
pub type PowerState64 = PowerState<f64>;
pub type PowerState32 = PowerState<f32>;
pub type Trace64 = Trace<f64>;
pub type Trace32 = Trace<f32>;
pub type System64 = IterationSystem<f64>;
pub type System32 = IterationSystem<f32>;
