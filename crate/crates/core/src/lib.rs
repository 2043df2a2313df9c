//! Exact L∞ robustness bounds for positive linear networks, and verdicts on
//! whether structural changes preserve them.
//!
//! A network of scalar subsystems `x_i' = -a_i x_i + sum_j m_ij x_j + d_i`
//! with `a_i > 0`, `m_ij >= 0` is gamma-robust when it is asymptotically
//! stable and every trajectory from rest satisfies
//! `max_i |x_i(t)| <= gamma * max_i ‖d_i‖∞`. The minimal such gamma is the
//! largest entry of `u = (A - M)^{-1} 1`.
//!
//! * [`analysis`]: stability, the robustness vector, certificates, walk sums,
//!   cycle small-gain condition.
//! * [`changes`]: node/edge additions and removals, exact and local
//!   scalability tests, incremental updates, self-feedback repair.
//! * [`simulate`]: trajectories under bounded disturbances as an empirical
//!   witness of the certified bounds.
//! * [`format`]: JSON file formats and CSV export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod changes;
pub mod cli;
pub mod config;
pub mod cycles;
pub mod decimal;
pub mod error;
pub mod format;
pub mod golden;
pub mod linalg;
pub mod model;
pub mod random;
pub mod simulate;

pub use analysis::{
    analyze, check_certificate, cycle_small_gain, is_gamma_robust, robustness_vector, stability,
    walk_sum_oracle, Certificate, CycleReport, RobustnessReport, Stability, WalkSum,
};
pub use changes::{
    apply, check_sequence, diagonal_dominance_check, lower_bound_added_edge, propose_repair,
    sufficient_local_check, verdict, ChangeVerdict, NewEdge, SelfFeedbackRepair, SequenceReport,
    SequenceStep, StructuralChange,
};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use model::{Edge, IndexMap, Network, NodeId, Violation};
