use crate::linalg::PowerIteration;

/// Relative slack when comparing a computed gain against a level, so that
/// exact-boundary cases (non-strict inequalities) are not lost to rounding.
pub const SCALABILITY_SLACK: f64 = 1e-12;

/// Nodes with `u_i >= gamma_min * (1 - ARGMAX_TIE)` all count as maximisers.
pub const ARGMAX_TIE: f64 = 1e-12;

/// Numerical knobs shared by the analyses.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Relative margin for the `rho < 1` stability decision.
    pub eps_stab: f64,
    /// Accepted residual `‖(A-M)u - 1‖∞ <= solve_tol (1 + ‖u‖∞)`.
    pub solve_tol: f64,
    /// Maximum number of simple cycles enumerated before giving up.
    pub cycle_cap: usize,
    pub power: PowerIteration,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_stab: 1e-9,
            solve_tol: 1e-9,
            cycle_cap: 1_000_000,
            power: PowerIteration::default(),
        }
    }
}

pub(crate) fn within_level(value: f64, level: f64) -> bool {
    value <= level * (1.0 + SCALABILITY_SLACK)
}
