//! Benchmark fixtures shared by the `benches/` targets.

use pvstab_core::EquilibriumState;

/// Collinear fields, unstable at the default `eps`.
pub fn unstable_state() -> EquilibriumState {
    EquilibriumState::new([0.0; 2], [1.0, 0.0], [2.0, 0.0], 0.3, 1e-2)
}

/// Orthogonal fields below threshold.
pub fn neutral_state() -> EquilibriumState {
    EquilibriumState::new([0.0; 2], [1.0, 0.0], [0.0, 1.0], 0.5, 1e-2)
}

/// Generic fields with a tangential flow.
pub fn generic_state() -> EquilibriumState {
    EquilibriumState::new([0.4, -0.3], [1.1, 0.2], [-0.5, 1.3], 0.9, 1e-2)
}
