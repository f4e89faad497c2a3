//! Stability analysis of a plasma-vacuum interface carrying a normal
//! vacuum electric field.
//!
//! [`criterion`] classifies a state analytically, [`dispersion`] counts and
//! locates unstable roots of the Lopatinski determinant, [`modes`] builds
//! exponentially growing solutions, and [`oracle`] holds the brute-force
//! cross-checks.

pub mod criterion;
pub mod dispersion;
pub mod modes;
pub mod oracle;
pub mod state;

pub use criterion::{classify, default_tol_eq, minimize_f, Classification, Verdict};
pub use dispersion::{DispersionError, LopatinskiContext, Region, C64};
pub use modes::{build_mode, ModeError, ModeSolution};
pub use state::{EquilibriumState, StateError, StateWarning, ValidatedState, WaveDirection};
