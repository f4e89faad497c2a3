//! Lopatinski determinant of the constant-coefficient problem and its
//! right-half-plane roots.
//!
//! Roots with `Re s > 0` at some unit wave direction are exactly the
//! exponentially growing normal modes. They are counted with the argument
//! principle on the analytic determinant (no polynomialization, hence no
//! spurious roots), located by bisection on the winding number, and polished
//! with Newton's method. Small-`eps` expansions are in [`series`].

mod contour;
mod scan;
pub mod series;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::state::{frequency_bundle, norm_sq, EquilibriumState, FrequencyBundle, StateError, Vec2, WaveDirection};

pub use contour::{
    count_unstable_roots, count_unstable_roots_adaptive, find_unstable_roots, winding_on_circle,
    CountReport, LocatedRoot, RootReport,
};
pub use scan::{scan_directions, DirectionEntry, DirectionScan};
pub use series::{series_root_generic, series_root_transitional, SeriesBranch, SeriesRoot};

pub type C64 = Complex64;

/// Largest number of contour evaluations before a count is abandoned.
pub const MAX_CONTOUR_POINTS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("|L| = {min_abs:e} on the contour is below the floor after boundary perturbations")]
    ContourTooClose { min_abs: f64 },
    #[error("contour refinement exceeded {points} points")]
    NonConvergent { points: usize },
    #[error("winding number {value} is not close to an integer")]
    AmbiguousWinding { value: f64 },
    #[error("direction is transitional (|D| = {d:e}); use the transitional expansion")]
    TransitionalAtThisDirection { d: f64 },
    #[error("direction is not transitional (D = {d:e})")]
    NotTransitional { d: f64 },
    #[error("leading coefficient of the expansion vanishes")]
    DegenerateSeries,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Root-search region `{Re s >= delta, |s - delta| <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub delta: f64,
    pub radius: f64,
}

impl Region {
    pub fn new(delta: f64, radius: f64) -> Self {
        Self { delta, radius }
    }

    /// `R = 10 (1 + |v'| + |H'| + |Hv'| + |E1|)`, `delta = 1e-3 R`. At
    /// `eps = 0` every root obeys `|s| <= |v'| + |E1|`.
    pub fn for_state(state: &EquilibriumState) -> Self {
        let radius = 10.0
            * (1.0
                + norm_sq(state.v_t).sqrt()
                + norm_sq(state.h_t).sqrt()
                + norm_sq(state.hv_t).sqrt()
                + state.e1.abs());
        Self {
            delta: 1e-3 * radius,
            radius,
        }
    }

    pub fn contains(&self, s: C64) -> bool {
        s.re >= self.delta && (s - self.delta).norm() <= self.radius
    }
}

/// `λ+ = -|ω'|` for an unnormalized wave vector.
pub fn plasma_decay_root_unnormalized(omega: Vec2) -> Result<f64, StateError> {
    let n = omega[0].hypot(omega[1]);
    if n == 0.0 || !n.is_finite() {
        return Err(StateError::ZeroDirection);
    }
    Ok(-n)
}

/// `λ+` on the unit circle.
pub fn plasma_decay_root(_dir: &WaveDirection) -> f64 {
    -1.0
}

/// `λ- = sqrt(1 + eps^2 s^2)`, principal branch. For `Re s > 0` the
/// argument never meets the cut, so `λ-` is analytic there.
pub fn vacuum_decay_root(s: C64, eps: f64) -> C64 {
    (1.0 + eps * eps * s * s).sqrt()
}

/// Everything needed to evaluate the determinant at one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LopatinskiContext {
    pub state: EquilibriumState,
    pub dir: WaveDirection,
    pub bundle: FrequencyBundle,
    hv_sq: f64,
}

impl LopatinskiContext {
    /// Uses the comoving frame (`sigma = 0`).
    pub fn new(state: &EquilibriumState, dir: WaveDirection) -> Self {
        let state = state.rest_frame();
        Self {
            bundle: frequency_bundle(&state, &dir),
            hv_sq: norm_sq(state.hv_t),
            state,
            dir,
        }
    }

    pub fn eps(&self) -> f64 {
        self.state.eps
    }

    /// `ℓ(s) = s + i (v'·ω)`.
    pub fn ell(&self, s: C64) -> C64 {
        s + C64::new(0.0, self.bundle.v_dot)
    }

    /// `E1^2 - (ŵ+)^2 - (ŵ-)^2`: positive means a growing `eps = 0` root.
    pub fn discriminant(&self) -> f64 {
        let b = &self.bundle;
        self.state.e1 * self.state.e1 - b.w_plus * b.w_plus - b.w_minus * b.w_minus
    }

    /// Tolerance for `|D| ~ 0`, matching the criterion's equality band.
    pub fn transitional_tol(&self) -> f64 {
        let b = &self.bundle;
        1e-9 * (1.0 + self.state.e1 * self.state.e1 + b.w_plus * b.w_plus + b.w_minus * b.w_minus)
    }

    /// Magnitude used to make residual tolerances relative.
    pub fn scale(&self) -> f64 {
        let s = &self.state;
        1.0 + norm_sq(s.v_t) + norm_sq(s.h_t) + self.hv_sq + s.e1 * s.e1
    }

    /// Normalized determinant at `|ω'| = 1`.
    pub fn eval(&self, s: C64) -> C64 {
        let b = &self.bundle;
        let e1 = self.state.e1;
        let eps = self.eps();
        let ell = self.ell(s);
        (ell * ell + b.w_plus * b.w_plus) * vacuum_decay_root(s, eps) + b.w_minus * b.w_minus
            - e1 * e1
            - C64::new(0.0, 2.0 * e1 * b.w_perp * eps) * s
            + self.hv_sq * eps * eps * s * s
    }

    /// `dL/ds`, differentiating the square root as `eps^2 s / λ-`.
    pub fn derivative(&self, s: C64) -> C64 {
        let b = &self.bundle;
        let e1 = self.state.e1;
        let eps = self.eps();
        let ell = self.ell(s);
        let lam = vacuum_decay_root(s, eps);
        2.0 * ell * lam + (ell * ell + b.w_plus * b.w_plus) * (eps * eps * s / lam)
            - C64::new(0.0, 2.0 * e1 * b.w_perp * eps)
            + 2.0 * self.hv_sq * eps * eps * s
    }

    pub fn eval_with_derivative(&self, s: C64) -> (C64, C64) {
        (self.eval(s), self.derivative(s))
    }
}

/// Determinant for an arbitrary nonzero wave vector; homogeneous of degree
/// three in `(s, ω')`.
pub fn lopatinski_unnormalized(state: &EquilibriumState, omega: Vec2, s: C64) -> C64 {
    let state = state.rest_frame();
    let eps = state.eps;
    let norm = omega[0].hypot(omega[1]);
    let w_plus = state.h_t[0] * omega[0] + state.h_t[1] * omega[1];
    let w_minus = state.hv_t[0] * omega[0] + state.hv_t[1] * omega[1];
    let w_perp = state.hv_t[1] * omega[0] - state.hv_t[0] * omega[1];
    let v_dot = state.v_t[0] * omega[0] + state.v_t[1] * omega[1];
    let ell = s + C64::new(0.0, v_dot);
    let e1 = state.e1;
    (ell * ell + w_plus * w_plus) * (norm * norm + eps * eps * s * s).sqrt()
        + w_minus * w_minus * norm
        - e1 * e1 * norm.powi(3)
        - C64::new(0.0, 2.0 * e1 * w_perp * norm * eps) * s
        + norm * norm_sq(state.hv_t) * eps * eps * s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear() -> EquilibriumState {
        EquilibriumState::new([0.0; 2], [1.0, 0.0], [2.0, 0.0], 0.3, 0.01)
    }

    #[test]
    fn decay_roots() {
        let d = WaveDirection::new(0.3, -0.7).unwrap();
        assert_eq!(plasma_decay_root(&d), -1.0);
        assert_eq!(plasma_decay_root_unnormalized([3.0, 4.0]).unwrap(), -5.0);
        assert!(plasma_decay_root_unnormalized([0.0, 0.0]).is_err());

        let l = vacuum_decay_root(C64::new(1.0, 0.0), 0.1);
        assert!((l.re - 1.01f64.sqrt()).abs() < 1e-15 && l.im == 0.0);
        assert_eq!(vacuum_decay_root(C64::new(3.0, -2.0), 0.0), C64::new(1.0, 0.0));
        let l = vacuum_decay_root(C64::new(0.0, 5.0), 0.1);
        assert!((l.re - 0.75f64.sqrt()).abs() < 1e-15 && l.im.abs() < 1e-15);
    }

    #[test]
    fn vacuum_root_has_nonnegative_real_part_in_rhp() {
        for k in 0..200 {
            let s = C64::from_polar(0.01 + k as f64 * 0.7, -1.5 + 3.0 * (k as f64 / 200.0));
            assert!(vacuum_decay_root(s, 0.3).re >= 0.0);
        }
    }

    #[test]
    fn eps_zero_collapse() {
        let s = collinear().with_eps(0.0);
        let ctx = LopatinskiContext::new(&s, WaveDirection::new(0.0, 1.0).unwrap());
        assert!(ctx.eval(C64::new(0.3, 0.0)).norm() < 1e-15);

        let s = EquilibriumState::new([0.0; 2], [1.0, 0.0], [0.0, 1.0], 2.0, 0.0);
        let ctx = LopatinskiContext::new(&s, WaveDirection::new(1.0, 0.0).unwrap());
        // s^2 + 1 + 0 - 4 = 0 at s = sqrt(3)
        assert!(ctx.eval(C64::new(3f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = EquilibriumState::new([0.4, -0.3], [1.0, 0.5], [-0.2, 1.3], 0.8, 0.07);
        let ctx = LopatinskiContext::new(&s, WaveDirection::new(0.6, 0.8).unwrap());
        let z = C64::new(0.7, 0.4);
        let h = 1e-6;
        let fd = (ctx.eval(z + h) - ctx.eval(z - h)) / (2.0 * h);
        let fdi = (ctx.eval(z + C64::new(0.0, h)) - ctx.eval(z - C64::new(0.0, h))) / C64::new(0.0, 2.0 * h);
        assert!((ctx.derivative(z) - fd).norm() < 1e-8);
        assert!((ctx.derivative(z) - fdi).norm() < 1e-8);
    }

    #[test]
    fn unnormalized_agrees_on_unit_circle() {
        let s = EquilibriumState::new([0.4, -0.3], [1.0, 0.5], [-0.2, 1.3], 0.8, 0.07);
        let d = WaveDirection::new(-0.28, 0.96).unwrap();
        let ctx = LopatinskiContext::new(&s, d);
        let z = C64::new(0.2, -1.1);
        assert!((ctx.eval(z) - lopatinski_unnormalized(&s, d.omega(), z)).norm() < 1e-14);
    }

    #[test]
    fn sigma_is_ignored_by_context() {
        let s = collinear();
        let d = WaveDirection::new(0.0, 1.0).unwrap();
        let a = LopatinskiContext::new(&s, d);
        let b = LopatinskiContext::new(&s.with_sigma(5.0), d);
        assert_eq!(a.eval(C64::new(0.2, 0.1)), b.eval(C64::new(0.2, 0.1)));
    }

    #[test]
    fn default_region() {
        let r = Region::for_state(&collinear());
        assert!((r.radius - 10.0 * (1.0 + 1.0 + 2.0 + 0.3)).abs() < 1e-12);
        assert!((r.delta - 1e-3 * r.radius).abs() < 1e-15);
        assert!(r.contains(C64::new(1.0, 0.0)));
        assert!(!r.contains(C64::new(0.0, 0.0)));
    }
}
