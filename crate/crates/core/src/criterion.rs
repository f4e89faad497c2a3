//! Closed-form violent-instability criterion.
//!
//! For `eps -> 0` the interface is violently unstable when `E1^2` exceeds
//! the minimum over unit `ω` of `F(ω) = (H'·ω)^2 + (Hv'·ω)^2`. On the band
//! `E1^2 == F_min` a second sign condition decides.

use serde::Serialize;

use crate::state::{cross, dot, frequency_bundle, norm_sq, EquilibriumState, WaveDirection};

/// Directions sampled when `F` is constant on the unit circle.
pub const DEGENERATE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ViolentlyUnstable,
    NeutrallyStable,
    TransitionalUnstable,
    TransitionalNeutral,
}

impl Verdict {
    /// Whether the verdict predicts growing normal modes.
    pub fn is_unstable(self) -> bool {
        matches!(self, Self::ViolentlyUnstable | Self::TransitionalUnstable)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ViolentlyUnstable => "ViolentlyUnstable",
            Self::NeutrallyStable => "NeutrallyStable",
            Self::TransitionalUnstable => "TransitionalUnstable",
            Self::TransitionalNeutral => "TransitionalNeutral",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why the minimizer is not unique beyond the antipodal pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Degeneracy {
    /// `H' = Hv' = 0`: `F ≡ 0`.
    BothFieldsZero,
    /// `|H'| = |Hv'|` and `H' ⊥ Hv'`: `F` is constant.
    ConstantF,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizationResult {
    pub f_min: f64,
    /// Representative with `ω2 >= 0` (ties broken by `ω3 >= 0`).
    pub omega_star: WaveDirection,
    /// `(cos 2x*, sin 2x*)` with `x*` measured from the bisector of the
    /// field angle; absent when a field vanishes or `F` is degenerate.
    pub x_star_trig: Option<(f64, f64)>,
    pub degeneracy: Option<Degeneracy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub critical_e1_sq: f64,
    /// `E1^2 - critical_e1_sq`.
    pub margin: f64,
    pub minimizer: WaveDirection,
    pub f_min: f64,
    /// Sign discriminant, present inside the transitional band.
    pub transitional_g: Option<f64>,
    /// Largest sampled `E1 ŵ⊥ (v'·ω)`; set only in the constant-`F` band case.
    pub addinst_max: Option<f64>,
    pub degenerate: bool,
    pub tol_eq: f64,
}

/// `F(ω) = (H'·ω)^2 + (Hv'·ω)^2`.
pub fn f_of_omega(state: &EquilibriumState, dir: &WaveDirection) -> f64 {
    let w = dir.omega();
    let a = dot(state.h_t, w);
    let b = dot(state.hv_t, w);
    a * a + b * b
}

fn canonical(w2: f64, w3: f64) -> WaveDirection {
    let flip = w2 < 0.0 || (w2 == 0.0 && w3 < 0.0);
    let (w2, w3) = if flip { (-w2, -w3) } else { (w2, w3) };
    // unit by construction up to rounding; renormalize anyway
    WaveDirection::new(w2, w3).unwrap_or(WaveDirection::from_angle(0.0))
}

fn perpendicular_to(v: [f64; 2]) -> WaveDirection {
    canonical(-v[1], v[0])
}

/// Minimizes `F` on the unit circle through the half-angle parametrization
/// around the bisector of `H'` and `Hv'`.
pub fn minimize_f(state: &EquilibriumState) -> MinimizationResult {
    let h = state.h_t;
    let hv = state.hv_t;
    let a = norm_sq(h);
    let b = norm_sq(hv);

    if a == 0.0 && b == 0.0 {
        return MinimizationResult {
            f_min: 0.0,
            omega_star: WaveDirection::from_angle(0.0),
            x_star_trig: None,
            degeneracy: Some(Degeneracy::BothFieldsZero),
        };
    }
    if a == 0.0 || b == 0.0 {
        let field = if a == 0.0 { hv } else { h };
        return MinimizationResult {
            f_min: 0.0,
            omega_star: perpendicular_to(field),
            x_star_trig: None,
            degeneracy: None,
        };
    }

    let alpha = cross(h, hv).atan2(dot(h, hv));
    let (sin_a, cos_a) = alpha.sin_cos();
    let radicand = ((a + b) * (a + b) - 4.0 * a * b * sin_a * sin_a).max(0.0);
    let root = radicand.sqrt();

    if root <= 1e-14 * (a + b) {
        return MinimizationResult {
            f_min: 0.5 * (a + b),
            omega_star: WaveDirection::from_angle(0.0),
            x_star_trig: None,
            degeneracy: Some(Degeneracy::ConstantF),
        };
    }

    let cos_2x = -(b + a) * cos_a / root;
    let sin_2x = -(b - a) * sin_a / root;
    let f_min = 0.5 * (a + b) + 0.5 * ((a + b) * cos_2x * cos_a + (b - a) * sin_2x * sin_a);

    // ω makes angle x + α/2 with H' and x - α/2 with Hv'.
    let x = 0.5 * sin_2x.atan2(cos_2x);
    let theta = h[1].atan2(h[0]) + 0.5 * alpha + x;
    MinimizationResult {
        f_min: f_min.max(0.0),
        omega_star: canonical(theta.cos(), theta.sin()),
        x_star_trig: Some((cos_2x, sin_2x)),
        degeneracy: None,
    }
}

/// Threshold on `E1^2`, written through `|H × Hv|`.
pub fn critical_e1_squared(state: &EquilibriumState) -> f64 {
    let sum = norm_sq(state.h_t) + norm_sq(state.hv_t);
    let c = cross(state.h_t, state.hv_t);
    let radicand = (sum * sum - 4.0 * c * c).max(0.0);
    (0.5 * (sum - radicand.sqrt())).max(0.0)
}

/// `G = E1 [ (H·Hv)(v×H)_1 + (|Hv|^2 - E1^2)(v×Hv)_1 ]`; on the transitional
/// band `G > 0` signals violent instability.
pub fn transitional_discriminant(state: &EquilibriumState) -> f64 {
    let e1 = state.e1;
    let v = state.v_t;
    let h = state.h_t;
    let hv = state.hv_t;
    e1 * (dot(h, hv) * cross(v, h) + (norm_sq(hv) - e1 * e1) * cross(v, hv))
}

/// Product `E1 ŵ⊥ (v'·ω)` whose sign decides the transitional √ε branch.
pub fn addinst_product(state: &EquilibriumState, dir: &WaveDirection) -> f64 {
    let b = frequency_bundle(state, dir);
    state.e1 * b.w_perp * b.v_dot
}

pub fn default_tol_eq(state: &EquilibriumState) -> f64 {
    1e-9 * (1.0 + norm_sq(state.h_t) + norm_sq(state.hv_t))
}

pub fn classify(state: &EquilibriumState, tol_eq: f64) -> Classification {
    let critical = critical_e1_squared(state);
    let min = minimize_f(state);
    let margin = state.e1 * state.e1 - critical;

    let mut transitional_g = None;
    let mut addinst_max = None;
    let verdict = if margin > tol_eq {
        Verdict::ViolentlyUnstable
    } else if margin < -tol_eq {
        Verdict::NeutrallyStable
    } else {
        let g = transitional_discriminant(state);
        transitional_g = Some(g);
        let unstable = if min.degeneracy == Some(Degeneracy::ConstantF) {
            let worst = std::iter::once(min.omega_star)
                .chain(WaveDirection::equispaced(DEGENERATE_SAMPLES))
                .map(|d| addinst_product(state, &d))
                .fold(f64::NEG_INFINITY, f64::max);
            addinst_max = Some(worst);
            worst > 0.0
        } else {
            g > 0.0
        };
        if unstable {
            Verdict::TransitionalUnstable
        } else {
            Verdict::TransitionalNeutral
        }
    };

    Classification {
        verdict,
        critical_e1_sq: critical,
        margin,
        minimizer: min.omega_star,
        f_min: min.f_min,
        transitional_g,
        addinst_max,
        degenerate: min.degeneracy.is_some(),
        tol_eq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(h: [f64; 2], hv: [f64; 2], e1: f64, v: [f64; 2]) -> EquilibriumState {
        EquilibriumState::new(v, h, hv, e1, 0.01)
    }

    fn eigen_min(s: &EquilibriumState) -> f64 {
        // smaller eigenvalue of H'H'^T + Hv'Hv'^T
        let m00 = s.h_t[0].powi(2) + s.hv_t[0].powi(2);
        let m11 = s.h_t[1].powi(2) + s.hv_t[1].powi(2);
        let m01 = s.h_t[0] * s.h_t[1] + s.hv_t[0] * s.hv_t[1];
        let tr = m00 + m11;
        let det = m00 * m11 - m01 * m01;
        0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt())
    }

    #[test]
    fn f_of_omega_examples() {
        let s = st([1.0, 0.0], [0.0, 2.0], 0.0, [0.0; 2]);
        assert_eq!(f_of_omega(&s, &WaveDirection::new(1.0, 0.0).unwrap()), 1.0);
        assert_eq!(f_of_omega(&s, &WaveDirection::new(0.0, 1.0).unwrap()), 4.0);
        let s = st([2.0, 0.0], [1.0, 1.0], 0.0, [0.0; 2]);
        let f = f_of_omega(&s, &WaveDirection::new(1.0, 1.0).unwrap());
        assert!((f - 4.0).abs() < 1e-14);
    }

    #[test]
    fn minimize_collinear() {
        let m = minimize_f(&st([1.0, 0.0], [2.0, 0.0], 0.3, [0.0; 2]));
        assert!(m.f_min.abs() < 1e-15);
        assert!(m.omega_star.omega()[0].abs() < 1e-15);
        assert!((m.omega_star.omega()[1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimize_orthogonal() {
        let m = minimize_f(&st([1.0, 0.0], [0.0, 2.0], 0.0, [0.0; 2]));
        assert!((m.f_min - 1.0).abs() < 1e-14);
        assert!((m.omega_star.omega()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimize_oblique() {
        let s = st([2.0, 0.0], [1.0, 1.0], 0.0, [0.0; 2]);
        let m = minimize_f(&s);
        assert!((m.f_min - (3.0 - 5f64.sqrt())).abs() < 1e-14);
        assert!((f_of_omega(&s, &m.omega_star) - m.f_min).abs() < 1e-14);
        let (c, sn) = m.x_star_trig.unwrap();
        assert!((c * c + sn * sn - 1.0).abs() < 1e-14);
    }

    #[test]
    fn minimize_degenerate_cases() {
        let m = minimize_f(&st([0.0; 2], [0.0; 2], 0.0, [0.0; 2]));
        assert_eq!(m.degeneracy, Some(Degeneracy::BothFieldsZero));
        assert_eq!(m.f_min, 0.0);

        let m = minimize_f(&st([0.0; 2], [1.0, 1.0], 0.0, [0.0; 2]));
        assert_eq!(m.degeneracy, None);
        assert_eq!(m.f_min, 0.0);
        let w = m.omega_star.omega();
        assert!((w[0] + w[1]).abs() < 1e-15);
        assert!(w[0] >= 0.0);

        let m = minimize_f(&st([1.5, 0.0], [0.0, 1.5], 0.0, [0.0; 2]));
        assert_eq!(m.degeneracy, Some(Degeneracy::ConstantF));
        assert_eq!(m.omega_star.omega(), [1.0, 0.0]);
        assert!((m.f_min - 2.25).abs() < 1e-14);
    }

    #[test]
    fn minimizer_branch_is_canonical() {
        let s = st([0.3, -1.2], [1.7, 0.4], 0.0, [0.0; 2]);
        let w = minimize_f(&s).omega_star.omega();
        assert!(w[0] > 0.0 || (w[0] == 0.0 && w[1] >= 0.0));
    }

    #[test]
    fn critical_examples() {
        assert_eq!(critical_e1_squared(&st([1.0, 0.0], [2.0, 0.0], 0.3, [0.0; 2])), 0.0);
        assert_eq!(critical_e1_squared(&st([1.0, 2.0], [-0.5, -1.0], 0.3, [0.0; 2])), 0.0);
        let c = critical_e1_squared(&st([1.0, 0.0], [0.0, 2.0], 0.0, [0.0; 2]));
        assert!((c - 1.0).abs() < 1e-15);
        assert_eq!(critical_e1_squared(&st([0.0; 2], [0.7, -0.3], 0.0, [0.0; 2])), 0.0);
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(transitional_discriminant(&st([1.0, 0.3], [0.2, 2.0], 1.0, [0.0; 2])), 0.0);
        assert_eq!(transitional_discriminant(&st([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0])), 6.0);
        assert_eq!(transitional_discriminant(&st([1.0, 0.4], [0.0, 2.0], 0.0, [1.0, 0.5])), 0.0);
        let s = st([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0]);
        let a = addinst_product(&s, &WaveDirection::new(1.0, 0.0).unwrap());
        assert_eq!(a, 2.0);
    }

    #[test]
    fn classify_examples() {
        let s = st([1.0, 0.0], [2.0, 0.0], 0.3, [0.0; 2]);
        let c = classify(&s, default_tol_eq(&s));
        assert_eq!(c.verdict, Verdict::ViolentlyUnstable);
        assert!((c.margin - 0.09).abs() < 1e-15);

        let s = st([1.0, 0.0], [0.0, 1.0], 0.5, [0.0; 2]);
        let c = classify(&s, default_tol_eq(&s));
        assert_eq!(c.verdict, Verdict::NeutrallyStable);
        assert!((c.f_min - 1.0).abs() < 1e-14);

        let s = st([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0]);
        let c = classify(&s, default_tol_eq(&s));
        assert_eq!(c.verdict, Verdict::TransitionalUnstable);
        assert_eq!(c.transitional_g, Some(6.0));

        let s = st([1.0, 0.0], [0.0, 2.0], 1.0, [-1.0, 0.0]);
        assert_eq!(classify(&s, 1e-9).verdict, Verdict::TransitionalNeutral);
    }

    #[test]
    fn constant_f_band_uses_sampled_directions() {
        // |H'| = |Hv'| = 1, orthogonal, E1^2 = 1: every direction is a minimizer.
        let s = st([1.0, 0.0], [0.0, 1.0], 1.0, [1.0, 0.0]);
        let c = classify(&s, 1e-9);
        assert!(c.degenerate);
        assert_eq!(c.transitional_g, Some(0.0));
        assert!(c.addinst_max.unwrap() > 0.0);
        assert_eq!(c.verdict, Verdict::TransitionalUnstable);

        let s = st([1.0, 0.0], [0.0, 1.0], 1.0, [0.0, 0.0]);
        assert_eq!(classify(&s, 1e-9).verdict, Verdict::TransitionalNeutral);
    }

    #[test]
    fn trig_route_matches_eigen_form() {
        let cases = [
            ([1.0, 0.2], [0.3, -1.4]),
            ([-2.0, 1.0], [1.9, 1.1]),
            ([0.01, 0.0], [0.0, 3.0]),
            ([1.0, 1.0], [1.0, 1.0000001]),
        ];
        for (h, hv) in cases {
            let s = st(h, hv, 0.0, [0.0; 2]);
            let e = eigen_min(&s);
            let m = minimize_f(&s);
            assert!((m.f_min - e).abs() <= 1e-12 * (1.0 + e), "{h:?} {hv:?}");
            assert!((critical_e1_squared(&s) - e).abs() <= 1e-12 * (1.0 + e));
            assert!((f_of_omega(&s, &m.omega_star) - e).abs() <= 1e-12 * (1.0 + e));
        }
    }
}
