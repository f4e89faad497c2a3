//! Equilibrium parameters of a planar plasma-vacuum interface.
//!
//! All quantities are dimensionless. Tangential vectors are stored as
//! `[f64; 2]` in the `(x2, x3)` components; the normal components of the
//! magnetic fields vanish for the constant solution and are reconstructed on
//! demand.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Threshold on `eps` above which the small-parameter analysis is not trusted.
pub const ASYMPTOTIC_EPS_CEILING: f64 = 0.2;

/// Default `eps` used when a scenario leaves it unspecified.
pub const DEFAULT_EPS: f64 = 1e-2;

/// Tangential 2-vector in the `(x2, x3)` plane.
pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Normal component of `a × b` for vectors lying in the interface plane.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm_sq(a: Vec2) -> f64 {
    dot(a, a)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("eps must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("eps*|sigma| = {0} must be below 1 (singular frame)")]
    SingularFrame(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("wave direction must be nonzero and finite")]
    ZeroDirection,
    #[error("unknown state key `{0}`")]
    UnknownKey(String),
    #[error("missing state key `{0}`")]
    MissingKey(&'static str),
    #[error("cannot parse value `{value}` for key `{key}`")]
    BadValue { key: String, value: String },
}

/// Constant solution of the linearized problem: tangential plasma velocity
/// and fields, normal vacuum electric field, `eps = v/c` and interface speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    pub v_t: Vec2,
    pub h_t: Vec2,
    pub hv_t: Vec2,
    pub e1: f64,
    pub eps: f64,
    pub sigma: f64,
}

impl Default for EquilibriumState {
    fn default() -> Self {
        Self {
            v_t: [0.0; 2],
            h_t: [0.0; 2],
            hv_t: [0.0; 2],
            e1: 0.0,
            eps: DEFAULT_EPS,
            sigma: 0.0,
        }
    }
}

/// Keys of the flat state record, in serialization order.
pub const STATE_KEYS: [&str; 9] = ["v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps", "sigma"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateWarning {
    /// `E1^2 > |Hv|^2`.
    PhysicalRestrictionViolated,
    /// `E1^2 == |Hv|^2`; only admissible with `H = 0`.
    PhysicalRestrictionBoundary,
    /// `eps` at or above [`ASYMPTOTIC_EPS_CEILING`].
    OutsideAsymptoticRegime,
}

impl std::fmt::Display for StateWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PhysicalRestrictionViolated => "physical restriction violated",
            Self::PhysicalRestrictionBoundary => "physical restriction holds with equality",
            Self::OutsideAsymptoticRegime => "outside asymptotic regime",
        })
    }
}

/// A state that passed [`EquilibriumState::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedState {
    pub state: EquilibriumState,
    /// `|Hv|^2 >= E1^2`.
    pub physical_restriction: bool,
    pub warnings: Vec<StateWarning>,
}

impl EquilibriumState {
    pub fn new(v_t: Vec2, h_t: Vec2, hv_t: Vec2, e1: f64, eps: f64) -> Self {
        Self {
            v_t,
            h_t,
            hv_t,
            e1,
            eps,
            sigma: 0.0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(self) -> Result<ValidatedState, StateError> {
        for (key, value) in STATE_KEYS.iter().zip(self.values()) {
            if !value.is_finite() {
                return Err(StateError::NonFinite(key));
            }
        }
        if self.eps <= 0.0 {
            return Err(StateError::NonPositiveEps(self.eps));
        }
        let frame = self.eps * self.sigma.abs();
        if frame >= 1.0 {
            return Err(StateError::SingularFrame(frame));
        }

        let e1_sq = self.e1 * self.e1;
        let hv_sq = norm_sq(self.hv_t);
        let mut warnings = Vec::new();
        if e1_sq > hv_sq {
            warnings.push(StateWarning::PhysicalRestrictionViolated);
        } else if e1_sq == hv_sq {
            warnings.push(StateWarning::PhysicalRestrictionBoundary);
        }
        if self.eps >= ASYMPTOTIC_EPS_CEILING {
            warnings.push(StateWarning::OutsideAsymptoticRegime);
        }
        Ok(ValidatedState {
            state: self,
            physical_restriction: hv_sq >= e1_sq,
            warnings,
        })
    }

    /// Full plasma velocity `(sigma, v2, v3)`.
    pub fn velocity(&self) -> [f64; 3] {
        [self.sigma, self.v_t[0], self.v_t[1]]
    }

    pub fn plasma_field(&self) -> [f64; 3] {
        [0.0, self.h_t[0], self.h_t[1]]
    }

    pub fn vacuum_magnetic(&self) -> [f64; 3] {
        [0.0, self.hv_t[0], self.hv_t[1]]
    }

    /// Vacuum electric field `(E1, eps*sigma*Hv3, -eps*sigma*Hv2)`.
    pub fn vacuum_electric(&self) -> [f64; 3] {
        let k = self.eps * self.sigma;
        [self.e1, k * self.hv_t[1], -k * self.hv_t[0]]
    }

    /// Same parameters in the comoving frame (`sigma = 0`).
    pub fn rest_frame(&self) -> Self {
        Self {
            sigma: 0.0,
            ..*self
        }
    }

    fn values(&self) -> [f64; 9] {
        [
            self.v_t[0],
            self.v_t[1],
            self.h_t[0],
            self.h_t[1],
            self.hv_t[0],
            self.hv_t[1],
            self.e1,
            self.eps,
            self.sigma,
        ]
    }

    /// Flat `key -> decimal string` record. Values use the shortest
    /// representation that parses back to the identical `f64`.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        STATE_KEYS
            .iter()
            .zip(self.values())
            .map(|(k, v)| (*k, format!("{v:?}")))
            .collect()
    }

    /// Inverse of [`to_key_values`](Self::to_key_values). `eps` and `sigma`
    /// default to [`DEFAULT_EPS`] and 0, every other key is required.
    pub fn from_key_values<'a, I>(pairs: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut slots: [Option<f64>; 9] = [None; 9];
        for (key, raw) in pairs {
            let idx = STATE_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| StateError::UnknownKey(key.to_string()))?;
            let value = raw.trim().parse::<f64>().map_err(|_| StateError::BadValue {
                key: key.to_string(),
                value: raw.to_string(),
            })?;
            slots[idx] = Some(value);
        }
        slots[7].get_or_insert(DEFAULT_EPS);
        slots[8].get_or_insert(0.0);
        let mut vals = [0.0; 9];
        for (i, slot) in slots.iter().enumerate() {
            vals[i] = slot.ok_or(StateError::MissingKey(STATE_KEYS[i]))?;
        }
        Ok(Self {
            v_t: [vals[0], vals[1]],
            h_t: [vals[2], vals[3]],
            hv_t: [vals[4], vals[5]],
            e1: vals[6],
            eps: vals[7],
            sigma: vals[8],
        })
    }
}

/// Unit tangential wave vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveDirection {
    omega: Vec2,
}

impl WaveDirection {
    /// Normalizes `(w2, w3)` onto the unit circle.
    pub fn new(w2: f64, w3: f64) -> Result<Self, StateError> {
        let norm = w2.hypot(w3);
        if !norm.is_finite() || norm == 0.0 {
            return Err(StateError::ZeroDirection);
        }
        Ok(Self {
            omega: [w2 / norm, w3 / norm],
        })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self {
            omega: [theta.cos(), theta.sin()],
        }
    }

    pub fn omega(&self) -> Vec2 {
        self.omega
    }

    pub fn angle(&self) -> f64 {
        self.omega[1].atan2(self.omega[0])
    }

    pub fn reversed(&self) -> Self {
        Self {
            omega: [-self.omega[0], -self.omega[1]],
        }
    }

    /// `n` equispaced directions starting at `(1, 0)`.
    pub fn equispaced(n: usize) -> Vec<Self> {
        (0..n)
            .map(|k| Self::from_angle(std::f64::consts::TAU * k as f64 / n as f64))
            .collect()
    }
}

/// Projections of the equilibrium onto one wave direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyBundle {
    /// `H'·ω`
    pub w_plus: f64,
    /// `Hv'·ω`
    pub w_minus: f64,
    /// `Hv3 ω2 - Hv2 ω3`
    pub w_perp: f64,
    /// `v'·ω`
    pub v_dot: f64,
}

pub fn frequency_bundle(state: &EquilibriumState, dir: &WaveDirection) -> FrequencyBundle {
    let w = dir.omega();
    FrequencyBundle {
        w_plus: dot(state.h_t, w),
        w_minus: dot(state.hv_t, w),
        w_perp: state.hv_t[1] * w[0] - state.hv_t[0] * w[1],
        v_dot: dot(state.v_t, w),
    }
}

pub type Matrix6 = [[f64; 6]; 6];

/// Matrix `B0` with `V = B0 V̆` for the moving-frame change of vacuum
/// unknowns. Rows and columns are ordered `(Hv1, Hv2, Hv3, E1, E2, E3)`.
pub fn b0_matrix(eps: f64, sigma: f64) -> Result<Matrix6, StateError> {
    let k = eps * sigma;
    if k.abs() >= 1.0 || !k.is_finite() {
        return Err(StateError::SingularFrame(k.abs()));
    }
    let pre = 1.0 / (1.0 - k * k);
    let mut b = [[0.0; 6]; 6];
    b[0][0] = 1.0;
    b[3][3] = 1.0;
    for i in [1, 2, 4, 5] {
        b[i][i] = pre;
    }
    b[1][5] = -k * pre;
    b[5][1] = -k * pre;
    b[2][4] = k * pre;
    b[4][2] = k * pre;
    Ok(b)
}

/// Moving-frame change of vacuum unknowns `(Hv, E) -> (Hv̆, Ĕ)`.
pub fn galilean_transform(v: [f64; 6], eps: f64, sigma: f64) -> [f64; 6] {
    let k = eps * sigma;
    let [h1, h2, h3, e1, e2, e3] = v;
    [h1, h2 + k * e3, h3 - k * e2, e1, e2 - k * h3, e3 + k * h2]
}

pub fn mat6_vec(m: &Matrix6, v: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> EquilibriumState {
        EquilibriumState::new([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], 0.3, 0.01)
    }

    #[test]
    fn validate_accepts_physical_state() {
        let v = base().validate().unwrap();
        assert!(v.physical_restriction);
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn validate_warns_on_restriction_violation() {
        let s = EquilibriumState::new([0.0, 0.0], [0.5, 0.0], [1.0, 0.0], 2.0, 0.01);
        let v = s.validate().unwrap();
        assert!(!v.physical_restriction);
        assert_eq!(v.warnings, vec![StateWarning::PhysicalRestrictionViolated]);
        assert_eq!(
            v.warnings[0].to_string(),
            "physical restriction violated"
        );
    }

    #[test]
    fn validate_warns_on_restriction_equality_and_large_eps() {
        let s = EquilibriumState::new([0.0, 0.0], [0.0, 0.0], [1.0, 0.0], 1.0, 0.3);
        let v = s.validate().unwrap();
        assert!(v.physical_restriction);
        assert_eq!(
            v.warnings,
            vec![
                StateWarning::PhysicalRestrictionBoundary,
                StateWarning::OutsideAsymptoticRegime
            ]
        );
    }

    #[test]
    fn validate_rejects_bad_eps_and_frames() {
        assert_eq!(
            base().with_eps(0.0).validate().unwrap_err(),
            StateError::NonPositiveEps(0.0)
        );
        assert!(matches!(
            base().with_eps(0.5).with_sigma(2.0).validate(),
            Err(StateError::SingularFrame(_))
        ));
        let mut s = base();
        s.h_t[1] = f64::NAN;
        assert_eq!(s.validate().unwrap_err(), StateError::NonFinite("H3"));
    }

    #[test]
    fn reconstruction_preserves_tangential_norms() {
        let s = EquilibriumState::new([0.4, -1.0], [1.5, -0.2], [0.3, 2.0], 0.7, 0.05)
            .with_sigma(3.0);
        let h = s.plasma_field();
        let hv = s.vacuum_magnetic();
        assert_eq!(h[0], 0.0);
        assert_eq!(hv[0], 0.0);
        assert_eq!(h[1] * h[1] + h[2] * h[2], norm_sq(s.h_t));
        assert_eq!(hv[1] * hv[1] + hv[2] * hv[2], norm_sq(s.hv_t));
        assert_eq!(s.velocity(), [3.0, 0.4, -1.0]);
        let e = s.vacuum_electric();
        assert!((e[1] - 0.15 * 2.0).abs() < 1e-15);
        assert!((e[2] + 0.15 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn key_value_round_trip() {
        let s = EquilibriumState::new([0.1, 1.0 / 3.0], [1.0, 0.0], [2.0, 1e-17], 0.3, 0.01)
            .with_sigma(-0.25);
        let kv = s.to_key_values();
        let back =
            EquilibriumState::from_key_values(kv.iter().map(|(k, v)| (*k, v.as_str()))).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn key_value_defaults_and_errors() {
        let pairs = [
            ("v2", "0"),
            ("v3", "0"),
            ("H2", "1"),
            ("H3", "0"),
            ("Hv2", "2"),
            ("Hv3", "0"),
            ("E1", "0.3"),
        ];
        let s = EquilibriumState::from_key_values(pairs).unwrap();
        assert_eq!(s.eps, DEFAULT_EPS);
        assert_eq!(s.sigma, 0.0);
        assert_eq!(
            EquilibriumState::from_key_values([("H2", "1")]).unwrap_err(),
            StateError::MissingKey("v2")
        );
        assert!(matches!(
            EquilibriumState::from_key_values([("B", "1")]),
            Err(StateError::UnknownKey(_))
        ));
        assert!(matches!(
            EquilibriumState::from_key_values([("E1", "abc")]),
            Err(StateError::BadValue { .. })
        ));
    }

    #[test]
    fn wave_direction_normalizes() {
        let d = WaveDirection::new(3.0, 4.0).unwrap();
        assert!((d.omega()[0] - 0.6).abs() < 1e-15);
        assert!((d.omega()[1] - 0.8).abs() < 1e-15);
        assert_eq!(WaveDirection::new(0.0, 0.0), Err(StateError::ZeroDirection));
        assert_eq!(WaveDirection::equispaced(8).len(), 8);
    }

    #[test]
    fn frequency_bundle_examples() {
        let s = EquilibriumState::new([0.0, 0.0], [1.0, 0.0], [0.0, 2.0], 0.0, 0.01);
        let b = frequency_bundle(&s, &WaveDirection::new(1.0, 0.0).unwrap());
        assert_eq!((b.w_plus, b.w_minus, b.w_perp), (1.0, 0.0, 2.0));
        assert_eq!(b.w_minus * b.w_minus + b.w_perp * b.w_perp, 4.0);

        let s = EquilibriumState::new([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], 0.0, 0.01);
        let b = frequency_bundle(&s, &WaveDirection::new(0.0, 1.0).unwrap());
        assert_eq!((b.w_plus, b.w_minus, b.w_perp), (0.0, 0.0, -2.0));
    }

    #[test]
    fn b0_examples() {
        let b = b0_matrix(0.7, 0.0).unwrap();
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, if i == j { 1.0 } else { 0.0 });
            }
        }
        let b = b0_matrix(0.1, 1.0).unwrap();
        assert!((b[1][5] + 0.1 / 0.99).abs() < 1e-16);
        assert!((b[5][1] + 0.1 / 0.99).abs() < 1e-16);
        assert!((b[2][4] - 0.1 / 0.99).abs() < 1e-16);
        assert!(matches!(b0_matrix(0.5, 2.0), Err(StateError::SingularFrame(_))));
    }

    #[test]
    fn galilean_transform_examples() {
        let v = [0.3, -1.0, 2.0, 0.5, 0.25, -4.0];
        assert_eq!(galilean_transform(v, 0.01, 0.0), v);
        let t = galilean_transform([0.0, 0.0, 1.0, 0.0, 1.0, 0.0], 0.1, 1.0);
        let want = [0.0, 0.0, 0.9, 0.0, 0.9, 0.0];
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{t:?}");
        }
    }
}
