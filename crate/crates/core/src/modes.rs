//! Hadamard-type exponential mode sequences.
//!
//! For a root `s` of the determinant, the mode with index `n` is
//! `A · exp(n (s t + λ x1 + i ω'·x'))` in each half-space. Amplitudes are
//! built from the interface displacement `φ̄ = n^(-p)`: the kinematic and
//! both electric boundary conditions plus every interior equation hold by
//! construction, leaving the pressure balance as the one condition that is
//! satisfied exactly when `L(s) = 0`.

use serde::Serialize;
use thiserror::Error;

use crate::dispersion::{vacuum_decay_root, LopatinskiContext, C64};
use crate::state::{EquilibriumState, WaveDirection};

pub const DEFAULT_DECAY_P: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("symbol {what} = {value:e} is too small to divide by")]
    DegenerateSymbol { what: &'static str, value: f64 },
    #[error("Re s = {0} is not positive")]
    NotGrowing(f64),
    #[error("mode index must be positive")]
    ZeroIndex,
}

type C3 = [C64; 3];

fn cross3(a: C3, b: C3) -> C3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: C3, b: C3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub n: u64,
    pub s: C64,
    pub omega: WaveDirection,
    pub lambda_plus: f64,
    pub lambda_minus: C64,
    pub phi_bar: C64,
    /// `(v1, v2, v3, H1, H2, H3, q)`
    pub plasma_amp: [C64; 7],
    /// `(Hv1, Hv2, Hv3, E1, E2, E3)`
    pub vacuum_amp: [C64; 6],
    /// `|L(s)|` above `1e-8 · scale`: the pressure balance will not close.
    pub not_a_root: bool,
}

impl ModeSolution {
    pub fn velocity(&self) -> C3 {
        [self.plasma_amp[0], self.plasma_amp[1], self.plasma_amp[2]]
    }

    pub fn plasma_field(&self) -> C3 {
        [self.plasma_amp[3], self.plasma_amp[4], self.plasma_amp[5]]
    }

    pub fn pressure(&self) -> C64 {
        self.plasma_amp[6]
    }

    pub fn vacuum_magnetic(&self) -> C3 {
        [self.vacuum_amp[0], self.vacuum_amp[1], self.vacuum_amp[2]]
    }

    pub fn vacuum_electric(&self) -> C3 {
        [self.vacuum_amp[3], self.vacuum_amp[4], self.vacuum_amp[5]]
    }

    /// Sup norm of all amplitudes at `t = 0`.
    pub fn amplitude_norm(&self) -> f64 {
        max_abs(&self.plasma_amp)
            .max(max_abs(&self.vacuum_amp))
            .max(self.phi_bar.norm())
    }
}

pub fn build_mode(
    state: &EquilibriumState,
    s: C64,
    dir: WaveDirection,
    n: u64,
    decay_p: f64,
) -> Result<ModeSolution, ModeError> {
    let phi = C64::new((n.max(1) as f64).powf(-decay_p), 0.0);
    build_mode_with_phi(state, s, dir, n, phi)
}

/// Same as [`build_mode`] with an explicit interface amplitude.
pub fn build_mode_with_phi(
    state: &EquilibriumState,
    s: C64,
    dir: WaveDirection,
    n: u64,
    phi: C64,
) -> Result<ModeSolution, ModeError> {
    if n == 0 {
        return Err(ModeError::ZeroIndex);
    }
    if s.re <= 0.0 {
        return Err(ModeError::NotGrowing(s.re));
    }
    let ctx = LopatinskiContext::new(state, dir);
    let scale = ctx.scale();
    let st = &ctx.state;
    let b = ctx.bundle;
    let eps = st.eps;
    let [w2, w3] = dir.omega();
    let i = C64::new(0.0, 1.0);
    let nf = n as f64;

    let ell = ctx.ell(s);
    let symbol = ell * ell + b.w_plus * b.w_plus;
    if ell.norm() < 1e-12 * scale {
        return Err(ModeError::DegenerateSymbol { what: "ℓ", value: ell.norm() });
    }
    if symbol.norm() < 1e-12 * scale {
        return Err(ModeError::DegenerateSymbol {
            what: "ℓ² + (ŵ+)²",
            value: symbol.norm(),
        });
    }

    let lambda_plus = -1.0;
    let lambda_minus = vacuum_decay_root(s, eps);

    // plasma: kinematic condition, then the elliptic pressure and momentum
    let v1 = nf * ell * phi;
    let inertia = ell + b.w_plus * b.w_plus / ell;
    let q = inertia * v1;
    let k_plus: C3 = [C64::new(lambda_plus, 0.0), i * w2, i * w3];
    let v = k_plus.map(|k| -k * q / inertia);
    let h = v.map(|vj| i * b.w_plus * vj / ell);

    // vacuum: tangential electric field from the boundary, normal one from
    // div E = 0, magnetic field from Faraday's law
    let e2 = nf * (eps * s * st.hv_t[1] - i * w2 * st.e1) * phi;
    let e3 = -nf * (eps * s * st.hv_t[0] + i * w3 * st.e1) * phi;
    let e1 = -(i * w2 * e2 + i * w3 * e3) / lambda_minus;
    let e = [e1, e2, e3];
    let k_minus: C3 = [lambda_minus, i * w2, i * w3];
    let hv = cross3(k_minus, e).map(|c| -c / (eps * s));

    Ok(ModeSolution {
        n,
        s,
        omega: dir,
        lambda_plus,
        lambda_minus,
        phi_bar: phi,
        plasma_amp: [v[0], v[1], v[2], h[0], h[1], h[2], q],
        vacuum_amp: [hv[0], hv[1], hv[2], e[0], e[1], e[2]],
        not_a_root: ctx.eval(s).norm() > 1e-8 * scale,
    })
}

/// Boundary-condition residuals, one per scalar condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryResiduals {
    pub kinematic: f64,
    pub pressure: f64,
    pub electric_2: f64,
    pub electric_3: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        self.kinematic
            .max(self.pressure)
            .max(self.electric_2)
            .max(self.electric_3)
    }
}

/// Residuals of the linearized system under the exponential ansatz, each
/// divided by `scale = max(1, largest amplitude)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Divergence, momentum and induction equations in the plasma.
    pub interior_plasma: f64,
    /// Both Maxwell blocks in vacuum.
    pub interior_vacuum: f64,
    pub boundary: BoundaryResiduals,
    /// Divergence of `H`, `Hv`, `E` and the two normal-field constraints.
    pub constraints: f64,
    pub scale: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.interior_plasma
            .max(self.interior_vacuum)
            .max(self.boundary.max())
            .max(self.constraints)
    }
}

/// Substitutes the mode into every equation with `∂t -> n s`,
/// `∂1 -> n λ±`, `∂2,3 -> i n ω2,3`.
pub fn residuals(mode: &ModeSolution, state: &EquilibriumState) -> ResidualReport {
    let st = state.rest_frame();
    let i = C64::new(0.0, 1.0);
    let nf = mode.n as f64;
    let [w2, w3] = mode.omega.omega();
    let eps = st.eps;
    let s = mode.s;

    let dt = nf * s;
    let grad_p: C3 = [C64::new(nf * mode.lambda_plus, 0.0), nf * i * w2, nf * i * w3];
    let grad_m: C3 = [nf * mode.lambda_minus, nf * i * w2, nf * i * w3];
    let convect = dt + nf * i * (st.v_t[0] * w2 + st.v_t[1] * w3);
    let along_h = nf * i * (st.h_t[0] * w2 + st.h_t[1] * w3);

    let v = mode.velocity();
    let h = mode.plasma_field();
    let q = mode.pressure();
    let hv = mode.vacuum_magnetic();
    let e = mode.vacuum_electric();
    let phi = mode.phi_bar;

    let mut plasma = vec![dot3(grad_p, v)];
    for j in 0..3 {
        plasma.push(convect * v[j] - along_h * h[j] + grad_p[j] * q);
        plasma.push(convect * h[j] - along_h * v[j]);
    }

    let curl_e = cross3(grad_m, e);
    let curl_h = cross3(grad_m, hv);
    let mut vacuum = Vec::with_capacity(6);
    for j in 0..3 {
        vacuum.push(eps * dt * hv[j] + curl_e[j]);
        vacuum.push(eps * dt * e[j] - curl_h[j]);
    }

    let dphi_t = dt * phi;
    let dphi_2 = nf * i * w2 * phi;
    let dphi_3 = nf * i * w3 * phi;
    let boundary_raw = [
        convect * phi - v[0],
        q - (st.hv_t[0] * hv[1] + st.hv_t[1] * hv[2] - st.e1 * e[0]),
        e[1] - (eps * st.hv_t[1] * dphi_t - st.e1 * dphi_2),
        e[2] - (-eps * st.hv_t[0] * dphi_t - st.e1 * dphi_3),
    ];

    let constraints = [
        dot3(grad_p, h),
        dot3(grad_m, hv),
        dot3(grad_m, e),
        h[0] - (st.h_t[0] * dphi_2 + st.h_t[1] * dphi_3),
        hv[0] - (st.hv_t[0] * dphi_2 + st.hv_t[1] * dphi_3),
    ];

    let scale = mode.amplitude_norm().max(1.0);
    ResidualReport {
        interior_plasma: max_abs(&plasma) / scale,
        interior_vacuum: max_abs(&vacuum) / scale,
        boundary: BoundaryResiduals {
            kinematic: boundary_raw[0].norm() / scale,
            pressure: boundary_raw[1].norm() / scale,
            electric_2: boundary_raw[2].norm() / scale,
            electric_3: boundary_raw[3].norm() / scale,
        },
        constraints: max_abs(&constraints) / scale,
        scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub t: f64,
    /// `exp(n Re s t)`.
    pub ratio: f64,
    pub log_ratio: f64,
    /// Sup norm of the amplitudes at `t = 0`; `None` if the mode could not be built.
    pub initial_norm: Option<f64>,
}

/// Growth of the sup norm for each `(n, t)`; rows ordered `n`-major.
pub fn growth_table(
    state: &EquilibriumState,
    s: C64,
    dir: WaveDirection,
    n_list: &[u64],
    t_list: &[f64],
    decay_p: f64,
) -> Vec<GrowthRow> {
    let mut rows = Vec::with_capacity(n_list.len() * t_list.len());
    for &n in n_list {
        let initial_norm = build_mode(state, s, dir, n, decay_p)
            .ok()
            .map(|m| m.amplitude_norm());
        for &t in t_list {
            let log_ratio = n as f64 * s.re * t;
            rows.push(GrowthRow {
                n,
                t,
                ratio: log_ratio.exp(),
                log_ratio,
                initial_norm,
            });
        }
    }
    rows
}
