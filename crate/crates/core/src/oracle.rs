//! Brute-force cross-checks that share no code path with the analytic
//! routines they verify: grid search for `F_min`, the eigenvalue form of
//! the same minimum, dense `|L|` scans, and series-versus-numerics fits.

use serde::Serialize;

use crate::dispersion::{
    find_unstable_roots, series_root_generic, series_root_transitional, winding_on_circle, DispersionError,
    LopatinskiContext, Region, SeriesRoot, C64,
};
use crate::state::{dot, EquilibriumState, WaveDirection};

/// Minimum grid size for [`grid_fmin`].
pub const MIN_GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub grid_points: usize,
    pub s_rect: Rect,
    pub s_resolution: f64,
    pub tolerance: f64,
}

impl OracleConfig {
    /// Grid of `4096` directions; `s` grid spacing `1e-3 R` over the right half
    /// of the default region.
    pub fn for_state(state: &EquilibriumState) -> Self {
        let region = Region::for_state(state);
        let h = 1e-3 * region.radius;
        Self {
            grid_points: 4096,
            s_rect: Rect::new(region.delta, region.radius, -region.radius, region.radius),
            s_resolution: h,
            tolerance: 10.0 * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.re_max > self.re_min && self.im_max > self.im_min)
    }
}

/// Smallest `F` over `n` equispaced unit directions.
///
/// # Panics
/// If `n < MIN_GRID_POINTS`.
pub fn grid_fmin(state: &EquilibriumState, n: usize) -> (f64, WaveDirection) {
    assert!(n >= MIN_GRID_POINTS, "grid_fmin needs at least {MIN_GRID_POINTS} directions");
    let mut best = (f64::INFINITY, WaveDirection::from_angle(0.0));
    for k in 0..n {
        let d = WaveDirection::from_angle(std::f64::consts::TAU * k as f64 / n as f64);
        let w = d.omega();
        let f = dot(state.h_t, w).powi(2) + dot(state.hv_t, w).powi(2);
        if f < best.0 {
            best = (f, d);
        }
    }
    best
}

/// A priori error bound of [`grid_fmin`]: `(F_max - F_min) sin^2(π / n)`.
pub fn grid_fmin_bound(state: &EquilibriumState, n: usize) -> f64 {
    let (lo, hi) = eigenvalues(state);
    (hi - lo) * (std::f64::consts::PI / n as f64).sin().powi(2)
}

fn eigenvalues(state: &EquilibriumState) -> (f64, f64) {
    let (h, hv) = (state.h_t, state.hv_t);
    let m00 = h[0] * h[0] + hv[0] * hv[0];
    let m11 = h[1] * h[1] + hv[1] * hv[1];
    let m01 = h[0] * h[1] + hv[0] * hv[1];
    let tr = m00 + m11;
    let det = m00 * m11 - m01 * m01;
    let root = (tr * tr - 4.0 * det).max(0.0).sqrt();
    (0.5 * (tr - root), 0.5 * (tr + root))
}

/// `F_min` as the smaller eigenvalue of `M = H'H'^T + Hv'Hv'^T`.
pub fn eigen_fmin(state: &EquilibriumState) -> f64 {
    eigenvalues(state).0.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseScan {
    pub candidates: Vec<C64>,
    pub min_abs: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Interior local minima of `|L|` on a grid, kept when below `tolerance`.
/// By the minimum modulus principle these can only sit near zeros.
pub fn dense_root_scan(ctx: &LopatinskiContext, rect: Rect, resolution: f64, tolerance: f64) -> DenseScan {
    if rect.is_empty() || resolution <= 0.0 {
        return DenseScan {
            candidates: Vec::new(),
            min_abs: f64::INFINITY,
            nx: 0,
            ny: 0,
        };
    }
    let nx = ((rect.re_max - rect.re_min) / resolution).round() as usize + 1;
    let ny = ((rect.im_max - rect.im_min) / resolution).round() as usize + 1;
    let point = |i: usize, j: usize| C64::new(rect.re_min + i as f64 * resolution, rect.im_min + j as f64 * resolution);
    let values: Vec<f64> = (0..nx)
        .flat_map(|i| (0..ny).map(move |j| (i, j)))
        .map(|(i, j)| ctx.eval(point(i, j)).norm())
        .collect();
    let at = |i: usize, j: usize| values[i * ny + j];

    let mut candidates = Vec::new();
    for i in 1..nx.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            let v = at(i, j);
            if v >= tolerance {
                continue;
            }
            let is_min = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (i, j))
                .all(|(a, b)| v <= at(a, b));
            if is_min {
                candidates.push(point(i, j));
            }
        }
    }
    DenseScan {
        candidates,
        min_abs: values.iter().copied().fold(f64::INFINITY, f64::min),
        nx,
        ny,
    }
}

/// Winding number of `L` on a circle of radius `10 h` around a candidate.
pub fn confirm_candidate(ctx: &LopatinskiContext, candidate: C64, resolution: f64) -> Result<usize, DispersionError> {
    winding_on_circle(ctx, candidate, 10.0 * resolution)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub eps: f64,
    pub series: C64,
    pub numeric: Option<C64>,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub transitional: bool,
    pub points: Vec<ConvergencePoint>,
    /// Log-log slope of `|s_num - partial sum|` against `eps`.
    pub error_slope: Option<f64>,
    /// Log-log slope of `Re s_num` against `eps`.
    pub re_slope: Option<f64>,
    /// `C` in the fit `Re s_num ≈ C eps^re_slope`.
    pub re_prefactor: Option<f64>,
    pub insufficient_points: bool,
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn growing_branch(ctx: &LopatinskiContext, order: usize) -> Result<(SeriesRoot, bool), DispersionError> {
    let d = ctx.discriminant();
    if d.abs() <= ctx.transitional_tol() {
        let roots = series_root_transitional(ctx, order)?;
        let probe = ctx.eps();
        let best = roots
            .into_iter()
            .max_by(|a, b| a.eval(probe).re.total_cmp(&b.eval(probe).re))
            .ok_or(DispersionError::DegenerateSeries)?;
        Ok((best, true))
    } else {
        let [first, _] = series_root_generic(ctx, order)?;
        Ok((first, false))
    }
}

/// Compares the numerically located root with the expansion's partial sum
/// of the given order at each `eps`, and fits convergence slopes.
pub fn series_vs_numeric(
    state: &EquilibriumState,
    dir: WaveDirection,
    eps_list: &[f64],
    order: usize,
) -> Result<ConvergenceRecord, DispersionError> {
    let mut points = Vec::with_capacity(eps_list.len());
    let mut transitional = false;
    for &eps in eps_list {
        let ctx = LopatinskiContext::new(&state.with_eps(eps), dir);
        let (series, trans) = growing_branch(&ctx, order.max(1))?;
        transitional = trans;
        let predicted = series.partial_sum(eps, order);
        let full = series.eval(eps);

        let base = Region::for_state(state);
        let delta = if full.re > 0.0 {
            base.delta.min(0.1 * full.re)
        } else {
            base.delta
        };
        let mut point = ConvergencePoint {
            eps,
            series: predicted,
            numeric: None,
            error: None,
            failure: None,
        };
        match find_unstable_roots(&ctx, Region::new(delta, base.radius)) {
            Ok(report) => {
                point.numeric = report
                    .roots
                    .iter()
                    .map(|r| r.s)
                    .min_by(|a, b| (a - full).norm().total_cmp(&(b - full).norm()));
                point.error = point.numeric.map(|s| (s - predicted).norm());
            }
            Err(e) => point.failure = Some(e.to_string()),
        }
        points.push(point);
    }

    let err_pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.error.filter(|e| *e > 0.0).map(|e| (p.eps.ln(), e.ln())))
        .collect();
    let re_pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.numeric.filter(|s| s.re > 0.0).map(|s| (p.eps.ln(), s.re.ln())))
        .collect();
    let re_fit = fit_line(&re_pts);
    Ok(ConvergenceRecord {
        transitional,
        error_slope: fit_line(&err_pts).map(|f| f.0),
        re_slope: re_fit.map(|f| f.0),
        re_prefactor: re_fit.map(|f| f.1.exp()),
        insufficient_points: err_pts.len() < 2 && re_pts.len() < 2,
        points,
    })
}
