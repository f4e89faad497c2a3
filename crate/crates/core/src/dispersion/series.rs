//! Small-`eps` expansions of the determinant's roots.
//!
//! Coefficients are generated by truncated power-series arithmetic: with the
//! first `j` coefficients known, the residual of the determinant at order
//! `j` is linear in the next coefficient, whose multiplier is the
//! derivative of the `eps = 0` equation at the leading term.

use serde::Serialize;

use super::{DispersionError, LopatinskiContext, C64};

/// Default number of corrections beyond the leading term.
pub const DEFAULT_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesBranch {
    /// `D > 0`, `s0 = +sqrt(D) - i v·ω`.
    GenericUnstable,
    /// `D > 0`, `s0 = -sqrt(D) - i v·ω`.
    GenericDecaying,
    /// `D < 0`, `s0 = i(+η - v·ω)`.
    GenericNeutralPlus,
    /// `D < 0`, `s0 = i(-η - v·ω)`.
    GenericNeutralMinus,
    /// `D = 0`, `v·ω ≠ 0`, `s1 = +sqrt(2 E1 ŵ⊥ v·ω)` on the `sqrt(eps)` ladder.
    TransitionalSqrtEpsPlus,
    TransitionalSqrtEpsMinus,
    /// `D = 0`, `v·ω = 0`: the root `s = 0`.
    TransitionalZeroRoot,
    /// `D = 0`, `v·ω = 0`: the root `s = i eps (2 E1 ŵ⊥ + ...)`.
    TransitionalZeroSpeed,
}

/// `s(eps) = Σ_j coefficients[j] · eps^exponents[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRoot {
    pub branch: SeriesBranch,
    pub coefficients: Vec<C64>,
    pub exponents: Vec<f64>,
}

impl SeriesRoot {
    pub fn eval(&self, eps: f64) -> C64 {
        self.partial_sum(eps, self.coefficients.len().saturating_sub(1))
    }

    /// Sum of the terms `0..=order`.
    pub fn partial_sum(&self, eps: f64, order: usize) -> C64 {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .take(order + 1)
            .map(|(c, k)| c * eps.powf(*k))
            .sum()
    }

    pub fn is_growing(&self, eps: f64) -> bool {
        self.eval(eps).re > 0.0
    }
}

/// Truncated power series in one variable.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<C64>);

impl Poly {
    fn zeros(n: usize) -> Self {
        Poly(vec![C64::new(0.0, 0.0); n])
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn constant(c: C64, n: usize) -> Self {
        let mut p = Self::zeros(n);
        p.0[0] = c;
        p
    }

    fn add(&self, o: &Poly) -> Poly {
        Poly(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn scale(&self, c: C64) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    /// Multiplies by `x^k`.
    fn shift(&self, k: usize) -> Poly {
        let mut p = Self::zeros(self.len());
        for i in k..self.len() {
            p.0[i] = self.0[i - k];
        }
        p
    }

    fn mul(&self, o: &Poly) -> Poly {
        let n = self.len();
        let mut p = Self::zeros(n);
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().take(n - i).enumerate() {
                p.0[i + j] += a * b;
            }
        }
        p
    }

    /// Principal square root; requires a nonzero constant term.
    fn sqrt(&self) -> Poly {
        let n = self.len();
        let mut r = Self::zeros(n);
        r.0[0] = self.0[0].sqrt();
        for k in 1..n {
            let cross: C64 = (1..k).map(|i| r.0[i] * r.0[k - i]).sum();
            r.0[k] = (self.0[k] - cross) / (2.0 * r.0[0]);
        }
        r
    }

    fn recip(&self) -> Poly {
        let n = self.len();
        let mut r = Self::zeros(n);
        r.0[0] = 1.0 / self.0[0];
        for k in 1..n {
            let acc: C64 = (1..=k).map(|i| self.0[i] * r.0[k - i]).sum();
            r.0[k] = -acc * r.0[0];
        }
        r
    }
}

/// Determinant as a power series in `x`, where `s = S(x)` and `eps = x^p`.
fn determinant_series(ctx: &LopatinskiContext, s: &Poly, p: usize) -> Poly {
    let n = s.len();
    let b = &ctx.bundle;
    let e1 = ctx.state.e1;
    let hv_sq = ctx.state.hv_t[0].powi(2) + ctx.state.hv_t[1].powi(2);
    let one = Poly::constant(C64::new(1.0, 0.0), n);

    let ell = s.add(&Poly::constant(C64::new(0.0, b.v_dot), n));
    let s_sq = s.mul(s);
    let radicand = one.add(&s_sq.shift(2 * p));
    let symbol = ell.mul(&ell).add(&Poly::constant(C64::new(b.w_plus * b.w_plus, 0.0), n));

    symbol
        .mul(&radicand.sqrt())
        .add(&Poly::constant(C64::new(b.w_minus * b.w_minus - e1 * e1, 0.0), n))
        .add(&s.shift(p).scale(C64::new(0.0, -2.0 * e1 * b.w_perp)))
        .add(&s_sq.shift(2 * p).scale(C64::new(hv_sq, 0.0)))
}

/// Solves for coefficients `from..=last` given the known head, assuming the
/// order-`j + lag` residual depends on `s_j` through `pivot · s_j`.
fn extend<F>(head: Vec<C64>, last: usize, lag: usize, pivot: C64, residual: F) -> Vec<C64>
where
    F: Fn(&Poly) -> Poly,
{
    let mut coeffs = head;
    for j in coeffs.len()..=last {
        let mut trial = Poly::zeros(j + lag + 1);
        trial.0[..coeffs.len()].copy_from_slice(&coeffs);
        let r = residual(&trial).0[j + lag];
        coeffs.push(-r / pivot);
    }
    coeffs
}

/// Regular expansion `s = s0 + s1 eps + s2 eps^2 + ...` at a direction with
/// `D = E1^2 - (ŵ+)^2 - (ŵ-)^2` bounded away from zero. Returns the `+` and
/// `-` branches in that order.
pub fn series_root_generic(ctx: &LopatinskiContext, order: usize) -> Result<[SeriesRoot; 2], DispersionError> {
    let d = ctx.discriminant();
    if d.abs() <= ctx.transitional_tol() {
        return Err(DispersionError::TransitionalAtThisDirection { d: d.abs() });
    }
    let v_dot = ctx.bundle.v_dot;
    let branches = if d > 0.0 {
        [
            (SeriesBranch::GenericUnstable, C64::new(d.sqrt(), 0.0)),
            (SeriesBranch::GenericDecaying, C64::new(-d.sqrt(), 0.0)),
        ]
    } else {
        let eta = (-d).sqrt();
        [
            (SeriesBranch::GenericNeutralPlus, C64::new(0.0, eta)),
            (SeriesBranch::GenericNeutralMinus, C64::new(0.0, -eta)),
        ]
    };
    Ok(branches.map(|(branch, ell0)| {
        let s0 = ell0 - C64::new(0.0, v_dot);
        let coefficients = extend(vec![s0], order, 0, 2.0 * ell0, |s| determinant_series(ctx, s, 1));
        SeriesRoot {
            branch,
            exponents: (0..=order).map(|j| j as f64).collect(),
            coefficients,
        }
    }))
}

/// Expansions at a minimizing direction on the transitional band, where the
/// `eps = 0` equation has a double root at `-i (v'·ω)`.
///
/// With `v'·ω ≠ 0` the roots follow the `sqrt(eps)` ladder with
/// `s1^2 = 2 E1 ŵ⊥ (v'·ω)`; otherwise one root is `0` and the other is
/// `i eps (2 E1 ŵ⊥) + O(eps^3)`.
pub fn series_root_transitional(ctx: &LopatinskiContext, order: usize) -> Result<Vec<SeriesRoot>, DispersionError> {
    let d = ctx.discriminant();
    if d.abs() > ctx.transitional_tol() {
        return Err(DispersionError::NotTransitional { d });
    }
    let b = ctx.bundle;
    let e1 = ctx.state.e1;
    let scale = 1.0 + ctx.state.v_t[0].hypot(ctx.state.v_t[1]);

    if b.v_dot.abs() > 1e-12 * scale {
        let product = 2.0 * e1 * b.w_perp * b.v_dot;
        if product == 0.0 {
            return Err(DispersionError::DegenerateSeries);
        }
        let s0 = C64::new(0.0, -b.v_dot);
        let s1 = C64::new(product, 0.0).sqrt();
        let roots = [
            (SeriesBranch::TransitionalSqrtEpsPlus, s1),
            (SeriesBranch::TransitionalSqrtEpsMinus, -s1),
        ]
        .map(|(branch, s1)| {
            let coefficients = extend(vec![s0, s1], order.max(1), 1, 2.0 * s1, |s| {
                let mut g = determinant_series(ctx, s, 2);
                // drop the O(1) remainder of D, which is zero on the band
                g.0[0] = C64::new(0.0, 0.0);
                g
            });
            SeriesRoot {
                branch,
                exponents: (0..coefficients.len()).map(|j| 0.5 * j as f64).collect(),
                coefficients,
            }
        });
        return Ok(roots.to_vec());
    }

    // v'·ω = 0: L = s · Q(s, eps) with Q(0, 0) = 0 and dQ/ds(0, 0) = 1.
    let hv_sq = ctx.state.hv_t[0].powi(2) + ctx.state.hv_t[1].powi(2);
    let w_plus_sq = b.w_plus * b.w_plus;
    let reduced = |s: &Poly| {
        let n = s.len();
        let one = Poly::constant(C64::new(1.0, 0.0), n);
        let s_sq = s.mul(s);
        let root = one.add(&s_sq.shift(2)).sqrt();
        let denom = one.add(&root).recip();
        let symbol = s_sq.add(&Poly::constant(C64::new(w_plus_sq, 0.0), n));
        s.add(&symbol.mul(&s.shift(2)).mul(&denom))
            .add(&Poly::constant(C64::new(0.0, -2.0 * e1 * b.w_perp), n).shift(1))
            .add(&s.shift(2).scale(C64::new(hv_sq, 0.0)))
    };
    let coefficients = extend(vec![C64::new(0.0, 0.0)], order.max(1), 0, C64::new(1.0, 0.0), reduced);
    Ok(vec![
        SeriesRoot {
            branch: SeriesBranch::TransitionalZeroRoot,
            coefficients: vec![C64::new(0.0, 0.0)],
            exponents: vec![0.0],
        },
        SeriesRoot {
            branch: SeriesBranch::TransitionalZeroSpeed,
            exponents: (0..coefficients.len()).map(|j| j as f64).collect(),
            coefficients,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{EquilibriumState, WaveDirection};

    fn ctx(h: [f64; 2], hv: [f64; 2], e1: f64, v: [f64; 2], w: [f64; 2]) -> LopatinskiContext {
        let s = EquilibriumState::new(v, h, hv, e1, 0.01);
        LopatinskiContext::new(&s, WaveDirection::new(w[0], w[1]).unwrap())
    }

    #[test]
    fn power_series_sqrt_and_recip() {
        let n = 6;
        let mut p = Poly::zeros(n);
        p.0[0] = C64::new(4.0, 0.0);
        p.0[1] = C64::new(1.0, 2.0);
        p.0[3] = C64::new(-0.5, 0.0);
        let r = p.sqrt();
        let back = r.mul(&r);
        for (a, b) in back.0.iter().zip(&p.0) {
            assert!((a - b).norm() < 1e-14);
        }
        let inv = p.recip().mul(&p);
        assert!((inv.0[0] - 1.0).norm() < 1e-15);
        for c in &inv.0[1..] {
            assert!(c.norm() < 1e-14);
        }
    }

    #[test]
    fn unstable_leading_term() {
        let c = ctx([1.0, 0.0], [2.0, 0.0], 0.3, [0.0; 2], [0.0, 1.0]);
        let [up, down] = series_root_generic(&c, 2).unwrap();
        assert_eq!(up.branch, SeriesBranch::GenericUnstable);
        assert_eq!(down.branch, SeriesBranch::GenericDecaying);
        assert!((up.coefficients[0] - 0.3).norm() < 1e-15);
        // s1 = i E1 ŵ⊥ s0 / ℓ0 with ŵ⊥ = -2
        assert!((up.coefficients[1] - C64::new(0.0, -0.6)).norm() < 1e-14);
    }

    #[test]
    fn neutral_first_correction() {
        let c = ctx([1.0, 0.0], [0.0, 1.0], 0.5, [0.0; 2], [1.0, 0.0]);
        let [p, m] = series_root_generic(&c, 2).unwrap();
        let eta = 0.75f64.sqrt();
        assert!((p.coefficients[0] - C64::new(0.0, eta)).norm() < 1e-15);
        assert!((m.coefficients[0] - C64::new(0.0, -eta)).norm() < 1e-15);
        assert!((p.coefficients[1] - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((m.coefficients[1] - C64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn neutral_second_correction_matches_closed_form() {
        // ±2iη s2 - τ1² + 2 E1 ŵ⊥ τ1 - |Hv'|² τ0² - ((ŵ+)² - η²) τ0²/2 = 0
        let c = ctx([0.7, -0.4], [0.3, 1.2], 0.45, [0.6, 0.2], [0.8, -0.6]);
        let b = c.bundle;
        let e1 = c.state.e1;
        let hv_sq = 0.3f64.powi(2) + 1.2f64.powi(2);
        let eta = (-c.discriminant()).sqrt();
        for (sign, root) in [1.0, -1.0].into_iter().zip(series_root_generic(&c, 3).unwrap()) {
            let tau0 = sign * eta - b.v_dot;
            let tau1 = sign * e1 * b.w_perp * tau0 / eta;
            let f2 = -tau1 * tau1 + 2.0 * e1 * b.w_perp * tau1
                - hv_sq * tau0 * tau0
                - (b.w_plus * b.w_plus - eta * eta) * tau0 * tau0 / 2.0;
            let s2 = C64::new(0.0, f2 / (2.0 * sign * eta));
            assert!((root.coefficients[0] - C64::new(0.0, tau0)).norm() < 1e-14);
            assert!((root.coefficients[1] - C64::new(0.0, tau1)).norm() < 1e-14);
            assert!((root.coefficients[2] - s2).norm() < 1e-13, "{:?} {s2}", root.coefficients);
            for coef in &root.coefficients {
                assert!(coef.re.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_e1_kills_first_correction() {
        let c = ctx([1.0, 0.2], [0.4, 1.0], 0.0, [0.3, 0.1], [0.6, 0.8]);
        for r in series_root_generic(&c, 2).unwrap() {
            assert_eq!(r.coefficients[1], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn generic_rejects_transitional_direction() {
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0], [1.0, 0.0]);
        assert!(matches!(
            series_root_generic(&c, 2),
            Err(DispersionError::TransitionalAtThisDirection { .. })
        ));
    }

    #[test]
    fn transitional_sqrt_branch() {
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0], [1.0, 0.0]);
        let roots = series_root_transitional(&c, 2).unwrap();
        assert_eq!(roots[0].branch, SeriesBranch::TransitionalSqrtEpsPlus);
        assert_eq!(roots[0].exponents, vec![0.0, 0.5, 1.0]);
        assert!((roots[0].coefficients[0] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((roots[0].coefficients[1] - 2.0).norm() < 1e-15);
        assert!(roots[0].is_growing(1e-4));
        assert!(!roots[1].is_growing(1e-4));
    }

    #[test]
    fn transitional_sign_flip_is_neutral() {
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [-1.0, 0.0], [1.0, 0.0]);
        let roots = series_root_transitional(&c, 2).unwrap();
        assert!((roots[0].coefficients[1] - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((roots[1].coefficients[1] - C64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn transitional_zero_speed_roots() {
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [0.0, 0.0], [1.0, 0.0]);
        let roots = series_root_transitional(&c, 3).unwrap();
        assert_eq!(roots[0].branch, SeriesBranch::TransitionalZeroRoot);
        assert_eq!(roots[0].eval(0.3), C64::new(0.0, 0.0));
        let z = &roots[1];
        assert_eq!(z.coefficients[0], C64::new(0.0, 0.0));
        assert!((z.coefficients[1] - C64::new(0.0, 4.0)).norm() < 1e-15);
        assert!(z.coefficients[2].norm() < 1e-15);
        assert!(z.coefficients[3].re.abs() < 1e-14);
        // the truncated series is a root up to O(eps^4)
        let eps = 1e-2;
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [0.0, 0.0], [1.0, 0.0]);
        assert!(c.eval(z.eval(eps)).norm() < 1e-7);
    }

    #[test]
    fn transitional_rejects_generic_direction() {
        let c = ctx([1.0, 0.0], [0.0, 2.0], 1.0, [1.0, 0.0], [0.0, 1.0]);
        assert!(matches!(
            series_root_transitional(&c, 2),
            Err(DispersionError::NotTransitional { .. })
        ));
    }

    #[test]
    fn generic_series_converges_to_root() {
        let c = ctx([1.0, 0.0], [2.0, 0.0], 0.3, [0.0; 2], [0.0, 1.0]);
        let [up, _] = series_root_generic(&c, 4).unwrap();
        let r: Vec<f64> = (0..=4).map(|k| c.eval(up.partial_sum(0.01, k)).norm()).collect();
        // each order gains roughly a factor eps
        assert!(r.windows(2).all(|w| w[1] < w[0] / 20.0), "{r:?}");
        assert!(r[4] < 1e-9);
    }
}
