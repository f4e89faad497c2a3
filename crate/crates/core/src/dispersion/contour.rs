use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use super::{DispersionError, LopatinskiContext, Region, C64, MAX_CONTOUR_POINTS};

/// Off-center split keeps bisection lines away from symmetric root
/// positions such as the real axis.
const SPLIT_FRACTION: f64 = 0.487_123_4;
const BOUNDARY_JITTER: [(f64, f64); 4] = [(1.0, 1.0), (1.1, 0.9), (0.9, 1.1), (1.1, 1.1)];
const NEWTON_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment { a: C64, b: C64 },
    Arc { center: C64, radius: f64, from: f64, to: f64 },
}

impl Piece {
    fn at(&self, t: f64) -> C64 {
        match *self {
            Piece::Segment { a, b } => a + (b - a) * t,
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => center + C64::from_polar(radius, from + (to - from) * t),
        }
    }

    /// `|ds/dt|`, constant along each piece.
    fn speed(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => (b - a).norm(),
            Piece::Arc { radius, from, to, .. } => radius * (to - from).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Winding {
    turns: f64,
    points: usize,
    min_abs: f64,
}

/// Accumulates the argument increment of `f` along `pieces`. A step is
/// bisected while its phase change reaches `π/2` or while `|f|` at its ends
/// is not bounded away from zero by the linear estimate `h max|f'|`; the
/// second test stops sparse samples from stepping over a near zero.
fn wind<F: Fn(C64) -> (C64, C64)>(f: &F, pieces: &[Piece], initial: usize) -> Result<Winding, DispersionError> {
    let mut total = 0.0;
    let mut points = 0usize;
    let mut min_abs = f64::INFINITY;
    let zero = C64::new(0.0, 0.0);

    for piece in pieces {
        let speed = piece.speed();
        let mut prev_t = 0.0;
        let mut prev_v = f(piece.at(0.0));
        points += 1;
        min_abs = min_abs.min(prev_v.0.norm());
        for k in 1..=initial {
            let t = k as f64 / initial as f64;
            let v = f(piece.at(t));
            points += 1;
            // Each stack frame is an unresolved subinterval (t0, f0) -> (t1, f1).
            let mut stack = vec![(prev_t, prev_v, t, v)];
            while let Some((t0, (f0, d0), t1, (f1, d1))) = stack.pop() {
                min_abs = min_abs.min(f1.norm());
                if f0 == zero || f1 == zero {
                    return Ok(Winding {
                        turns: f64::NAN,
                        points,
                        min_abs: 0.0,
                    });
                }
                let d = (f1 / f0).arg();
                let reach = (t1 - t0) * speed * d0.norm().max(d1.norm());
                if d.abs() < FRAC_PI_2 && reach < f0.norm().min(f1.norm()) {
                    total += d;
                    continue;
                }
                if points >= MAX_CONTOUR_POINTS || t1 - t0 < 1e-15 {
                    return Err(DispersionError::NonConvergent { points });
                }
                let tm = 0.5 * (t0 + t1);
                let fm = f(piece.at(tm));
                points += 1;
                // Right half is pushed first so the left half is summed first.
                stack.push((tm, fm, t1, (f1, d1)));
                stack.push((t0, (f0, d0), tm, fm));
            }
            prev_t = t;
            prev_v = v;
        }
    }
    Ok(Winding {
        turns: total / TAU,
        points,
        min_abs,
    })
}

fn rounded(w: &Winding) -> Result<usize, DispersionError> {
    let r = w.turns.round();
    if !w.turns.is_finite() || (w.turns - r).abs() > 0.25 || r < 0.0 {
        return Err(DispersionError::AmbiguousWinding { value: w.turns });
    }
    Ok(r as usize)
}

fn half_disk(region: &Region) -> [Piece; 2] {
    let center = C64::new(region.delta, 0.0);
    let r = region.radius;
    [
        Piece::Arc {
            center,
            radius: r,
            from: -FRAC_PI_2,
            to: FRAC_PI_2,
        },
        Piece::Segment {
            a: center + C64::new(0.0, r),
            b: center - C64::new(0.0, r),
        },
    ]
}

/// Counter-clockwise boundary of `[x0, x1] × [y0, y1]`.
fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> [Piece; 4] {
    let c = |x, y| C64::new(x, y);
    [
        Piece::Segment { a: c(x0, y0), b: c(x1, y0) },
        Piece::Segment { a: c(x1, y0), b: c(x1, y1) },
        Piece::Segment { a: c(x1, y1), b: c(x0, y1) },
        Piece::Segment { a: c(x0, y1), b: c(x0, y0) },
    ]
}

/// Outcome of an argument-principle count over a half-disk region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountReport {
    pub count: usize,
    /// Region actually used, after any boundary jitter or doubling.
    pub region: Region,
    pub contour_points: usize,
    pub min_abs_l: f64,
}

/// Number of zeros of `L` in `{Re s >= delta, |s - delta| <= R}`.
///
/// The boundary is the right semicircle plus the vertical chord. If `|L|`
/// comes within `1e-8 * scale` of zero on the contour, `delta` and `R` are
/// jittered by ±10% up to three times.
pub fn count_unstable_roots(ctx: &LopatinskiContext, region: Region) -> Result<CountReport, DispersionError> {
    let floor = 1e-8 * ctx.scale();
    let f = |s: C64| ctx.eval_with_derivative(s);
    let mut closest = f64::INFINITY;
    for (fd, fr) in BOUNDARY_JITTER {
        let r = Region::new(region.delta * fd, region.radius * fr);
        let w = wind(&f, &half_disk(&r), 256)?;
        if w.min_abs < floor {
            closest = closest.min(w.min_abs);
            continue;
        }
        return Ok(CountReport {
            count: rounded(&w)?,
            region: r,
            contour_points: w.points,
            min_abs_l: w.min_abs,
        });
    }
    Err(DispersionError::ContourTooClose { min_abs: closest })
}

/// [`count_unstable_roots`] with the radius doubled (up to three times)
/// until the count is stable under doubling.
pub fn count_unstable_roots_adaptive(
    ctx: &LopatinskiContext,
    region: Region,
) -> Result<CountReport, DispersionError> {
    let mut current = count_unstable_roots(ctx, region)?;
    for _ in 0..3 {
        let bigger = Region::new(region.delta, current.region.radius * 2.0);
        let next = count_unstable_roots(ctx, bigger)?;
        if next.count == current.count {
            return Ok(current);
        }
        current = next;
    }
    Ok(current)
}

/// Winding number of `L` around a circle; used to certify isolated roots.
pub fn winding_on_circle(ctx: &LopatinskiContext, center: C64, radius: f64) -> Result<usize, DispersionError> {
    let f = |s: C64| ctx.eval_with_derivative(s);
    let w = wind(
        &f,
        &[Piece::Arc {
            center,
            radius,
            from: -PI,
            to: PI,
        }],
        64,
    )?;
    if w.min_abs == 0.0 {
        return Err(DispersionError::ContourTooClose { min_abs: 0.0 });
    }
    rounded(&w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocatedRoot {
    pub s: C64,
    /// `|L(s)|` after polishing.
    pub residual: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub region: Region,
    pub winding_count: usize,
    pub roots: Vec<LocatedRoot>,
    pub contour_points: usize,
    pub min_abs_l: f64,
    /// A minimal cell still held two or more roots.
    pub multiplicity_unresolved: bool,
}

impl RootReport {
    pub fn max_re(&self) -> Option<f64> {
        self.roots.iter().map(|r| r.s.re).reduce(f64::max)
    }

    pub fn located_count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    count: usize,
}

impl Cell {
    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn split(&self, frac: f64) -> (Cell, Cell) {
        if self.x1 - self.x0 >= self.y1 - self.y0 {
            let xm = self.x0 + frac * (self.x1 - self.x0);
            (Cell { x1: xm, ..*self }, Cell { x0: xm, ..*self })
        } else {
            let ym = self.y0 + frac * (self.y1 - self.y0);
            (Cell { y1: ym, ..*self }, Cell { y0: ym, ..*self })
        }
    }
}

fn cell_count(ctx: &LopatinskiContext, cell: &Cell) -> Result<Option<usize>, DispersionError> {
    let f = |s: C64| ctx.eval_with_derivative(s);
    let w = wind(&f, &rectangle(cell.x0, cell.x1, cell.y0, cell.y1), 16)?;
    if w.min_abs <= 1e-14 * ctx.scale() {
        return Ok(None);
    }
    rounded(&w).map(Some)
}

fn newton(ctx: &LopatinskiContext, start: C64) -> C64 {
    let target = 1e-13 * ctx.scale();
    let mut s = start;
    for _ in 0..NEWTON_MAX_ITER {
        let (l, dl) = ctx.eval_with_derivative(s);
        if l.norm() <= target || dl.norm() == 0.0 {
            break;
        }
        let step = l / dl;
        s -= step;
        if step.norm() <= 1e-16 * s.norm().max(1.0) {
            break;
        }
    }
    s
}

/// Locates the zeros counted by [`count_unstable_roots`]: bisection on the
/// winding number down to cells of diameter `1e-6 R`, then Newton polishing
/// with the analytic derivative.
pub fn find_unstable_roots(ctx: &LopatinskiContext, region: Region) -> Result<RootReport, DispersionError> {
    let counted = count_unstable_roots(ctx, region)?;
    let region = counted.region;
    let mut report = RootReport {
        region,
        winding_count: counted.count,
        roots: Vec::new(),
        contour_points: counted.contour_points,
        min_abs_l: counted.min_abs_l,
        multiplicity_unresolved: false,
    };
    if counted.count == 0 {
        return Ok(report);
    }

    let min_diameter = 1e-6 * region.radius;
    let mut root_cell = Cell {
        x0: region.delta,
        x1: region.delta + region.radius,
        y0: -region.radius,
        y1: region.radius,
        count: 0,
    };
    root_cell.count = match cell_count(ctx, &root_cell)? {
        Some(c) => c,
        None => counted.count,
    };

    let mut candidates: Vec<(C64, usize)> = Vec::new();
    let mut stack = vec![root_cell];
    while let Some(cell) = stack.pop() {
        if cell.count == 0 {
            continue;
        }
        if cell.diameter() <= min_diameter {
            candidates.push((cell.center(), cell.count));
            continue;
        }
        let mut halves = None;
        for shift in [0.0, 0.031, -0.057, 0.083] {
            let (a, b) = cell.split(SPLIT_FRACTION + shift);
            if let (Some(ca), Some(cb)) = (cell_count(ctx, &a)?, cell_count(ctx, &b)?) {
                halves = Some((Cell { count: ca, ..a }, Cell { count: cb, ..b }));
                break;
            }
        }
        match halves {
            Some((a, b)) => {
                stack.push(a);
                stack.push(b);
            }
            None => candidates.push((cell.center(), cell.count)),
        }
    }

    let scale = ctx.scale();
    for (start, multiplicity) in candidates {
        let s = newton(ctx, start);
        if !region.contains(s) {
            continue;
        }
        if multiplicity > 1 {
            report.multiplicity_unresolved = true;
        }
        let residual = ctx.eval(s).norm();
        let duplicate = report
            .roots
            .iter()
            .any(|r| (r.s - s).norm() <= 1e-9 * scale.sqrt());
        if !duplicate {
            report.roots.push(LocatedRoot {
                s,
                residual,
                multiplicity,
            });
        }
    }
    report
        .roots
        .sort_by(|a, b| b.s.re.total_cmp(&a.s.re).then(a.s.im.total_cmp(&b.s.im)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{EquilibriumState, WaveDirection};

    fn collinear(eps: f64) -> LopatinskiContext {
        let s = EquilibriumState::new([0.0; 2], [1.0, 0.0], [2.0, 0.0], 0.3, eps);
        LopatinskiContext::new(&s, WaveDirection::new(0.0, 1.0).unwrap())
    }

    fn neutral() -> LopatinskiContext {
        let s = EquilibriumState::new([0.0; 2], [1.0, 0.0], [0.0, 1.0], 0.5, 0.01);
        LopatinskiContext::new(&s, WaveDirection::new(1.0, 0.0).unwrap())
    }

    #[test]
    fn winding_of_polynomial_matches_root_count() {
        // (z - 1)(z - 2i)(z + 3) inside |z| < 2.5 has two zeros.
        let f = |z: C64| {
            let (a, b, c) = (z - 1.0, z - C64::new(0.0, 2.0), z + 3.0);
            (a * b * c, b * c + a * c + a * b)
        };
        let circle = [Piece::Arc {
            center: C64::new(0.0, 0.0),
            radius: 2.5,
            from: -PI,
            to: PI,
        }];
        let w = wind(&f, &circle, 8).unwrap();
        assert_eq!(rounded(&w).unwrap(), 2);
        let w = wind(&f, &rectangle(0.5, 1.5, -0.5, 0.5), 4).unwrap();
        assert_eq!(rounded(&w).unwrap(), 1);
    }

    #[test]
    fn neutral_state_has_no_roots() {
        let c = count_unstable_roots(&neutral(), Region::new(0.05, 10.0)).unwrap();
        assert_eq!(c.count, 0);
        let r = find_unstable_roots(&neutral(), Region::new(0.05, 10.0)).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.winding_count, 0);
    }

    #[test]
    fn collinear_state_has_a_root_near_e1() {
        let ctx = collinear(0.01);
        let c = count_unstable_roots(&ctx, Region::new(0.05, 10.0)).unwrap();
        assert!(c.count >= 1);
        let r = find_unstable_roots(&ctx, Region::new(0.05, 10.0)).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.located_count(), r.winding_count);
        let root = r.roots[0];
        assert!((root.s.re - 0.3).abs() < 5e-3);
        assert!(root.residual <= 1e-12 * ctx.scale());
    }

    #[test]
    fn region_excluding_root_counts_zero() {
        let ctx = collinear(0.0);
        let c = count_unstable_roots(&ctx, Region::new(1.0, 10.0)).unwrap();
        assert_eq!(c.count, 0);
    }

    #[test]
    fn contour_through_root_is_jittered() {
        // eps = 0: root exactly at s = 0.3 on the chord Re s = 0.3.
        let ctx = collinear(0.0);
        let c = count_unstable_roots(&ctx, Region::new(0.3, 10.0)).unwrap();
        assert_ne!(c.region.delta, 0.3);
    }

    #[test]
    fn adaptive_count_agrees_for_bounded_roots() {
        let ctx = collinear(0.01);
        let c = count_unstable_roots_adaptive(&ctx, Region::new(0.05, 10.0)).unwrap();
        assert_eq!(c.count, 1);
    }

    #[test]
    fn transitional_root_scales_like_sqrt_eps() {
        let s = EquilibriumState::new([1.0, 0.0], [1.0, 0.0], [0.0, 2.0], 1.0, 1e-4);
        let ctx = LopatinskiContext::new(&s, WaveDirection::new(1.0, 0.0).unwrap());
        let r = find_unstable_roots(&ctx, Region::new(1e-3, 60.0)).unwrap();
        let re = r.max_re().unwrap();
        assert!((re - 0.02).abs() < 0.2 * 0.02, "{re}");
    }

    #[test]
    fn circle_winding_certifies_isolated_root() {
        let ctx = collinear(0.01);
        let r = find_unstable_roots(&ctx, Region::new(0.05, 10.0)).unwrap();
        assert_eq!(winding_on_circle(&ctx, r.roots[0].s, 1e-2).unwrap(), 1);
        assert_eq!(winding_on_circle(&ctx, C64::new(2.0, 0.0), 0.5).unwrap(), 0);
    }
}
