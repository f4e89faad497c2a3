use rayon::prelude::*;
use serde::Serialize;

use super::{count_unstable_roots_adaptive, find_unstable_roots, LocatedRoot, LopatinskiContext, Region};
use crate::criterion::minimize_f;
use crate::state::{EquilibriumState, WaveDirection};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionEntry {
    pub index: usize,
    pub direction: WaveDirection,
    pub count: Option<usize>,
    pub region: Option<Region>,
    pub contour_points: usize,
    pub min_abs_l: f64,
    pub roots: Vec<LocatedRoot>,
    pub error: Option<String>,
}

impl DirectionEntry {
    pub fn max_re(&self) -> Option<f64> {
        self.roots.iter().map(|r| r.s.re).reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionScan {
    pub entries: Vec<DirectionEntry>,
    pub numerically_unstable: bool,
    pub max_re_s: Option<f64>,
    pub worst_direction: Option<WaveDirection>,
    pub failures: usize,
}

/// Counts right-half-plane roots over `n_dirs` equispaced directions plus
/// both minimizers of `F`, locating roots wherever the count is positive.
/// Per-direction failures are recorded, not propagated.
pub fn scan_directions(state: &EquilibriumState, n_dirs: usize, region: Option<Region>) -> DirectionScan {
    let n_dirs = n_dirs.max(8);
    let region = region.unwrap_or_else(|| Region::for_state(state));
    let star = minimize_f(state).omega_star;
    let directions: Vec<WaveDirection> = WaveDirection::equispaced(n_dirs)
        .into_iter()
        .chain([star, star.reversed()])
        .collect();

    let entries: Vec<DirectionEntry> = directions
        .par_iter()
        .enumerate()
        .map(|(index, dir)| scan_one(state, index, *dir, region))
        .collect();

    let mut worst: Option<(f64, WaveDirection)> = None;
    for e in &entries {
        if let Some(re) = e.max_re() {
            if worst.is_none_or(|(w, _)| re > w) {
                worst = Some((re, e.direction));
            }
        }
    }
    DirectionScan {
        numerically_unstable: entries.iter().any(|e| e.count.is_some_and(|c| c > 0)),
        failures: entries.iter().filter(|e| e.error.is_some()).count(),
        max_re_s: worst.map(|w| w.0),
        worst_direction: worst.map(|w| w.1),
        entries,
    }
}

fn scan_one(state: &EquilibriumState, index: usize, direction: WaveDirection, region: Region) -> DirectionEntry {
    let ctx = LopatinskiContext::new(state, direction);
    let mut entry = DirectionEntry {
        index,
        direction,
        count: None,
        region: None,
        contour_points: 0,
        min_abs_l: f64::NAN,
        roots: Vec::new(),
        error: None,
    };
    let counted = match count_unstable_roots_adaptive(&ctx, region) {
        Ok(c) => c,
        Err(e) => {
            entry.error = Some(e.to_string());
            return entry;
        }
    };
    entry.count = Some(counted.count);
    entry.region = Some(counted.region);
    entry.contour_points = counted.contour_points;
    entry.min_abs_l = counted.min_abs_l;
    if counted.count > 0 {
        match find_unstable_roots(&ctx, counted.region) {
            Ok(report) => entry.roots = report.roots,
            Err(e) => entry.error = Some(e.to_string()),
        }
    }
    entry
}
