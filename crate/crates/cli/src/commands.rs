//! The five subcommands. Each writes its records to `out` in input order
//! and returns an [`Outcome`] carrying the process exit code.

use std::io::Write;

use num_complex::Complex64;
use pvstab_core::criterion::{classify, Classification, Verdict};
use pvstab_core::dispersion::{scan_directions, DirectionScan};
use pvstab_core::modes::{build_mode, growth_table, residuals, GrowthRow, ModeSolution, ResidualReport};
use pvstab_core::oracle::eigen_fmin;
use pvstab_core::state::{StateWarning, ASYMPTOTIC_EPS_CEILING};
use pvstab_core::{EquilibriumState, WaveDirection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{Analysis, Scenario};

pub const CSV_VERSION: &str = "# pvstab-csv v1";
pub const DEFAULT_SEED: u64 = 1;
pub const MODE_INDICES: [u64; 3] = [1, 10, 100];
pub const GROWTH_TIMES: [f64; 3] = [0.01, 0.1, 1.0];

pub const EXIT_OK: u8 = 0;
pub const EXIT_GATE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    /// One-line summary for stderr.
    pub message: String,
}

impl Outcome {
    fn ok(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_OK,
            message: message.into(),
        }
    }
}

/// Fixed-width scientific notation; 17 significant digits round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn require_states(scenario: &Scenario) -> Result<(), CliError> {
    if scenario.states.is_empty() {
        return Err(CliError::Usage("scenario has no [state] block".into()));
    }
    Ok(())
}

fn warnings(state: &EquilibriumState) -> (bool, Vec<String>) {
    match state.validate() {
        Ok(v) => (v.physical_restriction, v.warnings.iter().map(StateWarning::to_string).collect()),
        Err(e) => (false, vec![e.to_string()]),
    }
}

#[derive(Debug, Serialize)]
struct ClassifyRecord<'a> {
    index: usize,
    line: usize,
    state: &'a EquilibriumState,
    verdict: Verdict,
    margin: f64,
    critical_e1_sq: f64,
    f_min: f64,
    omega_star: [f64; 2],
    transitional_g: Option<f64>,
    addinst_max: Option<f64>,
    degenerate: bool,
    tol_eq: f64,
    physical_restriction: bool,
    warnings: Vec<String>,
}

pub fn cmd_classify<W: Write>(scenario: &Scenario, out: &mut W) -> Result<Outcome, CliError> {
    require_states(scenario)?;
    let mut unstable = 0;
    for (index, entry) in scenario.states.iter().enumerate() {
        let c = classify(&entry.state, scenario.analysis.tol_eq_for(&entry.state));
        unstable += usize::from(c.verdict.is_unstable());
        let (physical_restriction, warnings) = warnings(&entry.state);
        write_json(
            out,
            &ClassifyRecord {
                index,
                line: entry.line,
                state: &entry.state,
                verdict: c.verdict,
                margin: c.margin,
                critical_e1_sq: c.critical_e1_sq,
                f_min: c.f_min,
                omega_star: c.minimizer.omega(),
                transitional_g: c.transitional_g,
                addinst_max: c.addinst_max,
                degenerate: c.degenerate,
                tol_eq: c.tol_eq,
                physical_restriction,
                warnings,
            },
        )?;
    }
    Ok(Outcome::ok(format!(
        "classified {} state(s), {unstable} unstable",
        scenario.states.len()
    )))
}

pub const ROOTS_COLUMNS: [&str; 13] = [
    "state",
    "direction",
    "omega2",
    "omega3",
    "winding",
    "re_s",
    "im_s",
    "abs_L",
    "delta",
    "R",
    "contour_points",
    "status",
    "error",
];

fn scan(state: &EquilibriumState, analysis: &Analysis) -> DirectionScan {
    scan_directions(state, analysis.n_dirs, Some(analysis.region_for(state)))
}

pub fn cmd_roots<W: Write>(scenario: &Scenario, out: &mut W) -> Result<Outcome, CliError> {
    require_states(scenario)?;
    let scans: Vec<DirectionScan> = scenario
        .states
        .par_iter()
        .map(|e| scan(&e.state, &scenario.analysis))
        .collect();

    writeln!(out, "{CSV_VERSION}")?;
    let mut csv = csv::Writer::from_writer(&mut *out);
    csv.write_record(ROOTS_COLUMNS)?;
    let mut total_failed = 0usize;
    let mut total = 0usize;
    let mut unstable = 0usize;
    for (si, sc) in scans.iter().enumerate() {
        unstable += usize::from(sc.numerically_unstable);
        total += sc.entries.len();
        total_failed += sc.failures;
        for e in &sc.entries {
            let [w2, w3] = e.direction.omega();
            let region = e.region.map(|r| (fmt_f64(r.delta), fmt_f64(r.radius))).unwrap_or_default();
            let status = match (&e.error, e.count) {
                (Some(msg), _) if msg.contains("too close") => "contour_too_close",
                (Some(_), _) => "failed",
                (None, Some(c)) if c > 0 => "unstable",
                _ => "stable",
            };
            let base = |re: String, im: String, abs: String| {
                vec![
                    si.to_string(),
                    e.index.to_string(),
                    fmt_f64(w2),
                    fmt_f64(w3),
                    e.count.map(|c| c.to_string()).unwrap_or_default(),
                    re,
                    im,
                    abs,
                    region.0.clone(),
                    region.1.clone(),
                    e.contour_points.to_string(),
                    status.to_string(),
                    e.error.clone().unwrap_or_default(),
                ]
            };
            if e.roots.is_empty() {
                csv.write_record(base(String::new(), String::new(), String::new()))?;
            }
            for r in &e.roots {
                csv.write_record(base(fmt_f64(r.s.re), fmt_f64(r.s.im), fmt_f64(r.residual)))?;
            }
        }
    }
    csv.flush()?;
    drop(csv);
    for (si, sc) in scans.iter().enumerate() {
        writeln!(
            out,
            "# state={si} numerically_unstable={} max_re_s={} failures={}",
            sc.numerically_unstable,
            opt_f64(sc.max_re_s),
            sc.failures
        )?;
    }
    if total > 0 && total_failed == total {
        return Ok(Outcome {
            code: EXIT_NUMERICAL,
            message: "root search failed in every direction".into(),
        });
    }
    Ok(Outcome::ok(format!(
        "scanned {} state(s), {unstable} numerically unstable, {total_failed} direction failure(s)",
        scans.len()
    )))
}

#[derive(Debug, Serialize)]
struct ModeRecord {
    state: usize,
    omega: [f64; 2],
    n: u64,
    s: Complex64,
    lambda_plus: f64,
    lambda_minus: Complex64,
    phi_bar: Complex64,
    plasma_amp: [Complex64; 7],
    vacuum_amp: [Complex64; 6],
    residuals: ResidualReport,
    max_residual: f64,
    growth: Vec<GrowthRow>,
}

#[derive(Debug, Serialize)]
struct ModeFailure {
    state: usize,
    n: u64,
    error: String,
}

#[derive(Debug, Serialize)]
struct Note<'a> {
    note: &'a str,
}

fn mode_record(state_index: usize, state: &EquilibriumState, m: &ModeSolution, decay_p: f64) -> ModeRecord {
    let r = residuals(m, state);
    ModeRecord {
        state: state_index,
        omega: m.omega.omega(),
        n: m.n,
        s: m.s,
        lambda_plus: m.lambda_plus,
        lambda_minus: m.lambda_minus,
        phi_bar: m.phi_bar,
        plasma_amp: m.plasma_amp,
        vacuum_amp: m.vacuum_amp,
        max_residual: r.max(),
        residuals: r,
        growth: growth_table(state, m.s, m.omega, &[m.n], &GROWTH_TIMES, decay_p),
    }
}

/// Most unstable root over the direction scan.
fn worst_root(scan: &DirectionScan) -> Option<(Complex64, WaveDirection)> {
    scan.entries
        .iter()
        .flat_map(|e| e.roots.iter().map(move |r| (r.s, e.direction)))
        .max_by(|a, b| a.0.re.total_cmp(&b.0.re))
}

pub fn cmd_modes<W: Write>(scenario: &Scenario, out: &mut W) -> Result<Outcome, CliError> {
    require_states(scenario)?;
    let analysis = &scenario.analysis;
    let found: Vec<Option<(Complex64, WaveDirection)>> = scenario
        .states
        .par_iter()
        .map(|e| worst_root(&scan(&e.state, analysis)))
        .collect();

    if found.iter().all(Option::is_none) {
        write_json(
            out,
            &Note {
                note: "no unstable state/direction found; no modes built",
            },
        )?;
        return Ok(Outcome::ok("no unstable root found, empty mode dump"));
    }
    let (mut built, mut failed) = (0usize, 0usize);
    for (si, (entry, root)) in scenario.states.iter().zip(&found).enumerate() {
        let Some((s, dir)) = *root else { continue };
        for n in MODE_INDICES {
            match build_mode(&entry.state, s, dir, n, analysis.decay_p) {
                Ok(m) => {
                    built += 1;
                    write_json(out, &mode_record(si, &entry.state, &m, analysis.decay_p))?;
                }
                Err(e) => {
                    failed += 1;
                    write_json(
                        out,
                        &ModeFailure {
                            state: si,
                            n,
                            error: e.to_string(),
                        },
                    )?;
                }
            }
        }
    }
    if built == 0 {
        return Ok(Outcome {
            code: EXIT_NUMERICAL,
            message: format!("all {failed} mode construction(s) failed"),
        });
    }
    Ok(Outcome::ok(format!("built {built} mode(s), {failed} failure(s)")))
}

/// `None` for transitional verdicts: at the boundary the growth rate is
/// `O(sqrt(eps))` and may sit inside the excluded strip `Re s < delta`.
pub fn agreement(verdict: Verdict, numeric_unstable: bool) -> Option<bool> {
    match verdict {
        Verdict::ViolentlyUnstable | Verdict::NeutrallyStable => Some(verdict.is_unstable() == numeric_unstable),
        Verdict::TransitionalUnstable | Verdict::TransitionalNeutral => None,
    }
}

pub const SWEEP_STATE_COLUMNS: [&str; 9] = ["v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps", "sigma"];
pub const SWEEP_RESULT_COLUMNS: [&str; 9] = [
    "verdict",
    "margin",
    "f_min",
    "omega2",
    "omega3",
    "numeric_unstable",
    "max_re_s",
    "agreement",
    "error",
];

struct SweepRow {
    classification: Result<Classification, String>,
    numeric: Option<DirectionScan>,
}

pub fn sweep_header(scenario: &Scenario) -> Vec<String> {
    let mut cols = Vec::new();
    for (k, a) in scenario.sweep.iter().enumerate() {
        cols.push(format!("i{k}"));
        cols.push(a.parameter.name().to_string());
    }
    cols.extend(SWEEP_STATE_COLUMNS.iter().map(|s| s.to_string()));
    cols.extend(SWEEP_RESULT_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

pub fn cmd_sweep<W: Write>(scenario: &Scenario, out: &mut W) -> Result<Outcome, CliError> {
    let grid = scenario.grid()?;
    let analysis = &scenario.analysis;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|g| match g.state.validate() {
            Ok(_) => SweepRow {
                classification: Ok(classify(&g.state, analysis.tol_eq_for(&g.state))),
                numeric: analysis.cross_check.then(|| scan(&g.state, analysis)),
            },
            Err(e) => SweepRow {
                classification: Err(e.to_string()),
                numeric: None,
            },
        })
        .collect();

    writeln!(out, "{CSV_VERSION}")?;
    let mut csv = csv::Writer::from_writer(&mut *out);
    csv.write_record(sweep_header(scenario))?;
    let mut errors = 0usize;
    let mut disagreements = 0usize;
    for (g, row) in grid.iter().zip(&rows) {
        let mut rec: Vec<String> = Vec::new();
        for (i, v) in g.index.iter().zip(&g.values) {
            rec.push(i.to_string());
            rec.push(fmt_f64(*v));
        }
        let st = g.state;
        rec.extend(
            [st.v_t[0], st.v_t[1], st.h_t[0], st.h_t[1], st.hv_t[0], st.hv_t[1], st.e1, st.eps, st.sigma].map(fmt_f64),
        );
        match &row.classification {
            Ok(c) => {
                let [w2, w3] = c.minimizer.omega();
                let numeric_unstable = row.numeric.as_ref().map(|n| n.numerically_unstable);
                let agree = numeric_unstable.and_then(|n| agreement(c.verdict, n));
                disagreements += usize::from(agree == Some(false));
                let error = row
                    .numeric
                    .as_ref()
                    .filter(|n| n.failures > 0)
                    .map(|n| format!("{} direction failure(s)", n.failures))
                    .unwrap_or_default();
                rec.extend([
                    c.verdict.as_str().to_string(),
                    fmt_f64(c.margin),
                    fmt_f64(c.f_min),
                    fmt_f64(w2),
                    fmt_f64(w3),
                    opt_bool(numeric_unstable),
                    opt_f64(row.numeric.as_ref().and_then(|n| n.max_re_s)),
                    opt_bool(agree),
                    error,
                ]);
            }
            Err(msg) => {
                errors += 1;
                rec.extend(std::iter::repeat_n(String::new(), SWEEP_RESULT_COLUMNS.len() - 1));
                rec.push(msg.clone());
            }
        }
        csv.write_record(rec)?;
    }
    csv.flush()?;
    if errors == grid.len() {
        return Ok(Outcome {
            code: EXIT_NUMERICAL,
            message: "every sweep point failed".into(),
        });
    }
    Ok(Outcome::ok(format!(
        "swept {} point(s), {errors} error(s), {disagreements} disagreement(s)",
        grid.len()
    )))
}

/// Draws `n` states: components uniform in `[-2, 2]`, `E1` uniform in
/// `[0, 1.5 sqrt(f_min + 1)]`.
pub fn sample_states(n: usize, eps: f64, seed: u64) -> Vec<EquilibriumState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut c = [0.0; 6];
            for x in &mut c {
                *x = rng.random_range(-2.0..=2.0);
            }
            let mut s = EquilibriumState::new([c[0], c[1]], [c[2], c[3]], [c[4], c[5]], 0.0, eps);
            let top = 1.5 * (eigen_fmin(&s) + 1.0).sqrt();
            s.e1 = rng.random_range(0.0..=top);
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Agree,
    Disagree,
    Band,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub state: EquilibriumState,
    pub verdict: Verdict,
    pub margin: f64,
    pub tol_eq: f64,
    pub numeric_unstable: Option<bool>,
    pub max_re_s: Option<f64>,
    pub direction_failures: usize,
    pub status: SampleStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub seed: u64,
    pub eps: f64,
    pub samples: usize,
    pub evaluated: usize,
    pub agree: usize,
    pub disagree: usize,
    pub band: usize,
    pub failed: usize,
    pub agreement_rate: Option<f64>,
    pub gated: bool,
    pub warning: Option<String>,
}

pub fn validate_sample(index: usize, state: EquilibriumState, analysis: &Analysis) -> SampleRecord {
    let tol_eq = analysis.tol_eq_for(&state);
    let c = classify(&state, tol_eq);
    let mut rec = SampleRecord {
        index,
        state,
        verdict: c.verdict,
        margin: c.margin,
        tol_eq,
        numeric_unstable: None,
        max_re_s: None,
        direction_failures: 0,
        status: SampleStatus::Band,
    };
    if c.margin.abs() <= 10.0 * tol_eq {
        return rec;
    }
    let sc = scan(&state, analysis);
    rec.direction_failures = sc.failures;
    rec.max_re_s = sc.max_re_s;
    // a positive count anywhere settles instability even if other directions failed
    if sc.failures > 0 && !sc.numerically_unstable {
        rec.status = SampleStatus::Failed;
        return rec;
    }
    rec.numeric_unstable = Some(sc.numerically_unstable);
    rec.status = if c.verdict.is_unstable() == sc.numerically_unstable {
        SampleStatus::Agree
    } else {
        SampleStatus::Disagree
    };
    rec
}

pub fn run_validation(analysis: &Analysis, seed: u64) -> (Vec<SampleRecord>, ValidationSummary) {
    let eps = analysis.sample_eps;
    let states = sample_states(analysis.samples, eps, seed);
    let records: Vec<SampleRecord> = states
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| validate_sample(i, s, analysis))
        .collect();
    let tally = |st: SampleStatus| records.iter().filter(|r| r.status == st).count();
    let (agree, disagree) = (tally(SampleStatus::Agree), tally(SampleStatus::Disagree));
    let evaluated = agree + disagree;
    let gated = eps < ASYMPTOTIC_EPS_CEILING;
    let summary = ValidationSummary {
        seed,
        eps,
        samples: records.len(),
        evaluated,
        agree,
        disagree,
        band: tally(SampleStatus::Band),
        failed: tally(SampleStatus::Failed),
        agreement_rate: (evaluated > 0).then(|| agree as f64 / evaluated as f64),
        gated,
        warning: (!gated).then(|| StateWarning::OutsideAsymptoticRegime.to_string()),
    };
    (records, summary)
}

pub fn cmd_validate<W: Write>(scenario: &Scenario, seed: u64, out: &mut W) -> Result<Outcome, CliError> {
    let (records, summary) = run_validation(&scenario.analysis, seed);
    for r in &records {
        write_json(out, r)?;
    }
    write_json(out, &summary)?;
    let rate = summary.agreement_rate;
    let message = format!(
        "agreement {}/{} ({} band, {} failed){}",
        summary.agree,
        summary.evaluated,
        summary.band,
        summary.failed,
        summary.warning.as_ref().map(|w| format!("; warning: {w}")).unwrap_or_default()
    );
    let code = match rate {
        None if summary.gated => EXIT_NUMERICAL,
        Some(r) if summary.gated && r < 1.0 => EXIT_GATE,
        _ => EXIT_OK,
    };
    Ok(Outcome { code, message })
}
