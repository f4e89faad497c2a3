//! Scenario files: `[state]`, `[sweep]` and `[analysis]` blocks of
//! `key = value` pairs. Several pairs may share a line
//! (`parameter=E1 min=0 max=2 steps=41`); `#` starts a comment.

use std::fmt;
use std::path::Path;

use pvstab_core::state::{norm_sq, STATE_KEYS};
use pvstab_core::{EquilibriumState, StateError};
use thiserror::Error;

pub const MAX_SWEEP_AXES: usize = 2;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{block}] block at line {line}: {source}")]
    Invalid {
        block: &'static str,
        line: usize,
        #[source]
        source: StateError,
    },
    #[error("at most 2 swept axes")]
    TooManyAxes,
    #[error("{0}")]
    Semantic(String),
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    E1,
    AngleAlpha,
    HMag,
    HvMag,
    V2,
    V3,
    Eps,
    H2,
    H3,
    Hv2,
    Hv3,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 11] = [
        Self::E1,
        Self::AngleAlpha,
        Self::HMag,
        Self::HvMag,
        Self::V2,
        Self::V3,
        Self::Eps,
        Self::H2,
        Self::H3,
        Self::Hv2,
        Self::Hv3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::E1 => "E1",
            Self::AngleAlpha => "angle_alpha",
            Self::HMag => "H_mag",
            Self::HvMag => "Hv_mag",
            Self::V2 => "v2",
            Self::V3 => "v3",
            Self::Eps => "eps",
            Self::H2 => "H2",
            Self::H3 => "H3",
            Self::Hv2 => "Hv2",
            Self::Hv3 => "Hv3",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// State key that the sweep supplies directly, if any.
    fn raw_key(self) -> Option<&'static str> {
        match self {
            Self::AngleAlpha | Self::HMag | Self::HvMag => None,
            other => Some(other.name()),
        }
    }

    /// Order in which derived parameters are applied: raw components first,
    /// then magnitudes, then the angle.
    fn rank(self) -> u8 {
        match self {
            Self::HMag | Self::HvMag => 1,
            Self::AngleAlpha => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    /// `None` selects the per-state default.
    pub tol_eq: Option<f64>,
    pub n_dirs: usize,
    pub delta: Option<f64>,
    pub radius: Option<f64>,
    pub series_order: usize,
    pub decay_p: f64,
    pub cross_check: bool,
    pub samples: usize,
    /// `eps` of the states drawn by `validate`.
    pub sample_eps: f64,
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            tol_eq: None,
            n_dirs: 64,
            delta: None,
            radius: None,
            series_order: 2,
            decay_p: pvstab_core::modes::DEFAULT_DECAY_P,
            cross_check: false,
            samples: 200,
            sample_eps: pvstab_core::state::DEFAULT_EPS,
        }
    }
}

impl Analysis {
    pub fn tol_eq_for(&self, state: &EquilibriumState) -> f64 {
        self.tol_eq.unwrap_or_else(|| pvstab_core::default_tol_eq(state))
    }

    pub fn region_for(&self, state: &EquilibriumState) -> pvstab_core::Region {
        let base = pvstab_core::Region::for_state(state);
        let radius = self.radius.unwrap_or(base.radius);
        let delta = self.delta.unwrap_or(1e-3 * radius);
        pvstab_core::Region::new(delta, radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateEntry {
    /// Line of the `[state]` header.
    pub line: usize,
    pub state: EquilibriumState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub states: Vec<StateEntry>,
    pub sweep: Vec<SweepAxis>,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// One index per swept axis, first axis outermost.
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub state: EquilibriumState,
}

impl Scenario {
    /// Sweep grid over the single base state, first axis outermost.
    pub fn grid(&self) -> Result<Vec<GridPoint>, ScenarioError> {
        if self.sweep.is_empty() {
            return Err(ScenarioError::Semantic("scenario has no [sweep] block".into()));
        }
        let base = match self.states.as_slice() {
            [one] => one.state,
            _ => {
                return Err(ScenarioError::Semantic(
                    "a sweep needs exactly one [state] block".into(),
                ))
            }
        };
        let axes: Vec<Vec<f64>> = self.sweep.iter().map(SweepAxis::values).collect();
        let mut order: Vec<usize> = (0..self.sweep.len()).collect();
        order.sort_by_key(|&k| self.sweep[k].parameter.rank());

        let mut points = Vec::new();
        let mut index = vec![0usize; axes.len()];
        loop {
            let values: Vec<f64> = index.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
            let mut state = base;
            for &k in &order {
                apply(&mut state, self.sweep[k].parameter, values[k]);
            }
            points.push(GridPoint {
                index: index.clone(),
                values,
                state,
            });
            // odometer with the last axis fastest
            let mut k = axes.len();
            loop {
                if k == 0 {
                    return Ok(points);
                }
                k -= 1;
                index[k] += 1;
                if index[k] < axes[k].len() {
                    break;
                }
                index[k] = 0;
            }
        }
    }
}

fn unit_or_x(v: [f64; 2]) -> [f64; 2] {
    let n = norm_sq(v).sqrt();
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// `angle_alpha` rotates `Hv` to the given angle from `H`, keeping `|Hv|`.
fn apply(state: &mut EquilibriumState, p: SweepParameter, x: f64) {
    match p {
        SweepParameter::E1 => state.e1 = x,
        SweepParameter::V2 => state.v_t[0] = x,
        SweepParameter::V3 => state.v_t[1] = x,
        SweepParameter::Eps => state.eps = x,
        SweepParameter::H2 => state.h_t[0] = x,
        SweepParameter::H3 => state.h_t[1] = x,
        SweepParameter::Hv2 => state.hv_t[0] = x,
        SweepParameter::Hv3 => state.hv_t[1] = x,
        SweepParameter::HMag => state.h_t = unit_or_x(state.h_t).map(|c| c * x),
        SweepParameter::HvMag => state.hv_t = unit_or_x(state.hv_t).map(|c| c * x),
        SweepParameter::AngleAlpha => {
            let h = unit_or_x(state.h_t);
            let m = norm_sq(state.hv_t).sqrt();
            let (sin, cos) = x.sin_cos();
            state.hv_t = [m * (cos * h[0] - sin * h[1]), m * (sin * h[0] + cos * h[1])];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    State,
    Sweep,
    Analysis,
}

struct RawBlock {
    kind: Block,
    line: usize,
    pairs: Vec<(usize, String, String)>,
}

impl RawBlock {
    fn get(&self, key: &str) -> Option<&(usize, String, String)> {
        self.pairs.iter().find(|p| p.1 == key)
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

fn split_pairs(body: &str, line: usize) -> Result<Vec<(String, String)>, ScenarioError> {
    let mut pairs = Vec::new();
    let mut pending_key: Option<String> = None;
    let mut expect_value = false;
    // Tokens are split on whitespace with `=` kept as its own token, so
    // `a = 1`, `a=1` and `a= 1` all parse the same way.
    let spaced = body.replace('=', " = ");
    for tok in spaced.split_whitespace() {
        match (tok, pending_key.take(), expect_value) {
            ("=", Some(k), false) => {
                pending_key = Some(k);
                expect_value = true;
            }
            ("=", _, _) => return Err(syntax(line, "unexpected '='")),
            (v, Some(k), true) => {
                pairs.push((k, v.to_string()));
                expect_value = false;
            }
            (k, None, false) => pending_key = Some(k.to_string()),
            (_, Some(k), false) => return Err(syntax(line, format!("expected '=' after '{k}'"))),
            (_, None, true) => unreachable!("a value is only expected after a key"),
        }
    }
    if let Some(k) = pending_key {
        return Err(syntax(line, format!("missing value for '{k}'")));
    }
    Ok(pairs)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let mut blocks: Vec<RawBlock> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "unterminated block header"))?
                .trim();
            let kind = match name {
                "state" => Block::State,
                "sweep" => Block::Sweep,
                "analysis" => Block::Analysis,
                other => return Err(syntax(line, format!("unknown block [{other}]"))),
            };
            blocks.push(RawBlock {
                kind,
                line,
                pairs: Vec::new(),
            });
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| syntax(line, "key outside of any block"))?;
        for (k, v) in split_pairs(body, line)? {
            if block.get(&k).is_some() {
                return Err(syntax(line, format!("duplicate key '{k}'")));
            }
            block.pairs.push((line, k, v));
        }
    }

    let mut sweep = Vec::new();
    let mut analysis = Analysis::default();
    let mut seen_analysis = false;
    for b in blocks.iter().filter(|b| b.kind != Block::State) {
        match b.kind {
            Block::Sweep => sweep.push(parse_axis(b)?),
            Block::Analysis => {
                if seen_analysis {
                    return Err(syntax(b.line, "more than one [analysis] block"));
                }
                seen_analysis = true;
                analysis = parse_analysis(b)?;
            }
            Block::State => unreachable!(),
        }
    }
    if sweep.len() > MAX_SWEEP_AXES {
        return Err(ScenarioError::TooManyAxes);
    }
    for (i, a) in sweep.iter().enumerate() {
        if sweep[..i].iter().any(|b| b.parameter == a.parameter) {
            return Err(ScenarioError::Semantic(format!("parameter {} swept twice", a.parameter)));
        }
    }

    let swept_keys: Vec<&str> = sweep.iter().filter_map(|a| a.parameter.raw_key()).collect();
    let states = blocks
        .iter()
        .filter(|b| b.kind == Block::State)
        .map(|b| parse_state(b, &swept_keys))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario {
        states,
        sweep,
        analysis,
    })
}

fn number(entry: &(usize, String, String)) -> Result<f64, ScenarioError> {
    entry
        .2
        .parse::<f64>()
        .map_err(|_| syntax(entry.0, format!("'{}' is not a number for '{}'", entry.2, entry.1)))
}

fn count(entry: &(usize, String, String)) -> Result<usize, ScenarioError> {
    entry
        .2
        .parse::<usize>()
        .map_err(|_| syntax(entry.0, format!("'{}' is not a count for '{}'", entry.2, entry.1)))
}

fn parse_state(b: &RawBlock, swept: &[&str]) -> Result<StateEntry, ScenarioError> {
    for entry in &b.pairs {
        if !STATE_KEYS.contains(&entry.1.as_str()) {
            return Err(syntax(entry.0, format!("unknown state key '{}'", entry.1)));
        }
        number(entry)?;
    }
    // Swept components are filled by the grid; a placeholder keeps the
    // base state complete.
    let mut pairs: Vec<(&str, &str)> = b.pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str())).collect();
    for key in swept {
        if b.get(key).is_none() {
            pairs.push((key, "0"));
        }
    }
    let invalid = |source| ScenarioError::Invalid {
        block: "state",
        line: b.line,
        source,
    };
    let state = EquilibriumState::from_key_values(pairs).map_err(invalid)?;
    let state = if swept.contains(&"eps") {
        state
    } else {
        state.validate().map_err(invalid)?.state
    };
    Ok(StateEntry { line: b.line, state })
}

fn parse_axis(b: &RawBlock) -> Result<SweepAxis, ScenarioError> {
    let need = |k: &str| {
        b.get(k)
            .ok_or_else(|| syntax(b.line, format!("[sweep] block is missing '{k}'")))
    };
    for (line, k, _) in &b.pairs {
        if !["parameter", "min", "max", "steps"].contains(&k.as_str()) {
            return Err(syntax(*line, format!("unknown sweep key '{k}'")));
        }
    }
    let p = need("parameter")?;
    let parameter = SweepParameter::parse(&p.2).ok_or_else(|| syntax(p.0, format!("unknown sweep parameter '{}'", p.2)))?;
    let min = number(need("min")?)?;
    let max = number(need("max")?)?;
    let steps_entry = need("steps")?;
    let steps = count(steps_entry)?;
    if steps < 2 {
        return Err(syntax(steps_entry.0, "steps must be at least 2"));
    }
    if !(min.is_finite() && max.is_finite()) {
        return Err(syntax(b.line, "sweep bounds must be finite"));
    }
    Ok(SweepAxis {
        parameter,
        min,
        max,
        steps,
    })
}

fn parse_bool(entry: &(usize, String, String)) -> Result<bool, ScenarioError> {
    match entry.2.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        v => Err(syntax(entry.0, format!("'{v}' is not true or false"))),
    }
}

fn positive(entry: &(usize, String, String)) -> Result<f64, ScenarioError> {
    let x = number(entry)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(syntax(entry.0, format!("'{}' must be positive", entry.1)))
    }
}

fn parse_analysis(b: &RawBlock) -> Result<Analysis, ScenarioError> {
    let mut a = Analysis::default();
    for entry in &b.pairs {
        match entry.1.as_str() {
            "tol_eq" => a.tol_eq = Some(positive(entry)?),
            "n_dirs" => a.n_dirs = count(entry)?,
            "delta" => a.delta = Some(positive(entry)?),
            "radius" | "R" => a.radius = Some(positive(entry)?),
            "series_order" => a.series_order = count(entry)?,
            "decay_p" => a.decay_p = positive(entry)?,
            "cross_check" => a.cross_check = parse_bool(entry)?,
            "samples" => a.samples = count(entry)?,
            "eps" => {
                let eps = positive(entry)?;
                if eps >= 1.0 {
                    return Err(syntax(entry.0, "eps must lie in (0, 1)"));
                }
                a.sample_eps = eps;
            }
            other => return Err(syntax(entry.0, format!("unknown analysis key '{other}'"))),
        }
    }
    if a.n_dirs < 8 {
        return Err(syntax(b.line, "n_dirs must be at least 8"));
    }
    Ok(a)
}
