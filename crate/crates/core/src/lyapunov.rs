//! Perturbation-speed machinery: certified brackets for the influence radii
//! `I_n`, pointwise and Monte Carlo exponent curves, and crossing times.
//!
//! `I_n` on the plus side is the smallest `s` such that every configuration
//! agreeing with `x` on `[-s, oo)` keeps the first `n` images unchanged on
//! `[0, oo)` (minus side mirrored). Exact values are exponential to compute,
//! so every result is a bracket:
//!
//! * lower bounds come with a replayable witness perturbation that provably
//!   influences the watched half-line within `n` steps;
//! * upper bounds come with a certificate — either a set-valued envelope
//!   that stays singleton on the watched side, or, for the counter rule on
//!   the plus side, a counter-chain blocking bound: the first emitter far
//!   enough from the perturbed region survives any perturbation, everything
//!   to its right is driven solely through one overflow bit, and the
//!   reliability frontier of the extreme drives pins the origin counter.

use crate::automaton::{self, AutomatonError, CounterRule, DrivenWindow, EMITTER};
use crate::engine::{
    set_valued_orbit, EngineError, Rule, RuleTable, SetConfig, Sym, WindowConfig,
};
use crate::model::{self, BoundaryDrive, LineEvolution, ModelError};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("window too narrow: needs [{0}, {1}] valid")]
    WindowTooNarrow(i64, i64),
    #[error("bracket inconsistent: lower {lower} > upper {upper}")]
    BracketInconsistent { lower: u32, upper: u32 },
}

/// A rule known to the analysis layer; the counter rule gets dedicated
/// certificate strategies.
pub enum AnyRule {
    Table(RuleTable),
    Counter(CounterRule),
}

impl AnyRule {
    pub fn is_counter(&self) -> bool {
        matches!(self, AnyRule::Counter(_))
    }

    pub fn as_rule(&self) -> &dyn Rule {
        match self {
            AnyRule::Table(t) => t,
            AnyRule::Counter(c) => c,
        }
    }

    /// One step of a window under this rule, using the short certified
    /// stencil when available.
    pub fn step_window(&self, cfg: &WindowConfig) -> Result<WindowConfig, LyapunovError> {
        match self {
            AnyRule::Table(t) => Ok(cfg.step(t)?),
            AnyRule::Counter(_) => Ok(automaton::step_counter(cfg)?),
        }
    }

    /// Rightward (plus side) and leftward (minus side) dependency speeds.
    fn speeds(&self) -> (i64, i64) {
        match self {
            AnyRule::Table(t) => (t.left_radius() as i64, t.right_radius() as i64),
            AnyRule::Counter(_) => (5, 3),
        }
    }

    pub fn name(&self) -> &str {
        self.as_rule().name()
    }
}

/// Which half-line is watched. `Plus`: perturbations left of `-s`,
/// agreement demanded on `[0, oo)`. `Minus`: perturbations right of `s`,
/// agreement on `(-oo, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Replayable lower-bound witness: applying `cells` to the base window
/// makes the orbits differ at `hit_coord` after `hit_step` steps.
#[derive(Debug, Clone)]
pub struct Witness {
    pub cells: Vec<(i64, Sym)>,
    pub hit_step: u32,
    pub hit_coord: i64,
}

/// How an upper bound was certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Set-valued envelope stayed singleton on the watched side for `n`
    /// steps with full-alphabet cells beyond the agreement radius.
    Envelope { s: u32, n: u32 },
    /// Counter-chain blocking: the sub-line right of `interface_e` keeps the
    /// origin counter pinned for more than `n` steps under both extreme
    /// drives.
    Chain { interface_e: i64, s: u32, n: u32 },
    /// Dependency-cone bound (fringe-adjusted for the counter rule);
    /// always valid, never tight.
    Radius { s: u32 },
}

/// Rigorous bracket `lower <= I_n <= upper`.
#[derive(Debug, Clone)]
pub struct InfluenceBracket {
    pub n: u32,
    pub side: Side,
    pub lower: u32,
    pub upper: u32,
    pub witness: Option<Witness>,
    pub certificate: Certificate,
    /// Set when the dedicated certificate search gave up and the cone
    /// fallback was returned.
    pub inconclusive: bool,
}

/// Outcome of watching two orbits on a half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WatchOutcome {
    Diverged { step: u32, coord: i64 },
    /// Agreed through the full horizon.
    Clean,
    /// The windows stopped covering the watched side at this step.
    Exhausted { step: u32 },
}

/// Runs both orbits up to `n` steps, watching the given half-line.
pub fn watch_difference(
    x: &WindowConfig,
    y: &WindowConfig,
    rule: &AnyRule,
    side: Side,
    n: u32,
) -> Result<WatchOutcome, LyapunovError> {
    let mut xs = x.clone();
    let mut ys = y.clone();
    for step in 1..=n {
        let stepped = (rule.step_window(&xs), rule.step_window(&ys));
        match stepped {
            (Ok(a), Ok(b)) => {
                xs = a;
                ys = b;
            }
            (Err(LyapunovError::Engine(EngineError::WindowExhausted)), _)
            | (_, Err(LyapunovError::Engine(EngineError::WindowExhausted))) => {
                return Ok(WatchOutcome::Exhausted { step })
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
        let lo = xs.valid().0.max(ys.valid().0);
        let hi = xs.valid().1.min(ys.valid().1);
        if lo > 0 || hi < 0 {
            return Ok(WatchOutcome::Exhausted { step });
        }
        let (wlo, whi) = match side {
            Side::Plus => (0, hi),
            Side::Minus => (lo, 0),
        };
        for c in wlo..=whi {
            if xs.get(c) != ys.get(c) {
                return Ok(WatchOutcome::Diverged { step, coord: c });
            }
        }
    }
    Ok(WatchOutcome::Clean)
}

/// As [`watch_difference`], but exhaustion before the horizon is an error.
pub fn first_watch_difference(
    x: &WindowConfig,
    y: &WindowConfig,
    rule: &AnyRule,
    side: Side,
    n: u32,
) -> Result<Option<(u32, i64)>, LyapunovError> {
    match watch_difference(x, y, rule, side, n)? {
        WatchOutcome::Diverged { step, coord } => Ok(Some((step, coord))),
        WatchOutcome::Clean => Ok(None),
        WatchOutcome::Exhausted { .. } => Err(LyapunovError::Engine(
            EngineError::WindowExhausted,
        )),
    }
}

// ---------------------------------------------------------------------------
// Upper bounds
// ---------------------------------------------------------------------------

/// Envelope safety check: with all cells beyond the agreement radius `s`
/// widened to the full alphabet, the watched entry cells must stay
/// singleton for `n` steps. A first difference on the watched half-line can
/// only appear within one dependency radius of the origin, so checking that
/// fringe suffices.
fn envelope_safe(
    x: &WindowConfig,
    rule: &AnyRule,
    side: Side,
    s: u32,
    n: u32,
) -> Result<bool, LyapunovError> {
    let alphabet = rule.as_rule().alphabet();
    let base = SetConfig::from_window(x);
    let widened = match side {
        Side::Plus => base.widen_beyond(alphabet, -(s as i64), true),
        Side::Minus => base.widen_beyond(alphabet, s as i64, false),
    };
    let (right_speed, left_speed) = rule.speeds();
    let entry = match side {
        Side::Plus => right_speed - 1,
        Side::Minus => left_speed - 1,
    };
    let rows = match set_valued_orbit(&widened, rule.as_rule(), n) {
        Ok(rows) => rows,
        Err(EngineError::PartialOrbit { .. }) => return Err(EngineError::WindowExhausted.into()),
        Err(e) => return Err(e.into()),
    };
    for row in rows.iter().skip(1) {
        let (lo, hi) = row.valid();
        let (wlo, whi) = match side {
            Side::Plus => (0, entry),
            Side::Minus => (-entry, 0),
        };
        if wlo < lo || whi > hi {
            return Err(LyapunovError::WindowTooNarrow(wlo, whi));
        }
        for c in wlo..=whi {
            if !row.get(c).unwrap().is_singleton() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Chain interface for agreement radius `s`: the first emitter at
/// coordinate `>= boundary_gap` (safe from emitter kills) and left of the
/// origin. Returns its coordinate, the read counter line and the origin
/// counter position.
fn chain_interface(
    x: &WindowConfig,
    threshold: i64,
) -> Result<Option<(i64, model::CounterLine, usize)>, LyapunovError> {
    let (cells, lo) = x.valid_cells();
    let interface = cells
        .iter()
        .enumerate()
        .map(|(k, &sym)| (lo + k as i64, sym))
        .find(|&(coord, sym)| sym == EMITTER && coord >= threshold && coord <= -1)
        .map(|(coord, _)| coord);
    let Some(e) = interface else {
        return Ok(None);
    };
    let suffix = x.restrict(e, x.valid().1);
    let line = match model::factor_map(&suffix) {
        Ok(line) => line,
        Err(ModelError::FewerThanTwoEmitters) => return Ok(None),
        Err(err) => return Err(err.into()),
    };
    let Some(origin) = line.origin_index else {
        return Ok(None);
    };
    Ok(Some((e, line, origin)))
}

/// Blocking steps of the chain at the given interface threshold: first step
/// at which the origin counter's arrivals stop being pinned under the
/// extreme drives. `None` when no usable interface exists.
fn chain_blocking_steps(
    x: &WindowConfig,
    threshold: i64,
    budget: u32,
) -> Result<Option<(u32, bool, i64)>, LyapunovError> {
    let Some((e, line, origin)) = chain_interface(x, threshold)? else {
        return Ok(None);
    };
    let mut ev = LineEvolution::new(&line, BoundaryDrive::Unknown);
    for step in 1..=budget {
        ev.step()?;
        if ev.reliable_from() > origin {
            return Ok(Some((step, false, e)));
        }
    }
    Ok(Some((budget, true, e)))
}

fn chain_safe(x: &WindowConfig, s: u32, n: u32) -> Result<Option<i64>, LyapunovError> {
    match chain_blocking_steps(x, -(s as i64) + 3, n)? {
        Some((_, capped, e)) if capped => Ok(Some(e)), // survived the full n steps
        Some((steps, _, e)) if steps > n => Ok(Some(e)),
        _ => Ok(None),
    }
}

/// Certified upper bound for `I_n`. Counter rule on the plus side uses
/// chain certificates; everything else the set-valued envelope. Falls back
/// to the dependency-cone bound, flagged `inconclusive` when a dedicated
/// scan gave up.
pub fn influence_upper(
    x: &WindowConfig,
    rule: &AnyRule,
    n: u32,
    side: Side,
) -> Result<(u32, Certificate, bool), LyapunovError> {
    match (rule, side) {
        (AnyRule::Counter(_), Side::Plus) => {
            // Fringe-adjusted cone bound: differences travel right at two
            // cells per step through well-spaced territory, plus a
            // three-cell emitter-kill fringe at the boundary and one for
            // the open/closed convention.
            let cap = 2 * n + 4;
            if chain_safe(x, cap, n)?.is_none() {
                return Ok((cap, Certificate::Radius { s: cap }, true));
            }
            let (mut bad, mut good) = (0i64, cap as i64);
            while good - bad > 1 {
                let mid = bad + (good - bad) / 2;
                if chain_safe(x, mid as u32, n)?.is_some() {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            let s = if chain_safe(x, 0, n)?.is_some() { 0 } else { good as u32 };
            let e = chain_safe(x, s, n)?.expect("search endpoint is safe");
            Ok((s, Certificate::Chain { interface_e: e, s, n }, false))
        }
        _ => {
            let (right_speed, left_speed) = rule.speeds();
            let cap = match side {
                Side::Plus => right_speed as u32 * n,
                Side::Minus => left_speed as u32 * n,
            };
            if !envelope_safe(x, rule, side, cap, n)? {
                return Ok((cap, Certificate::Radius { s: cap }, true));
            }
            let (mut bad, mut good) = (-1i64, cap as i64);
            while good - bad > 1 {
                let mid = bad + (good - bad) / 2;
                if envelope_safe(x, rule, side, mid as u32, n)? {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            let s = good as u32;
            Ok((s, Certificate::Envelope { s, n }, false))
        }
    }
}

// ---------------------------------------------------------------------------
// Lower bounds
// ---------------------------------------------------------------------------

fn apply_perturbation(x: &WindowConfig, cells: &[(i64, Sym)]) -> WindowConfig {
    let mut y = x.clone();
    for &(coord, sym) in cells {
        y.set(coord, sym);
    }
    y
}

/// Searches for a perturbation beyond radius `s` influencing the watched
/// side within `n` steps: exhaustive strips at the boundary up to
/// `strip_budget` wide, then structured counter perturbations.
fn find_witness(
    x: &WindowConfig,
    rule: &AnyRule,
    side: Side,
    s: u32,
    n: u32,
    strip_budget: usize,
) -> Result<Option<Witness>, LyapunovError> {
    let alphabet = rule.as_rule().alphabet();
    let boundary: i64 = match side {
        Side::Plus => -(s as i64) - 1,
        Side::Minus => s as i64 + 1,
    };
    let (span_lo, span_hi) = x.span();
    if boundary < span_lo || boundary > span_hi {
        return Ok(None);
    }

    let try_cells = |cells: &Vec<(i64, Sym)>| -> Result<Option<Witness>, LyapunovError> {
        if cells.is_empty() || cells.iter().all(|&(c, sym)| x.get(c) == Some(sym)) {
            return Ok(None);
        }
        let y = apply_perturbation(x, cells);
        if rule.is_counter() && x.is_e_separated() {
            // The certified short stencil is only valid for well-spaced
            // configurations; skip perturbations that break spacing (the
            // generic path would need a much wider window).
            if !automaton::validate_omega(&y).violations.is_empty() {
                return Ok(None);
            }
        }
        match first_watch_difference(x, &y, rule, side, n) {
            Ok(Some((step, coord))) => Ok(Some(Witness {
                cells: cells.clone(),
                hit_step: step,
                hit_coord: coord,
            })),
            Ok(None) => Ok(None),
            Err(LyapunovError::WindowTooNarrow(..)) | Err(LyapunovError::Engine(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };

    // Exhaustive strips hugging the boundary.
    for w in 1..=strip_budget {
        let coords: Vec<i64> = match side {
            Side::Plus => (0..w).map(|k| boundary - k as i64).collect(),
            Side::Minus => (0..w).map(|k| boundary + k as i64).collect(),
        };
        if coords.iter().any(|&c| c < span_lo || c > span_hi) {
            break;
        }
        let m = alphabet.size() as usize;
        let total = m.pow(w as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut cells = Vec::with_capacity(w);
            for &c in &coords {
                cells.push((c, (rest % m) as Sym));
                rest /= m;
            }
            if let Some(wit) = try_cells(&cells)? {
                return Ok(Some(wit));
            }
        }
    }

    if rule.is_counter() && side == Side::Plus {
        // Structured perturbations: push the hidden digits to all ones
        // (earliest possible overflows) or all zeros (latest).
        let depth = 48.min((boundary - span_lo).max(0) as usize);
        for fill in [1 as Sym, 0] {
            let mut cells = Vec::new();
            for k in 0..depth {
                let c = boundary - k as i64;
                if let Some(sym) = x.get(c) {
                    if sym != EMITTER {
                        cells.push((c, fill));
                    }
                }
            }
            if let Some(wit) = try_cells(&cells)? {
                return Ok(Some(wit));
            }
        }
    }

    if rule.is_counter() && side == Side::Minus {
        // The only leftward channel is an emitter kill: a new emitter in
        // the perturbed region can destroy one of x's emitters within
        // distance three of it.
        let (cells_v, lo) = x.valid_cells();
        for (k, &sym) in cells_v.iter().enumerate() {
            let e = lo + k as i64;
            if sym == EMITTER && e <= 0 && e + 3 >= boundary {
                for p in boundary..=(e + 3).min(span_hi) {
                    let cells = vec![(p, EMITTER)];
                    let y = apply_perturbation(x, &cells);
                    // Spacing is intentionally broken: step both orbits on
                    // the generic composite path.
                    let xg = WindowConfig::new(x.origin(), x.cells().to_vec());
                    let yg = WindowConfig::new(y.origin(), y.cells().to_vec());
                    match first_watch_difference(&xg, &yg, rule, side, n) {
                        Ok(Some((step, coord))) => {
                            return Ok(Some(Witness {
                                cells,
                                hit_step: step,
                                hit_coord: coord,
                            }))
                        }
                        Ok(None) => {}
                        Err(LyapunovError::WindowTooNarrow(..))
                        | Err(LyapunovError::Engine(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }

    Ok(None)
}

/// Witness-backed lower bound for `I_n`: `1 +` the largest radius where a
/// perturbation provably influences the watched side.
pub fn influence_lower(
    x: &WindowConfig,
    rule: &AnyRule,
    n: u32,
    side: Side,
    strip_budget: usize,
    upper_hint: u32,
) -> Result<(u32, Option<Witness>), LyapunovError> {
    // True unsafety is monotone downward in s; binary search against the
    // witness finder (a missed witness only loosens the bound).
    let mut lo_s: i64 = -1; // largest s known unsafe
    let mut hi_s: i64 = upper_hint as i64; // s = upper is safe by the certificate
    let mut witness = None;
    while hi_s - lo_s > 1 {
        let mid = lo_s + (hi_s - lo_s) / 2;
        match find_witness(x, rule, side, mid as u32, n, strip_budget)? {
            Some(w) => {
                witness = Some(w);
                lo_s = mid;
            }
            None => hi_s = mid,
        }
    }
    Ok(((lo_s + 1) as u32, witness))
}

/// Bracket for `I_n`, hard-asserting consistency.
pub fn influence_bracket(
    x: &WindowConfig,
    rule: &AnyRule,
    n: u32,
    side: Side,
    strip_budget: usize,
) -> Result<InfluenceBracket, LyapunovError> {
    let (upper, certificate, inconclusive) = influence_upper(x, rule, n, side)?;
    let (lower, witness) = influence_lower(x, rule, n, side, strip_budget, upper)?;
    if lower > upper {
        return Err(LyapunovError::BracketInconsistent { lower, upper });
    }
    Ok(InfluenceBracket {
        n,
        side,
        lower,
        upper,
        witness,
        certificate,
        inconclusive,
    })
}

/// Brackets over a horizon grid with monotone bookkeeping: the true `I_n`
/// is non-decreasing in `n`, so lower curves are cumulative maxima and an
/// upper bound for a later horizon also bounds every earlier one.
pub fn pointwise_exponents(
    x: &WindowConfig,
    rule: &AnyRule,
    side: Side,
    n_grid: &[u32],
    strip_budget: usize,
) -> Result<Vec<InfluenceBracket>, LyapunovError> {
    let mut brackets = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        brackets.push(influence_bracket(x, rule, n, side, strip_budget)?);
    }
    for i in 1..brackets.len() {
        if brackets[i].lower < brackets[i - 1].lower {
            brackets[i].lower = brackets[i - 1].lower;
        }
    }
    for i in (1..brackets.len()).rev() {
        if brackets[i - 1].upper > brackets[i].upper {
            brackets[i - 1].upper = brackets[i].upper;
        }
    }
    for b in &brackets {
        if b.lower > b.upper {
            return Err(LyapunovError::BracketInconsistent {
                lower: b.lower,
                upper: b.upper,
            });
        }
    }
    Ok(brackets)
}

/// Monte Carlo summary of bracket curves over sampled configurations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub side: Side,
    pub n_grid: Vec<u32>,
    pub lower_mean: Vec<f64>,
    pub upper_mean: Vec<f64>,
    /// Mean bracket midpoint divided by n.
    pub mid_over_n: Vec<f64>,
    pub mid_stderr: Vec<f64>,
    pub samples: usize,
    pub inconclusive: Vec<u32>,
}

pub fn average_exponents(
    rule: &AnyRule,
    side: Side,
    n_grid: &[u32],
    samples: usize,
    strip_budget: usize,
    mut sampler: impl FnMut(usize) -> Result<WindowConfig, LyapunovError>,
) -> Result<ExponentEstimate, LyapunovError> {
    let g = n_grid.len();
    let mut lower_sum = vec![0.0; g];
    let mut upper_sum = vec![0.0; g];
    let mut mid_sum = vec![0.0; g];
    let mut mid_sq = vec![0.0; g];
    let mut inconclusive = vec![0u32; g];
    for i in 0..samples {
        let cfg = sampler(i)?;
        let brackets = pointwise_exponents(&cfg, rule, side, n_grid, strip_budget)?;
        for (k, b) in brackets.iter().enumerate() {
            let mid = (b.lower as f64 + b.upper as f64) / 2.0 / b.n as f64;
            lower_sum[k] += b.lower as f64 / b.n as f64;
            upper_sum[k] += b.upper as f64 / b.n as f64;
            mid_sum[k] += mid;
            mid_sq[k] += mid * mid;
            if b.inconclusive {
                inconclusive[k] += 1;
            }
        }
    }
    let nf = samples as f64;
    let mid_over_n: Vec<f64> = mid_sum.iter().map(|s| s / nf).collect();
    let mid_stderr: Vec<f64> = mid_sq
        .iter()
        .zip(&mid_over_n)
        .map(|(&sq, &m)| ((sq / nf - m * m).max(0.0) / nf).sqrt())
        .collect();
    Ok(ExponentEstimate {
        side,
        n_grid: n_grid.to_vec(),
        lower_mean: lower_sum.iter().map(|s| s / nf).collect(),
        upper_mean: upper_sum.iter().map(|s| s / nf).collect(),
        mid_over_n,
        mid_stderr,
        samples,
        inconclusive,
    })
}

// ---------------------------------------------------------------------------
// Crossing times
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingStrategy {
    /// Certified lower bound: envelope front for table rules, counter-chain
    /// blocking for the counter rule.
    AlphabetFront,
    /// Upper-bound witness: a structural counter rearrangement beyond the
    /// agreement radius, run to its first observed influence.
    CounterResize,
}

#[derive(Debug, Clone)]
pub struct CrossingReport {
    /// Lower strategies: influence on `[0, oo)` is impossible before this
    /// step (capped when the budget ran out first). Upper strategy:
    /// influence observed at this step.
    pub bound: u32,
    pub capped: bool,
    pub is_lower: bool,
    pub witness: Option<Witness>,
}

/// Time for a perturbation at cells `<= -n` (agreement on the open
/// half-line right of `-n`) to influence `[0, oo)`.
pub fn crossing_time(
    x: &WindowConfig,
    rule: &AnyRule,
    n: u32,
    strategy: CrossingStrategy,
    budget: u32,
) -> Result<CrossingReport, LyapunovError> {
    match strategy {
        CrossingStrategy::AlphabetFront => match rule {
            AnyRule::Counter(_) => {
                // Kills need a new emitter within distance 3 of cells
                // <= -n, so emitters at >= -n + 4 survive.
                match chain_blocking_steps(x, -(n as i64) + 4, budget)? {
                    Some((steps, capped, _)) => Ok(CrossingReport {
                        bound: steps,
                        capped,
                        is_lower: true,
                        witness: None,
                    }),
                    None => Ok(CrossingReport {
                        bound: 0,
                        capped: true,
                        is_lower: true,
                        witness: None,
                    }),
                }
            }
            AnyRule::Table(_) => {
                let alphabet = rule.as_rule().alphabet();
                let mut row =
                    SetConfig::from_window(x).widen_beyond(alphabet, -(n as i64) + 1, true);
                for step in 1..=budget {
                    let rows = set_valued_orbit(&row, rule.as_rule(), 1)?;
                    row = rows.into_iter().nth(1).unwrap();
                    let (lo, hi) = row.valid();
                    if lo > 0 {
                        return Err(LyapunovError::WindowTooNarrow(lo, hi));
                    }
                    for c in 0..=hi {
                        if !row.get(c).unwrap().is_singleton() {
                            return Ok(CrossingReport {
                                bound: step,
                                capped: false,
                                is_lower: true,
                                witness: None,
                            });
                        }
                    }
                }
                Ok(CrossingReport {
                    bound: budget,
                    capped: true,
                    is_lower: true,
                    witness: None,
                })
            }
        },
        CrossingStrategy::CounterResize => {
            let witness_cells = resize_perturbation(x, n)?;
            let y = apply_perturbation(x, &witness_cells);
            match watch_difference(x, &y, rule, Side::Plus, budget)? {
                WatchOutcome::Diverged { step, coord } => Ok(CrossingReport {
                    bound: step,
                    capped: false,
                    is_lower: false,
                    witness: Some(Witness {
                        cells: witness_cells,
                        hit_step: step,
                        hit_coord: coord,
                    }),
                }),
                WatchOutcome::Clean => Ok(CrossingReport {
                    bound: budget,
                    capped: true,
                    is_lower: false,
                    witness: None,
                }),
                WatchOutcome::Exhausted { step } => Ok(CrossingReport {
                    bound: step,
                    capped: true,
                    is_lower: false,
                    witness: None,
                }),
            }
        }
    }
}

/// Replaces whole counters at cells `<= -n` with a dense run of minimal
/// nearly full counters (`E111` repeating), keeping four-cell spacing to
/// the first kept emitter so the result stays well spaced.
fn resize_perturbation(x: &WindowConfig, n: u32) -> Result<Vec<(i64, Sym)>, LyapunovError> {
    let bound = -(n as i64);
    let (cells, lo) = x.valid_cells();
    let first_kept = cells
        .iter()
        .enumerate()
        .map(|(k, &sym)| (lo + k as i64, sym))
        .find(|&(coord, sym)| sym == EMITTER && coord > bound)
        .map(|(coord, _)| coord)
        .ok_or(LyapunovError::WindowTooNarrow(bound, bound))?;
    let mut out = Vec::new();
    // Pattern anchored at first_kept - 4, extending leftward: an emitter
    // every 4 cells, ones in between, all at coordinates <= bound.
    let top = bound.min(first_kept - 4);
    for coord in (lo..=top).rev() {
        let offset = (first_kept - 4 - coord).rem_euclid(4);
        let sym = if offset == 0 { EMITTER } else { 1 };
        if x.get(coord) != Some(sym) {
            out.push((coord, sym));
        }
    }
    // Any emitters of x strictly between the pattern and the kept emitter
    // would sit within 3 cells of it; flatten them to digits.
    for c in (top + 1)..first_kept {
        if c > bound {
            break;
        }
        if x.get(c) == Some(EMITTER) {
            out.push((c, 1));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Certificate replays
// ---------------------------------------------------------------------------

/// Randomized validation of an upper-bound certificate: concrete
/// perturbations (envelope/cone) or boundary bit streams (chain) must leave
/// the watched data unchanged for the certified horizon. Returns the number
/// of clean replays out of `replays`.
pub fn replay_certificate(
    x: &WindowConfig,
    rule: &AnyRule,
    bracket: &InfluenceBracket,
    replays: usize,
    rng: &mut impl Rng,
) -> Result<usize, LyapunovError> {
    let mut ok = 0usize;
    match &bracket.certificate {
        Certificate::Envelope { s, .. } | Certificate::Radius { s } => {
            let s = *s;
            let n = bracket.n;
            let (span_lo, span_hi) = x.span();
            let alphabet = rule.as_rule().alphabet();
            for _ in 0..replays {
                let mut cells = Vec::new();
                match bracket.side {
                    Side::Plus => {
                        for c in span_lo..(-(s as i64)).max(span_lo) {
                            cells.push((c, rng.gen_range(0..alphabet.size())));
                        }
                    }
                    Side::Minus => {
                        let from = (s as i64 + 1).max(span_lo);
                        for c in from..=span_hi {
                            cells.push((c, rng.gen_range(0..alphabet.size())));
                        }
                    }
                }
                // The replayed configuration need not be well spaced: strip
                // certificates and step generically.
                let y = apply_perturbation(x, &cells);
                let xg = WindowConfig::new(x.origin(), x.cells().to_vec());
                let yg = WindowConfig::new(y.origin(), y.cells().to_vec());
                if first_watch_difference(&xg, &yg, rule, bracket.side, n)?.is_none() {
                    ok += 1;
                }
            }
        }
        Certificate::Chain { interface_e, n, .. } => {
            let suffix = x.restrict(*interface_e, x.valid().1);
            let base = DrivenWindow::new(*interface_e, suffix.cells().to_vec())?;
            let hi = *interface_e + suffix.cells().len() as i64 - 1;
            for _ in 0..replays {
                let mut nominal = base.clone();
                let mut driven = base.clone();
                let mut clean = true;
                'steps: for _ in 0..*n {
                    nominal.step(false);
                    driven.step(rng.gen_bool(0.5));
                    for c in 0..=hi {
                        if driven.get(c) != nominal.get(c) {
                            clean = false;
                            break 'steps;
                        }
                    }
                }
                if clean {
                    ok += 1;
                }
            }
        }
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures;
    use crate::engine::{rules, Alphabet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn additive() -> AnyRule {
        AnyRule::Table(rules::additive_binary())
    }

    fn identity() -> AnyRule {
        AnyRule::Table(rules::identity(Alphabet::binary(), 1))
    }

    fn random_binary(width: usize, origin: i64, seed: u64) -> WindowConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crate::measures::sample_bernoulli(width, origin, &mut rng)
    }

    #[test]
    fn identity_brackets_are_zero() {
        let x = random_binary(64, -32, 1);
        for side in [Side::Plus, Side::Minus] {
            for n in [1u32, 3, 6] {
                let b = influence_bracket(&x, &identity(), n, side, 2).unwrap();
                assert_eq!(b.lower, 0);
                assert_eq!(b.upper, 0);
            }
        }
    }

    #[test]
    fn additive_brackets_are_tight() {
        let rule = additive();
        for n in 1..=6u32 {
            for seed in 0..3u64 {
                let x = random_binary(8 * n as usize + 9, -(4 * n as i64 + 4), seed);
                for side in [Side::Plus, Side::Minus] {
                    let b = influence_bracket(&x, &rule, n, side, 1).unwrap();
                    assert_eq!(b.lower, n, "n={n} side {side:?}");
                    assert_eq!(b.upper, n, "n={n} side {side:?}");
                    assert!(b.witness.is_some());
                }
            }
        }
    }

    #[test]
    fn additive_certified_curve_to_64() {
        let rule = additive();
        let n_grid = [8u32, 16, 32, 64];
        let x = random_binary(8 * 64 + 9, -(4 * 64 + 4), 9);
        let brackets = pointwise_exponents(&x, &rule, Side::Plus, &n_grid, 1).unwrap();
        for b in &brackets {
            assert_eq!(b.lower, b.n);
            assert_eq!(b.upper, b.n);
            assert!(b.lower as f64 / b.n as f64 >= 0.5);
        }
    }

    #[test]
    fn radius_bound_holds_for_table_rules() {
        let rule = additive();
        let x = random_binary(120, -60, 4);
        for n in [2u32, 5, 9] {
            let (upper, _, _) = influence_upper(&x, &rule, n, Side::Plus).unwrap();
            assert!(upper <= n * rule.as_rule().left_radius() as u32);
        }
    }

    #[test]
    fn counter_rule_minus_side_is_bounded() {
        let p = crate::measures::MeasureParams {
            half_width: 60,
            seed: 8,
            ..Default::default()
        };
        let mut rng = p.rng(0);
        let x = crate::measures::sample_anchored(&p, &mut rng);
        let rule = AnyRule::Counter(CounterRule);
        let b = influence_bracket(&x, &rule, 12, Side::Minus, 1).unwrap();
        assert!(
            b.upper <= 3,
            "minus-side upper {} exceeds emitter-kill reach",
            b.upper
        );
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn counter_rule_plus_side_blocks() {
        // A window whose first left counter is fresh and large blocks far
        // below the cone bound.
        let mut cells = Vec::new();
        cells.push(EMITTER);
        cells.extend_from_slice(&[0; 8]); // fresh big counter
        cells.push(EMITTER);
        cells.extend_from_slice(&[0, 1, 0]);
        cells.push(EMITTER);
        cells.extend_from_slice(&[1, 1, 0, 1]);
        cells.push(EMITTER);
        cells.extend_from_slice(&[1, 0, 1]);
        let origin = -(cells.len() as i64 - 6);
        let x = WindowConfig::new(origin, cells).certify_e_separated();
        let rule = AnyRule::Counter(CounterRule);
        let n = 24u32;
        let b = influence_bracket(&x, &rule, n, Side::Plus, 1).unwrap();
        assert!(
            b.upper < 2 * n,
            "chain certificate should beat the cone bound: {}",
            b.upper
        );
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn crossing_time_identity_never() {
        let x = random_binary(160, -80, 3);
        let r = crossing_time(&x, &identity(), 8, CrossingStrategy::AlphabetFront, 30).unwrap();
        assert!(r.capped);
        assert_eq!(r.bound, 30);
    }

    #[test]
    fn crossing_time_additive_exact() {
        for n in 2..=6u32 {
            let x = random_binary(10 * n as usize + 9, -(5 * n as i64 + 4), n as u64);
            let r =
                crossing_time(&x, &additive(), n, CrossingStrategy::AlphabetFront, 200).unwrap();
            assert!(!r.capped);
            assert_eq!(r.bound, n, "front crosses n cells in n steps");
        }
    }

    #[test]
    fn crossing_time_counter_blocking_bound() {
        // Fresh counter of length 6 just right of the perturbation radius:
        // certified crossing >= (2^6 - 0) / 2 = 32.
        let mut cells = vec![EMITTER];
        cells.extend_from_slice(&[0; 6]); // the fresh blocker
        cells.push(EMITTER);
        cells.extend_from_slice(&[1, 0, 1]);
        cells.push(EMITTER);
        cells.extend_from_slice(&[0, 1, 1, 0]);
        cells.push(EMITTER);
        cells.extend_from_slice(&[1, 1, 0]);
        cells.push(EMITTER);
        cells.extend_from_slice(&[1, 0, 1]);
        cells.push(EMITTER);
        let anchor = -20i64;
        let x = WindowConfig::new(anchor, cells).certify_e_separated();
        let n = (-anchor + 4) as u32; // interface threshold lands on the blocker
        let rule = AnyRule::Counter(CounterRule);
        let r = crossing_time(&x, &rule, n, CrossingStrategy::AlphabetFront, 5000).unwrap();
        assert!(r.is_lower && !r.capped);
        assert!(r.bound >= 32, "bound {} below the blocking floor", r.bound);

        // An explicit resize witness caps it from above, consistently.
        let up = crossing_time(&x, &rule, n, CrossingStrategy::CounterResize, 5000).unwrap();
        if !up.capped {
            assert!(
                up.bound >= r.bound,
                "upper witness {} under lower bound {}",
                up.bound,
                r.bound
            );
        }
    }

    #[test]
    fn duality_between_crossing_and_upper() {
        // Chain blocking at the certificate radius outlasts the horizon:
        // crossing(s) > n is exactly what makes I_n <= s.
        let p = crate::measures::MeasureParams {
            half_width: 70,
            seed: 77,
            ..Default::default()
        };
        let mut rng = p.rng(0);
        let rule = AnyRule::Counter(CounterRule);
        for _ in 0..5 {
            let x = crate::measures::sample_anchored(&p, &mut rng);
            let n = 32u32;
            let (upper, cert, _) = influence_upper(&x, &rule, n, Side::Plus).unwrap();
            if let Certificate::Chain { .. } = cert {
                let block = chain_blocking_steps(&x, -(upper as i64) + 3, n + 1)
                    .unwrap()
                    .expect("certificate implies an interface");
                assert!(block.1 || block.0 > n);
            }
        }
    }

    #[test]
    fn average_exponents_identity_zero() {
        let rule = identity();
        let est = average_exponents(&rule, Side::Plus, &[2, 4], 10, 1, |i| {
            Ok(random_binary(64, -32, i as u64))
        })
        .unwrap();
        assert!(est.lower_mean.iter().all(|&v| v == 0.0));
        assert!(est.upper_mean.iter().all(|&v| v == 0.0));
        assert!(est.mid_stderr.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn average_exponents_additive_pinned() {
        let rule = additive();
        let est = average_exponents(&rule, Side::Plus, &[2, 4, 6], 8, 1, |i| {
            Ok(random_binary(8 * 6 + 9, -(4 * 6 + 4), 100 + i as u64))
        })
        .unwrap();
        for v in &est.lower_mean {
            assert!(*v >= 1.0 - 1e-12, "lower mean {v}");
        }
    }

    #[test]
    fn envelope_certificates_replay() {
        let rule = additive();
        let x = random_binary(8 * 5 + 9, -(4 * 5 + 4), 21);
        let b = influence_bracket(&x, &rule, 5, Side::Plus, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ok = replay_certificate(&x, &rule, &b, 100, &mut rng).unwrap();
        assert_eq!(ok, 100);
    }

    #[test]
    fn chain_certificates_replay() {
        let cfg = fixtures::golden_initial_window(40);
        let rule = AnyRule::Counter(CounterRule);
        let b = influence_bracket(&cfg, &rule, 6, Side::Plus, 1).unwrap();
        if matches!(b.certificate, Certificate::Chain { .. }) {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let ok = replay_certificate(&cfg, &rule, &b, 100, &mut rng).unwrap();
            assert_eq!(ok, 100);
        }
    }
}
