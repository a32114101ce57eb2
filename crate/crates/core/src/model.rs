//! The counter factor model.
//!
//! A counter is a triple `(len, state, countdown)`: `len` digits, current
//! state in `[0, 2^len)`, and an overflow countdown in `[0, len]` that runs
//! while the emitted carry travels across the digit block. A counter line is
//! an indexed run of counters; each step every counter is incremented by 1,
//! or by 2 when its left neighbour's countdown stood at 1.
//!
//! The factor map reads a cell window into a counter line (leftmost digit has
//! weight 1). Evolving a finite line requires a convention for the unknown
//! left neighbour of the leftmost counter; [`LineEvolution`] tracks the two
//! extreme conventions (never overflow / overflow every step) and maintains a
//! certified reliability frontier: a counter is reported only while its
//! arrival stream is pinned regardless of what the unknown left context does.
//! The frontier argument uses that a counter's cumulative emission count is
//! monotone in its cumulative arrivals, so if the two extreme drives agree on
//! a counter's emission history, every drive does.

use crate::automaton::{self, AutomatonError, DrivenWindow, EMITTER};
use crate::engine::WindowConfig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("counter invariant violated: len={len} state={state} countdown={countdown}")]
    BadCounter { len: u8, state: u64, countdown: u8 },
    #[error("increment amount {0} not in {{1,2}}")]
    BadIncrement(u8),
    #[error("counter overflowed during countdown (not reachable from well-spaced dynamics)")]
    CountdownOverflow,
    #[error("window shows fewer than two emitters; no counter is fully visible")]
    FewerThanTwoEmitters,
    #[error("counter at emitter {0} has fewer than three digits")]
    NarrowCounter(i64),
    #[error("counter at emitter {0} is too wide to model exactly")]
    TooWide(i64),
    #[error("counter line is empty")]
    EmptyLine,
    #[error("index {0} outside line")]
    BadIndex(usize),
    #[error("counter {0} lost reliability at step {1}")]
    ReliabilityExceeded(usize, u32),
    #[error("line does not cover coordinates [-{0}, 0]")]
    InsufficientCoverage(i64),
    #[error("no length given")]
    NoLengths,
    #[error("malformed counter line text: {0}")]
    BadText(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// One counter: `len` digits, state modulo `2^len`, overflow countdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Counter {
    len: u8,
    state: u64,
    countdown: u8,
}

#[allow(clippy::len_without_is_empty)]
impl Counter {
    pub fn new(len: u8, state: u64, countdown: u8) -> Result<Self, ModelError> {
        if !(3..=62).contains(&len) || state >= (1u64 << len) || countdown > len {
            return Err(ModelError::BadCounter {
                len,
                state,
                countdown,
            });
        }
        Ok(Counter {
            len,
            state,
            countdown,
        })
    }

    /// A counter at state 0 with no countdown running.
    pub fn fresh(len: u8) -> Self {
        Counter::new(len, 0, 0).expect("fresh counter")
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn countdown(&self) -> u8 {
        self.countdown
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.len
    }

    /// True when the overflow sits on the last digit: the right neighbour
    /// will receive +2 at the next step.
    pub fn emitting(&self) -> bool {
        self.countdown == 1
    }
}

/// Increment rules. With `countdown == 0`: plain addition below capacity,
/// else wrap and start the countdown at `len`. With `countdown > 0` the
/// state keeps accumulating while the countdown decrements.
pub fn increment(u: Counter, amount: u8) -> Result<Counter, ModelError> {
    if amount != 1 && amount != 2 {
        return Err(ModelError::BadIncrement(amount));
    }
    let a = amount as u64;
    let cap = u.capacity();
    if u.countdown == 0 {
        if u.state + a < cap {
            Counter::new(u.len, u.state + a, 0)
        } else {
            Counter::new(u.len, u.state + a - cap, u.len)
        }
    } else {
        if u.state + a >= cap {
            return Err(ModelError::CountdownOverflow);
        }
        Counter::new(u.len, u.state + a, u.countdown - 1)
    }
}

/// An indexed finite run of counters. `first_e` is the absolute coordinate
/// of the emitter left of counter 0 of the run; counter `k` occupies digits
/// `s_k + 1 ..= s_{k+1} - 1` where `s_{k+1} = s_k + len_k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterLine {
    pub first_e: i64,
    pub counters: Vec<Counter>,
    /// Position in `counters` of the counter whose digit block or left
    /// emitter contains coordinate 0, when visible.
    pub origin_index: Option<usize>,
}

impl CounterLine {
    pub fn new(first_e: i64, counters: Vec<Counter>) -> Result<Self, ModelError> {
        if counters.is_empty() {
            return Err(ModelError::EmptyLine);
        }
        let mut line = CounterLine {
            first_e,
            counters,
            origin_index: None,
        };
        line.origin_index = line.locate_origin();
        Ok(line)
    }

    fn locate_origin(&self) -> Option<usize> {
        (0..self.counters.len()).find(|&k| {
            let s = self.s_position(k);
            let s_next = self.s_position(k + 1);
            s <= 0 && 0 < s_next
        })
    }

    /// Coordinate of the `k`-th emitter (`k` may equal `counters.len()`,
    /// giving the emitter right of the last counter).
    pub fn s_position(&self, k: usize) -> i64 {
        let mut s = self.first_e;
        for c in &self.counters[..k] {
            s += c.len() as i64 + 1;
        }
        s
    }

    pub fn e_positions(&self) -> Vec<i64> {
        (0..=self.counters.len()).map(|k| self.s_position(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    /// Lengths leftward from index `k`: `[len_k, len_{k-1}, ...]`, the order
    /// expected by [`rate_from_lengths`].
    pub fn lengths_leftward(&self, k: usize) -> Vec<u8> {
        self.counters[..=k].iter().rev().map(|c| c.len()).collect()
    }
}

/// Reads the fully visible counters of a window. The leftmost digit carries
/// weight 1; the countdown is `len + 1 - offset` of the rightmost digit
/// exceeding 1 when the raw digit sum reaches capacity, else 0.
pub fn factor_map(cfg: &WindowConfig) -> Result<CounterLine, ModelError> {
    let (cells, lo) = cfg.valid_cells();
    let es: Vec<i64> = cells
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == EMITTER)
        .map(|(k, _)| lo + k as i64)
        .collect();
    if es.len() < 2 {
        return Err(ModelError::FewerThanTwoEmitters);
    }
    let mut counters = Vec::with_capacity(es.len() - 1);
    for pair in es.windows(2) {
        let (s, s_next) = (pair[0], pair[1]);
        let len = s_next - s - 1;
        if len < 3 {
            return Err(ModelError::NarrowCounter(s));
        }
        if len > 62 {
            return Err(ModelError::TooWide(s));
        }
        let mut digit_sum: u64 = 0;
        let mut rightmost_carry: Option<i64> = None;
        for j in (s + 1)..s_next {
            let d = cells[(j - lo) as usize] as u64;
            debug_assert!(d <= 3);
            digit_sum += d << (j - s - 1);
            if d > 1 {
                rightmost_carry = Some(j);
            }
        }
        let len = len as u8;
        let cap = 1u64 << len;
        let state = digit_sum % cap;
        let countdown = if digit_sum >= cap {
            let j = rightmost_carry.expect("digit sum beyond capacity forces a digit above 1");
            (len as i64 + 1 - (j - s)) as u8
        } else {
            0
        };
        counters.push(Counter::new(len, state, countdown)?);
    }
    CounterLine::new(es[0], counters)
}

/// Convention for the unknown left neighbour of the leftmost counter.
#[derive(Debug, Clone)]
pub enum BoundaryDrive {
    /// Nothing is known: reliability is tracked against both extremes.
    Unknown,
    /// The left context is promised never to deliver an overflow
    /// (e.g. emitter-free blank context).
    Silent,
    /// Explicit overflow bit per step (replays; cycles when exhausted).
    Stream(Vec<bool>),
}

/// Evolves a counter line under a boundary convention, tracking the
/// certified reliability frontier.
#[derive(Debug, Clone)]
pub struct LineEvolution {
    first_e: i64,
    lo: Vec<Counter>,
    hi: Vec<Counter>,
    drive: BoundaryDrive,
    origin_index: Option<usize>,
    reliable_from: usize,
    time: u32,
    /// Cumulative emissions per counter, on the `lo` branch.
    emissions: Vec<u64>,
}

impl LineEvolution {
    pub fn new(line: &CounterLine, drive: BoundaryDrive) -> Self {
        LineEvolution {
            first_e: line.first_e,
            lo: line.counters.clone(),
            hi: line.counters.clone(),
            drive,
            origin_index: line.origin_index,
            reliable_from: 0,
            time: 0,
            emissions: vec![0; line.counters.len()],
        }
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    /// Index of the first counter whose trajectory is still pinned for every
    /// admissible boundary behaviour.
    pub fn reliable_from(&self) -> usize {
        self.reliable_from
    }

    pub fn is_reliable(&self, idx: usize) -> bool {
        idx >= self.reliable_from && idx < self.lo.len()
    }

    /// Current states. Reliable indices are exact; others follow the `lo`
    /// (minimum-drive) branch.
    pub fn counters(&self) -> &[Counter] {
        &self.lo
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.origin_index
    }

    pub fn cumulative_emissions(&self, idx: usize) -> u64 {
        self.emissions[idx]
    }

    pub fn as_line(&self) -> CounterLine {
        CounterLine {
            first_e: self.first_e,
            counters: self.lo.clone(),
            origin_index: self.origin_index,
        }
    }

    fn boundary_bits(&self) -> (bool, bool) {
        match &self.drive {
            BoundaryDrive::Unknown => (false, true),
            BoundaryDrive::Silent => (false, false),
            BoundaryDrive::Stream(bits) => {
                if bits.is_empty() {
                    (false, false)
                } else {
                    let b = bits[self.time as usize % bits.len()];
                    (b, b)
                }
            }
        }
    }

    pub fn step(&mut self) -> Result<(), ModelError> {
        let n = self.lo.len();
        let (lo_bit, hi_bit) = self.boundary_bits();

        // Arrival bits are read from pre-step states.
        let lo_emit: Vec<bool> = self.lo.iter().map(|c| c.emitting()).collect();
        let hi_emit: Vec<bool> = self.hi.iter().map(|c| c.emitting()).collect();

        // The first still-pinned counter becomes unpinned as soon as its
        // arrival bit differs between the branches.
        let next_unpin = if self.reliable_from < n {
            let j = self.reliable_from;
            let (bl, bh) = if j == 0 {
                (lo_bit, hi_bit)
            } else {
                (lo_emit[j - 1], hi_emit[j - 1])
            };
            bl != bh
        } else {
            false
        };

        for i in 0..n {
            let bl = if i == 0 { lo_bit } else { lo_emit[i - 1] };
            let bh = if i == 0 { hi_bit } else { hi_emit[i - 1] };
            self.lo[i] = increment(self.lo[i], 1 + bl as u8)?;
            self.hi[i] = increment(self.hi[i], 1 + bh as u8)?;
            if self.lo[i].emitting() {
                self.emissions[i] += 1;
            }
        }
        self.time += 1;
        if next_unpin {
            self.reliable_from += 1;
        }
        debug_assert!(self.lo[self.reliable_from.min(n - 1)..] == self.hi[self.reliable_from.min(n - 1)..] || self.reliable_from >= n);
        Ok(())
    }
}

/// One step of the line dynamics under an unknown left neighbour; returns
/// the stepped line and the index of the first counter still reliable.
pub fn step_line(line: &CounterLine) -> Result<(CounterLine, usize), ModelError> {
    let mut ev = LineEvolution::new(line, BoundaryDrive::Unknown);
    ev.step()?;
    Ok((ev.as_line(), ev.reliable_from()))
}

/// Report of a factor-commutation check.
#[derive(Debug, Clone)]
pub struct SemiConjugacyReport {
    pub steps: u32,
    pub compared: u64,
    /// `(step, emitter coordinate)` of each mismatch.
    pub mismatches: Vec<(u32, i64)>,
}

impl SemiConjugacyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Verifies that reading counters after `k` automaton steps equals `k` line
/// steps of the initially read counters, for all `k <= t`, on counters that
/// are simultaneously inside the window's validity and the line's
/// reliability frontier. Counters are matched by absolute emitter position.
pub fn check_semiconjugacy(cfg: &WindowConfig, t: u32) -> Result<SemiConjugacyReport, ModelError> {
    let line0 = factor_map(cfg)?;
    let e0 = line0.e_positions();
    let mut ev = LineEvolution::new(&line0, BoundaryDrive::Unknown);
    let mut row = cfg.clone();
    let mut compared = 0u64;
    let mut mismatches = Vec::new();
    for k in 1..=t {
        row = automaton::step_counter(&row)?;
        ev.step()?;
        let read = factor_map(&row)?;
        for (j, counter) in read.counters.iter().enumerate() {
            let s = read.s_position(j);
            // Position of this emitter in the initial line.
            let Ok(idx) = e0.binary_search(&s) else {
                continue;
            };
            if idx >= ev.counters().len() || !ev.is_reliable(idx) {
                continue;
            }
            compared += 1;
            if ev.counters()[idx] != *counter {
                mismatches.push((k, s));
            }
        }
    }
    Ok(SemiConjugacyReport {
        steps: t,
        compared,
        mismatches,
    })
}

/// Partial sum of the asymptotic emission-rate series with a rigorous tail
/// bound (every further term is at most an eighth of the last one kept).
#[derive(Debug, Clone)]
pub struct PeriodEstimate {
    /// Lower bound for the asymptotic emission rate (overflows per step).
    pub value: BigRational,
    /// Rigorous bound on the truncated tail; the true rate lies in
    /// `[value, value + truncation_error]`.
    pub truncation_error: BigRational,
    pub terms_used: usize,
}

impl PeriodEstimate {
    /// The asymptotic period (reciprocal rate), from the midpoint.
    pub fn period_approx(&self) -> f64 {
        let mid = &self.value + &self.truncation_error / BigRational::from_integer(2.into());
        let num: f64 = rational_to_f64(&mid);
        1.0 / num
    }

    pub fn value_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Adequate for display; exact arithmetic stays rational.
    let num = r.numer();
    let den = r.denom();
    let scale = BigInt::from(1u64 << 60);
    let scaled = (num * &scale) / den;
    let (sign, digits) = scaled.to_u64_digits();
    let mut v = 0f64;
    for &d in digits.iter().rev() {
        v = v * 1.8446744073709552e19 + d as f64;
    }
    if sign == num_bigint::Sign::Minus {
        v = -v;
    }
    v / (1u64 << 60) as f64
}

/// Emission rate of a counter from the lengths leftward of it:
/// `lengths[0]` is the counter's own length, `lengths[1]` its left
/// neighbour's, and so on. Sums `2^{-(l_0 + .. + l_k)}` over the given
/// prefix; the tail is bounded by a geometric series because every length is
/// at least 3.
pub fn rate_from_lengths(lengths: &[u8]) -> Result<PeriodEstimate, ModelError> {
    if lengths.is_empty() {
        return Err(ModelError::NoLengths);
    }
    for &l in lengths {
        if l < 3 {
            return Err(ModelError::BadCounter {
                len: l,
                state: 0,
                countdown: 0,
            });
        }
    }
    let mut exponent: u64 = 0;
    let mut sum = BigRational::zero();
    let mut last = BigRational::one();
    for &l in lengths {
        exponent += l as u64;
        last = BigRational::new(BigInt::one(), BigInt::one() << exponent as usize);
        sum += &last;
    }
    let tail = last / BigRational::from_integer(7.into());
    Ok(PeriodEstimate {
        value: sum,
        truncation_error: tail,
        terms_used: lengths.len(),
    })
}

/// Measured emission frequency of one counter over `t` steps, with the
/// counting-argument bracket derived from its left neighbour's measured
/// emissions.
#[derive(Debug, Clone)]
pub struct EmpiricalRate {
    pub frequency: f64,
    pub emissions: u64,
    pub neighbour_emissions: u64,
    pub steps: u32,
    /// `[(t + n_prev - len) / cap - 2, (cap + t + n_prev) / cap + 1]`
    /// scaled by `1/t`. The -2/+1 count slack makes the counting argument
    /// rigorous at finite `t` (initial state, countdown pipeline and the
    /// one-step arrival lag each cost at most one wrap).
    pub bracket: (f64, f64),
}

impl EmpiricalRate {
    pub fn bracket_contains(&self, rate: f64) -> bool {
        self.bracket.0 <= rate && rate <= self.bracket.1
    }
}

pub fn measured_rate(
    line: &CounterLine,
    idx: usize,
    t: u32,
    drive: BoundaryDrive,
) -> Result<EmpiricalRate, ModelError> {
    if idx >= line.len() {
        return Err(ModelError::BadIndex(idx));
    }
    let mut ev = LineEvolution::new(line, drive);
    for _ in 0..t {
        ev.step()?;
        if !ev.is_reliable(idx) {
            return Err(ModelError::ReliabilityExceeded(idx, ev.time()));
        }
    }
    let n_i = ev.cumulative_emissions(idx);
    let n_prev = if idx > 0 {
        ev.cumulative_emissions(idx - 1)
    } else {
        0
    };
    let c = line.counters[idx];
    let cap = c.capacity() as f64;
    let tf = t as f64;
    let lo = (((tf + n_prev as f64 - c.len() as f64) / cap) - 2.0).max(0.0) / tf;
    let hi = ((cap + tf + n_prev as f64) / cap + 1.0) / tf;
    Ok(EmpiricalRate {
        frequency: n_i as f64 / tf,
        emissions: n_i,
        neighbour_emissions: n_prev,
        steps: t,
        bracket: (lo, hi),
    })
}

/// Certified lower bound on how long the unknown context left of coordinate
/// `-n` can stay invisible to the origin counter.
#[derive(Debug, Clone, Copy)]
pub struct BlockingBound {
    pub steps: u32,
    /// True when the budget ran out before the frontier reached the origin;
    /// the true bound is at least `steps`.
    pub capped: bool,
    /// Index (into the given line) of the interface counter the adversary
    /// drives.
    pub interface: usize,
}

/// Simulates the sub-line of counters whose emitters sit at coordinates
/// `>= -n` against the two extreme left-boundary drives and returns the
/// first step at which the origin counter's arrivals stop being pinned.
pub fn blocking_time(line: &CounterLine, n: i64, budget: u32) -> Result<BlockingBound, ModelError> {
    let origin = line.origin_index.ok_or(ModelError::InsufficientCoverage(n))?;
    let first = (0..line.len())
        .find(|&k| line.s_position(k) >= -n)
        .ok_or(ModelError::InsufficientCoverage(n))?;
    if first > origin {
        return Err(ModelError::InsufficientCoverage(n));
    }
    let sub = CounterLine::new(
        line.s_position(first),
        line.counters[first..=origin].to_vec(),
    )?;
    let watch = origin - first;
    let mut ev = LineEvolution::new(&sub, BoundaryDrive::Unknown);
    for step in 1..=budget {
        ev.step()?;
        if ev.reliable_from() > watch {
            return Ok(BlockingBound {
                steps: step,
                capped: false,
                interface: first,
            });
        }
    }
    Ok(BlockingBound {
        steps: budget,
        capped: true,
        interface: first,
    })
}

/// A cell window driven on its left by a concrete chain of model counters
/// over blank context: exact joint evolution with no validity loss. The
/// chain's rightmost counter is the one whose digits end just left of the
/// window's anchor emitter.
#[derive(Debug, Clone)]
pub struct ChainedOrbit {
    chain: Vec<Counter>,
    window: DrivenWindow,
    time: u32,
}

impl ChainedOrbit {
    pub fn new(chain: Vec<Counter>, window: DrivenWindow) -> Self {
        ChainedOrbit {
            chain,
            window,
            time: 0,
        }
    }

    pub fn window(&self) -> &DrivenWindow {
        &self.window
    }

    pub fn chain(&self) -> &[Counter] {
        &self.chain
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn step(&mut self) -> Result<(), ModelError> {
        let bit = self.chain.last().map(|c| c.emitting()).unwrap_or(false);
        let emit: Vec<bool> = self.chain.iter().map(|c| c.emitting()).collect();
        for i in 0..self.chain.len() {
            let b = if i == 0 { false } else { emit[i - 1] };
            self.chain[i] = increment(self.chain[i], 1 + b as u8)?;
        }
        self.window.step(bit);
        self.time += 1;
        Ok(())
    }
}

/// Counter-line text format: header `first_e=<coord>`, then one `l:c:r`
/// token per counter.
pub mod text {
    use super::*;

    pub fn write_line(line: &CounterLine) -> String {
        let mut out = format!("first_e={}\n", line.first_e);
        let tokens: Vec<String> = line
            .counters
            .iter()
            .map(|c| format!("{}:{}:{}", c.len(), c.state(), c.countdown()))
            .collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
        out
    }

    pub fn read_line(text: &str) -> Result<CounterLine, ModelError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ModelError::BadText("empty input".into()))?;
        let first_e = header
            .trim()
            .strip_prefix("first_e=")
            .ok_or_else(|| ModelError::BadText("missing first_e header".into()))?
            .parse::<i64>()
            .map_err(|_| ModelError::BadText("bad first_e".into()))?;
        let body = lines
            .next()
            .ok_or_else(|| ModelError::BadText("missing counter tokens".into()))?;
        let mut counters = Vec::new();
        for tok in body.split_whitespace() {
            let parts: Vec<&str> = tok.split(':').collect();
            if parts.len() != 3 {
                return Err(ModelError::BadText(format!("bad token {tok:?}")));
            }
            let len = parts[0]
                .parse()
                .map_err(|_| ModelError::BadText(format!("bad len in {tok:?}")))?;
            let state = parts[1]
                .parse()
                .map_err(|_| ModelError::BadText(format!("bad state in {tok:?}")))?;
            let countdown = parts[2]
                .parse()
                .map_err(|_| ModelError::BadText(format!("bad countdown in {tok:?}")))?;
            counters.push(Counter::new(len, state, countdown)?);
        }
        CounterLine::new(first_e, counters)
    }
}
