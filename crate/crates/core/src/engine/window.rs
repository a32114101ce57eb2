//! Windowed, cyclic and set-valued configurations with exact validity
//! bookkeeping.
//!
//! A `WindowConfig` stores a finite slice of a bi-infinite configuration in
//! absolute coordinates together with the sub-interval of coordinates whose
//! values are guaranteed to equal the true orbit. Stepping shrinks both the
//! stored slice and the valid interval by the rule's radii; out-of-window
//! cells are never defaulted.

use super::{Alphabet, EngineError, Rule, Sym, SymSet};

/// Finite slice of a bi-infinite symbol sequence with a validity interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowConfig {
    origin: i64,
    cells: Vec<Sym>,
    time: u32,
    valid_lo: i64,
    valid_hi: i64,
    e_separated: bool,
}

impl WindowConfig {
    /// A fresh window at time 0; every stored cell is valid.
    pub fn new(origin: i64, cells: Vec<Sym>) -> Self {
        assert!(!cells.is_empty(), "window must hold at least one cell");
        let hi = origin + cells.len() as i64 - 1;
        WindowConfig {
            origin,
            cells,
            time: 0,
            valid_lo: origin,
            valid_hi: hi,
            e_separated: false,
        }
    }

    pub(crate) fn from_parts(
        origin: i64,
        cells: Vec<Sym>,
        time: u32,
        valid_lo: i64,
        valid_hi: i64,
        e_separated: bool,
    ) -> Self {
        WindowConfig {
            origin,
            cells,
            time,
            valid_lo,
            valid_hi,
            e_separated,
        }
    }

    /// Marks the window as a slice of a configuration whose emitters are
    /// promised (by whoever built it) to be at least four cells apart,
    /// including unseen context. The counter automaton steps such windows
    /// with its short stencil.
    pub fn certify_e_separated(mut self) -> Self {
        self.e_separated = true;
        self
    }

    pub fn is_e_separated(&self) -> bool {
        self.e_separated
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// First and last stored coordinate.
    pub fn span(&self) -> (i64, i64) {
        (self.origin, self.origin + self.cells.len() as i64 - 1)
    }

    /// Inclusive interval of coordinates guaranteed to match the true orbit.
    pub fn valid(&self) -> (i64, i64) {
        (self.valid_lo, self.valid_hi)
    }

    pub fn valid_len(&self) -> i64 {
        self.valid_hi - self.valid_lo + 1
    }

    /// Stored cell at an absolute coordinate, valid or not.
    pub fn get(&self, coord: i64) -> Option<Sym> {
        let (lo, hi) = self.span();
        if coord < lo || coord > hi {
            return None;
        }
        Some(self.cells[(coord - self.origin) as usize])
    }

    /// Cell at an absolute coordinate, only if inside the valid interval.
    pub fn get_valid(&self, coord: i64) -> Option<Sym> {
        if coord < self.valid_lo || coord > self.valid_hi {
            return None;
        }
        self.get(coord)
    }

    pub fn cells(&self) -> &[Sym] {
        &self.cells
    }

    /// The valid slice and the coordinate of its first cell.
    pub fn valid_cells(&self) -> (&[Sym], i64) {
        let a = (self.valid_lo - self.origin) as usize;
        let b = (self.valid_hi - self.origin) as usize;
        (&self.cells[a..=b], self.valid_lo)
    }

    /// Overwrites one stored cell. Used to build perturbed configurations.
    pub fn set(&mut self, coord: i64, s: Sym) {
        let (lo, hi) = self.span();
        assert!(coord >= lo && coord <= hi, "coordinate outside window");
        self.cells[(coord - self.origin) as usize] = s;
    }

    /// One exact step. The stored slice loses `left_radius` cells on the
    /// left and `right_radius` on the right; the valid interval shrinks the
    /// same way. Fails when the valid interval no longer supports a step.
    pub fn step(&self, rule: &dyn Rule) -> Result<WindowConfig, EngineError> {
        let lr = rule.left_radius() as i64;
        let rr = rule.right_radius() as i64;
        if self.valid_len() < lr + rr + 1 {
            return Err(EngineError::WindowExhausted);
        }
        let out = rule.step_row(&self.cells);
        debug_assert_eq!(out.len(), self.cells.len() - (lr + rr) as usize);
        Ok(WindowConfig {
            origin: self.origin + lr,
            cells: out,
            time: self.time + 1,
            valid_lo: self.valid_lo + lr,
            valid_hi: self.valid_hi - rr,
            e_separated: self.e_separated,
        })
    }

    /// Restricts the stored slice (and validity) to `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> WindowConfig {
        let (slo, shi) = self.span();
        let lo = lo.max(slo);
        let hi = hi.min(shi);
        assert!(lo <= hi, "empty restriction");
        let a = (lo - self.origin) as usize;
        let b = (hi - self.origin) as usize;
        WindowConfig {
            origin: lo,
            cells: self.cells[a..=b].to_vec(),
            time: self.time,
            valid_lo: self.valid_lo.max(lo),
            valid_hi: self.valid_hi.min(hi),
            e_separated: self.e_separated,
        }
    }
}

/// A space-time diagram: row `k` is the configuration after `k` steps.
#[derive(Debug, Clone)]
pub struct SpaceTimeDiagram {
    pub rows: Vec<WindowConfig>,
}

impl SpaceTimeDiagram {
    pub fn depth(&self) -> u32 {
        self.rows.len() as u32 - 1
    }
}

/// Iterates `rule` for `t` steps. Errors with the achieved depth when the
/// window runs out before `t`.
pub fn orbit(cfg: &WindowConfig, rule: &dyn Rule, t: u32) -> Result<SpaceTimeDiagram, EngineError> {
    let mut rows = Vec::with_capacity(t as usize + 1);
    rows.push(cfg.clone());
    for k in 0..t {
        match rows.last().unwrap().step(rule) {
            Ok(next) => rows.push(next),
            Err(EngineError::WindowExhausted) => {
                return Err(EngineError::PartialOrbit {
                    achieved: k,
                    requested: t,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SpaceTimeDiagram { rows })
}

/// Spatially periodic configuration of period `cells.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicConfig {
    pub cells: Vec<Sym>,
    pub time: u32,
}

impl CyclicConfig {
    pub fn new(cells: Vec<Sym>) -> Self {
        assert!(!cells.is_empty());
        CyclicConfig { cells, time: 0 }
    }

    pub fn period(&self) -> usize {
        self.cells.len()
    }
}

/// Exact step of a periodic point; no validity loss.
pub fn step_cyclic(cfg: &CyclicConfig, rule: &dyn Rule) -> Result<CyclicConfig, EngineError> {
    let p = cfg.period();
    let n = rule.neighbourhood_len();
    if p < n {
        return Err(EngineError::PeriodTooShort {
            period: p,
            neighbourhood: n,
        });
    }
    let lr = rule.left_radius();
    let mut out = Vec::with_capacity(p);
    let mut neigh = vec![0 as Sym; n];
    for i in 0..p {
        for (k, slot) in neigh.iter_mut().enumerate() {
            let j = (i + p + k - lr) % p;
            *slot = cfg.cells[j];
        }
        out.push(rule.apply(&neigh));
    }
    Ok(CyclicConfig {
        cells: out,
        time: cfg.time + 1,
    })
}

pub fn orbit_cyclic(
    cfg: &CyclicConfig,
    rule: &dyn Rule,
    t: u32,
) -> Result<Vec<CyclicConfig>, EngineError> {
    let mut rows = vec![cfg.clone()];
    for _ in 0..t {
        rows.push(step_cyclic(rows.last().unwrap(), rule)?);
    }
    Ok(rows)
}

/// Set-valued configuration: each cell holds a non-empty subset of the
/// alphabet. Sound over-approximation of every concrete refinement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetConfig {
    origin: i64,
    sets: Vec<SymSet>,
    time: u32,
    valid_lo: i64,
    valid_hi: i64,
}

impl SetConfig {
    pub fn new(origin: i64, sets: Vec<SymSet>) -> Result<Self, EngineError> {
        for (k, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return Err(EngineError::EmptyCell(origin + k as i64));
            }
        }
        let hi = origin + sets.len() as i64 - 1;
        Ok(SetConfig {
            origin,
            sets,
            time: 0,
            valid_lo: origin,
            valid_hi: hi,
        })
    }

    /// All-singleton lift of a concrete window (over its stored span).
    pub fn from_window(cfg: &WindowConfig) -> Self {
        let sets = cfg.cells().iter().map(|&s| SymSet::singleton(s)).collect();
        SetConfig {
            origin: cfg.origin(),
            sets,
            time: cfg.time(),
            valid_lo: cfg.valid().0,
            valid_hi: cfg.valid().1,
        }
    }

    /// Widens every cell at coordinates `< bound` (or `> bound` when
    /// `from_left` is false) to the full alphabet.
    pub fn widen_beyond(mut self, alphabet: Alphabet, bound: i64, from_left: bool) -> Self {
        let full = alphabet.full_set();
        let (lo, _) = self.span();
        for (k, slot) in self.sets.iter_mut().enumerate() {
            let coord = lo + k as i64;
            if (from_left && coord < bound) || (!from_left && coord > bound) {
                *slot = full;
            }
        }
        self
    }

    pub fn span(&self) -> (i64, i64) {
        (self.origin, self.origin + self.sets.len() as i64 - 1)
    }

    pub fn valid(&self) -> (i64, i64) {
        (self.valid_lo, self.valid_hi)
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn get(&self, coord: i64) -> Option<SymSet> {
        let (lo, hi) = self.span();
        if coord < lo || coord > hi {
            return None;
        }
        Some(self.sets[(coord - self.origin) as usize])
    }

    pub fn get_valid(&self, coord: i64) -> Option<SymSet> {
        if coord < self.valid_lo || coord > self.valid_hi {
            return None;
        }
        self.get(coord)
    }

    fn step(&self, rule: &dyn Rule) -> Result<SetConfig, EngineError> {
        let lr = rule.left_radius() as i64;
        let rr = rule.right_radius() as i64;
        if self.valid_hi - self.valid_lo + 1 < lr + rr + 1 {
            return Err(EngineError::WindowExhausted);
        }
        let out = rule.step_sets_row(&self.sets);
        Ok(SetConfig {
            origin: self.origin + lr,
            sets: out,
            time: self.time + 1,
            valid_lo: self.valid_lo + lr,
            valid_hi: self.valid_hi - rr,
        })
    }

    /// True when `cfg` is cellwise contained in `self` on `self`'s span
    /// (cells outside `cfg`'s span count as not contained).
    pub fn contains_window(&self, cfg: &WindowConfig) -> bool {
        let (lo, hi) = self.span();
        (lo..=hi).all(|coord| match (self.get(coord), cfg.get(coord)) {
            (Some(set), Some(sym)) => set.contains(sym),
            _ => false,
        })
    }
}

/// Sound set-valued orbit: row `k` cellwise contains `F^k(y)` for every
/// concrete `y` cellwise contained in `cfg`.
pub fn set_valued_orbit(
    cfg: &SetConfig,
    rule: &dyn Rule,
    t: u32,
) -> Result<Vec<SetConfig>, EngineError> {
    let mut rows = vec![cfg.clone()];
    for k in 0..t {
        match rows.last().unwrap().step(rule) {
            Ok(next) => rows.push(next),
            Err(EngineError::WindowExhausted) => {
                return Err(EngineError::PartialOrbit {
                    achieved: k,
                    requested: t,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// Extremal disagreeing coordinates between two orbits at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffFront {
    pub step: u32,
    /// `None` when the orbits agree on the whole compared interval.
    pub leftmost: Option<i64>,
    pub rightmost: Option<i64>,
}

/// Runs both windows `t` steps and reports, per step, the extremal
/// coordinates where they disagree inside the common valid interval.
pub fn diff_front(
    x: &WindowConfig,
    y: &WindowConfig,
    rule: &dyn Rule,
    t: u32,
) -> Result<Vec<DiffFront>, EngineError> {
    if x.span() != y.span() {
        return Err(EngineError::NotComparable("windows cover different spans"));
    }
    let mut fronts = Vec::with_capacity(t as usize + 1);
    let mut xs = x.clone();
    let mut ys = y.clone();
    for step in 0..=t {
        if step > 0 {
            xs = xs.step(rule)?;
            ys = ys.step(rule)?;
        }
        let lo = xs.valid().0.max(ys.valid().0);
        let hi = xs.valid().1.min(ys.valid().1);
        let mut leftmost = None;
        let mut rightmost = None;
        for coord in lo..=hi {
            if xs.get(coord) != ys.get(coord) {
                if leftmost.is_none() {
                    leftmost = Some(coord);
                }
                rightmost = Some(coord);
            }
        }
        fronts.push(DiffFront {
            step,
            leftmost,
            rightmost,
        });
    }
    Ok(fronts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rules;

    #[test]
    fn step_shrinks_validity_by_radius() {
        let rule = rules::identity(Alphabet::binary(), 1);
        let cfg = WindowConfig::new(-3, vec![0, 1, 0, 1, 1, 0, 1]);
        let next = cfg.step(&rule).unwrap();
        assert_eq!(next.valid(), (-2, 2));
        assert_eq!(next.time(), 1);
        for c in -2..=2 {
            assert_eq!(next.get_valid(c), cfg.get(c));
        }
    }

    #[test]
    fn additive_single_one_spreads() {
        // ...0001000... -> ...0010100...
        let rule = rules::additive_binary();
        let mut cells = vec![0; 9];
        cells[4] = 1;
        let cfg = WindowConfig::new(-4, cells);
        let next = cfg.step(&rule).unwrap();
        let expect = [0, 0, 1, 0, 1, 0, 0];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(next.get_valid(-3 + k as i64), Some(e));
        }
    }

    #[test]
    fn window_exhaustion_is_loud() {
        let rule = rules::additive_binary();
        let cfg = WindowConfig::new(0, vec![1, 0]);
        assert!(matches!(cfg.step(&rule), Err(EngineError::WindowExhausted)));
        let cfg = WindowConfig::new(0, vec![1, 0, 1, 1, 0]);
        let err = orbit(&cfg, &rule, 5).unwrap_err();
        assert!(matches!(
            err,
            EngineError::PartialOrbit {
                achieved: 2,
                requested: 5
            }
        ));
    }

    #[test]
    fn orbit_depth_zero_is_single_row() {
        let rule = rules::additive_binary();
        let cfg = WindowConfig::new(0, vec![1, 0, 1]);
        let d = orbit(&cfg, &rule, 0).unwrap();
        assert_eq!(d.rows.len(), 1);
    }

    #[test]
    fn pascal_triangle_mod_two() {
        // Single 1, additive rule: row t has ones exactly at offsets where
        // the binomial C(t, (t+j)/2)... for this rule the support is
        // {-t, -t+2, ..., t} with all coefficients 1 (mod-2 Pascal on the
        // even sublattice). Verify by brute force against direct convolution.
        let rule = rules::additive_binary();
        let t = 4;
        let mut cells = vec![0; 4 * t + 1];
        cells[2 * t] = 1;
        let cfg = WindowConfig::new(-(2 * t as i64), cells);
        let diagram = orbit(&cfg, &rule, t as u32).unwrap();

        // Independent oracle: evolve an explicit Vec with wide zero padding.
        let mut row = vec![0u8; 8 * t + 1];
        row[4 * t] = 1;
        for _ in 0..t {
            let mut next = vec![0u8; row.len()];
            for i in 1..row.len() - 1 {
                next[i] = (row[i - 1] + row[i + 1]) % 2;
            }
            row = next;
        }
        let last = diagram.rows.last().unwrap();
        let (lo, hi) = last.valid();
        for c in lo..=hi {
            assert_eq!(last.get(c).unwrap(), row[(c + 4 * t as i64) as usize]);
        }
    }

    #[test]
    fn cyclic_additive_period_four() {
        let rule = rules::additive_binary();
        let cfg = CyclicConfig::new(vec![0, 0, 0, 1]);
        let next = step_cyclic(&cfg, &rule).unwrap();
        // Brute-force neighbourhood evaluation: each cell = left + right mod 2.
        assert_eq!(next.cells, vec![1, 0, 1, 0]);
    }

    #[test]
    fn cyclic_identity_fixed() {
        let rule = rules::identity(Alphabet::binary(), 1);
        let cfg = CyclicConfig::new(vec![1, 0, 1, 1]);
        assert_eq!(step_cyclic(&cfg, &rule).unwrap().cells, cfg.cells);
    }

    #[test]
    fn cyclic_too_short_errors() {
        let rule = rules::additive_binary();
        let cfg = CyclicConfig::new(vec![1, 0]);
        assert!(matches!(
            step_cyclic(&cfg, &rule),
            Err(EngineError::PeriodTooShort { .. })
        ));
    }

    #[test]
    fn set_orbit_of_singletons_matches_orbit() {
        let rule = rules::additive_binary();
        let cfg = WindowConfig::new(-5, vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]);
        let sets = SetConfig::from_window(&cfg);
        let d = orbit(&cfg, &rule, 3).unwrap();
        let sd = set_valued_orbit(&sets, &rule, 3).unwrap();
        for (row, srow) in d.rows.iter().zip(&sd) {
            let (lo, hi) = srow.valid();
            for c in lo..=hi {
                assert_eq!(
                    srow.get(c).unwrap().the_symbol(),
                    Some(row.get(c).unwrap())
                );
            }
        }
    }

    #[test]
    fn one_full_cell_spreads_at_speed_one() {
        // Full-alphabet cell at -1, singletons elsewhere: after one additive
        // step cells -2 and 0 are full, the rest singleton.
        let rule = rules::additive_binary();
        let mut sets: Vec<SymSet> = vec![0, 1, 1, 0, 1, 0, 1].iter().map(|&s| SymSet::singleton(s)).collect();
        sets[2] = Alphabet::binary().full_set(); // coordinate -1
        let cfg = SetConfig::new(-3, sets).unwrap();
        let rows = set_valued_orbit(&cfg, &rule, 1).unwrap();
        let r = &rows[1];
        assert!(!r.get(-2).unwrap().is_singleton());
        assert!(!r.get(0).unwrap().is_singleton());
        assert!(r.get(-1).unwrap().is_singleton());
        assert!(r.get(1).unwrap().is_singleton());
    }

    #[test]
    fn diff_front_identical_is_none() {
        let rule = rules::additive_binary();
        let cfg = WindowConfig::new(-8, vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0, 1, 1]);
        let fronts = diff_front(&cfg, &cfg.clone(), &rule, 4).unwrap();
        assert!(fronts.iter().all(|f| f.leftmost.is_none()));
    }

    #[test]
    fn diff_front_reaches_origin_at_flip_distance() {
        let rule = rules::additive_binary();
        for n in 1..=6i64 {
            let width = 4 * n + 3;
            let cells: Vec<Sym> = (0..width).map(|k| ((k * 7 + 3) % 2) as Sym).collect();
            let origin = -(2 * n + 1);
            let x = WindowConfig::new(origin, cells);
            let mut y = x.clone();
            y.set(-n, 1 - y.get(-n).unwrap());
            let fronts = diff_front(&x, &y, &rule, n as u32).unwrap();
            // The rightmost front moves one cell per step and reaches 0 at
            // step exactly n.
            for f in &fronts {
                let expect = -n + f.step as i64;
                assert_eq!(f.rightmost, Some(expect));
            }
            assert_eq!(fronts.last().unwrap().rightmost, Some(0));
        }
    }
}
