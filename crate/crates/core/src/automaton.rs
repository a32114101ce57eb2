//! The counter cellular automaton on the five-symbol alphabet
//! `{0, 1, 2, 3, E}`.
//!
//! `E` is an emitter separating finite digit blocks ("counters"). Each step
//! the emitter feeds `+1` into the first digit on its right (`+2` when an
//! overflow from the counter on the emitter's left arrives, visible as a `2`
//! directly left of the emitter); digit values `2` and `3` mean "0 plus a
//! pending carry" and "1 plus a pending carry", and carries travel right one
//! cell per step. The full automaton is the composition of a spacing
//! projection (an emitter with another emitter within distance three is
//! demoted to the digit `0`) followed by the digit map.
//!
//! On configurations whose emitters are pairwise at least four cells apart
//! the projection is the identity, emitters never move, and the dynamics has
//! left radius 2 and right radius 0; windows carrying that certificate lose
//! validity only on the left, two cells per step.

use crate::engine::{self, Alphabet, EngineError, Rule, Sym, SymSet, WindowConfig};
use thiserror::Error;

/// Symbol codes. Digits are their own codes; the emitter is 4.
pub const EMITTER: Sym = 4;

pub fn counter_alphabet() -> Alphabet {
    Alphabet::new(5).expect("five-symbol alphabet")
}

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("window is not emitter-anchored: cell at {0} is not an emitter")]
    NotEmitterAnchored(i64),
    #[error("emitter-separation certificate violated near coordinate {0}")]
    CertificateViolated(i64),
    #[error("symbol {sym} at coordinate {coord} is not a counter symbol")]
    BadSymbol { sym: Sym, coord: i64 },
}

#[inline]
fn is_carry(s: Sym) -> bool {
    s == 2 || s == 3
}

/// Digit map: new value of a cell from `(two-left, left, centre)`.
/// Emitters are fixed; a non-emitter cell drops 2 if it holds a pending
/// carry, gains 1 if its left neighbour holds one, and gains `1 + [two-left
/// cell is 2]` if its left neighbour is the emitter.
#[inline]
pub fn digit_local(a: Sym, b: Sym, c: Sym) -> Sym {
    if c == EMITTER {
        return EMITTER;
    }
    let mut v = c as i8;
    if is_carry(c) {
        v -= 2;
    }
    if b == EMITTER {
        v += 1 + (a == 2) as i8;
    } else if is_carry(b) {
        v += 1;
    }
    debug_assert!((0..4).contains(&v));
    v as Sym
}

/// Spacing projection on a radius-3 neighbourhood (centre at index 3): a
/// non-emitter passes through; an emitter with another emitter within
/// distance three becomes the digit 0.
#[inline]
pub fn spacing_local(w: &[Sym]) -> Sym {
    debug_assert_eq!(w.len(), 7);
    let c = w[3];
    if c != EMITTER {
        return c;
    }
    let crowded = w
        .iter()
        .enumerate()
        .any(|(k, &s)| k != 3 && s == EMITTER);
    if crowded {
        0
    } else {
        EMITTER
    }
}

#[inline]
fn digit_local_sets(a: SymSet, b: SymSet, c: SymSet) -> SymSet {
    let mut out = SymSet::empty();
    if c.contains(EMITTER) {
        out.insert(EMITTER);
    }
    // Possible increments from the left context.
    let mut deltas = SymSet::empty(); // reused as a small bitset of {0,1,2}
    if b.iter().any(|s| s != EMITTER && is_carry(s)) {
        deltas.insert(1);
    }
    if b.iter().any(|s| s != EMITTER && !is_carry(s)) {
        deltas.insert(0);
    }
    if b.contains(EMITTER) {
        if a.contains(2) {
            deltas.insert(2);
        }
        if a.iter().any(|s| s != 2) {
            deltas.insert(1);
        }
    }
    for cv in c.iter() {
        if cv == EMITTER {
            continue;
        }
        let base = cv - 2 * is_carry(cv) as Sym;
        for d in deltas.iter() {
            out.insert(base + d);
        }
    }
    out
}

#[inline]
fn spacing_local_sets(w: &[SymSet]) -> SymSet {
    debug_assert_eq!(w.len(), 7);
    let c = w[3];
    let mut out = SymSet::empty();
    for s in c.iter() {
        if s != EMITTER {
            out.insert(s);
        }
    }
    if c.contains(EMITTER) {
        let some_neighbour_emitter = w
            .iter()
            .enumerate()
            .any(|(k, s)| k != 3 && s.contains(EMITTER));
        let all_neighbours_can_be_plain = w
            .iter()
            .enumerate()
            .all(|(k, s)| k == 3 || s.iter().any(|v| v != EMITTER));
        if some_neighbour_emitter {
            out.insert(0);
        }
        if all_neighbours_can_be_plain {
            out.insert(EMITTER);
        }
    }
    out
}

/// The composed automaton as a generic rule: left radius 5, right radius 3.
/// Used when no emitter-spacing certificate is available.
#[derive(Clone, Copy, Default)]
pub struct CounterRule;

impl Rule for CounterRule {
    fn alphabet(&self) -> Alphabet {
        counter_alphabet()
    }

    fn left_radius(&self) -> usize {
        5
    }

    fn right_radius(&self) -> usize {
        3
    }

    fn apply(&self, w: &[Sym]) -> Sym {
        debug_assert_eq!(w.len(), 9);
        let p0 = spacing_local(&w[0..7]);
        let p1 = spacing_local(&w[1..8]);
        let p2 = spacing_local(&w[2..9]);
        digit_local(p0, p1, p2)
    }

    fn step_row(&self, cells: &[Sym]) -> Vec<Sym> {
        let projected: Vec<Sym> = cells.windows(7).map(spacing_local).collect();
        projected
            .windows(3)
            .map(|w| digit_local(w[0], w[1], w[2]))
            .collect()
    }

    fn apply_sets(&self, w: &[SymSet]) -> SymSet {
        let p0 = spacing_local_sets(&w[0..7]);
        let p1 = spacing_local_sets(&w[1..8]);
        let p2 = spacing_local_sets(&w[2..9]);
        digit_local_sets(p0, p1, p2)
    }

    fn step_sets_row(&self, cells: &[SymSet]) -> Vec<SymSet> {
        let projected: Vec<SymSet> = cells.windows(7).map(spacing_local_sets).collect();
        projected
            .windows(3)
            .map(|w| digit_local_sets(w[0], w[1], w[2]))
            .collect()
    }

    fn name(&self) -> &str {
        "counter"
    }
}

/// The digit map alone, as a rule with left radius 2 and right radius 0.
/// Equals the composed automaton on emitter-separated configurations.
#[derive(Clone, Copy, Default)]
pub struct DigitRule;

impl Rule for DigitRule {
    fn alphabet(&self) -> Alphabet {
        counter_alphabet()
    }

    fn left_radius(&self) -> usize {
        2
    }

    fn right_radius(&self) -> usize {
        0
    }

    fn apply(&self, w: &[Sym]) -> Sym {
        digit_local(w[0], w[1], w[2])
    }

    fn apply_sets(&self, w: &[SymSet]) -> SymSet {
        digit_local_sets(w[0], w[1], w[2])
    }

    fn name(&self) -> &str {
        "counter-digit"
    }
}

/// Checks that the valid cells of `cfg` have all emitter gaps of at least
/// three digits (four cells).
fn check_spacing(cfg: &WindowConfig) -> Result<(), AutomatonError> {
    let (cells, lo) = cfg.valid_cells();
    let mut last_e: Option<i64> = None;
    for (k, &s) in cells.iter().enumerate() {
        if s == EMITTER {
            let coord = lo + k as i64;
            if let Some(prev) = last_e {
                if coord - prev < 4 {
                    return Err(AutomatonError::CertificateViolated(coord));
                }
            }
            last_e = Some(coord);
        }
    }
    Ok(())
}

/// One step of the counter automaton. Certified emitter-separated windows
/// are stepped with the short stencil (validity shrinks by 2 on the left
/// only); uncertified windows pay the full composite radii (5 left, 3
/// right).
pub fn step_counter(cfg: &WindowConfig) -> Result<WindowConfig, AutomatonError> {
    if cfg.is_e_separated() {
        check_spacing(cfg)?;
        Ok(cfg.step(&DigitRule)?)
    } else {
        Ok(cfg.step(&CounterRule)?)
    }
}

/// Iterates `step_counter`; errors carry the achieved depth.
pub fn orbit_counter(
    cfg: &WindowConfig,
    t: u32,
) -> Result<engine::SpaceTimeDiagram, AutomatonError> {
    let mut rows = Vec::with_capacity(t as usize + 1);
    rows.push(cfg.clone());
    for k in 0..t {
        match step_counter(rows.last().unwrap()) {
            Ok(next) => rows.push(next),
            Err(AutomatonError::Engine(EngineError::WindowExhausted)) => {
                return Err(EngineError::PartialOrbit {
                    achieved: k,
                    requested: t,
                }
                .into())
            }
            Err(e) => return Err(e),
        }
    }
    Ok(engine::SpaceTimeDiagram { rows })
}

/// Summary of emitter structure inside a window's valid interval.
#[derive(Debug, Clone)]
pub struct OmegaReport {
    pub e_positions: Vec<i64>,
    /// Minimal number of digits between consecutive emitters, when at least
    /// two are visible.
    pub min_gap: Option<i64>,
    /// An emitter at coordinate <= 0 / >= 0 is visible.
    pub has_left_e: bool,
    pub has_right_e: bool,
    pub violations: Vec<OmegaViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OmegaViolation {
    /// Consecutive emitters with fewer than three digits between them.
    NarrowGap { left: i64, right: i64, digits: i64 },
}

impl OmegaReport {
    /// The window looks like a slice of an emitter-rich, well-spaced
    /// configuration.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.has_left_e && self.has_right_e
    }
}

pub fn validate_omega(cfg: &WindowConfig) -> OmegaReport {
    let (cells, lo) = cfg.valid_cells();
    let mut e_positions = Vec::new();
    for (k, &s) in cells.iter().enumerate() {
        if s == EMITTER {
            e_positions.push(lo + k as i64);
        }
    }
    let mut min_gap = None;
    let mut violations = Vec::new();
    for pair in e_positions.windows(2) {
        let digits = pair[1] - pair[0] - 1;
        min_gap = Some(match min_gap {
            None => digits,
            Some(g) if digits < g => digits,
            Some(g) => g,
        });
        if digits < 3 {
            violations.push(OmegaViolation::NarrowGap {
                left: pair[0],
                right: pair[1],
                digits,
            });
        }
    }
    OmegaReport {
        has_left_e: e_positions.iter().any(|&p| p <= 0),
        has_right_e: e_positions.iter().any(|&p| p >= 0),
        e_positions,
        min_gap,
        violations,
    }
}

/// A structural defect found in an orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureIssue {
    pub row: u32,
    pub coord: i64,
    pub kind: StructureIssueKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureIssueKind {
    /// Emitter appeared or vanished after the first step.
    EmitterMoved,
    /// The word 222 occurred at row >= 2.
    TripleCarry,
    /// A 3 not directly preceded by an emitter.
    OrphanThree,
    /// More than two 2s between consecutive emitters at row >= 2.
    CrowdedCarries,
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub issues: Vec<StructureIssue>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Structural sanity checks for an orbit of the counter automaton, inside
/// validity: emitters are frozen from row 1 on; no `222` and at most two 2s
/// per counter from row 2 on; every 3 sits directly after an emitter.
pub fn orbit_structure_report(rows: &[WindowConfig]) -> StructureReport {
    let mut issues = Vec::new();
    let mut frozen: Option<Vec<i64>> = None;
    for (k, row) in rows.iter().enumerate() {
        let (cells, lo) = row.valid_cells();
        let row_no = k as u32;

        // Orphan 3 check (all rows; a 3 at the left valid edge cannot be
        // judged and is skipped).
        for (j, &s) in cells.iter().enumerate() {
            if s == 3 && j > 0 && cells[j - 1] != EMITTER {
                issues.push(StructureIssue {
                    row: row_no,
                    coord: lo + j as i64,
                    kind: StructureIssueKind::OrphanThree,
                });
            }
        }

        if k >= 2 {
            for j in 0..cells.len().saturating_sub(2) {
                if cells[j] == 2 && cells[j + 1] == 2 && cells[j + 2] == 2 {
                    issues.push(StructureIssue {
                        row: row_no,
                        coord: lo + j as i64,
                        kind: StructureIssueKind::TripleCarry,
                    });
                }
            }
            // Carries per fully visible counter.
            let es: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == EMITTER)
                .map(|(j, _)| j)
                .collect();
            for pair in es.windows(2) {
                let twos = cells[pair[0] + 1..pair[1]].iter().filter(|&&s| s == 2).count();
                if twos > 2 {
                    issues.push(StructureIssue {
                        row: row_no,
                        coord: lo + pair[0] as i64,
                        kind: StructureIssueKind::CrowdedCarries,
                    });
                }
            }
        }

        if k >= 1 {
            let here: Vec<i64> = cells
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == EMITTER)
                .map(|(j, _)| lo + j as i64)
                .collect();
            match &frozen {
                None => frozen = Some(here),
                Some(prev) => {
                    let (vlo, vhi) = row.valid();
                    let prev_in: Vec<i64> = prev
                        .iter()
                        .copied()
                        .filter(|&p| p >= vlo && p <= vhi)
                        .collect();
                    if prev_in != here {
                        let coord = here
                            .iter()
                            .find(|p| !prev_in.contains(p))
                            .or_else(|| prev_in.iter().find(|p| !here.contains(p)))
                            .copied()
                            .unwrap_or(vlo);
                        issues.push(StructureIssue {
                            row: row_no,
                            coord,
                            kind: StructureIssueKind::EmitterMoved,
                        });
                    }
                }
            }
        }
    }
    StructureReport { issues }
}

/// An emitter-anchored window stepped under an externally supplied overflow
/// bit, exact forever: `cells[0]` is an emitter and the only unknown left
/// dependency is whether the cell just left of it currently holds a `2`.
/// The right edge must be emitter-separated by promise (the digit map has no
/// right dependence, so no validity is lost there).
#[derive(Debug, Clone)]
pub struct DrivenWindow {
    origin: i64,
    cells: Vec<Sym>,
    scratch: Vec<Sym>,
    time: u32,
}

impl DrivenWindow {
    pub fn new(origin: i64, cells: Vec<Sym>) -> Result<Self, AutomatonError> {
        if cells.first() != Some(&EMITTER) {
            return Err(AutomatonError::NotEmitterAnchored(origin));
        }
        for (k, &s) in cells.iter().enumerate() {
            if s > EMITTER {
                return Err(AutomatonError::BadSymbol {
                    sym: s,
                    coord: origin + k as i64,
                });
            }
        }
        let probe = WindowConfig::new(origin, cells.clone());
        check_spacing(&probe)?;
        let scratch = vec![0; cells.len()];
        Ok(DrivenWindow {
            origin,
            cells,
            scratch,
            time: 0,
        })
    }

    pub fn from_window(cfg: &WindowConfig, anchor: i64) -> Result<Self, AutomatonError> {
        if cfg.get_valid(anchor) != Some(EMITTER) {
            return Err(AutomatonError::NotEmitterAnchored(anchor));
        }
        let restricted = cfg.restrict(anchor, cfg.valid().1);
        DrivenWindow::new(anchor, restricted.cells().to_vec())
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn cells(&self) -> &[Sym] {
        &self.cells
    }

    pub fn get(&self, coord: i64) -> Option<Sym> {
        if coord < self.origin || coord >= self.origin + self.cells.len() as i64 {
            return None;
        }
        Some(self.cells[(coord - self.origin) as usize])
    }

    /// One digit-map step with the given overflow bit standing in for
    /// "the cell left of the anchor emitter is a 2".
    pub fn step(&mut self, overflow_arriving: bool) {
        let n = self.cells.len();
        let left = if overflow_arriving { 2 } else { 0 };
        self.scratch[0] = EMITTER;
        if n > 1 {
            self.scratch[1] = digit_local(left, EMITTER, self.cells[1]);
        }
        for j in 2..n {
            self.scratch[j] = digit_local(self.cells[j - 2], self.cells[j - 1], self.cells[j]);
        }
        std::mem::swap(&mut self.cells, &mut self.scratch);
        self.time += 1;
    }

    pub fn as_window(&self) -> WindowConfig {
        WindowConfig::from_parts(
            self.origin,
            self.cells.clone(),
            self.time,
            self.origin,
            self.origin + self.cells.len() as i64 - 1,
            true,
        )
    }
}

/// Golden reference assets: a ten-row space-time diagram of a two-counter
/// configuration (blank left context) and the matching factor-model column
/// of its first counter.
pub mod fixtures {
    use super::*;
    use crate::engine::text;

    pub const GOLDEN_DIAGRAM: &str = include_str!("../fixtures/golden_diagram.txt");
    pub const GOLDEN_FACTOR_COLUMN: &str =
        include_str!("../fixtures/golden_factor_column.txt");

    /// Parsed golden rows with the origin of the printed span.
    pub fn golden_rows() -> (i64, Vec<Vec<Sym>>) {
        text::read_rows(GOLDEN_DIAGRAM).expect("golden diagram parses")
    }

    /// The golden initial row, left-padded with `padding` blank cells (the
    /// diagram assumes blank left context), as a certified window.
    pub fn golden_initial_window(padding: usize) -> WindowConfig {
        let (origin, rows) = golden_rows();
        let mut cells = vec![0 as Sym; padding];
        cells.extend_from_slice(&rows[0]);
        WindowConfig::new(origin - padding as i64, cells).certify_e_separated()
    }

    /// The golden factor column as `(len, state, countdown)` triples.
    pub fn golden_factor_column() -> Vec<(u8, u64, u8)> {
        GOLDEN_FACTOR_COLUMN
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut it = l.trim().split(':');
                let len = it.next().unwrap().parse().unwrap();
                let state = it.next().unwrap().parse().unwrap();
                let countdown = it.next().unwrap().parse().unwrap();
                (len, state, countdown)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::orbit;

    #[test]
    fn digit_local_pinned_values() {
        assert_eq!(digit_local(0, EMITTER, 1), 2);
        assert_eq!(digit_local(2, EMITTER, 1), 3);
        assert_eq!(digit_local(1, 3, EMITTER), EMITTER);
        assert_eq!(digit_local(0, 0, EMITTER), EMITTER);
        assert_eq!(digit_local(0, 2, 2), 1);
    }

    #[test]
    fn digit_local_total_and_closed() {
        let a = counter_alphabet();
        for x in a.symbols() {
            for y in a.symbols() {
                for z in a.symbols() {
                    let out = digit_local(x, y, z);
                    assert!(a.contains(out));
                    assert_eq!(out == EMITTER, z == EMITTER);
                }
            }
        }
    }

    #[test]
    fn spacing_local_pinned_values() {
        // non-emitter centre unchanged
        assert_eq!(spacing_local(&[EMITTER, 0, 0, 1, 0, 0, EMITTER]), 1);
        // emitter with clear margin survives
        assert_eq!(spacing_local(&[0, 1, 2, EMITTER, 0, 1, 3]), EMITTER);
        // crowded emitter is demoted to 0
        assert_eq!(spacing_local(&[0, 0, 0, EMITTER, 0, EMITTER, 0]), 0);
    }

    #[test]
    fn golden_diagram_reproduced_exactly() {
        let (origin, rows) = fixtures::golden_rows();
        let width = rows[0].len() as i64;
        let cfg = fixtures::golden_initial_window(25);
        let diagram = orbit_counter(&cfg, 9).unwrap();
        assert_eq!(diagram.rows.len(), 10);
        for (k, expect) in rows.iter().enumerate() {
            let row = &diagram.rows[k];
            let (vlo, vhi) = row.valid();
            assert!(vlo <= origin && vhi >= origin + width - 1);
            for (j, &sym) in expect.iter().enumerate() {
                assert_eq!(
                    row.get(origin + j as i64),
                    Some(sym),
                    "row {k} cell {j} mismatch"
                );
            }
        }
    }

    #[test]
    fn golden_diagram_matches_generic_composite_path() {
        // The certified short-stencil path and the uncertified composite
        // path agree on shared valid cells.
        let certified = fixtures::golden_initial_window(40);
        let generic =
            WindowConfig::new(certified.origin(), certified.cells().to_vec());
        let a = orbit_counter(&certified, 5).unwrap();
        let b = orbit(&generic, &CounterRule, 5).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let lo = ra.valid().0.max(rb.valid().0);
            let hi = ra.valid().1.min(rb.valid().1);
            assert!(hi - lo > 4);
            for c in lo..=hi {
                assert_eq!(ra.get(c), rb.get(c), "composite/short mismatch at {c}");
            }
        }
    }

    #[test]
    fn all_zero_window_is_fixed() {
        let cfg = WindowConfig::new(-10, vec![0; 30]).certify_e_separated();
        let next = step_counter(&cfg).unwrap();
        assert!(next.cells().iter().all(|&s| s == 0));
    }

    #[test]
    fn validate_omega_gaps() {
        // E110E0110E: three then four... here gaps are 3 and 3 digits.
        let cells = crate::engine::text::parse_row("E110E0110E").unwrap();
        let r = validate_omega(&WindowConfig::new(0, cells));
        assert_eq!(r.min_gap, Some(3));
        assert!(r.violations.is_empty());

        let cells = crate::engine::text::parse_row("E11E").unwrap();
        let r = validate_omega(&WindowConfig::new(0, cells));
        assert_eq!(r.min_gap, Some(2));
        assert_eq!(r.violations.len(), 1);

        let cells = crate::engine::text::parse_row("0110").unwrap();
        let r = validate_omega(&WindowConfig::new(0, cells));
        assert!(!r.has_left_e && !r.has_right_e);
        assert_eq!(r.min_gap, None);
    }

    #[test]
    fn structure_report_flags_orphan_three() {
        let cells = crate::engine::text::parse_row("E0130E").unwrap();
        let cfg = WindowConfig::new(0, cells);
        let report = orbit_structure_report(&[cfg]);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].kind, StructureIssueKind::OrphanThree);
        assert_eq!(report.issues[0].coord, 3);
    }

    #[test]
    fn structure_report_clean_on_golden() {
        let cfg = fixtures::golden_initial_window(25);
        let diagram = orbit_counter(&cfg, 9).unwrap();
        let report = orbit_structure_report(&diagram.rows);
        assert!(report.ok(), "issues: {:?}", report.issues);
    }

    #[test]
    fn driven_window_matches_plain_orbit_when_silent() {
        // A driven window over blank left context must replay the golden
        // diagram (the anchor emitter never receives an overflow).
        let (origin, rows) = fixtures::golden_rows();
        let e0 = origin
            + rows[0].iter().position(|&s| s == EMITTER).unwrap() as i64;
        let anchored: Vec<Sym> =
            rows[0][(e0 - origin) as usize..].to_vec();
        let mut dw = DrivenWindow::new(e0, anchored).unwrap();
        for expect in rows.iter().skip(1) {
            dw.step(false);
            for (j, &sym) in expect.iter().enumerate() {
                let coord = origin + j as i64;
                if coord >= e0 {
                    assert_eq!(dw.get(coord), Some(sym));
                }
            }
        }
    }

    #[test]
    fn emitters_frozen_along_certified_orbits() {
        let cfg = fixtures::golden_initial_window(30);
        let diagram = orbit_counter(&cfg, 9).unwrap();
        let es: Vec<i64> = {
            let (cells, lo) = diagram.rows[1].valid_cells();
            cells
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == EMITTER)
                .map(|(j, _)| lo + j as i64)
                .collect()
        };
        for row in &diagram.rows[1..] {
            let (vlo, vhi) = row.valid();
            for &e in es.iter().filter(|&&e| e >= vlo && e <= vhi) {
                assert_eq!(row.get(e), Some(EMITTER));
            }
        }
    }
}
