//! Generic one-dimensional cellular-automaton engine.
//!
//! Configurations are bi-infinite in principle; this engine represents them
//! either as finite windows with an explicit validity interval that shrinks
//! under iteration (no boundary condition is ever invented), or as cyclic
//! arrays which are exact for spatially periodic points.

mod window;

pub mod text;

pub use window::{
    diff_front, orbit, orbit_cyclic, set_valued_orbit, step_cyclic, CyclicConfig, DiffFront,
    SetConfig, SpaceTimeDiagram, WindowConfig,
};

use thiserror::Error;

/// Symbol code. Alphabets are dense small-integer codes `0..size`.
pub type Sym = u8;

/// Largest supported alphabet; subsets of symbols fit in a `u8` bitmask.
pub const MAX_ALPHABET: u8 = 8;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("alphabet size {0} out of range (need 2..={MAX_ALPHABET})")]
    BadAlphabetSize(u8),
    #[error("local rule produced symbol {got} outside alphabet of size {size}")]
    NonSymbolOutput { got: Sym, size: u8 },
    #[error("symbol {got} outside alphabet of size {size}")]
    BadSymbol { got: Sym, size: u8 },
    #[error("window exhausted: valid interval too short for one step")]
    WindowExhausted,
    #[error("window exhausted after {achieved} of {requested} steps")]
    PartialOrbit { achieved: u32, requested: u32 },
    #[error("cyclic period {period} shorter than neighbourhood {neighbourhood}")]
    PeriodTooShort { period: usize, neighbourhood: usize },
    #[error("configurations are not comparable: {0}")]
    NotComparable(&'static str),
    #[error("empty set at coordinate {0}: set configurations must be non-empty cellwise")]
    EmptyCell(i64),
    #[error("malformed text diagram: {0}")]
    BadText(String),
}

/// A finite ordered alphabet of symbol codes `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Alphabet {
    size: u8,
}

impl Alphabet {
    pub fn new(size: u8) -> Result<Self, EngineError> {
        if !(2..=MAX_ALPHABET).contains(&size) {
            return Err(EngineError::BadAlphabetSize(size));
        }
        Ok(Alphabet { size })
    }

    pub fn binary() -> Self {
        Alphabet { size: 2 }
    }

    pub fn size(&self) -> u8 {
        self.size
    }

    pub fn contains(&self, s: Sym) -> bool {
        s < self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> {
        0..self.size
    }

    /// Set of all symbols, as a bitmask.
    pub fn full_set(&self) -> SymSet {
        SymSet {
            bits: ((1u16 << self.size) - 1) as u8,
        }
    }
}

/// A non-empty subset of an alphabet, as a bitmask. Cells of set-valued
/// configurations hold these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymSet {
    bits: u8,
}

impl SymSet {
    pub fn empty() -> Self {
        SymSet { bits: 0 }
    }

    pub fn singleton(s: Sym) -> Self {
        SymSet { bits: 1 << s }
    }

    pub fn from_symbols(syms: &[Sym]) -> Self {
        let mut bits = 0;
        for &s in syms {
            bits |= 1 << s;
        }
        SymSet { bits }
    }

    pub fn insert(&mut self, s: Sym) {
        self.bits |= 1 << s;
    }

    pub fn union(self, other: SymSet) -> SymSet {
        SymSet {
            bits: self.bits | other.bits,
        }
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.bits & (1 << s) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_singleton(&self) -> bool {
        self.bits != 0 && self.bits & (self.bits - 1) == 0
    }

    /// The unique element of a singleton set.
    pub fn the_symbol(&self) -> Option<Sym> {
        if self.is_singleton() {
            Some(self.bits.trailing_zeros() as Sym)
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..8).filter(|&s| self.contains(s))
    }
}

/// A local rule, with possibly asymmetric dependence: the new value of cell
/// `i` is a function of cells `i - left_radius ..= i + right_radius`.
///
/// `apply` receives exactly that neighbourhood slice, centre at index
/// `left_radius`. `apply_sets` must be a sound over-approximation: every
/// symbol reachable by choosing one symbol per input set appears in the
/// output set. The default enumerates the Cartesian product, which is fine
/// for the small alphabets and radii used here.
pub trait Rule {
    fn alphabet(&self) -> Alphabet;
    fn left_radius(&self) -> usize;
    fn right_radius(&self) -> usize;
    fn apply(&self, neighbourhood: &[Sym]) -> Sym;

    fn neighbourhood_len(&self) -> usize {
        self.left_radius() + self.right_radius() + 1
    }

    fn apply_sets(&self, neighbourhood: &[SymSet]) -> SymSet {
        let n = neighbourhood.len();
        let mut out = SymSet::empty();
        let mut choice: Vec<Sym> = Vec::with_capacity(n);
        // Depth-first product enumeration without recursion.
        let mut iters: Vec<u8> = vec![0; n];
        let mut depth = 0usize;
        loop {
            if depth == n {
                out.insert(self.apply(&choice));
                if out == self.alphabet().full_set() {
                    return out;
                }
                depth -= 1;
                choice.pop();
                iters[depth] += 1;
            }
            let mut sym = iters[depth];
            while sym < 8 && !neighbourhood[depth].contains(sym) {
                sym += 1;
            }
            if sym >= 8 {
                if depth == 0 {
                    return out;
                }
                iters[depth] = 0;
                depth -= 1;
                choice.pop();
                iters[depth] += 1;
            } else {
                iters[depth] = sym;
                choice.push(sym);
                depth += 1;
                if depth < n {
                    iters[depth] = 0;
                }
            }
        }
    }

    /// Step a whole row: `cells.len()` must be at least the neighbourhood
    /// length; the output has `cells.len() - left_radius - right_radius`
    /// entries, entry `j` being the new value of input position
    /// `j + left_radius`.
    fn step_row(&self, cells: &[Sym]) -> Vec<Sym> {
        let n = self.neighbourhood_len();
        cells.windows(n).map(|w| self.apply(w)).collect()
    }

    fn step_sets_row(&self, cells: &[SymSet]) -> Vec<SymSet> {
        let n = self.neighbourhood_len();
        cells.windows(n).map(|w| self.apply_sets(w)).collect()
    }

    fn name(&self) -> &str;
}

/// Exhaustive lookup table for a symmetric-radius block map.
#[derive(Clone)]
pub struct RuleTable {
    alphabet: Alphabet,
    radius: usize,
    table: Vec<Sym>,
    name: String,
}

impl RuleTable {
    /// Tabulates `local` over every neighbourhood. Errors if `local` ever
    /// returns a non-symbol.
    pub fn build(
        alphabet: Alphabet,
        radius: usize,
        name: &str,
        local: impl Fn(&[Sym]) -> Sym,
    ) -> Result<Self, EngineError> {
        let width = 2 * radius + 1;
        let entries = (alphabet.size() as usize).pow(width as u32);
        let mut table = Vec::with_capacity(entries);
        let mut neigh = vec![0 as Sym; width];
        for idx in 0..entries {
            let mut rest = idx;
            for slot in neigh.iter_mut() {
                *slot = (rest % alphabet.size() as usize) as Sym;
                rest /= alphabet.size() as usize;
            }
            let out = local(&neigh);
            if !alphabet.contains(out) {
                return Err(EngineError::NonSymbolOutput {
                    got: out,
                    size: alphabet.size(),
                });
            }
            table.push(out);
        }
        Ok(RuleTable {
            alphabet,
            radius,
            table,
            name: name.to_owned(),
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn index(&self, neighbourhood: &[Sym]) -> usize {
        let base = self.alphabet.size() as usize;
        let mut idx = 0usize;
        for &s in neighbourhood.iter().rev() {
            idx = idx * base + s as usize;
        }
        idx
    }

    /// Table entry count, for diagnostics.
    pub fn entries(&self) -> usize {
        self.table.len()
    }

    /// Corrupts one table entry; only useful to exercise detection paths.
    pub fn with_corrupted_entry(mut self, entry: usize) -> Self {
        let size = self.alphabet.size();
        let idx = entry % self.table.len();
        self.table[idx] = (self.table[idx] + 1) % size;
        self.name.push_str("-corrupted");
        self
    }
}

impl Rule for RuleTable {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn left_radius(&self) -> usize {
        self.radius
    }

    fn right_radius(&self) -> usize {
        self.radius
    }

    fn apply(&self, neighbourhood: &[Sym]) -> Sym {
        self.table[self.index(neighbourhood)]
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Stock rules used as references and edge cases throughout the test suites.
pub mod rules {
    use super::*;

    /// Binary additive rule `x_{i-1} + x_{i+1} mod 2`, radius 1. The standard
    /// positively expansive reference rule.
    pub fn additive_binary() -> RuleTable {
        RuleTable::build(Alphabet::binary(), 1, "additive", |w| (w[0] + w[2]) % 2)
            .expect("additive rule tabulates")
    }

    /// Centre projection: the identity CA at the given radius.
    pub fn identity(alphabet: Alphabet, radius: usize) -> RuleTable {
        RuleTable::build(alphabet, radius, "identity", move |w| w[radius])
            .expect("identity rule tabulates")
    }

    /// Right shift: cell `i` takes the old value of cell `i-1`. Information
    /// moves right; nothing ever travels left.
    pub fn shift_right(alphabet: Alphabet) -> RuleTable {
        RuleTable::build(alphabet, 1, "shift-right", |w| w[0]).expect("shift rule tabulates")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_bounds() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(9).is_err());
        assert_eq!(Alphabet::new(5).unwrap().size(), 5);
    }

    #[test]
    fn symset_basics() {
        let a = Alphabet::new(5).unwrap();
        let mut s = SymSet::singleton(3);
        assert!(s.is_singleton());
        assert_eq!(s.the_symbol(), Some(3));
        s.insert(0);
        assert!(!s.is_singleton());
        assert_eq!(s.len(), 2);
        assert_eq!(a.full_set().len(), 5);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3]);
    }

    #[test]
    fn additive_rule_has_eight_entries() {
        let r = rules::additive_binary();
        assert_eq!(r.entries(), 8);
        assert_eq!(r.apply(&[1, 0, 0]), 1);
        assert_eq!(r.apply(&[1, 1, 1]), 0);
        assert_eq!(r.apply(&[0, 1, 1]), 1);
    }

    #[test]
    fn identity_rule_projects_centre() {
        let a = Alphabet::new(5).unwrap();
        let r = rules::identity(a, 1);
        for s in a.symbols() {
            assert_eq!(r.apply(&[0, s, 4]), s);
        }
    }

    #[test]
    fn build_rejects_non_symbol_output() {
        let a = Alphabet::binary();
        let err = RuleTable::build(a, 1, "bad", |_| 7);
        assert!(matches!(err, Err(EngineError::NonSymbolOutput { .. })));
    }

    #[test]
    fn cartesian_set_application_is_exact_for_additive() {
        let r = rules::additive_binary();
        let full = r.alphabet().full_set();
        let out = r.apply_sets(&[full, SymSet::singleton(0), SymSet::singleton(1)]);
        // left cell free: 0+1 and 1+1 are both reachable.
        assert_eq!(out, full);
        let out = r.apply_sets(&[
            SymSet::singleton(1),
            full,
            SymSet::singleton(1),
        ]);
        assert!(out.is_singleton());
        assert_eq!(out.the_symbol(), Some(0));
    }
}
