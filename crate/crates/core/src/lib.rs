//! Simulation and analysis toolkit for one-dimensional cellular automata
//! built around a five-symbol "counter" automaton and its infinite-state
//! factor model.
//!
//! The crate is organised as a stack:
//!
//! * [`engine`] — generic 1D CA machinery: rule tables, windowed
//!   configurations with exact validity tracking, cyclic configurations,
//!   and set-valued (possibilistic) propagation.
//! * [`automaton`] — the specific counter automaton on `{0,1,2,3,E}`:
//!   its two local maps, composed stepping, emitter-spacing validation
//!   and structural orbit checks.
//! * [`model`] — the counter factor model: triples `(len, state, countdown)`,
//!   the factor map from cell windows to counter lines, line evolution with
//!   a certified reliability frontier, asymptotic emission rates and
//!   blocking-time bounds.
//! * [`lyapunov`] — perturbation-speed machinery: certified brackets for
//!   the influence radii `I_n`, pointwise and Monte Carlo exponent curves,
//!   and crossing times.
//! * [`measures`] — samplers for the emitter/counter measures, Cesaro
//!   burn-in, conditional-uniformity checks and entropy estimators.
//! * [`expansivity`] — positive-expansivity depth search on reference
//!   rules plus sensitivity / divergence experiments for the counter rule.

pub mod automaton;
pub mod engine;
pub mod expansivity;
pub mod lyapunov;
pub mod measures;
pub mod model;

pub use engine::{Alphabet, CyclicConfig, Rule, RuleTable, SetConfig, Sym, SymSet, WindowConfig};
