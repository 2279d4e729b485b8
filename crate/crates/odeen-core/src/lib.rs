//! Core engine for Odeen, a rule-discovery environment over a small
//! combinatorial universe of piece sequences.
//!
//! The crate covers the full pipeline: the universe and its canonical
//! structure codec ([`world`]), the explanation language with enumeration
//! and parsing ([`rules`]), the hard-coded interpreter ([`interpreter`]),
//! the rules-by-structures semantic matrix with equivalence classes and
//! nearest-rule search ([`semmatrix`]), train/test dataset generation
//! ([`dataset`]), exhaustive and conjecture-driven solvers ([`solver`]),
//! submission scoring ([`metrics`]), and the symbol-interpretation
//! questionnaire generator ([`sit`]).

pub mod bits;
pub mod dataset;
pub mod interpreter;
pub mod metrics;
pub mod rules;
pub mod seeds;
pub mod semmatrix;
pub mod sit;
pub mod solver;
pub mod world;

pub use world::WorldConfig;
