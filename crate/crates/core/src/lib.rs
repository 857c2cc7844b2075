//! Decision procedures for propositional temporal logic over the ordinal ω²,
//! with `[1]`, `[w]`, row-local until `u` and global until `U`.
//!
//! * [`formula`]: syntax, parsing, abbreviations, subformula closure.
//! * [`model`]: ultimately periodic models and their JSON form.
//! * [`checker`]: model checking by fixpoint labelling, plus a direct oracle.
//! * [`solver`]: satisfiability with verified witnesses, validity, entailment.
//! * [`transition`]: zero-time transition checks and the noncompactness family.
//! * [`axioms`]: instance pools of the axiom schemata.
//! * [`gen`]: seeded random formulas and models for testing.

pub mod axioms;
pub mod checker;
pub mod formula;
pub mod gen;
pub mod model;
pub mod solver;
pub mod transition;

pub use checker::{check_theory, holds, holds_oracle, label, LabelTable};
pub use formula::{closure, desugar, parse, Closure, Formula, ParseError, Step, VarId};
pub use model::{Cell, LassoRow, ModelError, PeriodicModel, Position, TimeInstant, Violation};
pub use solver::{
    entails, sat, sat_with_workers, valid, SatResult, SolveError, SolverBounds, Verdict,
};
pub use transition::{
    check_transition_discipline, noncompactness_family, noncompactness_witness, tr_instances,
    TransitionReport,
};
