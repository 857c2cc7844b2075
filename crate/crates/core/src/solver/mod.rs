//! Satisfiability, validity and finite entailment.
//!
//! [`sat`] searches for an ultimately periodic run of guessed atoms, builds
//! the model spelled out by the variable bits of those atoms, and accepts it
//! only after the model checker confirms the goal at `<0,0>`.

use std::sync::atomic::AtomicBool;
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

mod atoms;
mod machine;
mod search;

pub use atoms::{
    boolean_consistent, properly_linked, until_stay_formula, Atom, Layout, MAX_CLOSURE,
};
pub use machine::{replay, replay_with, GuessFrame, Rejection, RowTrace, Trace};

use crate::checker::holds;
use crate::formula::{desugar, Formula};
use crate::model::{PeriodicModel, TimeInstant};
use search::{Limits, OuterRun, Search};

/// States above which a complete-mode search is reported as expensive.
const LARGE_SEARCH: usize = 1 << 20;

/// Search bounds. `k`/`m` are the outer prefix and loop lengths, the inner
/// ones bound every row's column lasso.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SolverBounds {
    pub max_outer_prefix: usize,
    pub max_outer_loop: usize,
    pub max_inner_prefix: usize,
    pub max_inner_loop: usize,
    /// Use the size bounds that are known to suffice for every satisfiable
    /// formula; the four caps above are then derived from the formula.
    pub complete: bool,
    /// Hard cap on expanded search states.
    pub max_states: usize,
}

impl Default for SolverBounds {
    fn default() -> Self {
        SolverBounds {
            max_outer_prefix: 8,
            max_outer_loop: 8,
            max_inner_prefix: 8,
            max_inner_loop: 8,
            complete: false,
            max_states: 1 << 22,
        }
    }
}

impl SolverBounds {
    /// Same cap for both prefixes and both loops.
    pub fn uniform(max_prefix: usize, max_loop: usize) -> Self {
        SolverBounds {
            max_outer_prefix: max_prefix,
            max_outer_loop: max_loop,
            max_inner_prefix: max_prefix,
            max_inner_loop: max_loop,
            ..Self::default()
        }
    }

    pub fn complete() -> Self {
        SolverBounds {
            complete: true,
            max_states: 1 << 24,
            ..Self::default()
        }
    }

    /// Caps that suffice for `phi`: prefixes up to `2^len`, loops up to
    /// `len * 2^len`, where `len` is the symbol count of the desugared
    /// formula.
    pub fn complete_for(phi: &Formula) -> Self {
        let len = desugar(phi).length();
        let pow = u32::try_from(len)
            .ok()
            .and_then(|l| 1usize.checked_shl(l))
            .unwrap_or(usize::MAX);
        let lp = pow.saturating_mul(len);
        if lp > LARGE_SEARCH {
            static WARNED: AtomicBool = AtomicBool::new(false);
            let msg = format!("complete bounds for a formula of length {len} allow loops up to {lp} > 2^20; the search may be slow");
            if WARNED.swap(true, std::sync::atomic::Ordering::Relaxed) {
                log::debug!("{msg}");
            } else {
                log::warn!("{msg} (further warnings of this kind are logged at debug level)");
            }
        }
        SolverBounds {
            max_outer_prefix: pow,
            max_outer_loop: lp,
            max_inner_prefix: pow,
            max_inner_loop: lp,
            complete: true,
            max_states: Self::complete().max_states,
        }
    }

    fn resolve(&self, phi: &Formula) -> SolverBounds {
        if self.complete {
            SolverBounds {
                max_states: self.max_states,
                ..Self::complete_for(phi)
            }
        } else {
            *self
        }
    }

    fn limits(&self) -> Limits {
        Limits {
            outer_prefix: self.max_outer_prefix,
            outer_loop: self.max_outer_loop.max(1),
            inner_prefix: self.max_inner_prefix,
            inner_loop: self.max_inner_loop.max(1),
            max_states: self.max_states,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SatResult {
    /// Satisfiable; the witness satisfies the formula at `<0,0>`.
    Sat {
        witness: PeriodicModel,
        trace: Trace,
    },
    /// No model exists.
    Unsat,
    /// No model within the given bounds, and the bounds were binding.
    UnsatWithinBounds(SolverBounds),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }

    pub fn witness(&self) -> Option<&PeriodicModel> {
        match self {
            SatResult::Sat { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Outcome of a validity or entailment query.
#[derive(Clone, Debug)]
pub enum Verdict {
    Holds,
    /// A model of the premises where the conclusion fails at `<0,0>`.
    Fails {
        countermodel: PeriodicModel,
    },
    Unknown(SolverBounds),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    /// The closure plus the auxiliary formulas the solver adds must fit in
    /// [`MAX_CLOSURE`] bits; `size` is the closure of the formula alone.
    #[error("formula is too large for the solver: closure of {size} formulas plus auxiliaries exceeds {max}")]
    ClosureTooLarge { size: usize, max: usize },
    /// An assembled witness failed verification. This is a defect in the
    /// solver, never a property of the input.
    #[error("internal error: assembled witness for {formula} was rejected: {reason}")]
    WitnessRejected { formula: String, reason: String },
}

/// Decides satisfiability of `phi` with one worker.
pub fn sat(phi: &Formula, bounds: &SolverBounds) -> Result<SatResult, SolveError> {
    sat_with_workers(phi, bounds, 1)
}

/// Decides satisfiability of `phi`. With more than one worker the short-run
/// phase is split across threads; the verdict does not depend on the worker
/// count, the witness may.
pub fn sat_with_workers(
    phi: &Formula,
    bounds: &SolverBounds,
    workers: usize,
) -> Result<SatResult, SolveError> {
    let goal = desugar(phi);
    let layout = Layout::new(&goal).ok_or_else(|| SolveError::ClosureTooLarge {
        size: closure_size_hint(&goal),
        max: MAX_CLOSURE,
    })?;
    let bounds = bounds.resolve(&goal);
    let limits = bounds.limits();
    let dfs_budget = limits.max_states / 4;
    let pairs = search::dfs_pairs(&limits);

    if workers > 1 {
        if let Some((witness, trace)) = parallel_dfs(&layout, limits, &pairs, dfs_budget, workers) {
            return verified(&goal, &layout, witness, trace);
        }
    }
    let mut search = Search::new(&layout, limits, None);
    if search.initial_atoms().is_empty() {
        return Ok(SatResult::Unsat);
    }
    let run = if workers > 1 {
        None
    } else {
        search.dfs_phase(&pairs, dfs_budget)
    };
    let run = match run {
        Some(run) => run,
        None => match search.bfs_phase() {
            (Some(run), _) => run,
            (None, true) => {
                log::debug!("search cut after {} states", search.spent());
                return Ok(SatResult::UnsatWithinBounds(bounds));
            }
            (None, false) => return Ok(SatResult::Unsat),
        },
    };
    let (witness, trace) = search.assemble(&run);
    verified(&goal, &layout, witness, trace)
}

fn closure_size_hint(goal: &Formula) -> usize {
    crate::formula::closure(goal).len()
}

fn parallel_dfs(
    layout: &Layout,
    limits: Limits,
    pairs: &[(usize, usize)],
    budget: usize,
    workers: usize,
) -> Option<(PeriodicModel, Trace)> {
    let stop = AtomicBool::new(false);
    let found = Mutex::new(None);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let mine: Vec<(usize, usize)> =
                pairs.iter().copied().skip(w).step_by(workers).collect();
            let (stop, found) = (&stop, &found);
            scope.spawn(move || {
                let mut search = Search::new(layout, limits, Some(stop));
                let run: Option<OuterRun> = search.dfs_phase(&mine, budget);
                if let Some(run) = run {
                    stop.store(true, std::sync::atomic::Ordering::Relaxed);
                    let assembled = search.assemble(&run);
                    found.lock().unwrap().get_or_insert(assembled);
                }
            });
        }
    });
    found.into_inner().unwrap()
}

fn verified(
    goal: &Formula,
    layout: &Layout,
    witness: PeriodicModel,
    trace: Trace,
) -> Result<SatResult, SolveError> {
    let reject = |reason: String| SolveError::WitnessRejected {
        formula: goal.render(),
        reason,
    };
    replay(layout, &trace).map_err(|r| reject(format!("machine replay: {r}")))?;
    if let Err(v) = witness.validate() {
        return Err(reject(format!("malformed model: {v:?}")));
    }
    if !holds(&witness, TimeInstant::ORIGIN, goal) {
        return Err(reject("goal does not hold at <0,0>".into()));
    }
    Ok(SatResult::Sat { witness, trace })
}

/// Is `phi` true at every instant of every model?
pub fn valid(phi: &Formula, bounds: &SolverBounds) -> Result<Verdict, SolveError> {
    refute(Formula::not(phi.clone()), bounds)
}

/// Does every model satisfying all of `theory` at an instant also satisfy
/// `phi` there?
pub fn entails(
    theory: &[Formula],
    phi: &Formula,
    bounds: &SolverBounds,
) -> Result<Verdict, SolveError> {
    let negated = Formula::not(phi.clone());
    let query = match Formula::conjunction(theory.iter().cloned()) {
        Some(t) => Formula::and(t, negated),
        None => negated,
    };
    refute(query, bounds)
}

fn refute(query: Formula, bounds: &SolverBounds) -> Result<Verdict, SolveError> {
    Ok(match sat(&query, bounds)? {
        SatResult::Sat { witness, .. } => Verdict::Fails {
            countermodel: witness,
        },
        SatResult::Unsat => Verdict::Holds,
        SatResult::UnsatWithinBounds(b) => Verdict::Unknown(b),
    })
}
