//! Step-by-step replay of the nondeterministic satisfiability machine over a
//! concrete sequence of guesses.
//!
//! The search produces a [`Trace`]; [`replay`] re-runs the machine's checks on
//! it (Boolean consistency, proper linking, obligation discharge) in the same
//! order the machine performs them.

use thiserror::Error;

use super::atoms::{Atom, Layout};

/// Guesses for one row: the atoms at columns `0..k_loc + m_loc`. Column
/// `k_loc + m_loc` wraps back to column `k_loc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTrace {
    pub k_loc: usize,
    pub m_loc: usize,
    pub atoms: Vec<Atom>,
}

impl RowTrace {
    /// The atom at the start of the column loop.
    pub fn s_in(&self) -> Atom {
        self.atoms[self.k_loc]
    }
}

/// Guesses for a whole run: rows `0..k + m`, row `k + m` wrapping to row `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub k: usize,
    pub m: usize,
    pub rows: Vec<RowTrace>,
}

impl Trace {
    pub fn s_start(&self) -> Atom {
        self.rows[0].atoms[0]
    }

    pub fn s_out(&self) -> Atom {
        self.rows[self.k].atoms[0]
    }
}

/// The machine's working state at one inner step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessFrame {
    pub s_start: Atom,
    pub s_present: Atom,
    pub s_next1: Atom,
    pub s_nextw: Atom,
    pub s_in: Atom,
    pub s_out: Atom,
    /// Pending `u`-formulas (bitmask over closure positions).
    pub s_u: u128,
    /// Pending `U`-formulas (bitmask over closure positions).
    pub s_uu: u128,
    pub k: usize,
    pub m: usize,
    pub k_loc: usize,
    pub m_loc: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("trace shape is malformed: {0}")]
    Shape(String),
    #[error("atom at row {row}, column {col} is not Boolean consistent")]
    Inconsistent { row: usize, col: usize },
    #[error("goal formula missing from the start atom")]
    GoalMissing,
    #[error("atoms at row {row}, column {col} are not properly linked")]
    Unlinked { row: usize, col: usize },
    #[error("u-obligations {pending:#x} left open in row {row}")]
    LocalObligation { row: usize, pending: u128 },
    #[error("U-obligations {pending:#x} left open in the outer loop")]
    GlobalObligation { pending: u128 },
}

fn check_shape(trace: &Trace) -> Result<(), Rejection> {
    if trace.m == 0 {
        return Err(Rejection::Shape("outer loop is empty".into()));
    }
    if trace.rows.len() != trace.k + trace.m {
        return Err(Rejection::Shape(format!(
            "expected {} rows, found {}",
            trace.k + trace.m,
            trace.rows.len()
        )));
    }
    for (i, row) in trace.rows.iter().enumerate() {
        if row.m_loc == 0 || row.atoms.len() != row.k_loc + row.m_loc {
            return Err(Rejection::Shape(format!(
                "row {i} has a malformed column lasso"
            )));
        }
    }
    Ok(())
}

/// Replays the machine on `trace`, calling `observe` with the frame at every
/// inner step after its checks pass.
pub fn replay_with<F>(layout: &Layout, trace: &Trace, mut observe: F) -> Result<(), Rejection>
where
    F: FnMut(&GuessFrame),
{
    check_shape(trace)?;
    let (k, m) = (trace.k, trace.m);
    let s_start = trace.s_start();
    let s_out = trace.s_out();
    if !layout.is_consistent(s_start) {
        return Err(Rejection::Inconsistent { row: 0, col: 0 });
    }
    if !layout.is_consistent(s_out) {
        return Err(Rejection::Inconsistent { row: k, col: 0 });
    }
    if !s_start.has(layout.goal) {
        return Err(Rejection::GoalMissing);
    }
    let mut s_uu = layout.untils(s_out);
    let mut present = s_start;
    for (i, row) in trace.rows.iter().enumerate() {
        let (k_loc, m_loc) = (row.k_loc, row.m_loc);
        let s_in = row.s_in();
        let s_nextw = if i + 1 < k + m {
            trace.rows[i + 1].atoms[0]
        } else {
            s_out
        };
        if !layout.is_consistent(s_in) {
            return Err(Rejection::Inconsistent { row: i, col: k_loc });
        }
        if !layout.is_consistent(s_nextw) {
            return Err(Rejection::Inconsistent { row: i + 1, col: 0 });
        }
        let mut s_u = layout.local_untils(s_in);
        for j in 0..k_loc + m_loc {
            let s_next1 = if j + 1 < k_loc + m_loc {
                row.atoms[j + 1]
            } else {
                s_in
            };
            if !layout.is_consistent(s_next1) {
                return Err(Rejection::Inconsistent { row: i, col: j + 1 });
            }
            if !layout.properly_linked(present, s_next1, s_nextw) {
                return Err(Rejection::Unlinked { row: i, col: j });
            }
            if j >= k_loc {
                s_u &= !layout.local_discharge(present);
            }
            // the outer loop covers rows k..=k+m-1
            if i >= k {
                s_uu &= !layout.until_discharge(present);
            }
            observe(&GuessFrame {
                s_start,
                s_present: present,
                s_next1,
                s_nextw,
                s_in,
                s_out,
                s_u,
                s_uu,
                k,
                m,
                k_loc,
                m_loc,
            });
            present = s_next1;
        }
        if s_u != 0 {
            return Err(Rejection::LocalObligation {
                row: i,
                pending: s_u,
            });
        }
        present = s_nextw;
    }
    if s_uu != 0 {
        return Err(Rejection::GlobalObligation { pending: s_uu });
    }
    Ok(())
}

pub fn replay(layout: &Layout, trace: &Trace) -> Result<(), Rejection> {
    replay_with(layout, trace, |_| {})
}
