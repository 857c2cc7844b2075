//! Zero-time transitions and the noncompactness family.
//!
//! Two schemata describe transitions that take no time:
//!
//! * `g φ -> [w]φ`: whatever holds for the rest of a row holds at the start
//!   of the next one;
//! * `(φ & [1]!φ) -> g [1]!φ`: within a row, a change happens only once.
//!
//! [`check_transition_discipline`] reports where a model breaks them for
//! single variables. Violations are reported, not enforced.

use serde::Serialize;

use crate::formula::{desugar, Formula, Step, VarId};
use crate::model::{LassoRow, PeriodicModel};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TransitionReport {
    /// `(row, p)`: `p` holds from some column on in stored row `row` but is
    /// false at the start of the following row.
    pub tr1_variable_violations: Vec<(usize, VarId)>,
    /// `(row, col, p)`: `p` turned false earlier in stored row `row` and is
    /// true again at column `col`.
    pub tr2_variable_violations: Vec<(usize, usize, VarId)>,
}

impl TransitionReport {
    pub fn is_clean(&self) -> bool {
        self.tr1_variable_violations.is_empty() && self.tr2_variable_violations.is_empty()
    }
}

/// Values of `p` over the prefix and two passes of the loop. Any
/// true-false-true pattern of a periodic row shows up within this window.
fn unrolled(row: &LassoRow, p: VarId) -> Vec<bool> {
    let stored = row.len();
    let period = stored - row.loop_start();
    (0..stored + period)
        .map(|c| {
            let col = if c < stored { c } else { c - period };
            row.cell(col).contains(&p)
        })
        .collect()
}

pub fn check_transition_discipline(model: &PeriodicModel) -> TransitionReport {
    let mut report = TransitionReport::default();
    for r in 0..model.num_rows() {
        let row = model.row(r);
        let next = model.row(model.row_successor(r));
        for &p in &model.universe {
            let cofinal = row.col_loop.iter().all(|cell| cell.contains(&p));
            if cofinal && !next.cell(0).contains(&p) {
                report.tr1_variable_violations.push((r, p));
            }
            let values = unrolled(row, p);
            let fall = values.windows(2).position(|w| w[0] && !w[1]);
            if let Some(fall) = fall {
                if let Some(back) = values[fall + 1..].iter().position(|&v| v) {
                    report.tr2_variable_violations.push((r, fall + 1 + back, p));
                }
            }
        }
    }
    report
}

/// Both transition schemata instantiated with every formula of `pool`,
/// desugared.
pub fn tr_instances(pool: &[Formula]) -> Vec<Formula> {
    pool.iter()
        .flat_map(|phi| {
            let tr1 = Formula::implies(
                Formula::local_always(phi.clone()),
                Formula::next_w(phi.clone()),
            );
            let not_next = Formula::next1(Formula::not(phi.clone()));
            let tr2 = Formula::implies(
                Formula::and(phi.clone(), not_next.clone()),
                Formula::local_always(not_next),
            );
            [desugar(&tr1), desugar(&tr2)]
        })
        .collect()
}

/// `F !p0` together with `[w]^a [1]^b p0` for all `a, b <= n`.
///
/// Every finite part of the infinite family is satisfiable, the whole family
/// is not: `p0` would have to hold everywhere while failing somewhere.
pub fn noncompactness_family(n: u32) -> Vec<Formula> {
    let mut family = vec![Formula::eventually(Formula::not(Formula::var(0)))];
    for a in 0..=n {
        for b in 0..=n {
            family.push(shifted_p0(a, b));
        }
    }
    family
}

/// `[w]^a [1]^b p0`, omitting empty iterations.
pub fn shifted_p0(a: u32, b: u32) -> Formula {
    let mut f = Formula::var(0);
    if b > 0 {
        f = Formula::iter_next(Step::One, b, f);
    }
    if a > 0 {
        f = Formula::iter_next(Step::Omega, a, f);
    }
    f
}

/// `n + 1` rows where `p0` always holds, then empty rows forever.
pub fn noncompactness_witness(n: u32) -> PeriodicModel {
    let p0 = VarId(0);
    PeriodicModel {
        universe: [p0].into(),
        row_prefix: (0..=n).map(|_| LassoRow::constant([p0].into())).collect(),
        row_loop: vec![LassoRow::constant(Default::default())],
    }
}
