//! Model checking over periodic models.
//!
//! [`label`] computes, for every subformula, its truth value at every stored
//! position of the model. Truth at an arbitrary instant is read off the
//! stored position it resolves to. [`holds_oracle`] evaluates the satisfaction
//! clauses directly at actual instants and serves as an independent check.

use std::collections::HashSet;

use crate::formula::{desugar, Closure, Formula};
use crate::model::{PeriodicModel, Position, TimeInstant};

/// Truth value of every subformula at every stored position.
#[derive(Clone, Debug)]
pub struct LabelTable {
    closure: Closure,
    /// First flat index of each stored row.
    offsets: Vec<usize>,
    bits: Vec<Vec<bool>>,
}

impl LabelTable {
    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    fn flat(&self, pos: Position) -> usize {
        self.offsets[pos.row] + pos.col
    }

    /// Truth of the `i`-th closure formula at a stored position.
    pub fn bit(&self, i: usize, pos: Position) -> bool {
        self.bits[i][self.flat(pos)]
    }

    /// Truth of a closure member at a stored position.
    pub fn get(&self, phi: &Formula, pos: Position) -> Option<bool> {
        self.closure.position(phi).map(|i| self.bit(i, pos))
    }

    /// Truth of the labelled root formula at a stored position.
    pub fn root(&self, pos: Position) -> bool {
        self.bit(self.closure.len() - 1, pos)
    }
}

/// Row/column successor structure of a model, flattened.
struct Grid<'a> {
    model: &'a PeriodicModel,
    offsets: Vec<usize>,
    size: usize,
}

impl<'a> Grid<'a> {
    fn new(model: &'a PeriodicModel) -> Self {
        let mut offsets = Vec::with_capacity(model.num_rows());
        let mut size = 0;
        for row in model.rows() {
            offsets.push(size);
            size += row.len();
        }
        Grid {
            model,
            offsets,
            size,
        }
    }

    fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.offsets[r]..self.offsets[r] + self.model.row(r).len()
    }

    /// Least fixpoint of `X(j) = right(j) | (left(j) & X(succ j))` in every row.
    fn local_until(&self, left: &[bool], right: &[bool]) -> Vec<bool> {
        let mut x = vec![false; self.size];
        for r in 0..self.model.num_rows() {
            let row = self.model.row(r);
            let range = self.row_range(r);
            let base = range.start;
            // each sweep settles at least one more column
            for _ in 0..=row.len() {
                let mut changed = false;
                for j in (0..row.len()).rev() {
                    let v = right[base + j] || (left[base + j] && x[base + row.col_successor(j)]);
                    if v != x[base + j] {
                        x[base + j] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        x
    }

    /// `g χ` computed as `!(true u !χ)`.
    fn local_always(&self, inner: &[bool]) -> Vec<bool> {
        let top = vec![true; self.size];
        let neg: Vec<bool> = inner.iter().map(|b| !b).collect();
        self.local_until(&top, &neg)
            .into_iter()
            .map(|b| !b)
            .collect()
    }

    /// `ψ U θ` via `ψ u θ | (g(ψ & !θ) & [w](ψ U θ))`, least fixpoint over rows.
    fn until(&self, left: &[bool], right: &[bool]) -> Vec<bool> {
        let local = self.local_until(left, right);
        let stay: Vec<bool> = left.iter().zip(right).map(|(l, r)| *l && !*r).collect();
        let always = self.local_always(&stay);
        let rows = self.model.num_rows();
        let mut at_row_start = vec![false; rows];
        for _ in 0..=rows {
            let mut changed = false;
            for r in (0..rows).rev() {
                let o = self.offsets[r];
                let v = local[o] || (always[o] && at_row_start[self.model.row_successor(r)]);
                if v != at_row_start[r] {
                    at_row_start[r] = v;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = vec![false; self.size];
        for r in 0..rows {
            let next = at_row_start[self.model.row_successor(r)];
            for k in self.row_range(r) {
                out[k] = local[k] || (always[k] && next);
            }
        }
        out
    }
}

/// Labels every stored position with the subformulas of `phi` true there.
/// Abbreviations in `phi` are expanded first.
pub fn label(model: &PeriodicModel, phi: &Formula) -> LabelTable {
    let phi = desugar(phi);
    let closure = Closure::of(&phi);
    let grid = Grid::new(model);
    let mut bits: Vec<Vec<bool>> = Vec::with_capacity(closure.len());
    for (i, f) in closure.iter().enumerate() {
        let kids = closure.child_positions(i);
        let column = match f {
            Formula::Var(p) => model
                .positions()
                .map(|pos| model.cell_at(pos).contains(p))
                .collect(),
            Formula::Not(_) => bits[kids[0]].iter().map(|b| !b).collect(),
            Formula::And(..) => bits[kids[0]]
                .iter()
                .zip(&bits[kids[1]])
                .map(|(a, b)| *a && *b)
                .collect(),
            Formula::Next1(_) => {
                let inner = &bits[kids[0]];
                model
                    .positions()
                    .map(|pos| {
                        inner[grid.offsets[pos.row] + model.row(pos.row).col_successor(pos.col)]
                    })
                    .collect()
            }
            Formula::NextW(_) => {
                let inner = &bits[kids[0]];
                model
                    .positions()
                    .map(|pos| inner[grid.offsets[model.row_successor(pos.row)]])
                    .collect()
            }
            Formula::LocalUntil(..) => grid.local_until(&bits[kids[0]], &bits[kids[1]]),
            Formula::Until(..) => grid.until(&bits[kids[0]], &bits[kids[1]]),
            other => unreachable!("desugared formula contains {other}"),
        };
        bits.push(column);
    }
    LabelTable {
        closure,
        offsets: grid.offsets,
        bits,
    }
}

/// Does `phi` hold at instant `t`?
pub fn holds(model: &PeriodicModel, t: TimeInstant, phi: &Formula) -> bool {
    label(model, phi).root(model.canonical_position(t))
}

/// Does every formula of `theory` hold at `t`? Vacuously true when empty.
pub fn check_theory(model: &PeriodicModel, t: TimeInstant, theory: &[Formula]) -> bool {
    theory.iter().all(|phi| holds(model, t, phi))
}

/// Direct evaluation of the satisfaction clauses at actual instants.
///
/// Until scans walk forward through instants and give up once they revisit a
/// stored position in the same scan state, which on a periodic model means
/// the witness will never appear.
pub fn holds_oracle(model: &PeriodicModel, t: TimeInstant, phi: &Formula) -> bool {
    eval(model, t, &desugar(phi))
}

fn eval(m: &PeriodicModel, t: TimeInstant, phi: &Formula) -> bool {
    match phi {
        Formula::Var(p) => m.lookup(t, *p),
        Formula::Not(a) => !eval(m, t, a),
        Formula::And(a, b) => eval(m, t, a) && eval(m, t, b),
        Formula::Next1(a) => eval(m, t.next_col(), a),
        Formula::NextW(a) => eval(m, t.next_row(), a),
        Formula::LocalUntil(a, b) => match scan_row(m, t, a, b) {
            RowScan::Found => true,
            RowScan::Blocked | RowScan::Exhausted => false,
        },
        Formula::Until(a, b) => {
            let mut entered = HashSet::new();
            let mut s = t;
            loop {
                match scan_row(m, s, a, b) {
                    RowScan::Found => return true,
                    RowScan::Blocked => return false,
                    // `a` holds on the rest of the row and `b` never does
                    RowScan::Exhausted => {
                        s = s.next_row();
                        if !entered.insert(m.resolve_row(s.row)) {
                            return false;
                        }
                    }
                }
            }
        }
        other => unreachable!("desugared formula contains {other}"),
    }
}

enum RowScan {
    /// `right` reached with `left` holding at every earlier instant.
    Found,
    /// `left` failed before `right` showed up.
    Blocked,
    /// Neither happens anywhere in the rest of the row.
    Exhausted,
}

fn scan_row(m: &PeriodicModel, start: TimeInstant, left: &Formula, right: &Formula) -> RowScan {
    let row = m.resolve_row(start.row);
    let mut seen = HashSet::new();
    let mut s = start;
    loop {
        if !seen.insert(m.row(row).resolve_col(s.col)) {
            return RowScan::Exhausted;
        }
        if eval(m, s, right) {
            return RowScan::Found;
        }
        if !eval(m, s, left) {
            return RowScan::Blocked;
        }
        s = s.next_col();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, VarId};
    use crate::model::{Cell, LassoRow};

    fn cell(vars: &[u32]) -> Cell {
        vars.iter().map(|&i| VarId(i)).collect()
    }

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn constant_p0() -> PeriodicModel {
        PeriodicModel::new(cell(&[0]), vec![], vec![LassoRow::constant(cell(&[0]))]).unwrap()
    }

    fn step_down(k: usize) -> PeriodicModel {
        PeriodicModel::new(
            cell(&[0]),
            vec![LassoRow::constant(cell(&[0])); k],
            vec![LassoRow::constant(cell(&[]))],
        )
        .unwrap()
    }

    #[test]
    fn globally_true_everywhere_on_constant_model() {
        let m = constant_p0();
        let table = label(&m, &f("G p0"));
        assert!(m.positions().all(|pos| table.root(pos)));
    }

    #[test]
    fn eventually_not_p0_on_step_down() {
        let m = step_down(2);
        assert!(holds(&m, TimeInstant::ORIGIN, &f("F !p0")));
        assert!(holds_oracle(&m, TimeInstant::ORIGIN, &f("F !p0")));
        assert!(!holds(&m, TimeInstant::ORIGIN, &f("G p0")));
    }

    /// Unrolls the row far enough to decide `p0 u p1` by a plain scan.
    fn brute_local_until(m: &PeriodicModel, t: TimeInstant) -> bool {
        for k in 0..64 {
            let s = TimeInstant::new(t.row, t.col + k);
            if m.lookup(s, VarId(1)) {
                return true;
            }
            if !m.lookup(s, VarId(0)) {
                return false;
            }
        }
        false
    }

    #[test]
    fn local_until_blocked_at_column_zero() {
        let row = LassoRow::new(vec![cell(&[])], vec![cell(&[0]), cell(&[1])]);
        let m = PeriodicModel::new(cell(&[0, 1]), vec![], vec![row]).unwrap();
        let phi = f("p0 u p1");
        assert!(!brute_local_until(&m, TimeInstant::ORIGIN));
        assert!(!holds(&m, TimeInstant::ORIGIN, &phi));
        assert!(!holds_oracle(&m, TimeInstant::ORIGIN, &phi));
        for col in 0..6 {
            let t = TimeInstant::new(0, col);
            assert_eq!(holds(&m, t, &phi), brute_local_until(&m, t), "col {col}");
        }
    }

    #[test]
    fn collapse_example_holds_everywhere() {
        let phi = f("[1][w]p0 <-> [w]p0");
        for m in [constant_p0(), step_down(1), step_down(3)] {
            for i in 0..5 {
                for j in 0..3 {
                    assert!(holds(&m, TimeInstant::new(i, j), &phi));
                }
            }
        }
    }

    #[test]
    fn a5_instances_hold() {
        let row = LassoRow::new(vec![cell(&[0]), cell(&[])], vec![cell(&[1]), cell(&[0])]);
        let m = PeriodicModel::new(cell(&[0, 1]), vec![row.clone()], vec![row]).unwrap();
        let phi = f("p1 -> (p0 u p1)");
        for i in 0..3 {
            for j in 0..6 {
                assert!(holds(&m, TimeInstant::new(i, j), &phi));
            }
        }
    }

    #[test]
    fn contradiction_never_holds() {
        assert!(!holds(
            &constant_p0(),
            TimeInstant::new(4, 4),
            &f("p0 & !p0")
        ));
    }

    #[test]
    fn oracle_reads_variables_directly() {
        let m = step_down(2);
        for i in 0..4 {
            let t = TimeInstant::new(i, 3);
            assert_eq!(holds_oracle(&m, t, &f("p0")), m.lookup(t, VarId(0)));
        }
    }

    #[test]
    fn global_until_crosses_rows() {
        // p0 on rows 0 and 1, p1 appears at <2,3>
        let m = PeriodicModel::new(
            cell(&[0, 1]),
            vec![
                LassoRow::constant(cell(&[0])),
                LassoRow::constant(cell(&[0])),
                LassoRow::new(vec![cell(&[0]), cell(&[0]), cell(&[0])], vec![cell(&[1])]),
            ],
            vec![LassoRow::constant(cell(&[]))],
        )
        .unwrap();
        let phi = f("p0 U p1");
        assert!(holds(&m, TimeInstant::ORIGIN, &phi));
        assert!(holds_oracle(&m, TimeInstant::ORIGIN, &phi));
        assert!(!holds(&m, TimeInstant::ORIGIN, &f("p0 u p1")));
        assert!(!holds(&m, TimeInstant::new(3, 0), &phi));
        assert!(!holds_oracle(&m, TimeInstant::new(3, 0), &phi));
    }

    #[test]
    fn theories() {
        let m = step_down(2);
        assert!(check_theory(&m, TimeInstant::ORIGIN, &[]));
        assert!(!check_theory(&m, TimeInstant::ORIGIN, &[f("p0"), f("!p0")]));
        assert!(check_theory(
            &m,
            TimeInstant::ORIGIN,
            &[f("p0"), f("[w][1]p0"), f("F !p0")]
        ));
    }
}
