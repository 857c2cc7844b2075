//! Atoms: Boolean-consistent truth assignments over the solver closure.

use std::fmt;

use crate::formula::{desugar, Closure, Formula, VarId};

/// Largest closure an [`Atom`] can index.
pub const MAX_CLOSURE: usize = 128;

/// A subset of the solver closure, one bit per closure position.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(pub u128);

impl Atom {
    pub fn has(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize, value: bool) -> Atom {
        if value {
            Atom(self.0 | 1 << i)
        } else {
            Atom(self.0 & !(1 << i))
        }
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..MAX_CLOSURE).filter(move |&i| self.has(i))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({:#x})", self.0)
    }
}

/// Shape of one closure member, with children given as closure positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Node {
    Var(VarId),
    Not(usize),
    And(usize, usize),
    Next1(usize),
    NextW(usize),
    LocalUntil {
        left: usize,
        right: usize,
    },
    /// `left U right`, together with the positions of `left u right` and
    /// `g(left & !right)`.
    Until {
        left: usize,
        right: usize,
        local: usize,
        always: usize,
    },
}

/// The closure the solver works over: all subformulas of the goal plus, for
/// every `ψ U θ`, the formulas `ψ u θ` and `g(ψ & !θ)` (desugared).
#[derive(Clone, Debug)]
pub struct Layout {
    closure: Closure,
    pub(crate) nodes: Vec<Node>,
    pub(crate) goal: usize,
    local_until_mask: u128,
    until_mask: u128,
}

/// `g(ψ & !θ)` in desugared form.
pub fn until_stay_formula(left: &Formula, right: &Formula) -> Formula {
    desugar(&Formula::local_always(Formula::and(
        left.clone(),
        Formula::not(right.clone()),
    )))
}

fn insert(c: &mut Closure, f: &Formula) -> usize {
    if let Some(i) = c.position(f) {
        return i;
    }
    for child in f.children() {
        insert(c, child);
    }
    if let Formula::Until(a, b) = f {
        insert(c, &Formula::local_until((**a).clone(), (**b).clone()));
        insert(c, &until_stay_formula(a, b));
    }
    c.push(f.clone())
}

impl Layout {
    /// Builds the layout for a desugared goal. `None` when the closure does
    /// not fit in an [`Atom`].
    pub fn new(goal: &Formula) -> Option<Layout> {
        assert!(goal.is_core(), "solver input must be desugared");
        let mut closure = Closure::default();
        let goal_pos = insert(&mut closure, goal);
        if closure.len() > MAX_CLOSURE {
            return None;
        }
        let mut nodes = Vec::with_capacity(closure.len());
        let mut local_until_mask = 0u128;
        let mut until_mask = 0u128;
        for (i, f) in closure.iter().enumerate() {
            let kids = closure.child_positions(i);
            let node = match f {
                Formula::Var(v) => Node::Var(*v),
                Formula::Not(_) => Node::Not(kids[0]),
                Formula::And(..) => Node::And(kids[0], kids[1]),
                Formula::Next1(_) => Node::Next1(kids[0]),
                Formula::NextW(_) => Node::NextW(kids[0]),
                Formula::LocalUntil(..) => {
                    local_until_mask |= 1 << i;
                    Node::LocalUntil {
                        left: kids[0],
                        right: kids[1],
                    }
                }
                Formula::Until(a, b) => {
                    until_mask |= 1 << i;
                    let local = closure
                        .position(&Formula::local_until((**a).clone(), (**b).clone()))
                        .expect("auxiliary local until inserted");
                    let always = closure
                        .position(&until_stay_formula(a, b))
                        .expect("auxiliary g-formula inserted");
                    Node::Until {
                        left: kids[0],
                        right: kids[1],
                        local,
                        always,
                    }
                }
                other => unreachable!("core formula expected, found {other}"),
            };
            nodes.push(node);
        }
        Some(Layout {
            closure,
            nodes,
            goal: goal_pos,
            local_until_mask,
            until_mask,
        })
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn goal(&self) -> &Formula {
        self.closure.get(self.goal)
    }

    /// Variables true in `a`.
    pub fn cell(&self, a: Atom) -> crate::model::Cell {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                Node::Var(v) if a.has(i) => Some(*v),
                _ => None,
            })
            .collect()
    }

    pub fn local_untils(&self, a: Atom) -> u128 {
        a.0 & self.local_until_mask
    }

    pub fn untils(&self, a: Atom) -> u128 {
        a.0 & self.until_mask
    }

    /// `u`-formulas whose right argument is in `a`.
    pub(crate) fn local_discharge(&self, a: Atom) -> u128 {
        self.discharge(a, self.local_until_mask)
    }

    /// `U`-formulas whose right argument is in `a`.
    pub(crate) fn until_discharge(&self, a: Atom) -> u128 {
        self.discharge(a, self.until_mask)
    }

    fn discharge(&self, a: Atom, mask: u128) -> u128 {
        let mut out = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let right = match n {
                Node::LocalUntil { right, .. } | Node::Until { right, .. } => *right,
                _ => unreachable!(),
            };
            if a.has(right) {
                out |= 1 << i;
            }
        }
        out
    }

    pub fn is_consistent(&self, a: Atom) -> bool {
        if self.len() < MAX_CLOSURE && a.0 >> self.len() != 0 {
            return false;
        }
        self.nodes.iter().enumerate().all(|(i, n)| match *n {
            Node::Not(c) => a.has(i) != a.has(c),
            Node::And(l, r) => a.has(i) == (a.has(l) && a.has(r)),
            _ => true,
        })
    }

    /// The conditions on `present` that only involve the `[w]` successor.
    pub(crate) fn row_compatible(&self, present: Atom, next_w: Atom) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| match *n {
            Node::NextW(c) => present.has(i) == next_w.has(c),
            Node::Until { local, always, .. } => {
                present.has(i) == (present.has(local) || (present.has(always) && next_w.has(i)))
            }
            _ => true,
        })
    }

    /// The conditions on `present` that only involve the `[1]` successor.
    pub(crate) fn step_compatible(&self, present: Atom, next1: Atom) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| match *n {
            Node::Next1(c) => present.has(i) == next1.has(c),
            Node::LocalUntil { left, right } => {
                present.has(i)
                    == (present.has(right)
                        || (present.has(left) && !present.has(right) && next1.has(i)))
            }
            _ => true,
        })
    }

    pub fn properly_linked(&self, present: Atom, next1: Atom, next_w: Atom) -> bool {
        self.row_compatible(present, next_w) && self.step_compatible(present, next1)
    }

    /// All consistent atoms agreeing with `fixed`, in ascending order.
    ///
    /// `derive` may force a leaf from the bits already assigned to earlier
    /// closure positions.
    pub(crate) fn enumerate<D>(&self, fixed: Partial, derive: D) -> Vec<Atom>
    where
        D: Fn(Atom, usize) -> Option<bool>,
    {
        let mut out = Vec::new();
        if let Some(fixed) = self.propagate(fixed) {
            self.extend(0, Atom(0), &fixed, &derive, &mut out);
        }
        out.sort_unstable();
        out
    }

    /// Pushes forced values from parents down to children.
    fn propagate(&self, mut fixed: Partial) -> Option<Partial> {
        for i in (0..self.len()).rev() {
            let Some(v) = fixed.get(i) else { continue };
            match self.nodes[i] {
                Node::Not(c) => fixed = fixed.force(c, !v)?,
                Node::And(l, r) if v => fixed = fixed.force(l, true)?.force(r, true)?,
                _ => {}
            }
        }
        Some(fixed)
    }

    fn extend<D>(&self, i: usize, acc: Atom, fixed: &Partial, derive: &D, out: &mut Vec<Atom>)
    where
        D: Fn(Atom, usize) -> Option<bool>,
    {
        if i == self.len() {
            out.push(acc);
            return;
        }
        let computed = match self.nodes[i] {
            Node::Not(c) => Some(!acc.has(c)),
            Node::And(l, r) => Some(acc.has(l) && acc.has(r)),
            _ => derive(acc, i),
        };
        match (computed, fixed.get(i)) {
            (Some(v), Some(f)) if v != f => {}
            (Some(v), _) | (None, Some(v)) => {
                self.extend(i + 1, acc.with(i, v), fixed, derive, out)
            }
            (None, None) => {
                self.extend(i + 1, acc, fixed, derive, out);
                self.extend(i + 1, acc.with(i, true), fixed, derive, out);
            }
        }
    }
}

/// A partial assignment: bits in `mask` are fixed to the matching bits of
/// `value`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Partial {
    mask: u128,
    value: u128,
}

impl Partial {
    pub(crate) fn get(self, i: usize) -> Option<bool> {
        (self.mask >> i & 1 == 1).then_some(self.value >> i & 1 == 1)
    }

    /// Fixes bit `i`, or `None` on a clash with an earlier fix.
    pub(crate) fn force(self, i: usize, v: bool) -> Option<Partial> {
        match self.get(i) {
            Some(old) if old != v => None,
            Some(_) => Some(self),
            None => Some(Partial {
                mask: self.mask | 1 << i,
                value: if v { self.value | 1 << i } else { self.value },
            }),
        }
    }
}

/// Checks the three Boolean-consistency clauses of an atom over a plain
/// subformula closure.
pub fn boolean_consistent(atom: Atom, closure: &Closure) -> bool {
    if closure.len() < MAX_CLOSURE && atom.0 >> closure.len() != 0 {
        return false;
    }
    closure.iter().enumerate().all(|(i, f)| {
        let kids = closure.child_positions(i);
        match f {
            Formula::Not(_) => atom.has(i) != atom.has(kids[0]),
            Formula::And(..) => atom.has(i) == (atom.has(kids[0]) && atom.has(kids[1])),
            _ => true,
        }
    })
}

/// Compatibility of the atom at the current instant with the atoms at its
/// `[1]` and `[w]` successors.
pub fn properly_linked(layout: &Layout, present: Atom, next1: Atom, next_w: Atom) -> bool {
    layout.properly_linked(present, next1, next_w)
}
