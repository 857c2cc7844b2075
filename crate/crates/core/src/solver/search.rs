//! Deterministic search for an accepting run of the satisfiability machine.
//!
//! A run is a lasso of rows, and every row is a lasso of atoms. Rows are
//! found by breadth-first search over atoms linked by `[1]`, with the row's
//! `[w]` successor fixed. The outer lasso is searched over row-start atoms,
//! where an edge `b -> w` exists iff a row from `b` with successor `w` exists.
//!
//! The outer search first runs a bounded iterative-deepening DFS over
//! `(k + m, k)` (cheap when a short run exists) and then an exhaustive BFS
//! that also decides whether any bound actually cut the search.

use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;
use std::sync::atomic::{AtomicBool, Ordering};

use super::atoms::{Atom, Layout, Node, Partial};
use super::machine::{RowTrace, Trace};
use crate::model::{LassoRow, PeriodicModel};

/// Outer lengths tried by the depth-first phase before falling back to BFS.
const DFS_OUTER_CAP: usize = 3;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Limits {
    pub outer_prefix: usize,
    pub outer_loop: usize,
    pub inner_prefix: usize,
    pub inner_loop: usize,
    pub max_states: usize,
}

#[derive(Debug)]
pub(crate) struct RowLasso {
    pub atoms: Vec<Atom>,
    pub k_loc: usize,
    /// `U`-formulas whose right argument shows up somewhere in the row.
    pub discharge: u128,
}

#[derive(Clone)]
struct RowEntry {
    lasso: Option<Rc<RowLasso>>,
    truncated: bool,
}

#[derive(Clone, Copy)]
enum Level {
    /// Columns of one row whose `[w]` successor is the given atom.
    Row(Atom),
    /// Row-start atoms.
    Outer,
}

/// An accepting outer lasso: row-start atoms, the outer loop starting at `k`.
pub(crate) struct OuterRun {
    pub starts: Vec<Atom>,
    pub k: usize,
}

pub(crate) struct Search<'a> {
    layout: &'a Layout,
    limits: Limits,
    spent: usize,
    budget: usize,
    exhausted: bool,
    /// Set whenever a bound or the state budget hid part of the space.
    cut: bool,
    stop: Option<&'a AtomicBool>,
    rows: HashMap<(Atom, Atom), RowEntry>,
    steps: HashMap<(Atom, Atom), Rc<[Atom]>>,
    jumps: HashMap<Atom, Rc<[Atom]>>,
    dead_prefix: HashSet<(Atom, usize, usize)>,
    dead_loop: HashSet<(Atom, Atom, usize, u128)>,
}

impl<'a> Search<'a> {
    pub fn new(layout: &'a Layout, limits: Limits, stop: Option<&'a AtomicBool>) -> Self {
        Search {
            layout,
            limits,
            spent: 0,
            budget: limits.max_states,
            exhausted: false,
            cut: false,
            stop,
            rows: HashMap::new(),
            steps: HashMap::new(),
            jumps: HashMap::new(),
            dead_prefix: HashSet::new(),
            dead_loop: HashSet::new(),
        }
    }

    /// States expanded so far.
    pub fn spent(&self) -> usize {
        self.spent
    }

    fn tick(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        self.spent += 1;
        let stopped = self.stop.is_some_and(|s| s.load(Ordering::Relaxed));
        if self.spent > self.budget || stopped {
            self.exhausted = true;
            self.cut = true;
            return false;
        }
        true
    }

    /// Consistent atoms containing the goal.
    pub fn initial_atoms(&self) -> Vec<Atom> {
        let fixed = Partial::default()
            .force(self.layout.goal, true)
            .expect("single forced bit");
        self.layout.enumerate(fixed, |_, _| None)
    }

    /// Atoms that may follow `x` one column later in a row whose `[w]`
    /// successor is `w`.
    fn steps(&mut self, x: Atom, w: Atom) -> Rc<[Atom]> {
        if let Some(s) = self.steps.get(&(x, w)) {
            return s.clone();
        }
        let layout = self.layout;
        let mut fixed = Some(Partial::default());
        for (i, n) in layout.nodes.iter().enumerate() {
            fixed = fixed.and_then(|f| match *n {
                Node::Next1(c) => f.force(c, x.has(i)),
                Node::NextW(c) => f.force(i, w.has(c)),
                Node::LocalUntil { left, right } if x.has(left) && !x.has(right) => {
                    f.force(i, x.has(i))
                }
                _ => Some(f),
            });
        }
        let out: Rc<[Atom]> = match fixed {
            None => Rc::from(Vec::new()),
            Some(fixed) => {
                let derive = |acc: Atom, i: usize| match layout.nodes[i] {
                    Node::Until { local, always, .. } => {
                        Some(acc.has(local) || (acc.has(always) && w.has(i)))
                    }
                    _ => None,
                };
                layout
                    .enumerate(fixed, derive)
                    .into_iter()
                    .filter(|&y| layout.step_compatible(x, y))
                    .collect::<Vec<_>>()
                    .into()
            }
        };
        self.steps.insert((x, w), out.clone());
        out
    }

    /// Candidate row-start atoms following a row that starts with `b`.
    fn jumps(&mut self, b: Atom) -> Rc<[Atom]> {
        if let Some(s) = self.jumps.get(&b) {
            return s.clone();
        }
        let mut fixed = Some(Partial::default());
        for (i, n) in self.layout.nodes.iter().enumerate() {
            if let Node::NextW(c) = *n {
                fixed = fixed.and_then(|f| f.force(c, b.has(i)));
            }
        }
        let out: Rc<[Atom]> = match fixed {
            None => Rc::from(Vec::new()),
            Some(f) => self.layout.enumerate(f, |_, _| None).into(),
        };
        self.jumps.insert(b, out.clone());
        out
    }

    /// A row starting with `b` whose `[w]` successor is `w`.
    pub(crate) fn row(&mut self, b: Atom, w: Atom) -> Option<Rc<RowLasso>> {
        if let Some(e) = self.rows.get(&(b, w)) {
            let e = e.clone();
            if e.lasso.is_none() && e.truncated {
                self.cut = true;
            }
            return e.lasso;
        }
        if !self.layout.row_compatible(b, w) {
            self.rows.insert(
                (b, w),
                RowEntry {
                    lasso: None,
                    truncated: false,
                },
            );
            return None;
        }
        let outer_cut = std::mem::replace(&mut self.cut, false);
        let found = self.bfs_lasso(
            Level::Row(w),
            &[b],
            self.limits.inner_prefix,
            self.limits.inner_loop,
        );
        let truncated = self.cut;
        self.cut = outer_cut || (found.is_none() && truncated);
        let lasso = found.map(|(atoms, k_loc)| {
            let discharge = atoms
                .iter()
                .fold(0, |acc, &a| acc | self.layout.until_discharge(a));
            Rc::new(RowLasso {
                atoms,
                k_loc,
                discharge,
            })
        });
        // a budget cut is not a property of the row
        if !self.exhausted {
            self.rows.insert(
                (b, w),
                RowEntry {
                    lasso: lasso.clone(),
                    truncated,
                },
            );
        }
        lasso
    }

    fn successors(&mut self, level: Level, x: Atom) -> Vec<(Atom, u128)> {
        match level {
            Level::Row(w) => {
                let disc = self.layout.local_discharge(x);
                self.steps(x, w).iter().map(|&y| (y, disc)).collect()
            }
            Level::Outer => {
                let mut out = Vec::new();
                for &w in self.jumps(x).iter() {
                    if self.exhausted {
                        break;
                    }
                    if let Some(r) = self.row(x, w) {
                        out.push((w, r.discharge));
                    }
                }
                out
            }
        }
    }

    fn obligations(&self, level: Level, c: Atom) -> u128 {
        match level {
            Level::Row(_) => self.layout.local_untils(c),
            Level::Outer => self.layout.untils(c),
        }
    }

    /// Shortest lasso from one of `starts` whose loop discharges the
    /// obligations of its first node. Ties on total length go to the smaller
    /// loop-start atom. Returns the nodes and the loop start index.
    fn bfs_lasso(
        &mut self,
        level: Level,
        starts: &[Atom],
        max_prefix: usize,
        max_loop: usize,
    ) -> Option<(Vec<Atom>, usize)> {
        let mut depth: HashMap<Atom, (usize, Option<Atom>)> = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in starts {
            if depth.insert(s, (0, None)).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            if !self.tick() {
                return None;
            }
            let d = depth[&x].0;
            let succ = self.successors(level, x);
            if d == max_prefix {
                if succ.iter().any(|(y, _)| !depth.contains_key(y)) {
                    self.cut = true;
                }
                continue;
            }
            for (y, _) in succ {
                if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(y) {
                    e.insert((d + 1, Some(x)));
                    queue.push_back(y);
                }
            }
        }
        let mut candidates: Vec<(usize, Atom)> = depth.iter().map(|(a, (d, _))| (*d, *a)).collect();
        candidates.sort_unstable();

        let mut best: Option<(usize, Atom, Vec<Atom>)> = None;
        for (d, c) in candidates {
            let limit = match &best {
                Some((total, _, _)) if d + 1 > *total => break,
                Some((total, _, _)) => max_loop.min(total - d),
                None => max_loop,
            };
            let Some(cycle) = self.shortest_cycle(level, c, limit) else {
                if self.exhausted {
                    return None;
                }
                continue;
            };
            let total = d + cycle.len();
            let better = match &best {
                None => true,
                Some((bt, bc, _)) => (total, c) < (*bt, *bc),
            };
            if better {
                best = Some((total, c, cycle));
            }
        }
        let (_, c, cycle) = best?;
        let mut prefix = Vec::new();
        let mut at = depth[&c].1;
        while let Some(p) = at {
            prefix.push(p);
            at = depth[&p].1;
        }
        prefix.reverse();
        let k = prefix.len();
        prefix.extend(cycle);
        Some((prefix, k))
    }

    /// Shortest cycle through `c` of length at most `limit` along which all
    /// obligations of `c` are discharged. Nodes are returned starting at `c`.
    fn shortest_cycle(&mut self, level: Level, c: Atom, limit: usize) -> Option<Vec<Atom>> {
        type State = (Atom, u128);
        let start: State = (c, self.obligations(level, c));
        let mut parent: HashMap<State, State> = HashMap::new();
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((state @ (x, rem), d)) = queue.pop_front() {
            if !self.tick() {
                return None;
            }
            let succ = self.successors(level, x);
            if d == limit {
                if !succ.is_empty() {
                    self.cut = true;
                }
                continue;
            }
            for (y, disc) in succ {
                let next = (y, rem & !disc);
                if next == (c, 0) {
                    let mut nodes = vec![x];
                    let mut at = state;
                    while at != start {
                        at = parent[&at];
                        nodes.push(at.0);
                    }
                    nodes.reverse();
                    return Some(nodes);
                }
                if next != start && !parent.contains_key(&next) {
                    parent.insert(next, state);
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }

    /// Bounded depth-first phase over `(k, m)` pairs with `k + m`
    /// ascending, restricted to the given pairs.
    pub fn dfs_phase(&mut self, pairs: &[(usize, usize)], budget: usize) -> Option<OuterRun> {
        self.budget = budget;
        let starts = self.initial_atoms();
        let mut found = None;
        'pairs: for &(k, m) in pairs {
            for &b0 in &starts {
                let mut path = vec![b0];
                let rem = if k == 0 { self.layout.untils(b0) } else { 0 };
                if self.dfs(&mut path, k, m, rem) {
                    found = Some(OuterRun { starts: path, k });
                    break 'pairs;
                }
                if self.exhausted {
                    break 'pairs;
                }
            }
        }
        self.budget = self.limits.max_states;
        self.exhausted = false;
        self.cut = false;
        found
    }

    fn dfs(&mut self, path: &mut Vec<Atom>, k: usize, m: usize, rem: u128) -> bool {
        if !self.tick() {
            return false;
        }
        let i = path.len() - 1;
        let x = path[i];
        let total = k + m;
        if i == total - 1 {
            let target = path[k];
            return match self.row(x, target) {
                Some(r) => rem & !r.discharge == 0,
                None => false,
            };
        }
        let dead_prefix_key = (x, k - i.min(k), m);
        let dead_loop_key = (
            x,
            path.get(k).copied().unwrap_or_default(),
            total - 1 - i,
            rem,
        );
        if i < k {
            if self.dead_prefix.contains(&dead_prefix_key) {
                return false;
            }
        } else if self.dead_loop.contains(&dead_loop_key) {
            return false;
        }
        for &w in self.jumps(x).iter() {
            let row = self.row(x, w);
            if self.exhausted {
                return false;
            }
            let Some(r) = row else { continue };
            let next_rem = if i + 1 == k {
                self.layout.untils(w)
            } else if i >= k {
                rem & !r.discharge
            } else {
                0
            };
            path.push(w);
            if self.dfs(path, k, m, next_rem) {
                return true;
            }
            path.pop();
            if self.exhausted {
                return false;
            }
        }
        // only a completed sweep proves the state dead
        if self.exhausted {
            return false;
        }
        if i < k {
            self.dead_prefix.insert(dead_prefix_key);
        } else {
            self.dead_loop.insert(dead_loop_key);
        }
        false
    }

    /// Exhaustive phase. The second value reports whether a bound or the
    /// state budget cut the search; it is meaningful only when no run is
    /// found.
    pub fn bfs_phase(&mut self) -> (Option<OuterRun>, bool) {
        self.cut = false;
        self.exhausted = false;
        let starts = self.initial_atoms();
        let found = self.bfs_lasso(
            Level::Outer,
            &starts,
            self.limits.outer_prefix,
            self.limits.outer_loop,
        );
        let cut = self.cut;
        (found.map(|(starts, k)| OuterRun { starts, k }), cut)
    }

    /// Builds the witness model and the machine trace for an outer run.
    pub fn assemble(&mut self, run: &OuterRun) -> (PeriodicModel, Trace) {
        let n = run.starts.len();
        let mut model_rows = Vec::with_capacity(n);
        let mut trace_rows = Vec::with_capacity(n);
        for i in 0..n {
            let w = if i + 1 < n {
                run.starts[i + 1]
            } else {
                run.starts[run.k]
            };
            let row = self
                .row(run.starts[i], w)
                .expect("rows of an accepted run are cached");
            let cells = |atoms: &[Atom]| {
                atoms
                    .iter()
                    .map(|&a| self.layout.cell(a))
                    .collect::<Vec<_>>()
            };
            model_rows.push(LassoRow::new(
                cells(&row.atoms[..row.k_loc]),
                cells(&row.atoms[row.k_loc..]),
            ));
            trace_rows.push(RowTrace {
                k_loc: row.k_loc,
                m_loc: row.atoms.len() - row.k_loc,
                atoms: row.atoms.clone(),
            });
        }
        let row_loop = model_rows.split_off(run.k);
        let model = PeriodicModel {
            universe: self.layout.goal().vars(),
            row_prefix: model_rows,
            row_loop,
        };
        let trace = Trace {
            k: run.k,
            m: n - run.k,
            rows: trace_rows,
        };
        (model, trace)
    }
}

/// `(k, m)` pairs in search order: `k + m` ascending, then `k` ascending.
pub(crate) fn outer_pairs(max_k: usize, max_m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 1..=max_k + max_m {
        for k in 0..total.min(max_k + 1) {
            let m = total - k;
            if (1..=max_m).contains(&m) {
                out.push((k, m));
            }
        }
    }
    out
}

pub(crate) fn dfs_pairs(limits: &Limits) -> Vec<(usize, usize)> {
    outer_pairs(
        limits.outer_prefix.min(DFS_OUTER_CAP),
        limits.outer_loop.min(DFS_OUTER_CAP),
    )
}
