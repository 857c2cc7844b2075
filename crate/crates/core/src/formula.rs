//! Formulas of the logic: abstract syntax, the derived connectives, and the
//! structural queries (length, variables, subformula closure) the checker and
//! the solver are built on.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

mod parser;

pub use parser::{parse, ParseError, ParseErrorKind};

/// A propositional variable `p<index>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Serialized by name, as in model files.
impl serde::Serialize for VarId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for VarId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('p')
            .ok_or_else(|| format!("variable name `{s}` must start with `p`"))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!(
                "variable name `{s}` must be `p` followed by digits"
            ));
        }
        digits
            .parse()
            .map(VarId)
            .map_err(|_| format!("variable index in `{s}` is out of range"))
    }
}

/// The two "next" modalities: `[1]` moves one micro step along the current
/// row, `[w]` jumps to column 0 of the next row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    One,
    Omega,
}

/// Formula syntax tree.
///
/// The first seven variants are the core language. The remaining ones are
/// abbreviations that only exist until [`desugar`] removes them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(VarId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// `[1]φ`
    Next1(Box<Formula>),
    /// `[w]φ`
    NextW(Box<Formula>),
    /// `φ u ψ`, until confined to the current row.
    LocalUntil(Box<Formula>, Box<Formula>),
    /// `φ U ψ`, until over the whole lexicographic order.
    Until(Box<Formula>, Box<Formula>),

    True,
    False,
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `f φ`: φ later in the current row.
    LocalEventually(Box<Formula>),
    /// `g φ`: φ from now on in the current row.
    LocalAlways(Box<Formula>),
    /// `F φ`
    Eventually(Box<Formula>),
    /// `G φ`
    Always(Box<Formula>),
    /// `[a]^n φ`
    IterNext(Step, u32, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn var(index: u32) -> Formula {
        Var(VarId(index))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Iff(Box::new(a), Box::new(b))
    }

    pub fn next1(f: Formula) -> Formula {
        Next1(Box::new(f))
    }

    pub fn next_w(f: Formula) -> Formula {
        NextW(Box::new(f))
    }

    pub fn next(step: Step, f: Formula) -> Formula {
        match step {
            Step::One => Formula::next1(f),
            Step::Omega => Formula::next_w(f),
        }
    }

    pub fn local_until(a: Formula, b: Formula) -> Formula {
        LocalUntil(Box::new(a), Box::new(b))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Until(Box::new(a), Box::new(b))
    }

    pub fn local_eventually(f: Formula) -> Formula {
        LocalEventually(Box::new(f))
    }

    pub fn local_always(f: Formula) -> Formula {
        LocalAlways(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Always(Box::new(f))
    }

    pub fn iter_next(step: Step, n: u32, f: Formula) -> Formula {
        IterNext(step, n, Box::new(f))
    }

    /// Conjunction of a list, left-nested. `None` for an empty list.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// True iff only the seven core constructors occur.
    pub fn is_core(&self) -> bool {
        match self {
            Var(_) => true,
            Not(a) | Next1(a) | NextW(a) => a.is_core(),
            And(a, b) | LocalUntil(a, b) | Until(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Var(_) | True | False => vec![],
            Not(a)
            | Next1(a)
            | NextW(a)
            | LocalEventually(a)
            | LocalAlways(a)
            | Eventually(a)
            | Always(a)
            | IterNext(_, _, a) => vec![a],
            And(a, b) | LocalUntil(a, b) | Until(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Number of symbols: every constructor and every variable occurrence
    /// counts once.
    pub fn length(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::length)
            .sum::<usize>()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        if let Var(v) = self {
            out.insert(*v);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var(v) => write!(f, "{v}"),
            True => f.write_str("true"),
            False => f.write_str("false"),
            Not(a) => write!(f, "!{a}"),
            Next1(a) => write!(f, "[1]{a}"),
            NextW(a) => write!(f, "[w]{a}"),
            LocalEventually(a) => write!(f, "f {a}"),
            LocalAlways(a) => write!(f, "g {a}"),
            Eventually(a) => write!(f, "F {a}"),
            Always(a) => write!(f, "G {a}"),
            IterNext(step, n, a) => {
                let tok = match step {
                    Step::One => "[1]",
                    Step::Omega => "[w]",
                };
                for _ in 0..*n {
                    f.write_str(tok)?;
                }
                write!(f, "{a}")
            }
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Iff(a, b) => write!(f, "({a} <-> {b})"),
            LocalUntil(a, b) => write!(f, "({a} u {b})"),
            Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}

/// Rewrites every abbreviation into the core language.
///
/// `true` becomes `q -> q` for the lowest-index variable `q` of the whole
/// input (`p0` when the input has no variables).
pub fn desugar(phi: &Formula) -> Formula {
    let q = phi.vars().into_iter().next().unwrap_or(VarId(0));
    Desugarer { top: Var(q) }.run(phi)
}

struct Desugarer {
    top: Formula,
}

impl Desugarer {
    fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    fn implies(a: Formula, b: Formula) -> Formula {
        Self::or(Formula::not(a), b)
    }

    /// `f φ = (φ -> φ) u φ` on an already desugared φ.
    fn local_eventually(a: Formula) -> Formula {
        Formula::local_until(Self::implies(a.clone(), a.clone()), a)
    }

    fn run(&self, phi: &Formula) -> Formula {
        match phi {
            Var(v) => Var(*v),
            True => Self::implies(self.top.clone(), self.top.clone()),
            False => Formula::not(self.run(&True)),
            Not(a) => Formula::not(self.run(a)),
            And(a, b) => Formula::and(self.run(a), self.run(b)),
            Next1(a) => Formula::next1(self.run(a)),
            NextW(a) => Formula::next_w(self.run(a)),
            LocalUntil(a, b) => Formula::local_until(self.run(a), self.run(b)),
            Until(a, b) => Formula::until(self.run(a), self.run(b)),
            Or(a, b) => Self::or(self.run(a), self.run(b)),
            Implies(a, b) => Self::implies(self.run(a), self.run(b)),
            Iff(a, b) => {
                let (a, b) = (self.run(a), self.run(b));
                Formula::and(Self::implies(a.clone(), b.clone()), Self::implies(b, a))
            }
            LocalEventually(a) => Self::local_eventually(self.run(a)),
            LocalAlways(a) => Formula::not(Self::local_eventually(Formula::not(self.run(a)))),
            Eventually(a) => {
                let a = self.run(a);
                Formula::until(Self::implies(a.clone(), a.clone()), a)
            }
            Always(a) => {
                let na = Formula::not(self.run(a));
                Formula::not(Formula::until(Self::implies(na.clone(), na.clone()), na))
            }
            IterNext(step, n, a) => {
                let mut out = self.run(a);
                for _ in 0..*n {
                    out = Formula::next(*step, out);
                }
                out
            }
        }
    }
}

/// The distinct subformulas of a formula, children before parents.
#[derive(Clone, Debug, Default)]
pub struct Closure {
    formulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
}

impl Closure {
    pub fn of(phi: &Formula) -> Closure {
        let mut c = Closure::default();
        c.insert(phi);
        c
    }

    /// Adds `phi` and all of its subformulas, returning the position of `phi`.
    pub fn insert(&mut self, phi: &Formula) -> usize {
        if let Some(&i) = self.index.get(phi) {
            return i;
        }
        for c in phi.children() {
            self.insert(c);
        }
        self.push(phi.clone())
    }

    /// Appends a formula whose subformulas are already present.
    pub(crate) fn push(&mut self, phi: Formula) -> usize {
        debug_assert!(phi.children().iter().all(|c| self.index.contains_key(*c)));
        let i = self.formulas.len();
        self.index.insert(phi.clone(), i);
        self.formulas.push(phi);
        i
    }

    pub fn position(&self, phi: &Formula) -> Option<usize> {
        self.index.get(phi).copied()
    }

    pub fn contains(&self, phi: &Formula) -> bool {
        self.index.contains_key(phi)
    }

    pub fn get(&self, i: usize) -> &Formula {
        &self.formulas[i]
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.formulas.iter()
    }

    /// Position of each immediate subformula of the formula at `i`.
    pub fn child_positions(&self, i: usize) -> Vec<usize> {
        self.formulas[i]
            .children()
            .into_iter()
            .map(|c| self.index[c])
            .collect()
    }
}

pub fn closure(phi: &Formula) -> Closure {
    Closure::of(phi)
}
