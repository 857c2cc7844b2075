//! Small instance pools of the axiom schemata, and a validity check that
//! falls back to random falsification when the solver would be too slow.

use std::fmt;

use crate::checker::label;
use crate::formula::{closure, desugar, parse, Formula, Step};
use crate::gen::{random_model, rng, ModelShape};
use crate::model::PeriodicModel;
use crate::solver::{valid, SolveError, SolverBounds, Verdict};

/// Schema names, in the order [`axiom_instances`] emits them.
pub const SCHEMATA: [&str; 8] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomInstance {
    pub schema: &'static str,
    pub formula: Formula,
}

impl fmt::Display for AxiomInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.schema, self.formula)
    }
}

/// Propositional tautologies over `a` and `b`.
const TAUTOLOGIES: [&str; 10] = [
    "a -> a",
    "a -> (b -> a)",
    "(a & b) -> a",
    "a | !a",
    "!!a <-> a",
    "(a -> b) -> (!b -> !a)",
    "(a & b) <-> (b & a)",
    "a -> (a | b)",
    "!(a & !a)",
    "((a -> b) & a) -> b",
];

/// Substitutions for the schema letters; every formula has at most four
/// symbols.
fn letters() -> Vec<(Formula, Formula)> {
    [
        ("p0", "p1"),
        ("[1]p0", "!p1"),
        ("p0 u p1", "[w]p0"),
        ("!p1", "p0 & p1"),
    ]
    .iter()
    .map(|(a, b)| (parse(a).unwrap(), parse(b).unwrap()))
    .collect()
}

fn substitute(template: &str, a: &Formula, b: &Formula) -> Formula {
    // letters are rendered fully parenthesised, so plain text splicing is safe
    let text: String = template
        .chars()
        .map(|c| match c {
            'a' => format!("({a})"),
            'b' => format!("({b})"),
            c => c.to_string(),
        })
        .collect();
    parse(&text).unwrap_or_else(|e| panic!("bad template {template}: {e}"))
}

fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
    Formula::conjunction(items).expect("non-empty conjunction")
}

/// Instances of A1 (20 tautologies), A2, A3 and A4 (both steps, every
/// connective), A5, A6, A7 (`n <= 2`) and A8 (`n <= 1`).
pub fn axiom_instances() -> Vec<AxiomInstance> {
    let letters = letters();
    let mut out = Vec::new();
    let mut push = |schema, formula| out.push(AxiomInstance { schema, formula });
    for (i, t) in TAUTOLOGIES.iter().enumerate() {
        for (a, b) in &letters[(i % 2)..(i % 2) + 2] {
            push("A1", substitute(t, a, b));
        }
    }
    let steps = [Step::One, Step::Omega];
    for (phi, psi) in &letters {
        push(
            "A2",
            Formula::iff(
                Formula::next1(Formula::next_w(phi.clone())),
                Formula::next_w(phi.clone()),
            ),
        );
        for step in steps {
            push(
                "A3",
                Formula::iff(
                    Formula::not(Formula::next(step, phi.clone())),
                    Formula::next(step, Formula::not(phi.clone())),
                ),
            );
            let ops: [fn(Formula, Formula) -> Formula; 4] =
                [Formula::and, Formula::or, Formula::implies, Formula::iff];
            for op in ops {
                push(
                    "A4",
                    Formula::iff(
                        Formula::next(step, op(phi.clone(), psi.clone())),
                        op(
                            Formula::next(step, phi.clone()),
                            Formula::next(step, psi.clone()),
                        ),
                    ),
                );
            }
        }
        let local = Formula::local_until(phi.clone(), psi.clone());
        let global = Formula::until(phi.clone(), psi.clone());
        push("A5", Formula::implies(psi.clone(), local.clone()));
        push("A6", Formula::implies(local.clone(), global.clone()));
        let stay = Formula::and(phi.clone(), Formula::not(psi.clone()));
        for n in 0..=2u32 {
            let premise = conj(
                (0..=n)
                    .map(|k| Formula::iter_next(Step::One, k, stay.clone()))
                    .chain([Formula::iter_next(Step::One, n + 1, psi.clone())]),
            );
            push("A7", Formula::implies(premise, local.clone()));
        }
        for n in 0..=1u32 {
            let premise = conj(
                (0..=n)
                    .map(|k| {
                        Formula::iter_next(Step::Omega, k, Formula::local_always(stay.clone()))
                    })
                    .chain([Formula::iter_next(Step::Omega, n + 1, local.clone())]),
            );
            push("A8", Formula::implies(premise, global.clone()));
        }
    }
    out.sort_by_key(|inst| SCHEMATA.iter().position(|s| *s == inst.schema));
    out
}

/// How an instance was confirmed, or the countermodel refuting it.
#[derive(Clone, Debug)]
pub enum Confirmation {
    /// The solver proved validity.
    Proved,
    /// The solver was skipped or inconclusive and no random model refuted the
    /// formula.
    Unrefuted {
        models: usize,
    },
    Refuted {
        countermodel: PeriodicModel,
    },
}

impl Confirmation {
    pub fn passed(&self) -> bool {
        !matches!(self, Confirmation::Refuted { .. })
    }
}

/// Closure size up to which [`confirm_valid`] runs the solver with complete
/// bounds.
pub const SOLVER_CLOSURE_LIMIT: usize = 16;

/// Checks validity of `phi`: by the solver with complete bounds when the
/// closure has at most [`SOLVER_CLOSURE_LIMIT`] formulas, otherwise by
/// searching `models` random models for a position where `phi` fails.
pub fn confirm_valid(phi: &Formula, models: usize, seed: u64) -> Result<Confirmation, SolveError> {
    let core = desugar(phi);
    if closure(&core).len() <= SOLVER_CLOSURE_LIMIT {
        match valid(&core, &SolverBounds::complete())? {
            Verdict::Holds => return Ok(Confirmation::Proved),
            Verdict::Fails { countermodel } => return Ok(Confirmation::Refuted { countermodel }),
            Verdict::Unknown(_) => {}
        }
    }
    Ok(falsify(&core, models, seed))
}

/// Random falsification: looks for a stored position of a random model where
/// `phi` is false.
pub fn falsify(phi: &Formula, models: usize, seed: u64) -> Confirmation {
    let vars = phi.vars().iter().map(|v| v.0 + 1).max().unwrap_or(1);
    let shape = ModelShape {
        vars,
        ..ModelShape::default()
    };
    let mut r = rng(seed);
    for _ in 0..models {
        let m = random_model(&mut r, &shape);
        let table = label(&m, phi);
        if m.positions().any(|pos| !table.root(pos)) {
            return Confirmation::Refuted { countermodel: m };
        }
    }
    Confirmation::Unrefuted { models }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_covers_every_schema() {
        let pool = axiom_instances();
        for s in SCHEMATA {
            assert!(pool.iter().any(|i| i.schema == s), "{s}");
        }
        assert_eq!(pool.iter().filter(|i| i.schema == "A1").count(), 20);
        assert_eq!(pool.iter().filter(|i| i.schema == "A4").count(), 4 * 2 * 4);
    }

    #[test]
    fn letters_are_short() {
        for (a, b) in letters() {
            assert!(a.length() <= 4 && b.length() <= 4);
        }
    }

    #[test]
    fn substitution_respects_structure() {
        let (a, b) = (parse("p0 u p1").unwrap(), parse("[w]p0").unwrap());
        assert_eq!(
            substitute("a -> (b -> a)", &a, &b),
            Formula::implies(a.clone(), Formula::implies(b, a))
        );
    }

    #[test]
    fn falsification_finds_obvious_countermodels() {
        assert!(!falsify(&parse("p0").unwrap(), 50, 1).passed());
        assert!(falsify(&desugar(&parse("p0 | !p0").unwrap()), 50, 1).passed());
    }

    #[test]
    fn a5_instances_are_proved() {
        for inst in axiom_instances().iter().filter(|i| i.schema == "A5") {
            assert!(
                confirm_valid(&inst.formula, 50, 3).unwrap().passed(),
                "{inst}"
            );
        }
    }
}
