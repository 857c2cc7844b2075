//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use omega2tl::axioms::{axiom_instances, confirm_valid, Confirmation};
use omega2tl::gen::{random_formula, random_instant, random_model, rng, ModelShape};
use omega2tl::model::{Cell, LassoRow};
use omega2tl::transition::{
    check_transition_discipline, noncompactness_family, noncompactness_witness,
};
use omega2tl::{
    check_theory, closure, desugar, holds, holds_oracle, parse, sat, valid, Formula, PeriodicModel,
    SatResult, SolverBounds, TimeInstant, VarId, Verdict,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Witnesses collected across criteria for the soundness check.
#[derive(Default)]
struct Witnesses(Vec<(Formula, PeriodicModel)>);

impl Witnesses {
    fn record(&mut self, phi: &Formula, result: &SatResult) {
        if let Some(w) = result.witness() {
            self.0.push((phi.clone(), w.clone()));
        }
    }
}

/// 200 random formulas and 100 negated valid schema instances over random
/// letters, each of length at most 10.
fn random_pool() -> Vec<Formula> {
    let mut r = rng(0x5eed_0005);
    let mut pool: Vec<Formula> = (0..200).map(|_| random_formula(&mut r, 10, 3)).collect();
    for i in 0..100 {
        // letter sizes keep every instance within 10 symbols
        let (la, lb) = [(3, 2), (2, 1), (2, 1), (2, 1)][i % 4];
        let a = random_formula(&mut r, la, 2);
        let b = random_formula(&mut r, lb, 2);
        let valid = match i % 4 {
            0 => Formula::implies(b.clone(), Formula::local_until(a, b)),
            1 => Formula::implies(
                Formula::local_until(a.clone(), b.clone()),
                Formula::until(a, b),
            ),
            2 => Formula::iff(
                Formula::next1(Formula::next_w(a.clone())),
                Formula::next_w(a),
            ),
            _ => Formula::iff(
                Formula::not(Formula::next1(a.clone())),
                Formula::next1(Formula::not(a)),
            ),
        };
        pool.push(Formula::not(valid));
    }
    assert!(pool.iter().all(|f| f.length() <= 10));
    pool
}

fn differential() -> Outcome {
    let start = Instant::now();
    let mut r = rng(0x5eed_0001);
    let shape = ModelShape::default();
    let mut disagreements = Vec::new();
    let triples = 1500;
    for _ in 0..triples {
        let m = random_model(&mut r, &shape);
        let phi = random_formula(&mut r, 12, 3);
        let t = random_instant(&mut r, 10);
        if holds(&m, t, &phi) != holds_oracle(&m, t, &phi) {
            disagreements.push(format!("{phi} at {t}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{triples} triples, {} disagreements, {:.1}s{}",
            disagreements.len(),
            elapsed.as_secs_f64(),
            disagreements
                .first()
                .map(|d| format!(", first: {d}"))
                .unwrap_or_default()
        ),
    )
}

fn axiom_validity() -> Outcome {
    let mut proved = 0;
    let mut sampled = 0;
    let mut failures = Vec::new();
    for (i, inst) in axiom_instances().iter().enumerate() {
        match confirm_valid(&inst.formula, 200, i as u64) {
            Ok(Confirmation::Proved) => proved += 1,
            Ok(Confirmation::Unrefuted { .. }) => sampled += 1,
            Ok(Confirmation::Refuted { .. }) => failures.push(inst.to_string()),
            Err(e) => failures.push(format!("{inst}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{proved} proved by the solver, {sampled} survived 200 random models, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|d| format!(", first: {d}"))
                .unwrap_or_default()
        ),
    )
}

fn worked_example() -> Outcome {
    let phi = parse("[1][w]p0 <-> [w]p0").unwrap();
    match valid(&phi, &SolverBounds::complete()) {
        Ok(Verdict::Holds) => outcome(true, "valid"),
        other => outcome(false, format!("{other:?}")),
    }
}

fn noncompactness(witnesses: &mut Witnesses) -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    for n in 0..=4 {
        let family = noncompactness_family(n);
        let phi = Formula::conjunction(family.iter().cloned()).unwrap();
        match sat(&phi, &SolverBounds::default()) {
            Ok(result @ SatResult::Sat { .. }) => {
                let w = result.witness().unwrap();
                if !holds_oracle(w, TimeInstant::ORIGIN, &phi) {
                    problems.push(format!("n={n}: witness rejected by the oracle"));
                }
                witnesses.record(&phi, &result);
            }
            other => problems.push(format!("n={n}: {other:?}")),
        }
        if !check_theory(&noncompactness_witness(n), TimeInstant::ORIGIN, &family) {
            problems.push(format!("n={n}: constructed witness fails the family"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        problems.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "n = 0..4, {:.1}s{}",
            elapsed.as_secs_f64(),
            problems
                .first()
                .map(|p| format!(", {p}"))
                .unwrap_or_default()
        ),
    )
}

fn witness_soundness(pool: &[Formula], witnesses: &mut Witnesses) -> Outcome {
    let mut errors = Vec::new();
    for phi in pool {
        match sat(phi, &SolverBounds::default()) {
            Ok(result) => witnesses.record(phi, &result),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let bad: Vec<_> = witnesses
        .0
        .iter()
        .filter(|(phi, w)| {
            !holds(w, TimeInstant::ORIGIN, phi) || !holds_oracle(w, TimeInstant::ORIGIN, phi)
        })
        .map(|(phi, _)| phi.to_string())
        .collect();
    outcome(
        errors.is_empty() && bad.is_empty(),
        format!(
            "{} witnesses checked, {} rejected, {} solver errors",
            witnesses.0.len(),
            bad.len(),
            errors.len()
        ),
    )
}

fn duality(pool: &[Formula]) -> Outcome {
    let bounds = SolverBounds::complete();
    let mut violations = Vec::new();
    let mut sat_count = 0;
    for phi in pool {
        let is_sat = sat(phi, &bounds).map(|r| r.is_sat());
        let neg_valid = valid(&Formula::not(phi.clone()), &bounds).map(|v| v.holds());
        match (is_sat, neg_valid) {
            (Ok(s), Ok(v)) if s != v => sat_count += s as usize,
            other => violations.push(format!("{phi}: {other:?}")),
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} formulas, {sat_count} satisfiable, {} violations{}",
            pool.len(),
            violations.len(),
            violations
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    )
}

fn completeness_probe() -> Outcome {
    let mut r = rng(0x5eed_0007);
    let shape = ModelShape::default();
    let (mut pairs, mut found, mut within_bounds) = (0, 0, 0);
    let mut violations = Vec::new();
    while pairs < 200 {
        let m = random_model(&mut r, &shape);
        let phi = random_formula(&mut r, 10, 3);
        if !holds(&m, TimeInstant::ORIGIN, &phi) {
            continue;
        }
        pairs += 1;
        match sat(&phi, &SolverBounds::default()) {
            Ok(SatResult::Sat { .. }) => found += 1,
            Ok(SatResult::UnsatWithinBounds(_)) => within_bounds += 1,
            Ok(SatResult::Unsat) => violations.push(phi.to_string()),
            Err(e) => violations.push(format!("{phi}: {e}")),
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{pairs} pairs, {found} SAT, {within_bounds} within-bounds, {} UNSAT",
            violations.len()
        ),
    )
}

fn transition_reports() -> Outcome {
    let cell = |vars: &[u32]| -> Cell { vars.iter().copied().map(VarId).collect() };
    let universe = cell(&[0, 1]);
    let constant = PeriodicModel {
        universe: universe.clone(),
        row_prefix: vec![],
        row_loop: vec![LassoRow::constant(cell(&[0]))],
    };
    // p1 holds for the rest of row 0 but not at the start of row 1; p0 turns
    // false at column 1 of row 1 and comes back at column 2
    let broken = PeriodicModel {
        universe,
        row_prefix: vec![LassoRow::new(vec![cell(&[0])], vec![cell(&[0, 1])])],
        row_loop: vec![LassoRow::new(
            vec![cell(&[0]), cell(&[]), cell(&[0])],
            vec![cell(&[0])],
        )],
    };
    let clean = check_transition_discipline(&constant);
    let report = check_transition_discipline(&broken);
    let passed = clean.is_clean()
        && report.tr1_variable_violations == [(0, VarId(1))]
        && report.tr2_variable_violations == [(1, 2, VarId(0))];
    outcome(passed, format!("constant: {clean:?}; broken: {report:?}"))
}

fn closure_bound() -> Outcome {
    let mut r = rng(0x5eed_0009);
    let mut violations = 0;
    let mut largest = 0;
    for _ in 0..1000 {
        let phi = random_formula(&mut r, 40, 4);
        let size = closure(&desugar(&phi)).len();
        largest = largest.max(size);
        if size > phi.length() {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("1000 formulas, {violations} violations, largest closure {largest}"),
    )
}

fn main() -> ExitCode {
    let pool = random_pool();
    let mut witnesses = Witnesses::default();
    let mut results = Vec::new();
    let mut run = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {} {name}: {} ({}) [{:.1}s]",
            results.len() + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        results.push(o.passed);
    };
    run("differential semantics", &mut differential);
    run("axiom validity", &mut axiom_validity);
    run("worked example", &mut worked_example);
    run("noncompactness", &mut || noncompactness(&mut witnesses));
    run("witness soundness", &mut || {
        witness_soundness(&pool, &mut witnesses)
    });
    run("sat/valid duality", &mut || duality(&pool));
    run("completeness probing", &mut completeness_probe);
    run("transition discipline", &mut transition_reports);
    run("closure bound", &mut closure_bound);
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
