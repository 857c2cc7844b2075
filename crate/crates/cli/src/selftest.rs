//! Seeded self-checks: axiom instances, checker against oracle, solver
//! witnesses, and the noncompactness family.

use std::fmt;

use anyhow::Result;
use serde_json::{json, Value};

use omega2tl::axioms::{axiom_instances, confirm_valid};
use omega2tl::gen::{random_formula, random_instant, random_model, rng, ModelShape};
use omega2tl::solver::{sat, SolverBounds};
use omega2tl::transition::{noncompactness_family, noncompactness_witness};
use omega2tl::{check_theory, holds, holds_oracle, Formula, TimeInstant};

pub struct Suite {
    name: &'static str,
    total: usize,
    failures: Vec<String>,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({}/{} ok)",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.total - self.failures.len(),
            self.total
        )?;
        for failure in self.failures.iter().take(5) {
            write!(f, "\n  {failure}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Value = json!({
            "name": self.name,
            "passed": self.passed(),
            "total": self.total,
            "failures": self.failures,
        });
        v.serialize(s)
    }
}

pub fn run(seed: u64, cases: usize) -> Result<Vec<Suite>> {
    Ok(vec![
        axioms(seed)?,
        differential(seed, cases),
        witnesses(seed, cases)?,
        noncompactness()?,
    ])
}

fn axioms(seed: u64) -> Result<Suite> {
    let pool = axiom_instances();
    let mut failures = Vec::new();
    for (i, inst) in pool.iter().enumerate() {
        if !confirm_valid(&inst.formula, 200, seed.wrapping_add(i as u64))?.passed() {
            failures.push(inst.to_string());
        }
    }
    Ok(Suite {
        name: "axiom instances",
        total: pool.len(),
        failures,
    })
}

fn differential(seed: u64, cases: usize) -> Suite {
    let mut r = rng(seed);
    let shape = ModelShape::default();
    let mut failures = Vec::new();
    for _ in 0..cases {
        let m = random_model(&mut r, &shape);
        let phi = random_formula(&mut r, 12, 3);
        let t = random_instant(&mut r, 10);
        if holds(&m, t, &phi) != holds_oracle(&m, t, &phi) {
            failures.push(format!("{phi} at {t}"));
        }
    }
    Suite {
        name: "checker vs oracle",
        total: cases,
        failures,
    }
}

fn witnesses(seed: u64, cases: usize) -> Result<Suite> {
    let mut r = rng(seed ^ 0x9e37_79b9);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let phi = random_formula(&mut r, 10, 3);
        if let Some(w) = sat(&phi, &SolverBounds::default())?.witness() {
            if !holds_oracle(w, TimeInstant::ORIGIN, &phi) {
                failures.push(phi.to_string());
            }
        }
    }
    Ok(Suite {
        name: "solver witnesses",
        total: cases,
        failures,
    })
}

fn noncompactness() -> Result<Suite> {
    let mut failures = Vec::new();
    for n in 0..=3 {
        let family = noncompactness_family(n);
        if !check_theory(&noncompactness_witness(n), TimeInstant::ORIGIN, &family) {
            failures.push(format!("n={n}: constructed model"));
        }
        let phi = Formula::conjunction(family).unwrap();
        match sat(&phi, &SolverBounds::default())?.witness() {
            Some(w) if holds_oracle(w, TimeInstant::ORIGIN, &phi) => {}
            _ => failures.push(format!("n={n}: solver")),
        }
    }
    Ok(Suite {
        name: "noncompactness family",
        total: 4,
        failures,
    })
}
