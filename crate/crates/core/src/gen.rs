//! Seeded random formulas and models for differential testing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, VarId};
use crate::model::{Cell, LassoRow, PeriodicModel, TimeInstant};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits for [`random_model`]. Loops always get at least one element.
#[derive(Clone, Copy, Debug)]
pub struct ModelShape {
    pub max_row_prefix: usize,
    pub max_row_loop: usize,
    pub max_col_prefix: usize,
    pub max_col_loop: usize,
    pub vars: u32,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_row_prefix: 3,
            max_row_loop: 3,
            max_col_prefix: 3,
            max_col_loop: 3,
            vars: 3,
        }
    }
}

fn random_cell(rng: &mut TestRng, vars: u32) -> Cell {
    (0..vars).filter(|_| rng.gen_bool(0.5)).map(VarId).collect()
}

fn random_row(rng: &mut TestRng, shape: &ModelShape) -> LassoRow {
    let pre = rng.gen_range(0..=shape.max_col_prefix);
    let lp = rng.gen_range(1..=shape.max_col_loop.max(1));
    LassoRow::new(
        (0..pre).map(|_| random_cell(rng, shape.vars)).collect(),
        (0..lp).map(|_| random_cell(rng, shape.vars)).collect(),
    )
}

pub fn random_model(rng: &mut TestRng, shape: &ModelShape) -> PeriodicModel {
    let pre = rng.gen_range(0..=shape.max_row_prefix);
    let lp = rng.gen_range(1..=shape.max_row_loop.max(1));
    PeriodicModel {
        universe: (0..shape.vars).map(VarId).collect(),
        row_prefix: (0..pre).map(|_| random_row(rng, shape)).collect(),
        row_loop: (0..lp).map(|_| random_row(rng, shape)).collect(),
    }
}

/// A core formula of exactly `len` symbols over `p0..p{vars-1}`.
pub fn formula_of_length(rng: &mut TestRng, len: usize, vars: u32) -> Formula {
    assert!(len >= 1 && vars >= 1);
    if len == 1 {
        return Formula::var(rng.gen_range(0..vars));
    }
    let binary = len >= 3 && rng.gen_bool(0.5);
    if binary {
        let left = rng.gen_range(1..len - 1);
        let a = formula_of_length(rng, left, vars);
        let b = formula_of_length(rng, len - 1 - left, vars);
        match rng.gen_range(0..3) {
            0 => Formula::and(a, b),
            1 => Formula::local_until(a, b),
            _ => Formula::until(a, b),
        }
    } else {
        let a = formula_of_length(rng, len - 1, vars);
        match rng.gen_range(0..3) {
            0 => Formula::not(a),
            1 => Formula::next1(a),
            _ => Formula::next_w(a),
        }
    }
}

/// A core formula with between 1 and `max_len` symbols.
pub fn random_formula(rng: &mut TestRng, max_len: usize, vars: u32) -> Formula {
    let len = rng.gen_range(1..=max_len);
    formula_of_length(rng, len, vars)
}

pub fn random_instant(rng: &mut TestRng, max_coord: u64) -> TimeInstant {
    TimeInstant::new(rng.gen_range(0..=max_coord), rng.gen_range(0..=max_coord))
}
