//! Ultimately periodic valuations of the ω×ω time flow.
//!
//! A model is a lasso of rows, and every row is itself a lasso of cells. Row
//! `i` of the infinite model is stored row `i` while `i < row_prefix.len()`
//! and cycles through `row_loop` afterwards; columns resolve the same way
//! inside each stored row.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::VarId;

/// The set of variables true at one position.
pub type Cell = BTreeSet<VarId>;

/// A time instant `<row, col>`, ordered lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeInstant {
    pub row: u64,
    pub col: u64,
}

impl TimeInstant {
    pub const ORIGIN: TimeInstant = TimeInstant { row: 0, col: 0 };

    pub fn new(row: u64, col: u64) -> Self {
        TimeInstant { row, col }
    }

    /// `[1]` successor.
    pub fn next_col(self) -> Self {
        TimeInstant::new(self.row, self.col + 1)
    }

    /// `[w]` successor.
    pub fn next_row(self) -> Self {
        TimeInstant::new(self.row + 1, 0)
    }
}

impl fmt::Display for TimeInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.row, self.col)
    }
}

impl std::str::FromStr for TimeInstant {
    type Err = String;

    /// Parses `i,j`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (i, j) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad coordinate `{x}`: {e}"))
        };
        Ok(TimeInstant::new(parse(i)?, parse(j)?))
    }
}

/// A stored (row, column) pair that every time instant resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

/// One row of a model: a finite column prefix followed by a repeating loop.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LassoRow {
    pub col_prefix: Vec<Cell>,
    pub col_loop: Vec<Cell>,
}

impl LassoRow {
    pub fn new(col_prefix: Vec<Cell>, col_loop: Vec<Cell>) -> Self {
        LassoRow {
            col_prefix,
            col_loop,
        }
    }

    /// A row with the same cell everywhere.
    pub fn constant(cell: Cell) -> Self {
        LassoRow::new(vec![], vec![cell])
    }

    /// Number of stored columns.
    pub fn len(&self) -> usize {
        self.col_prefix.len() + self.col_loop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn loop_start(&self) -> usize {
        self.col_prefix.len()
    }

    pub fn resolve_col(&self, col: u64) -> usize {
        resolve(col, self.col_prefix.len(), self.col_loop.len())
    }

    /// Stored column reached by one `[1]` step from stored column `col`.
    pub fn col_successor(&self, col: usize) -> usize {
        if col + 1 < self.len() {
            col + 1
        } else {
            self.loop_start()
        }
    }

    pub fn cell(&self, col: usize) -> &Cell {
        if col < self.col_prefix.len() {
            &self.col_prefix[col]
        } else {
            &self.col_loop[col - self.col_prefix.len()]
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.col_prefix.iter().chain(self.col_loop.iter())
    }
}

fn resolve(x: u64, prefix: usize, period: usize) -> usize {
    let prefix_u = prefix as u64;
    if x < prefix_u {
        x as usize
    } else {
        prefix + ((x - prefix_u) % period as u64) as usize
    }
}

/// An ultimately periodic model with both row and column lassos.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PeriodicModel {
    pub universe: BTreeSet<VarId>,
    pub row_prefix: Vec<LassoRow>,
    pub row_loop: Vec<LassoRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// JSON path of the offending element, e.g. `row_loop[0].col_loop`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

impl PeriodicModel {
    /// Builds a model and checks its invariants.
    pub fn new(
        universe: BTreeSet<VarId>,
        row_prefix: Vec<LassoRow>,
        row_loop: Vec<LassoRow>,
    ) -> Result<Self, ModelError> {
        let m = PeriodicModel {
            universe,
            row_prefix,
            row_loop,
        };
        m.validate().map_err(ModelError::Invalid)?;
        Ok(m)
    }

    /// Number of stored rows.
    pub fn num_rows(&self) -> usize {
        self.row_prefix.len() + self.row_loop.len()
    }

    pub fn loop_start(&self) -> usize {
        self.row_prefix.len()
    }

    pub fn row(&self, r: usize) -> &LassoRow {
        if r < self.row_prefix.len() {
            &self.row_prefix[r]
        } else {
            &self.row_loop[r - self.row_prefix.len()]
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &LassoRow> {
        self.row_prefix.iter().chain(self.row_loop.iter())
    }

    pub fn resolve_row(&self, row: u64) -> usize {
        resolve(row, self.row_prefix.len(), self.row_loop.len())
    }

    /// Stored row reached by one `[w]` step from stored row `r`.
    pub fn row_successor(&self, r: usize) -> usize {
        if r + 1 < self.num_rows() {
            r + 1
        } else {
            self.loop_start()
        }
    }

    /// The stored position that `t` reads from. Assumes a valid model.
    pub fn canonical_position(&self, t: TimeInstant) -> Position {
        let row = self.resolve_row(t.row);
        let col = self.row(row).resolve_col(t.col);
        Position { row, col }
    }

    pub fn cell_at(&self, pos: Position) -> &Cell {
        self.row(pos.row).cell(pos.col)
    }

    /// Truth value of `p` at `t`. Variables outside the universe are false.
    pub fn lookup(&self, t: TimeInstant, p: VarId) -> bool {
        self.cell_at(self.canonical_position(t)).contains(&p)
    }

    /// Every stored position, row by row.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.num_rows())
            .flat_map(move |row| (0..self.row(row).len()).map(move |col| Position { row, col }))
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.row_loop.is_empty() {
            out.push(Violation {
                path: "row_loop".into(),
                message: "row_loop must be nonempty".into(),
            });
        }
        let groups = [
            ("row_prefix", &self.row_prefix),
            ("row_loop", &self.row_loop),
        ];
        for (name, rows) in groups {
            for (r, row) in rows.iter().enumerate() {
                if row.col_loop.is_empty() {
                    out.push(Violation {
                        path: format!("{name}[{r}].col_loop"),
                        message: "col_loop must be nonempty".into(),
                    });
                }
                let cols = [("col_prefix", &row.col_prefix), ("col_loop", &row.col_loop)];
                for (cname, cells) in cols {
                    for (c, cell) in cells.iter().enumerate() {
                        for v in cell.iter().filter(|v| !self.universe.contains(v)) {
                            out.push(Violation {
                                path: format!("{name}[{r}].{cname}[{c}]"),
                                message: format!("variable {v} is not in the universe"),
                            });
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawModel = serde_json::from_str(text)?;
        raw.into_model()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&RawModel::from(self))
            .expect("model serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

// On-disk shape. Variable names stay strings here so that every problem can
// be reported against its JSON path.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    universe: Vec<String>,
    row_prefix: Vec<RawRow>,
    row_loop: Vec<RawRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    col_prefix: Vec<Vec<String>>,
    col_loop: Vec<Vec<String>>,
}

fn names(vars: &BTreeSet<VarId>) -> Vec<String> {
    vars.iter().map(VarId::to_string).collect()
}

impl From<&PeriodicModel> for RawModel {
    fn from(m: &PeriodicModel) -> Self {
        let row = |r: &LassoRow| RawRow {
            col_prefix: r.col_prefix.iter().map(names).collect(),
            col_loop: r.col_loop.iter().map(names).collect(),
        };
        RawModel {
            universe: names(&m.universe),
            row_prefix: m.row_prefix.iter().map(row).collect(),
            row_loop: m.row_loop.iter().map(row).collect(),
        }
    }
}

/// Parses a sorted, duplicate-free list of variable names.
fn parse_names(raw: &[String], path: &str, out: &mut Vec<Violation>) -> BTreeSet<VarId> {
    let mut set = BTreeSet::new();
    let mut prev: Option<VarId> = None;
    for (i, name) in raw.iter().enumerate() {
        match name.parse::<VarId>() {
            Ok(v) => {
                match prev.map(|p| p.cmp(&v)) {
                    Some(Ordering::Equal) => out.push(Violation {
                        path: format!("{path}[{i}]"),
                        message: format!("duplicate variable {v}"),
                    }),
                    Some(Ordering::Greater) => out.push(Violation {
                        path: format!("{path}[{i}]"),
                        message: format!("variables must be sorted by index; {v} is out of order"),
                    }),
                    _ => {}
                }
                prev = Some(v);
                set.insert(v);
            }
            Err(msg) => out.push(Violation {
                path: format!("{path}[{i}]"),
                message: msg,
            }),
        }
    }
    set
}

impl RawModel {
    fn into_model(self) -> Result<PeriodicModel, ModelError> {
        let mut out = Vec::new();
        let universe = parse_names(&self.universe, "universe", &mut out);
        let rows = |raw: Vec<RawRow>, name: &str, out: &mut Vec<Violation>| {
            raw.into_iter()
                .enumerate()
                .map(|(r, row)| {
                    let cells = |cells: Vec<Vec<String>>, cname: &str, out: &mut Vec<Violation>| {
                        cells
                            .iter()
                            .enumerate()
                            .map(|(c, cell)| {
                                parse_names(cell, &format!("{name}[{r}].{cname}[{c}]"), out)
                            })
                            .collect::<Vec<_>>()
                    };
                    LassoRow::new(
                        cells(row.col_prefix, "col_prefix", out),
                        cells(row.col_loop, "col_loop", out),
                    )
                })
                .collect::<Vec<_>>()
        };
        let row_prefix = rows(self.row_prefix, "row_prefix", &mut out);
        let row_loop = rows(self.row_loop, "row_loop", &mut out);
        let model = PeriodicModel {
            universe,
            row_prefix,
            row_loop,
        };
        if let Err(v) = model.validate() {
            out.extend(v);
        }
        if out.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Invalid(out))
        }
    }
}
