use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use omega2tl::solver::{entails, sat_with_workers, valid, SatResult, SolverBounds, Verdict};
use omega2tl::transition::{
    check_transition_discipline, noncompactness_family, noncompactness_witness,
};
use omega2tl::{
    check_theory, closure, desugar, holds, parse, Formula, PeriodicModel, Step, TimeInstant,
};

mod selftest;

const DEFAULT_MAX_CLOSURE: usize = 64;

/// Model checking and satisfiability for temporal logic over omega squared.
///
/// Formulas use `!`, `&`, `|`, `->`, `<->`, `[1]`, `[w]`, `u`, `U`, `f`, `g`,
/// `F`, `G`, `true`, `false` and variables `p0`, `p1`, ...
#[derive(Parser)]
#[command(name = "omega2tl", version)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and show its syntax tree and core form.
    Parse { formula: String },
    /// Evaluate a formula on a model at an instant.
    Check {
        #[arg(long)]
        model: PathBuf,
        /// Instant as `i,j`.
        #[arg(long, default_value = "0,0")]
        at: TimeInstant,
        formula: String,
    },
    /// Decide satisfiability and print a witness model.
    Sat {
        #[command(flatten)]
        bounds: BoundArgs,
        /// Parallel search threads. The verdict never depends on this, the
        /// witness may.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the witness model here instead of printing it.
        #[arg(long)]
        output: Option<PathBuf>,
        formula: String,
    },
    /// Decide validity.
    Valid {
        #[command(flatten)]
        bounds: BoundArgs,
        formula: String,
    },
    /// Decide whether a finite theory entails a formula.
    Entail {
        /// One formula per line; `#` starts a comment.
        #[arg(long)]
        theory: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        formula: String,
    },
    /// Report zero-time transition violations of a model.
    Transitions {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the built-in axiom and differential suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
    /// Show a finite part of the noncompact family and its model.
    DemoNoncompactness {
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Longest row and column prefix to try.
    #[arg(long)]
    max_prefix: Option<usize>,
    /// Longest row and column loop to try.
    #[arg(long)]
    max_loop: Option<usize>,
    /// Use bounds that suffice for every satisfiable formula.
    #[arg(long)]
    complete: bool,
    /// Cap on expanded search states.
    #[arg(long)]
    max_states: Option<usize>,
}

impl BoundArgs {
    fn bounds(&self) -> SolverBounds {
        let mut b = if self.complete {
            SolverBounds::complete()
        } else {
            SolverBounds::default()
        };
        if let Some(p) = self.max_prefix {
            b.max_outer_prefix = p;
            b.max_inner_prefix = p;
        }
        if let Some(l) = self.max_loop {
            b.max_outer_loop = l;
            b.max_inner_loop = l;
        }
        if let Some(s) = self.max_states {
            b.max_states = s;
        }
        b
    }
}

/// Whether a command ended with a positive answer.
enum Answer {
    Yes,
    No,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Answer> {
    let out = Output { json: cli.json };
    match &cli.command {
        Command::Parse { formula } => cmd_parse(&out, formula),
        Command::Check { model, at, formula } => {
            let m = load_model(model)?;
            let phi = formula_arg(formula)?;
            let value = holds(&m, *at, &phi);
            out.emit(
                &value.to_string(),
                json!({ "at": at.to_string(), "holds": value }),
            );
            Ok(answer(value))
        }
        Command::Sat {
            bounds,
            workers,
            output,
            formula,
        } => {
            let phi = formula_arg(formula)?;
            check_closure_cap(&phi)?;
            cmd_sat(
                &out,
                &phi,
                &bounds.bounds(),
                (*workers).max(1),
                output.as_deref(),
            )
        }
        Command::Valid { bounds, formula } => {
            let phi = formula_arg(formula)?;
            check_closure_cap(&Formula::not(phi.clone()))?;
            let verdict = valid(&phi, &bounds.bounds())?;
            Ok(report_verdict(&out, &verdict, "valid", "not valid"))
        }
        Command::Entail {
            theory,
            bounds,
            formula,
        } => {
            let premises = load_theory(theory)?;
            let phi = formula_arg(formula)?;
            let query =
                Formula::conjunction(premises.iter().cloned().chain([Formula::not(phi.clone())]))
                    .unwrap();
            check_closure_cap(&query)?;
            let verdict = entails(&premises, &phi, &bounds.bounds())?;
            Ok(report_verdict(&out, &verdict, "entailed", "not entailed"))
        }
        Command::Transitions { model } => {
            let report = check_transition_discipline(&load_model(model)?);
            // the report is JSON either way
            say(&serde_json::to_string_pretty(&report)?);
            Ok(answer(report.is_clean()))
        }
        Command::Selftest { seed, cases } => {
            let suites = selftest::run(*seed, *cases)?;
            let passed = suites.iter().all(|s| s.passed());
            if out.json {
                say(&serde_json::to_string_pretty(
                    &json!({ "passed": passed, "suites": suites }),
                )?);
            } else {
                for s in &suites {
                    say(&s.to_string());
                }
                say(&format!(
                    "selftest: {}",
                    if passed { "PASS" } else { "FAIL" }
                ));
            }
            Ok(answer(passed))
        }
        Command::DemoNoncompactness { n } => cmd_demo(&out, *n),
    }
}

struct Output {
    json: bool,
}

impl Output {
    fn emit(&self, text: &str, value: Value) {
        if self.json {
            say(&serde_json::to_string_pretty(&value).expect("JSON values serialize"));
        } else {
            say(text);
        }
    }
}

/// Prints a line to stdout. A closed pipe (as with `| head`) is not an error.
fn say(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn answer(yes: bool) -> Answer {
    if yes {
        Answer::Yes
    } else {
        Answer::No
    }
}

fn formula_arg(text: &str) -> Result<Formula> {
    parse(text).with_context(|| format!("cannot parse formula `{text}`"))
}

fn load_model(path: &Path) -> Result<PeriodicModel> {
    PeriodicModel::load(path).with_context(|| format!("cannot load model {}", path.display()))
}

fn model_value(m: &PeriodicModel) -> Value {
    serde_json::from_str(&m.to_json()).expect("model JSON is valid")
}

/// One formula per non-blank line, `#` to end of line is a comment.
fn load_theory(path: &Path) -> Result<Vec<Formula>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read theory {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let phi = parse(body)
            .with_context(|| format!("{}:{}: cannot parse formula", path.display(), n + 1))?;
        out.push(phi);
    }
    Ok(out)
}

fn max_closure() -> Result<usize> {
    match std::env::var("OMEGA2TL_MAX_CLOSURE") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("OMEGA2TL_MAX_CLOSURE must be a number, got `{v}`")),
        Err(_) => Ok(DEFAULT_MAX_CLOSURE),
    }
}

fn check_closure_cap(query: &Formula) -> Result<()> {
    let cap = max_closure()?;
    let size = closure(&desugar(query)).len();
    if size > cap {
        bail!("formula has {size} subformulas, more than OMEGA2TL_MAX_CLOSURE={cap}");
    }
    Ok(())
}

fn cmd_parse(out: &Output, text: &str) -> Result<Answer> {
    let phi = match parse(text) {
        Ok(phi) => phi,
        Err(e) => {
            if out.json {
                out.emit("", json!({ "error": e.to_string(), "position": e.pos }));
            } else {
                eprintln!("parse error: {e}");
                eprintln!("  {text}");
                eprintln!(
                    "  {}^",
                    " ".repeat(text[..e.pos.min(text.len())].chars().count())
                );
            }
            return Ok(Answer::No);
        }
    };
    let core = desugar(&phi);
    let mut tree = String::new();
    syntax_tree(&phi, 0, &mut tree);
    out.emit(
        &format!(
            "formula:   {phi}\ndesugared: {core}\nlength:    {}\nclosure:   {}\n{}",
            core.length(),
            closure(&core).len(),
            tree.trim_end()
        ),
        json!({
            "formula": phi.to_string(),
            "desugared": core.to_string(),
            "length": core.length(),
            "closure_size": closure(&core).len(),
            "tree": tree.lines().collect::<Vec<_>>(),
        }),
    );
    Ok(Answer::Yes)
}

fn syntax_tree(phi: &Formula, depth: usize, out: &mut String) {
    let label = match phi {
        Formula::Var(v) => v.to_string(),
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Not(_) => "not".into(),
        Formula::And(..) => "and".into(),
        Formula::Or(..) => "or".into(),
        Formula::Implies(..) => "implies".into(),
        Formula::Iff(..) => "iff".into(),
        Formula::Next1(_) => "[1]".into(),
        Formula::NextW(_) => "[w]".into(),
        Formula::LocalUntil(..) => "u".into(),
        Formula::Until(..) => "U".into(),
        Formula::LocalEventually(_) => "f".into(),
        Formula::LocalAlways(_) => "g".into(),
        Formula::Eventually(_) => "F".into(),
        Formula::Always(_) => "G".into(),
        Formula::IterNext(step, n, _) => match step {
            Step::One => format!("[1]^{n}"),
            Step::Omega => format!("[w]^{n}"),
        },
    };
    out.push_str(&format!("{}{label}\n", "  ".repeat(depth)));
    for c in phi.children() {
        syntax_tree(c, depth + 1, out);
    }
}

fn cmd_sat(
    out: &Output,
    phi: &Formula,
    bounds: &SolverBounds,
    workers: usize,
    output: Option<&Path>,
) -> Result<Answer> {
    match sat_with_workers(phi, bounds, workers)? {
        SatResult::Sat { witness, .. } => {
            if let Some(path) = output {
                witness
                    .save(path)
                    .with_context(|| format!("cannot write witness to {}", path.display()))?;
            }
            let text = match output {
                Some(path) => format!("SAT\nwitness written to {}", path.display()),
                None => format!("SAT\n{}", witness.to_json().trim_end()),
            };
            out.emit(
                &text,
                json!({ "result": "SAT", "witness": model_value(&witness) }),
            );
            Ok(Answer::Yes)
        }
        SatResult::Unsat => {
            out.emit("UNSAT", json!({ "result": "UNSAT" }));
            Ok(Answer::No)
        }
        SatResult::UnsatWithinBounds(b) => {
            out.emit(
                &format!(
                    "UNSAT-WITHIN-BOUNDS (prefix {}/{}, loop {}/{}, states {})",
                    b.max_outer_prefix,
                    b.max_inner_prefix,
                    b.max_outer_loop,
                    b.max_inner_loop,
                    b.max_states
                ),
                json!({ "result": "UNSAT-WITHIN-BOUNDS", "bounds": b }),
            );
            Ok(Answer::No)
        }
    }
}

fn report_verdict(out: &Output, verdict: &Verdict, yes: &str, no: &str) -> Answer {
    match verdict {
        Verdict::Holds => {
            out.emit(yes, json!({ "result": yes }));
            Answer::Yes
        }
        Verdict::Fails { countermodel } => {
            out.emit(
                &format!("{no}\ncountermodel:\n{}", countermodel.to_json().trim_end()),
                json!({ "result": no, "countermodel": model_value(countermodel) }),
            );
            Answer::No
        }
        Verdict::Unknown(b) => {
            out.emit(
                "unknown within bounds",
                json!({ "result": "unknown within bounds", "bounds": b }),
            );
            Answer::No
        }
    }
}

fn cmd_demo(out: &Output, n: u32) -> Result<Answer> {
    let family = noncompactness_family(n);
    let witness = noncompactness_witness(n);
    let ok = check_theory(&witness, TimeInstant::ORIGIN, &family);
    let text = format!(
        "family ({} formulas):\n{}\nwitness:\n{}\nfamily satisfied by witness at {}: {ok}",
        family.len(),
        family
            .iter()
            .map(|f| format!("  {f}"))
            .collect::<Vec<_>>()
            .join("\n"),
        witness.to_json().trim_end(),
        TimeInstant::ORIGIN,
    );
    out.emit(
        &text,
        json!({
            "family": family.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "witness": model_value(&witness),
            "satisfied": ok,
        }),
    );
    Ok(answer(ok))
}
