//! `ltlf`: check formulas, monitor traces, query completion probabilities
//! and verify the logic's laws against model files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ltlf::analysis::family::{random_family, FamilyBounds};
use ltlf::analysis::laws::{check_family, find_law, laws, run_law, Law, LawOptions};
use ltlf::analysis::{completion_probability_auto, next_outcome_distribution};
use ltlf::monitor::{write_jsonl, MonitorConfig, MonitorState, StepReport};
use ltlf::semantics::explain;
use ltlf::{parse, parse_model, Engine, Evaluator, Formula, Model, Selector};

/// Beyond this many members of F_Ω, enumeration-backed commands warn.
const LARGE_FAMILY: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "ltlf", version, about = "Exact checking and monitoring for frequency-constrained temporal logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Reference,
    Accelerated,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Reference => Engine::Reference,
            EngineArg::Accelerated => Engine::Accelerated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Table,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at a world. Exit 0 if true, 1 if false.
    Check {
        model: PathBuf,
        formula: String,
        #[arg(long)]
        world: usize,
        /// Evaluate against this member of F_Ω (comma-separated atoms)
        /// instead of the observation.
        #[arg(long)]
        member: Option<String>,
        /// Also print the largest index at which the outermost operator holds.
        #[arg(long)]
        max: bool,
        #[arg(long, value_enum, default_value = "accelerated")]
        engine: EngineArg,
    },
    /// Feed a trace to the streaming monitor. Exit 1 on violation.
    Monitor {
        /// Model file; an `obs` line, if any, is ignored.
        model: PathBuf,
        /// One atom per line, or a CSV file with --column.
        trace: PathBuf,
        /// Read outcomes from this column of a CSV trace with a header row.
        #[arg(long)]
        column: Option<String>,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: Format,
        /// Skip the per-step recomputation of the completion probability.
        #[arg(long)]
        no_verify: bool,
    },
    /// Probability that the observed prefix of length WORLD completes into F_Ω.
    Probability {
        model: PathBuf,
        #[arg(long)]
        world: usize,
    },
    /// Odds of each atom at the world after WORLD.
    Next {
        model: PathBuf,
        #[arg(long)]
        world: usize,
    },
    /// Check laws on a model file or a seeded random family.
    /// Exit 0 iff laws hold and documented non-laws fail.
    Laws {
        model: Option<PathBuf>,
        /// Seed and size of a random family, instead of a model file.
        #[arg(long, num_args = 2, value_names = ["SEED", "COUNT"])]
        random: Option<Vec<u64>>,
        /// Law id or alias; repeatable; `all` selects every law.
        #[arg(long = "law", default_value = "all")]
        laws: Vec<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long, value_enum, default_value = "accelerated")]
        engine: EngineArg,
    },
    /// List the members of F_Ω.
    Enumerate {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Print the evaluation tree of a formula with the counts behind every ratio.
    Explain {
        model: PathBuf,
        formula: String,
        #[arg(long)]
        world: usize,
        #[arg(long)]
        member: Option<String>,
    },
}

type Failure = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_model(path: &Path) -> Result<Model, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_model(&text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn warn_if_large(model: &Model) {
    let count = model.spec().count_members();
    if count > LARGE_FAMILY.into() {
        eprintln!("warning: F_Ω has {count} members; enumeration may be slow");
    }
}

fn selector(model: &Model, member: Option<&str>) -> Result<Selector, Failure> {
    Ok(match member {
        None => Selector::Observed,
        Some(text) => Selector::Member(model.spec().assignment(text)?),
    })
}

fn run(command: Command) -> Result<u8, Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match command {
        Command::Check { model, formula, world, member, max, engine } => {
            let model = read_model(&model)?;
            let f = parse(&formula)?;
            warn_if_large(&model);
            let sel = selector(&model, member.as_deref())?;
            let ev = Evaluator::new(&model, engine.into());
            let value = ev.eval(world, &sel, &f)?;
            writeln!(out, "{value}")?;
            if max {
                let Formula::Modal { op, arg, .. } = &f else {
                    return Err("--max needs a formula whose outermost connective is an operator".into());
                };
                writeln!(out, "max {} = {}", op.keyword(), ev.max_index(world, &sel, *op, arg)?)?;
            }
            if value {
                0
            } else {
                1
            }
        }
        Command::Monitor { model, trace, column, format, no_verify } => {
            let model = read_model(&model)?;
            if !model.observed().is_empty() {
                eprintln!("warning: ignoring the obs line of the model file");
            }
            let outcomes = read_trace(&trace, column.as_deref())?;
            let config = MonitorConfig { verify: !no_verify };
            let mut mon = MonitorState::with_config(model.spec().clone(), model.weights().cloned(), config);
            if format == Format::Table {
                writeln!(out, "{:>5}  {:<10} {:<24} {:<12} {:<12} next", "step", "outcome", "frequencies", "verdict", "P")?;
            }
            for o in &outcomes {
                let report = mon.ingest(o)?;
                match format {
                    Format::Jsonl => write_jsonl(&mut out, &report)?,
                    Format::Table => write_step_row(&mut out, &report)?,
                }
            }
            if let Ok(summary) = mon.finalize() {
                match format {
                    Format::Jsonl => write_jsonl(&mut out, &summary)?,
                    Format::Table => writeln!(
                        out,
                        "final {}  member of F_Ω: {}",
                        summary.final_freq, summary.member
                    )?,
                }
            }
            match mon.first_violation() {
                Some(_) => 1,
                None => 0,
            }
        }
        Command::Probability { model, world } => {
            let model = read_model(&model)?;
            writeln!(out, "{}", completion_probability_auto(&model, world)?)?;
            0
        }
        Command::Next { model, world } => {
            let model = read_model(&model)?;
            for (atom, q) in next_outcome_distribution(&model, world)?.0 {
                writeln!(out, "{atom} {q}")?;
            }
            0
        }
        Command::Laws { model, random, laws: ids, format, engine } => {
            let selected = select_laws(&ids)?;
            let opts = LawOptions { engine: engine.into() };
            run_laws(&mut out, model.as_deref(), random.as_deref(), &selected, format, opts)?
        }
        Command::Enumerate { model, limit } => {
            let model = read_model(&model)?;
            let spec = model.spec();
            let total = spec.count_members();
            warn_if_large(&model);
            writeln!(out, "# {total} members")?;
            for a in spec.members().take(limit) {
                writeln!(out, "{}", spec.render(a.outcomes()))?;
            }
            if total > limit.into() {
                eprintln!("note: output truncated to {limit} of {total} members (raise with --limit)");
            }
            0
        }
        Command::Explain { model, formula, world, member } => {
            let model = read_model(&model)?;
            let f = parse(&formula)?;
            warn_if_large(&model);
            let sel = selector(&model, member.as_deref())?;
            let ev = Evaluator::new(&model, Engine::Reference);
            write!(out, "{}", explain(&ev, world, &sel, &f)?)?;
            0
        }
    };
    out.flush()?;
    Ok(code)
}

fn read_trace(path: &Path, column: Option<&str>) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let Some(column) = column else {
        return Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect());
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| format!("{}: no column `{column}`", path.display()))?;
    let mut outcomes = Vec::new();
    for record in reader.records() {
        let record = record?;
        let cell = record.get(idx).unwrap_or("");
        if !cell.is_empty() {
            outcomes.push(cell.to_string());
        }
    }
    Ok(outcomes)
}

fn write_step_row(out: &mut impl Write, r: &StepReport) -> io::Result<()> {
    let verdict = if r.verdict.is_compatible() { "compatible" } else { "VIOLATED" };
    let next = r.next_dist.as_ref().map(|d| d.to_string()).unwrap_or_else(|| "-".into());
    writeln!(
        out,
        "{:>5}  {:<10} {:<24} {:<12} {:<12} {next}",
        r.step,
        r.outcome,
        r.observed_freq.to_string(),
        verdict,
        r.completion_prob.to_string()
    )
}

fn select_laws(ids: &[String]) -> Result<Vec<&'static Law>, Failure> {
    if ids.iter().any(|i| i == "all") {
        return Ok(laws().iter().collect());
    }
    ids.iter()
        .map(|id| find_law(id).ok_or_else(|| format!("unknown law `{id}`").into()))
        .collect()
}

fn run_laws(
    out: &mut impl Write,
    model: Option<&Path>,
    random: Option<&[u64]>,
    selected: &[&'static Law],
    format: Format,
    opts: LawOptions,
) -> Result<u8, Failure> {
    let mut all_as_expected = true;
    match (model, random) {
        (Some(path), None) => {
            let model = read_model(path)?;
            warn_if_large(&model);
            if format == Format::Table {
                writeln!(out, "{:<28} {:<8} {:<6} {:>10} {:>8}  counterexample", "law", "expect", "result", "instances", "skipped")?;
            }
            for law in selected {
                let r = run_law(law, &model, opts);
                all_as_expected &= r.as_expected();
                match format {
                    Format::Jsonl => write_jsonl(out, &r)?,
                    Format::Table => {
                        let ce = r
                            .counterexamples
                            .first()
                            .map(|c| format!("w{} {}: {}", c.world, c.assignment, c.detail))
                            .unwrap_or_default();
                        writeln!(
                            out,
                            "{:<28} {:<8} {:<6} {:>10} {:>8}  {ce}",
                            r.law,
                            expectation_text(r.expectation),
                            if r.holds() { "pass" } else { "fail" },
                            r.instances,
                            r.skipped
                        )?;
                    }
                }
            }
        }
        (None, Some(&[seed, count])) => {
            let models = random_family(seed, count as usize, FamilyBounds::default());
            if format == Format::Table {
                writeln!(out, "{:<28} {:<8} {:<6} {:>8} {:>12}  first failure", "law", "expect", "result", "failing", "instances")?;
            }
            for r in check_family(selected, &models, opts) {
                all_as_expected &= r.as_expected();
                match format {
                    Format::Jsonl => write_jsonl(out, &r)?,
                    Format::Table => {
                        let ce = r
                            .first_failure
                            .as_ref()
                            .map(|(m, c)| format!("{m} w{} {}: {}", c.world, c.assignment, c.detail))
                            .unwrap_or_default();
                        writeln!(
                            out,
                            "{:<28} {:<8} {:<6} {:>8} {:>12}  {ce}",
                            r.law,
                            expectation_text(r.expectation),
                            if r.holds() { "pass" } else { "fail" },
                            format!("{}/{}", r.failing_models, r.models),
                            r.instances
                        )?;
                    }
                }
            }
        }
        _ => return Err("give either a model file or --random SEED COUNT".into()),
    }
    Ok(if all_as_expected { 0 } else { 1 })
}

fn expectation_text(e: ltlf::analysis::laws::Expectation) -> &'static str {
    match e {
        ltlf::analysis::laws::Expectation::Holds => "holds",
        ltlf::analysis::laws::Expectation::Fails => "fails",
    }
}
