use std::fmt;

use super::{Cell, EvalError, Evaluator, Selector};
use crate::formula::{Formula, Op};

/// Members listed one per line before the listing is cut short.
const LISTING_LIMIT: usize = 24;

/// One node of an evaluation trace: the subformula, its value at the
/// context, and the counts behind that value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub formula: String,
    pub world: usize,
    pub value: Cell,
    pub details: Vec<String>,
    pub children: Vec<Explanation>,
}

/// Traces the evaluation of `f` at `world` for the selected assignment.
///
/// ```
/// use ltlf::semantics::{explain, Engine, Evaluator, Selector};
/// use ltlf::{parse, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Head,Head,Tail,Head").unwrap();
/// let ev = Evaluator::new(&model, Engine::Reference);
/// let e = explain(&ev, 2, &Selector::Observed, &parse("circ[>=1/2] Head").unwrap()).unwrap();
/// assert!(e.to_string().contains("2/4"));
/// ```
pub fn explain(ev: &Evaluator<'_>, world: usize, selector: &Selector, f: &Formula) -> Result<Explanation, EvalError> {
    ev.check_world(world)?;
    let row = ev.row_of(selector)?;
    node(ev, row, world, f)
}

fn cell_text(c: Cell) -> &'static str {
    match c {
        Cell::False => "false",
        Cell::True => "true",
        Cell::BeyondHorizon => "undefined (next beyond the last world)",
        Cell::Unobserved => "undefined (beyond the observed prefix)",
    }
}

fn mark(c: Cell) -> &'static str {
    match c {
        Cell::False => "0",
        Cell::True => "1",
        Cell::BeyondHorizon => "h",
        Cell::Unobserved => "?",
    }
}

fn node(ev: &Evaluator<'_>, row: usize, world: usize, f: &Formula) -> Result<Explanation, EvalError> {
    let value = ev.table(f)?.cell(row, world);
    let mut details = Vec::new();
    let mut children = Vec::new();
    match f {
        Formula::Atom(_) => {
            let word = ev.word(row);
            match word.get(world - 1) {
                Some(&a) => details.push(format!("w{world} carries {}", ev.spec().atom(a))),
                None => details.push(format!("w{world} is not observed yet")),
            }
        }
        Formula::Not(g) => children.push(node(ev, row, world, g)?),
        Formula::And(g, h) | Formula::Or(g, h) => {
            children.push(node(ev, row, world, g)?);
            children.push(node(ev, row, world, h)?);
        }
        Formula::Modal { op, cmp, q, arg } => {
            let t = ev.table(arg)?;
            let n = ev.n();
            let members = ev.members();
            let short = |r: usize| ev.spec().render(ev.word(r));
            let prefix_marks = |r: usize| (1..=world).map(|l| mark(t.cell(r, l))).collect::<Vec<_>>().join("");
            let prefix_count = |r: usize| (1..=world).filter(|&l| t.cell(r, l).is_true()).count();
            let test = format!("compared with {}{q}", cmp.symbol());
            match op {
                Op::WhiteBox => {
                    details.push(format!("argument over w1..w{world}: {}", prefix_marks(row)));
                    details.push(format!("ratio {}/{world} {test}", prefix_count(row)));
                }
                Op::Circle => {
                    details.push(format!("argument over w1..w{world}: {}", prefix_marks(row)));
                    details.push(format!("ratio {}/{n} {test}", prefix_count(row)));
                }
                Op::BlackBox => {
                    details.push(format!("search over {} members of F_Ω, ratio count/{world}:", members.len()));
                    let mut best = 0;
                    for r in 0..members.len() {
                        let c = prefix_count(r);
                        best = best.max(c);
                        if r < LISTING_LIMIT {
                            details.push(format!("  {}: {}  {c}/{world}", short(r), prefix_marks(r)));
                        }
                    }
                    if members.len() > LISTING_LIMIT {
                        details.push(format!("  ... {} more", members.len() - LISTING_LIMIT));
                    }
                    details.push(format!("best ratio {best}/{world} {test}"));
                }
                Op::Star => {
                    details.push(format!("share of the {} members satisfying the argument, per world:", members.len()));
                    let mut best = 0;
                    for w in 1..=n {
                        let col: Vec<Cell> = (0..members.len()).map(|r| t.cell(r, w)).collect();
                        let c = col.iter().filter(|c| c.is_true()).count();
                        let undefined = col.iter().any(|c| !c.is_defined());
                        best = best.max(c);
                        let note = if undefined { " (some cells undefined)" } else { "" };
                        details.push(format!("  w{w}: {c}/{}{note}", members.len()));
                    }
                    details.push(format!("best share {best}/{} {test}", members.len()));
                }
                Op::Next(steps) => {
                    let steps = steps.get() as usize;
                    let word = ev.word(row);
                    if world + steps > n {
                        details.push(format!("w{world} has no {steps} later worlds"));
                    } else if world > word.len() {
                        details.push(format!("w{world} is not observed yet"));
                    } else {
                        let prefix = &word[..world];
                        let compat = ev.compatible(prefix);
                        details.push(format!(
                            "{} members of F_Ω extend the prefix {}",
                            compat.len(),
                            ev.spec().render(prefix)
                        ));
                        let mut hits = 0;
                        for (i, &b) in compat.iter().enumerate() {
                            let b = b as usize;
                            let marks: String = (world + 1..=world + steps).map(|l| mark(t.cell(b, l))).collect();
                            let hit = (world + 1..=world + steps).any(|l| t.cell(b, l).is_true());
                            hits += hit as usize;
                            if i < LISTING_LIMIT {
                                details.push(format!("  {}: next {steps}: {marks}", short(b)));
                            }
                        }
                        if compat.len() > LISTING_LIMIT {
                            details.push(format!("  ... {} more", compat.len() - LISTING_LIMIT));
                        }
                        if compat.is_empty() {
                            details.push(format!("no compatible member, value 0 {test}"));
                        } else {
                            details.push(format!("ratio {hits}/{} {test}", compat.len()));
                        }
                    }
                }
            }
            if t.cell(row, world).is_defined() || arg.is_propositional() {
                children.push(node(ev, row, world, arg)?);
            }
        }
    }
    Ok(Explanation { formula: f.to_string(), world, value, details, children })
}

impl Explanation {
    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        writeln!(f, "{pad}{} @ w{}: {}", self.formula, self.world, cell_text(self.value))?;
        for d in &self.details {
            writeln!(f, "{pad}  | {d}")?;
        }
        for c in &self.children {
            c.write(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
