//! Executable checks of the definability, monotonicity, independence and
//! nesting laws of the logic, over one model at a time.
//!
//! Every law is checked at every world, for every member of `F_Ω` and for
//! the observation, and for every index in the grid
//! `{k/d : 1 ≤ d ≤ n} ∪ {k/|F_Ω|}`. Laws about `next` add the values the
//! operator actually takes in the model, since those have other
//! denominators. Formulas are drawn from a fixed corpus built from the
//! model's atoms. A cell where either side is undefined is skipped.
//!
//! Laws registered with [`Expectation::Fails`] are documented non-laws:
//! their report is expected to carry a counterexample.

use std::collections::BTreeSet;
use std::rc::Rc;

use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::formula::{Comparator, Formula, Op};
use crate::model::Model;
use crate::prob::Probability;
use crate::semantics::{Cell, Engine, Evaluator, Table};

/// Whether a registered law should survive checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Holds,
    Fails,
}

type Check = fn(&Ctx<'_>, &mut Tally);

pub struct Law {
    pub id: &'static str,
    pub aliases: &'static [&'static str],
    pub expectation: Expectation,
    pub statement: &'static str,
    check: Check,
}

impl std::fmt::Debug for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Law").field("id", &self.id).field("expectation", &self.expectation).finish()
    }
}

macro_rules! law {
    ($id:expr, $aliases:expr, $exp:ident, $statement:expr, $check:expr) => {
        Law { id: $id, aliases: $aliases, expectation: Expectation::$exp, statement: $statement, check: $check }
    };
}

static LAWS: &[Law] = &[
    law!("Def<Boxes", &[], Holds, "box[<=q] φ ≡ box[>=1-q] !φ and bbox[<=q] φ ≡ bbox[>=1-q] !φ", def_lt_boxes),
    law!("Def=WBox", &[], Holds, "box[=q] φ ≡ box[>=q] φ & box[>=1-q] !φ", def_eq_wbox),
    law!("Def<WBoxe", &[], Holds, "box[<q] φ ≡ !box[>=q] φ and box[>q] φ ≡ !box[<=q] φ", def_lt_wbox),
    law!(
        "Def=BBox",
        &[],
        Holds,
        "at w_m, bbox[⋈i/m] φ ≡ circ[=m/n] (φ|!φ) & bbox[>=1/m] (circ[=m/n] (φ|!φ) & box[⋈i/m] φ) for ⋈ in =,<,>",
        def_eq_bbox
    ),
    law!(
        "Def=Sat",
        &[],
        Holds,
        "at w_m with q' = m/n: circ[=q] φ ≡ circ[>=q] φ & circ[>=q'] (φ|!φ) & circ[>=q'-q] !φ, and the <, <=, > forms",
        def_eq_sat
    ),
    law!(
        "Def=Next",
        &[],
        Holds,
        "next[=q] φ ≡ next[>=q] φ & (∃q'. (box[>=q'] φ & !bbox[>=q'] φ) | next[>=1-q] !φ)",
        def_eq_next
    ),
    law!(
        "Def<>Next",
        &[],
        Holds,
        "next[<q] φ ≡ !next[>=q] φ; next[<=q] φ ≡ next[<q] φ | next[=q] φ; next[>q] φ ≡ next[>=1] (φ|!φ) & next[<1-q] !φ",
        def_lt_gt_next
    ),
    law!(
        "NonLaw-NextGreaterPrinted",
        &[],
        Fails,
        "next[>q] φ ≡ next[>=1] (φ|!φ) & next[<=q] !φ",
        nonlaw_next_greater_printed
    ),
    law!("DefTopBbox", &[], Holds, "bbox[max q] φ ≡ bbox[>=q] φ & !bbox[>q] φ", def_top_bbox),
    law!("DefLeqBStar", &[], Holds, "star[<=q] φ ≡ star[>=1-q] !φ", def_leq_bstar),
    law!(
        "Def=BStar",
        &[],
        Holds,
        "star[=q] φ ≡ ∃j. star[>=q] (φ & circ[=j/n] (φ|!φ)) & star[>=1-q] (!φ & circ[=j/n] (φ|!φ))",
        def_eq_bstar
    ),
    law!(
        "NonLaw-StarEqWeakCircle",
        &[],
        Fails,
        "star[=q] φ ≡ ∃j. star[>=q] (φ & circ[>=j/n] (φ|!φ)) & star[>=1-q] (!φ & circ[>=j/n] (φ|!φ))",
        nonlaw_star_eq_weak_circle
    ),
    law!(
        "DefTopBStar",
        &[],
        Holds,
        "star[max q] φ ≡ star[>=q] φ & !star[>=q+1/|F_Ω|] φ",
        def_top_bstar
    ),
    law!("Def>BStar", &[], Holds, "star[>q] φ ≡ star[>=q] φ & !star[max q] φ", def_gt_bstar),
    law!("lemma:nexts", &[], Holds, "next^i[>=q] φ ≡ its expansion into next[>=1] chains", lemma_nexts),
    law!(
        "Univocita=white",
        &[],
        Holds,
        "for box, circ and next, at most one q makes op[=q] φ true",
        univocita_white
    ),
    law!("Top=White", &[], Holds, "for box, circ and next, op[=q] φ ≡ op[max q] φ", top_white),
    law!("UnivocitaMaxblack", &[], Holds, "for every operator, at most one q makes op[max q] φ true", univocita_max),
    law!(
        "=TopStarProp",
        &[],
        Holds,
        "for propositional φ, exactly one q makes star[=q] φ true, and star[=q] φ ≡ star[max q] φ",
        eq_top_star_prop
    ),
    law!(
        "whiteBlackBoxDef",
        &[],
        Holds,
        "bbox[>=q] φ holds iff box[>=q] φ holds for some member of F_Ω",
        white_black_box_def
    ),
    law!(
        "StarBBoxVerification",
        &[],
        Holds,
        "if star[>=q] p is valid then bbox[>=q] p holds everywhere, for atoms p",
        star_bbox_atomic
    ),
    law!(
        "NonLaw-StarBBoxNonAtomic",
        &[],
        Fails,
        "if star[>=q] φ is valid then bbox[>=q] φ holds everywhere, for non-atomic φ",
        star_bbox_non_atomic
    ),
    law!(
        "MonotonicityCircle",
        &[],
        Holds,
        "circ[>=q] φ at w_i implies circ[>=q] φ at every later world",
        monotonicity_circle
    ),
    law!(
        "bboxDecrease",
        &[],
        Holds,
        "bbox[>=q] p at w_i implies bbox[>=q] p at every earlier world, for atoms p",
        bbox_decrease
    ),
    law!(
        "bstarIndepWorld",
        &[],
        Holds,
        "star formulas have one truth value for every world and assignment",
        bstar_indep_world
    ),
    law!(
        "bboxIndepAssignment",
        &[],
        Holds,
        "bbox formulas have one truth value per world for every assignment",
        bbox_indep_assignment
    ),
    law!("DoubleStarIE", &[], Holds, "star[>=q] star[>=q'] φ ≡ star[>=q'] φ for q ≠ 0", double_star),
    law!(
        "DoubleCircleElimination",
        &[],
        Holds,
        "circ[>=q] circ[>=q'] φ implies circ[>=q'] φ for q ≠ 0",
        double_circle
    ),
    law!("CircleI", &[], Holds, "φ implies circ[>=1/n] φ", circle_i),
    law!(
        "NonLaw-BlackBoxEq",
        &["Def=WBox-for-blackbox"],
        Fails,
        "bbox[=q] φ ≡ bbox[>=q] φ & bbox[>=1-q] !φ",
        nonlaw_black_box_eq
    ),
];

/// Every registered law, in a fixed order.
pub fn laws() -> &'static [Law] {
    LAWS
}

/// Looks a law up by id or alias.
pub fn find_law(id: &str) -> Option<&'static Law> {
    LAWS.iter().find(|l| l.id == id || l.aliases.contains(&id))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LawOptions {
    pub engine: Engine,
}

/// One failing instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub world: usize,
    /// The member of `F_Ω` as a word, or `observed`.
    pub assignment: String,
    pub detail: String,
}

/// Outcome of checking one law on one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub law: String,
    pub model: String,
    pub expectation: Expectation,
    pub instances: usize,
    pub skipped: usize,
    pub failures: usize,
    /// The first few failing instances.
    pub counterexamples: Vec<Counterexample>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }

    pub fn as_expected(&self) -> bool {
        self.holds() == (self.expectation == Expectation::Holds)
    }
}

const KEPT_COUNTEREXAMPLES: usize = 3;

/// Checks a law, by id or alias, on one model.
///
/// ```
/// use ltlf::{analysis::laws::check_law, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Head,Tail").unwrap();
/// assert!(check_law("Def<Boxes", &model).unwrap().holds());
/// assert!(!check_law("Def=WBox-for-blackbox", &model).unwrap().holds());
/// ```
pub fn check_law(id: &str, model: &Model) -> Result<LawReport, AnalysisError> {
    check_law_with(id, model, LawOptions::default())
}

pub fn check_law_with(id: &str, model: &Model, opts: LawOptions) -> Result<LawReport, AnalysisError> {
    let law = find_law(id).ok_or_else(|| AnalysisError::UnknownLaw(id.to_string()))?;
    Ok(run_law(law, model, opts))
}

pub fn run_law(law: &Law, model: &Model, opts: LawOptions) -> LawReport {
    let ctx = Ctx::new(model, opts.engine);
    let mut tally = Tally::new(&ctx.ev);
    (law.check)(&ctx, &mut tally);
    LawReport {
        law: law.id.to_string(),
        model: model.to_string(),
        expectation: law.expectation,
        instances: tally.instances,
        skipped: tally.skipped,
        failures: tally.failures,
        counterexamples: tally.examples,
    }
}

/// Aggregate of one law over a family of models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub law: String,
    pub expectation: Expectation,
    pub models: usize,
    pub failing_models: usize,
    pub instances: usize,
    pub skipped: usize,
    /// Model and instance of the first failure, in family order.
    pub first_failure: Option<(String, Counterexample)>,
}

impl FamilyReport {
    pub fn holds(&self) -> bool {
        self.failing_models == 0
    }

    pub fn as_expected(&self) -> bool {
        self.holds() == (self.expectation == Expectation::Holds)
    }
}

/// Runs `selected` laws on every model, in parallel over models; the
/// aggregation follows family order, so the result is deterministic.
pub fn check_family(selected: &[&'static Law], models: &[Model], opts: LawOptions) -> Vec<FamilyReport> {
    let per_model: Vec<Vec<LawReport>> = models
        .par_iter()
        .map(|m| selected.iter().map(|law| run_law(law, m, opts)).collect())
        .collect();
    selected
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let mut rep = FamilyReport {
                law: law.id.to_string(),
                expectation: law.expectation,
                models: models.len(),
                failing_models: 0,
                instances: 0,
                skipped: 0,
                first_failure: None,
            };
            for reports in &per_model {
                let r = &reports[i];
                rep.instances += r.instances;
                rep.skipped += r.skipped;
                if !r.holds() {
                    rep.failing_models += 1;
                    if rep.first_failure.is_none() {
                        rep.first_failure = Some((r.model.clone(), r.counterexamples[0].clone()));
                    }
                }
            }
            rep
        })
        .collect()
}

struct Tally<'e> {
    ev: &'e Evaluator<'e>,
    instances: usize,
    skipped: usize,
    failures: usize,
    examples: Vec<Counterexample>,
}

impl<'e> Tally<'e> {
    fn new(ev: &'e Evaluator<'e>) -> Self {
        Tally { ev, instances: 0, skipped: 0, failures: 0, examples: Vec::new() }
    }

    fn pass(&mut self) {
        self.instances += 1;
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    fn fail(&mut self, row: usize, world: usize, detail: impl FnOnce() -> String) {
        self.instances += 1;
        self.failures += 1;
        if self.examples.len() < KEPT_COUNTEREXAMPLES {
            let assignment = if row == self.ev.observed_row() {
                "observed".to_string()
            } else {
                self.ev.spec().render(self.ev.word(row))
            };
            self.examples.push(Counterexample { world, assignment, detail: detail() });
        }
    }

    fn record(&mut self, ok: bool, row: usize, world: usize, detail: impl FnOnce() -> String) {
        if ok {
            self.pass()
        } else {
            self.fail(row, world, detail)
        }
    }
}

struct Ctx<'m> {
    ev: Evaluator<'m>,
    corpus: Vec<Formula>,
    atoms: Vec<Formula>,
    grid: Vec<Probability>,
    n: usize,
    members: usize,
}

fn md(op: Op, cmp: Comparator, q: &Probability, f: &Formula) -> Formula {
    Formula::modal(op, cmp, q.clone(), f.clone())
}

fn geq(op: Op, q: &Probability, f: &Formula) -> Formula {
    md(op, Comparator::Geq, q, f)
}

fn ratio(k: usize, d: usize) -> Probability {
    Probability::ratio(k, d)
}

fn show(c: Cell) -> &'static str {
    match c {
        Cell::True => "true",
        _ => "false",
    }
}

impl<'m> Ctx<'m> {
    fn new(model: &'m Model, engine: Engine) -> Self {
        let ev = Evaluator::new(model, engine);
        let spec = model.spec();
        let n = spec.n();
        let members = ev.members().len();
        let atoms: Vec<Formula> = spec.atoms().iter().map(|a| Formula::atom(a.as_str())).collect();
        let grid = {
            let mut g = BTreeSet::new();
            for d in (1..=n).chain(std::iter::once(members)) {
                for k in 0..=d {
                    g.insert(ratio(k, d));
                }
            }
            g.into_iter().collect()
        };
        Ctx { corpus: corpus(&atoms), ev, atoms, grid, n, members }
    }

    fn tab(&self, f: &Formula) -> Rc<Table> {
        self.ev.table(f).expect("corpus formulas use the model's atoms")
    }

    fn rows(&self) -> std::ops::Range<usize> {
        0..self.ev.rows()
    }

    fn worlds(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    fn compare_at(&self, t: &mut Tally, worlds: &[usize], lhs: &Formula, rhs: &Formula, implication: bool) {
        let (a, b) = (self.tab(lhs), self.tab(rhs));
        for r in self.rows() {
            for &w in worlds {
                let (x, y) = (a.cell(r, w), b.cell(r, w));
                if !x.is_defined() || !y.is_defined() {
                    t.skip();
                    continue;
                }
                let ok = if implication { !x.is_true() || y.is_true() } else { x == y };
                t.record(ok, r, w, || format!("`{lhs}` is {} but `{rhs}` is {}", show(x), show(y)));
            }
        }
    }

    fn equiv(&self, t: &mut Tally, lhs: &Formula, rhs: &Formula) {
        let worlds: Vec<usize> = self.worlds().collect();
        self.compare_at(t, &worlds, lhs, rhs, false);
    }

    fn implies(&self, t: &mut Tally, lhs: &Formula, rhs: &Formula) {
        let worlds: Vec<usize> = self.worlds().collect();
        self.compare_at(t, &worlds, lhs, rhs, true);
    }

    fn equiv_at(&self, t: &mut Tally, world: usize, lhs: &Formula, rhs: &Formula) {
        self.compare_at(t, &[world], lhs, rhs, false);
    }

    /// The grid plus every value `op` takes on `f` in this model.
    fn grid_with_values(&self, op: Op, f: &Formula) -> Vec<Probability> {
        let mut g: BTreeSet<Probability> = self.grid.iter().cloned().collect();
        for r in self.rows() {
            for w in self.worlds() {
                if let Ok(v) = self.ev.value_row(r, w, op, f) {
                    g.insert(v.complement());
                    g.insert(v);
                }
            }
        }
        g.into_iter().collect()
    }

    fn nonzero_grid(&self) -> impl Iterator<Item = &Probability> {
        self.grid.iter().filter(|q| !q.is_zero())
    }
}

/// Argument formulas every law is instantiated with.
fn corpus(atoms: &[Formula]) -> Vec<Formula> {
    let half = ratio(1, 2);
    let third = ratio(1, 3);
    let one = Probability::one();
    let p = &atoms[0];
    let last = &atoms[atoms.len() - 1];
    let mut out = Vec::new();
    for a in atoms {
        out.push(a.clone());
        out.push(a.clone().not());
    }
    if atoms.len() >= 2 {
        out.push(atoms[0].clone().or(atoms[1].clone()));
        out.push(atoms[0].clone().and(atoms[1].clone().not()));
    }
    out.push(geq(Op::WhiteBox, &half, p));
    out.push(geq(Op::BlackBox, &half, p));
    out.push(geq(Op::Circle, &half, p));
    out.push(geq(Op::NEXT, &half, p));
    out.push(geq(Op::Star, &half, p));
    out.push(geq(Op::WhiteBox, &half, &geq(Op::WhiteBox, &one, last)));
    out.push(md(Op::BlackBox, Comparator::Eq, &third, last));
    out.push(md(Op::BlackBox, Comparator::Max, &half, last));
    out.push(geq(Op::NEXT, &one, p).or(geq(Op::WhiteBox, &half, last)));
    out
}

fn def_lt_boxes(c: &Ctx<'_>, t: &mut Tally) {
    for op in [Op::WhiteBox, Op::BlackBox] {
        for f in &c.corpus {
            let nf = f.clone().not();
            for q in &c.grid {
                c.equiv(t, &md(op, Comparator::Leq, q, f), &geq(op, &q.complement(), &nf));
            }
        }
    }
}

fn def_eq_wbox(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        for q in &c.grid {
            let rhs = geq(Op::WhiteBox, q, f).and(geq(Op::WhiteBox, &q.complement(), &nf));
            c.equiv(t, &md(Op::WhiteBox, Comparator::Eq, q, f), &rhs);
        }
    }
}

fn def_lt_wbox(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            c.equiv(t, &md(Op::WhiteBox, Comparator::Lt, q, f), &geq(Op::WhiteBox, q, f).not());
            c.equiv(t, &md(Op::WhiteBox, Comparator::Gt, q, f), &md(Op::WhiteBox, Comparator::Leq, q, f).not());
        }
    }
}

/// `circ[⋈ j/n] (φ | !φ)`, which at `w_m` compares `m/n` with `j/n`.
fn position(cmp: Comparator, j: usize, n: usize, f: &Formula) -> Formula {
    md(Op::Circle, cmp, &ratio(j, n), &f.clone().tautology_over())
}

fn def_eq_bbox(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for m in c.worlds() {
            let here = position(Comparator::Eq, m, c.n, f);
            for i in 0..=m {
                let q = ratio(i, m);
                for cmp in [Comparator::Eq, Comparator::Lt, Comparator::Gt] {
                    let lhs = md(Op::BlackBox, cmp, &q, f);
                    let body = here.clone().and(md(Op::WhiteBox, cmp, &q, f));
                    let rhs = here.clone().and(geq(Op::BlackBox, &ratio(1, m), &body));
                    c.equiv_at(t, m, &lhs, &rhs);
                }
            }
        }
    }
}

fn def_eq_sat(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        for q in &c.grid {
            let at_least = geq(Op::Circle, q, f);
            let eq = md(Op::Circle, Comparator::Eq, q, f);
            let lt = md(Op::Circle, Comparator::Lt, q, f);
            c.equiv(t, &lt, &at_least.clone().not());
            c.equiv(t, &md(Op::Circle, Comparator::Leq, q, f), &eq.clone().or(lt));
            for m in c.worlds() {
                let seen = ratio(m, c.n);
                let rest = seen.checked_sub(q).unwrap_or_else(Probability::zero);
                let covers = geq(Op::Circle, &seen, &f.clone().tautology_over());
                let others = geq(Op::Circle, &rest, &nf);
                let rhs_eq = at_least.clone().and(covers.clone()).and(others.clone());
                c.equiv_at(t, m, &eq, &rhs_eq);
                let rhs_gt = at_least.clone().and(covers).and(others.not());
                c.equiv_at(t, m, &md(Op::Circle, Comparator::Gt, q, f), &rhs_gt);
            }
        }
    }
}

fn def_eq_next(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        let witness = Formula::any(
            c.grid.iter().map(|q| geq(Op::WhiteBox, q, f).and(geq(Op::BlackBox, q, f).not())),
        )
        .expect("grid is non-empty");
        for q in c.grid_with_values(Op::NEXT, f) {
            let rhs = geq(Op::NEXT, &q, f).and(witness.clone().or(geq(Op::NEXT, &q.complement(), &nf)));
            c.equiv(t, &md(Op::NEXT, Comparator::Eq, &q, f), &rhs);
        }
    }
}

fn def_lt_gt_next(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        let live = geq(Op::NEXT, &Probability::one(), &f.clone().tautology_over());
        for q in c.grid_with_values(Op::NEXT, f) {
            let lt = md(Op::NEXT, Comparator::Lt, &q, f);
            c.equiv(t, &lt, &geq(Op::NEXT, &q, f).not());
            c.equiv(t, &md(Op::NEXT, Comparator::Leq, &q, f), &lt.clone().or(md(Op::NEXT, Comparator::Eq, &q, f)));
            let rhs = live.clone().and(md(Op::NEXT, Comparator::Lt, &q.complement(), &nf));
            c.equiv(t, &md(Op::NEXT, Comparator::Gt, &q, f), &rhs);
        }
    }
}

fn nonlaw_next_greater_printed(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        let live = geq(Op::NEXT, &Probability::one(), &f.clone().tautology_over());
        for q in c.grid_with_values(Op::NEXT, f) {
            let rhs = live.clone().and(md(Op::NEXT, Comparator::Leq, &q, &nf));
            c.equiv(t, &md(Op::NEXT, Comparator::Gt, &q, f), &rhs);
        }
    }
}

fn def_top_bbox(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            let rhs = geq(Op::BlackBox, q, f).and(md(Op::BlackBox, Comparator::Gt, q, f).not());
            c.equiv(t, &md(Op::BlackBox, Comparator::Max, q, f), &rhs);
        }
    }
}

fn def_leq_bstar(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        for q in &c.grid {
            c.equiv(t, &md(Op::Star, Comparator::Leq, q, f), &geq(Op::Star, &q.complement(), &nf));
        }
    }
}

fn star_eq_by_position(c: &Ctx<'_>, t: &mut Tally, pin: Comparator) {
    for f in &c.corpus {
        let nf = f.clone().not();
        let pins: Vec<Formula> = c.worlds().map(|j| position(pin, j, c.n, f)).collect();
        for q in &c.grid {
            let rhs = Formula::any(pins.iter().map(|here| {
                geq(Op::Star, q, &f.clone().and(here.clone()))
                    .and(geq(Op::Star, &q.complement(), &nf.clone().and(here.clone())))
            }))
            .expect("n >= 1");
            c.equiv(t, &md(Op::Star, Comparator::Eq, q, f), &rhs);
        }
    }
}

fn def_eq_bstar(c: &Ctx<'_>, t: &mut Tally) {
    star_eq_by_position(c, t, Comparator::Eq);
}

fn nonlaw_star_eq_weak_circle(c: &Ctx<'_>, t: &mut Tally) {
    star_eq_by_position(c, t, Comparator::Geq);
}

fn def_top_bstar(c: &Ctx<'_>, t: &mut Tally) {
    let step = ratio(1, c.members);
    for f in &c.corpus {
        for q in &c.grid {
            let mut rhs = geq(Op::Star, q, f);
            if let Some(next) = q.checked_add(&step) {
                rhs = rhs.and(geq(Op::Star, &next, f).not());
            }
            c.equiv(t, &md(Op::Star, Comparator::Max, q, f), &rhs);
        }
    }
}

fn def_gt_bstar(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            let rhs = geq(Op::Star, q, f).and(md(Op::Star, Comparator::Max, q, f).not());
            c.equiv(t, &md(Op::Star, Comparator::Gt, q, f), &rhs);
        }
    }
}

fn lemma_nexts(c: &Ctx<'_>, t: &mut Tally) {
    for steps in 2..=3 {
        let op = Op::next_within(steps).expect("positive");
        for f in &c.corpus {
            for q in c.grid_with_values(op, f) {
                let g = geq(op, &q, f);
                c.equiv(t, &g, &g.expand_indexed_next());
            }
        }
    }
}

/// For each context, counts the indices in `qs` making `cmp` true and
/// checks the count with `ok`.
fn count_true(c: &Ctx<'_>, t: &mut Tally, op: Op, cmp: Comparator, f: &Formula, ok: fn(usize) -> bool) {
    let qs = c.grid_with_values(op, f);
    let tables: Vec<Rc<Table>> = qs.iter().map(|q| c.tab(&md(op, cmp, q, f))).collect();
    for r in c.rows() {
        for w in c.worlds() {
            if tables.iter().any(|tb| !tb.cell(r, w).is_defined()) {
                t.skip();
                continue;
            }
            let hits: Vec<&Probability> =
                qs.iter().zip(&tables).filter(|(_, tb)| tb.cell(r, w).is_true()).map(|(q, _)| q).collect();
            t.record(ok(hits.len()), r, w, || {
                let list: Vec<String> = hits.iter().map(|q| q.to_string()).collect();
                format!("`{}` true for q in {{{}}}", md(op, cmp, &Probability::zero(), f), list.join(", "))
            });
        }
    }
}

fn univocita_white(c: &Ctx<'_>, t: &mut Tally) {
    for op in [Op::WhiteBox, Op::Circle, Op::NEXT] {
        for f in &c.corpus {
            count_true(c, t, op, Comparator::Eq, f, |k| k <= 1);
        }
    }
}

fn top_white(c: &Ctx<'_>, t: &mut Tally) {
    for op in [Op::WhiteBox, Op::Circle, Op::NEXT] {
        for f in &c.corpus {
            for q in c.grid_with_values(op, f) {
                c.equiv(t, &md(op, Comparator::Eq, &q, f), &md(op, Comparator::Max, &q, f));
            }
        }
    }
}

fn univocita_max(c: &Ctx<'_>, t: &mut Tally) {
    for op in [Op::WhiteBox, Op::BlackBox, Op::Circle, Op::Star, Op::NEXT] {
        for f in &c.corpus {
            count_true(c, t, op, Comparator::Max, f, |k| k <= 1);
        }
    }
}

fn eq_top_star_prop(c: &Ctx<'_>, t: &mut Tally) {
    for f in c.corpus.iter().filter(|f| f.is_propositional()) {
        count_true(c, t, Op::Star, Comparator::Eq, f, |k| k == 1);
        for q in c.grid_with_values(Op::Star, f) {
            c.equiv(t, &md(Op::Star, Comparator::Eq, &q, f), &md(Op::Star, Comparator::Max, &q, f));
        }
    }
}

fn white_black_box_def(c: &Ctx<'_>, t: &mut Tally) {
    let members = c.members;
    for f in &c.corpus {
        for q in &c.grid {
            let black = c.tab(&geq(Op::BlackBox, q, f));
            let white = c.tab(&geq(Op::WhiteBox, q, f));
            for w in c.worlds() {
                let column: Vec<Cell> = (0..members).map(|r| white.cell(r, w)).collect();
                if column.iter().any(|x| !x.is_defined()) {
                    t.skip();
                    continue;
                }
                let some = column.iter().any(|x| x.is_true());
                for r in c.rows() {
                    let b = black.cell(r, w);
                    if !b.is_defined() {
                        t.skip();
                        continue;
                    }
                    t.record(b.is_true() == some, r, w, || {
                        format!("`bbox[>=q] φ` is {} but some member satisfies `box[>={q}] {f}`: {some}", show(b))
                    });
                }
            }
        }
    }
}

fn star_bbox(c: &Ctx<'_>, t: &mut Tally, args: &[Formula]) {
    for f in args {
        for q in &c.grid {
            let star = c.tab(&geq(Op::Star, q, f));
            let cells: Vec<Cell> = c.rows().flat_map(|r| c.worlds().map(move |w| (r, w))).map(|(r, w)| star.cell(r, w)).collect();
            if cells.iter().any(|x| !x.is_defined()) {
                t.skip();
                continue;
            }
            if !cells.iter().all(|x| x.is_true()) {
                t.pass();
                continue;
            }
            let black = geq(Op::BlackBox, q, f);
            let tb = c.tab(&black);
            for r in c.rows() {
                for w in c.worlds() {
                    let b = tb.cell(r, w);
                    if !b.is_defined() {
                        t.skip();
                        continue;
                    }
                    t.record(b.is_true(), r, w, || format!("`star[>={q}] {f}` is valid but `{black}` is false"));
                }
            }
        }
    }
}

fn star_bbox_atomic(c: &Ctx<'_>, t: &mut Tally) {
    star_bbox(c, t, &c.atoms);
}

fn star_bbox_non_atomic(c: &Ctx<'_>, t: &mut Tally) {
    let args: Vec<Formula> = c.corpus.iter().filter(|f| !matches!(f, Formula::Atom(_))).cloned().collect();
    star_bbox(c, t, &args);
}

/// `earlier` at `w_i` implies the same formula at `w_j` for `j > i`
/// (`forward`) or `j < i` (backward).
fn across_worlds(c: &Ctx<'_>, t: &mut Tally, f: &Formula, forward: bool) {
    let tb = c.tab(f);
    for r in c.rows() {
        for i in c.worlds() {
            let x = tb.cell(r, i);
            if !x.is_defined() {
                continue;
            }
            let others: Vec<usize> = if forward { (i + 1..=c.n).collect() } else { (1..i).collect() };
            for j in others {
                let y = tb.cell(r, j);
                if !y.is_defined() {
                    t.skip();
                    continue;
                }
                t.record(!x.is_true() || y.is_true(), r, j, || format!("`{f}` holds at w{i} but not at w{j}"));
            }
        }
    }
}

fn monotonicity_circle(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            across_worlds(c, t, &geq(Op::Circle, q, f), true);
        }
    }
}

fn bbox_decrease(c: &Ctx<'_>, t: &mut Tally) {
    for p in &c.atoms {
        for q in &c.grid {
            across_worlds(c, t, &geq(Op::BlackBox, q, p), false);
        }
    }
}

fn bstar_indep_world(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            for cmp in Comparator::ALL {
                let g = md(Op::Star, cmp, q, f);
                let tb = c.tab(&g);
                let mut first: Option<Cell> = None;
                for r in c.rows() {
                    for w in c.worlds() {
                        let x = tb.cell(r, w);
                        if !x.is_defined() {
                            t.skip();
                            continue;
                        }
                        let v = *first.get_or_insert(x);
                        t.record(x == v, r, w, || format!("`{g}` is {} here and {} elsewhere", show(x), show(v)));
                    }
                }
            }
        }
    }
}

fn bbox_indep_assignment(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for q in &c.grid {
            for cmp in Comparator::ALL {
                let g = md(Op::BlackBox, cmp, q, f);
                let tb = c.tab(&g);
                for w in c.worlds() {
                    let mut first: Option<Cell> = None;
                    for r in c.rows() {
                        let x = tb.cell(r, w);
                        if !x.is_defined() {
                            t.skip();
                            continue;
                        }
                        let v = *first.get_or_insert(x);
                        t.record(x == v, r, w, || format!("`{g}` differs between assignments"));
                    }
                }
            }
        }
    }
}

fn double_star(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for inner in &c.grid {
            let g = geq(Op::Star, inner, f);
            for q in c.nonzero_grid() {
                c.equiv(t, &geq(Op::Star, q, &g), &g);
            }
        }
    }
}

fn double_circle(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        for inner in &c.grid {
            let g = geq(Op::Circle, inner, f);
            for q in c.nonzero_grid() {
                c.implies(t, &geq(Op::Circle, q, &g), &g);
            }
        }
    }
}

fn circle_i(c: &Ctx<'_>, t: &mut Tally) {
    let q = ratio(1, c.n);
    for f in &c.corpus {
        c.implies(t, f, &geq(Op::Circle, &q, f));
    }
}

fn nonlaw_black_box_eq(c: &Ctx<'_>, t: &mut Tally) {
    for f in &c.corpus {
        let nf = f.clone().not();
        for q in &c.grid {
            let rhs = geq(Op::BlackBox, q, f).and(geq(Op::BlackBox, &q.complement(), &nf));
            c.equiv(t, &md(Op::BlackBox, Comparator::Eq, q, f), &rhs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ValidatedSpec;

    #[test]
    fn guide_lists_every_law() {
        let guide = include_str!("../../../../book/src/laws.md");
        for law in laws() {
            assert!(guide.contains(&format!("| `{}` |", law.id)), "{} missing from the guide", law.id);
        }
    }

    fn fair4(obs: &str) -> Model {
        Model::observe(ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap(), obs).unwrap()
    }

    #[test]
    fn registry_ids_are_unique() {
        let mut seen = BTreeSet::new();
        for law in laws() {
            assert!(seen.insert(law.id), "{}", law.id);
            for a in law.aliases {
                assert!(seen.insert(a), "{a}");
            }
        }
        assert_eq!(find_law("Def=WBox-for-blackbox").unwrap().id, "NonLaw-BlackBoxEq");
        assert!(matches!(check_law("nope", &fair4("")), Err(AnalysisError::UnknownLaw(_))));
    }

    #[test]
    fn black_box_equality_counterexample() {
        let r = check_law("NonLaw-BlackBoxEq", &fair4("Head,Tail,Head,Tail")).unwrap();
        assert!(!r.holds());
        assert!(r.as_expected());
    }

    #[test]
    fn simple_laws_hold_on_fair_coin() {
        let m = fair4("Head,Head,Tail,Tail");
        for id in ["Def<Boxes", "Def=WBox", "Def<WBoxe", "CircleI", "DoubleStarIE"] {
            let r = check_law(id, &m).unwrap();
            assert!(r.holds(), "{id}: {:?}", r.counterexamples);
            assert!(r.instances > 0);
        }
    }
}
