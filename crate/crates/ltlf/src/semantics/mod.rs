//! Truth of formulas at a world, relative to an assignment.
//!
//! The [`Evaluator`] enumerates `F_Ω` once and computes, per subformula, a
//! truth table with one row per member plus one row for the observation.
//! Two engines share that machinery: [`Engine::Reference`] is plain
//! enumeration, [`Engine::Accelerated`] swaps in closed forms for `star`
//! and `bbox` over propositional arguments and for `next` over an atom.
//!
//! A cell can also be undefined: a `next` that looks past `w_n` has no
//! value, and neither has anything that reads the observation beyond its
//! known prefix. Undefinedness propagates through every connective and
//! operator that inspects the cell, and surfaces as an [`EvalError`] only
//! when a query actually depends on it.

mod explain;
mod table;

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::formula::{Formula, Op};
use crate::model::{Assignment, AtomId, Model, ValidatedSpec};
use crate::prob::{binomial, Probability};

pub use explain::{explain, Explanation};
pub use table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// Literal enumeration of `F_Ω` for every operator.
    Reference,
    /// Closed forms where they apply, enumeration otherwise.
    #[default]
    Accelerated,
}

/// Which assignment a query is evaluated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Observed,
    Member(Assignment),
}

#[derive(Debug, Clone)]
pub struct EvalContext<'a> {
    pub model: &'a Model,
    pub world: usize,
    pub selector: Selector,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("world {world} is outside 1..={n}")]
    WorldOutOfRange { world: usize, n: usize },
    #[error("a next operator looks beyond the last world")]
    NextBeyondHorizon,
    #[error("the formula reads beyond the observed prefix of length {observed}")]
    UnobservedWorld { observed: usize },
    #[error("the selected assignment is not a member of F_Ω")]
    NotAMember,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("`{0}` is not propositional")]
    NonPropositional(String),
    #[error("no member of F_Ω extends the prefix of length {world}")]
    IncompatiblePrefix { world: usize },
}

type TableCache = HashMap<Formula, Rc<Table>>;

/// Evaluates formulas over one model, caching subformula tables.
///
/// The cache lives in a `RefCell`, so an evaluator is confined to one
/// thread; parallel work builds one evaluator per worker.
///
/// ```
/// use ltlf::semantics::{Engine, Evaluator, Selector};
/// use ltlf::{parse, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Head,Head,Tail,Head").unwrap();
/// let ev = Evaluator::new(&model, Engine::Reference);
/// let f = parse("box[>=2/3] Head").unwrap();
/// assert!(ev.eval(3, &Selector::Observed, &f).unwrap());
/// ```
pub struct Evaluator<'m> {
    model: &'m Model,
    engine: Engine,
    members: Vec<Assignment>,
    tables: RefCell<TableCache>,
    compat: RefCell<HashMap<Vec<AtomId>, Rc<[u32]>>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model, engine: Engine) -> Self {
        Evaluator {
            model,
            engine,
            members: model.spec().members().collect(),
            tables: RefCell::default(),
            compat: RefCell::default(),
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn spec(&self) -> &'m ValidatedSpec {
        self.model.spec()
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    /// Members of `F_Ω`, sorted.
    pub fn members(&self) -> &[Assignment] {
        &self.members
    }

    /// Row index of the observation in every table.
    pub fn observed_row(&self) -> usize {
        self.members.len()
    }

    /// Number of rows in every table: members followed by the observation.
    pub fn rows(&self) -> usize {
        self.members.len() + 1
    }

    pub(crate) fn word(&self, row: usize) -> &[AtomId] {
        if row < self.members.len() {
            self.members[row].outcomes()
        } else {
            self.model.observed().outcomes()
        }
    }

    pub fn row_of(&self, selector: &Selector) -> Result<usize, EvalError> {
        match selector {
            Selector::Observed => Ok(self.observed_row()),
            Selector::Member(a) => self.members.binary_search(a).map_err(|_| EvalError::NotAMember),
        }
    }

    pub fn check_world(&self, world: usize) -> Result<(), EvalError> {
        if world == 0 || world > self.n() {
            Err(EvalError::WorldOutOfRange { world, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub(crate) fn cell_result(&self, cell: Cell) -> Result<bool, EvalError> {
        match cell {
            Cell::False => Ok(false),
            Cell::True => Ok(true),
            Cell::BeyondHorizon => Err(EvalError::NextBeyondHorizon),
            Cell::Unobserved => Err(EvalError::UnobservedWorld { observed: self.model.observed().len() }),
        }
    }

    pub fn eval(&self, world: usize, selector: &Selector, f: &Formula) -> Result<bool, EvalError> {
        self.check_world(world)?;
        let row = self.row_of(selector)?;
        self.eval_row(row, world, f)
    }

    pub fn eval_row(&self, row: usize, world: usize, f: &Formula) -> Result<bool, EvalError> {
        self.check_world(world)?;
        let t = self.table(f)?;
        self.cell_result(t.cell(row, world))
    }

    /// The truth table of `f`, computed once and cached.
    pub fn table(&self, f: &Formula) -> Result<Rc<Table>, EvalError> {
        if let Some(t) = self.tables.borrow().get(f) {
            return Ok(t.clone());
        }
        let t = Rc::new(self.build(f)?);
        self.tables.borrow_mut().insert(f.clone(), t.clone());
        Ok(t)
    }

    /// Indices of the members agreeing with `prefix`, in sorted order.
    pub fn compatible(&self, prefix: &[AtomId]) -> Rc<[u32]> {
        if let Some(c) = self.compat.borrow().get(prefix) {
            return c.clone();
        }
        let found: Rc<[u32]> = match self.engine {
            Engine::Reference => (0..self.members.len() as u32)
                .filter(|&i| crate::model::extends(prefix, &self.members[i as usize]))
                .collect(),
            Engine::Accelerated => {
                let m = prefix.len();
                let lo = self.members.partition_point(|a| &a.outcomes()[..m] < prefix);
                let hi = self.members.partition_point(|a| &a.outcomes()[..m] <= prefix);
                (lo as u32..hi as u32).collect()
            }
        };
        self.compat.borrow_mut().insert(prefix.to_vec(), found.clone());
        found
    }

    /// Members extending the first `m` observed outcomes.
    pub fn count_compatible(&self, m: usize) -> Result<usize, EvalError> {
        let obs = self.model.observed();
        if m > obs.len() {
            return Err(EvalError::UnobservedWorld { observed: obs.len() });
        }
        Ok(self.compatible(obs.prefix(m)).len())
    }

    /// The value an operator assigns to `arg` at a context: the ratio for
    /// `box`, `circ` and `next`, the best ratio over members for `bbox`,
    /// and the best share over worlds for `star`.
    pub fn max_index(&self, world: usize, selector: &Selector, op: Op, arg: &Formula) -> Result<Probability, EvalError> {
        self.check_world(world)?;
        let row = self.row_of(selector)?;
        self.value_row(row, world, op, arg)
    }

    pub fn value_row(&self, row: usize, world: usize, op: Op, arg: &Formula) -> Result<Probability, EvalError> {
        self.check_world(world)?;
        let n = self.n();
        let accel = self.engine == Engine::Accelerated;
        let count_upto = |t: &Table, r: usize| -> Result<usize, EvalError> {
            let mut c = 0;
            for l in 1..=world {
                c += self.cell_result(t.cell(r, l))? as usize;
            }
            Ok(c)
        };
        match op {
            Op::WhiteBox => Ok(Probability::ratio(count_upto(&*self.table(arg)?, row)?, world)),
            Op::Circle => Ok(Probability::ratio(count_upto(&*self.table(arg)?, row)?, n)),
            Op::BlackBox if accel && arg.is_propositional() => {
                let (_, hi) = self.propositional_range(arg, world)?;
                Ok(Probability::ratio(hi, world))
            }
            Op::BlackBox => {
                let t = self.table(arg)?;
                let mut best = 0;
                for r in 0..self.members.len() {
                    best = best.max(count_upto(&t, r)?);
                }
                Ok(Probability::ratio(best, world))
            }
            Op::Star if accel && arg.is_propositional() => star_measure(self.spec(), arg),
            Op::Star => {
                let t = self.table(arg)?;
                let mut best = 0;
                for w in 1..=n {
                    let mut c = 0;
                    for r in 0..self.members.len() {
                        c += self.cell_result(t.cell(r, w))? as usize;
                    }
                    best = best.max(c);
                }
                Ok(Probability::ratio(best, self.members.len()))
            }
            Op::Next(steps) => {
                let steps = steps.get() as usize;
                if world + steps > n {
                    return Err(EvalError::NextBeyondHorizon);
                }
                let word = self.word(row);
                if world > word.len() {
                    return Err(EvalError::UnobservedWorld { observed: word.len() });
                }
                let prefix = &word[..world];
                if accel {
                    if let Formula::Atom(name) = arg {
                        let id = self.atom(name)?;
                        return Ok(match atomic_next_ratio(self.spec(), prefix, id, steps) {
                            Some((num, den)) => Probability::new(num, den).expect("ratio within [0, 1]"),
                            None => Probability::zero(),
                        });
                    }
                }
                let t = self.table(arg)?;
                let compat = self.compatible(prefix);
                if compat.is_empty() {
                    return Ok(Probability::zero());
                }
                let mut hits = 0;
                for &b in compat.iter() {
                    let mut any = false;
                    for j in 1..=steps {
                        any |= self.cell_result(t.cell(b as usize, world + j))?;
                    }
                    hits += any as usize;
                }
                Ok(Probability::ratio(hits, compat.len()))
            }
        }
    }

    pub(crate) fn atom(&self, name: &str) -> Result<AtomId, EvalError> {
        self.spec().atom_id(name).ok_or_else(|| EvalError::UnknownAtom(name.to_string()))
    }

    /// Smallest and largest count of worlds `l ≤ world` satisfying a
    /// propositional `f`, over all members.
    pub(crate) fn propositional_range(&self, f: &Formula, world: usize) -> Result<(usize, usize), EvalError> {
        let spec = self.spec();
        let mut inside = 0;
        for id in spec.ids() {
            if holds_at_atom(spec, f, id)? {
                inside += spec.target_count(id);
            }
        }
        let outside = spec.n() - inside;
        Ok((world.saturating_sub(outside), world.min(inside)))
    }
}

/// `next` over an atom from prefix counts alone: among completions of the
/// prefix, the share placing the atom somewhere in the next `steps` worlds.
/// `None` when no member extends the prefix.
pub(crate) fn atomic_next_ratio(
    spec: &ValidatedSpec,
    prefix: &[AtomId],
    atom: AtomId,
    steps: usize,
) -> Option<(num_bigint::BigUint, num_bigint::BigUint)> {
    let seen = spec.counts_of(prefix);
    if seen.iter().zip(spec.target_counts()).any(|(l, r)| l > r) {
        return None;
    }
    let rest = (spec.n() - prefix.len()) as u64;
    let left = (spec.target_count(atom) - seen[atom.index()]) as u64;
    let all = binomial(rest, left);
    let avoid = binomial(rest - steps as u64, left);
    Some((&all - avoid, all))
}

/// Truth of a propositional formula at a world carrying `atom`.
pub(crate) fn holds_at_atom(spec: &ValidatedSpec, f: &Formula, atom: AtomId) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::Atom(name) => {
            let id = spec.atom_id(name).ok_or_else(|| EvalError::UnknownAtom(name.clone()))?;
            id == atom
        }
        Formula::Not(g) => !holds_at_atom(spec, g, atom)?,
        Formula::And(g, h) => holds_at_atom(spec, g, atom)? & holds_at_atom(spec, h, atom)?,
        Formula::Or(g, h) => holds_at_atom(spec, g, atom)? | holds_at_atom(spec, h, atom)?,
        Formula::Modal { .. } => return Err(EvalError::NonPropositional(f.to_string())),
    })
}

/// One-shot evaluation with a fresh evaluator.
pub fn eval(ctx: &EvalContext<'_>, f: &Formula, engine: Engine) -> Result<bool, EvalError> {
    Evaluator::new(ctx.model, engine).eval(ctx.world, &ctx.selector, f)
}

/// One-shot [`Evaluator::max_index`].
pub fn max_index(ctx: &EvalContext<'_>, op: Op, f: &Formula, engine: Engine) -> Result<Probability, EvalError> {
    Evaluator::new(ctx.model, engine).max_index(ctx.world, &ctx.selector, op, f)
}

/// `μ(f)`: total target frequency of the atoms whose world satisfies `f`.
///
/// ```
/// use ltlf::{parse, semantics::star_measure, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 1)]).unwrap();
/// assert_eq!(star_measure(&spec, &parse("!Head").unwrap()).unwrap().to_string(), "1/3");
/// ```
pub fn star_measure(spec: &ValidatedSpec, f: &Formula) -> Result<Probability, EvalError> {
    if !f.is_propositional() {
        return Err(EvalError::NonPropositional(f.to_string()));
    }
    let mut total = 0;
    for id in spec.ids() {
        if holds_at_atom(spec, f, id)? {
            total += spec.target_count(id);
        }
    }
    Ok(Probability::ratio(total, spec.n()))
}

/// `(μ(p)·n − l_p) / (n − m)`: the share of completions of the observed
/// `m`-prefix that put `atom` at `w_{m+1}`.
///
/// ```
/// use ltlf::{semantics::next_value_atomic, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Tail").unwrap();
/// assert_eq!(next_value_atomic(&model, 1, "Head").unwrap().to_string(), "2/3");
/// ```
pub fn next_value_atomic(model: &Model, m: usize, atom: &str) -> Result<Probability, EvalError> {
    let spec = model.spec();
    if m == 0 {
        return Err(EvalError::WorldOutOfRange { world: m, n: spec.n() });
    }
    next_value_from_prefix(model, m, atom)
}

/// As [`next_value_atomic`], also accepting the pre-series point `m = 0`.
pub(crate) fn next_value_from_prefix(model: &Model, m: usize, atom: &str) -> Result<Probability, EvalError> {
    let spec = model.spec();
    if m >= spec.n() {
        return Err(EvalError::NextBeyondHorizon);
    }
    let obs = model.observed();
    if m > obs.len() {
        return Err(EvalError::UnobservedWorld { observed: obs.len() });
    }
    let id = spec.atom_id(atom).ok_or_else(|| EvalError::UnknownAtom(atom.to_string()))?;
    let seen = spec.counts_of(obs.prefix(m));
    if seen.iter().zip(spec.target_counts()).any(|(l, r)| l > r) {
        return Err(EvalError::IncompatiblePrefix { world: m });
    }
    Ok(Probability::ratio(spec.target_count(id) - seen[id.index()], spec.n() - m))
}

/// Number of members of `F_Ω` agreeing with the first `m` observed outcomes.
pub fn count_compatible(model: &Model, m: usize) -> Result<usize, EvalError> {
    let obs = model.observed();
    if m > obs.len() {
        return Err(EvalError::UnobservedWorld { observed: obs.len() });
    }
    let prefix = obs.prefix(m);
    Ok(model.spec().members().filter(|a| crate::model::extends(prefix, a)).count())
}
