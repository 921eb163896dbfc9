//! Questions about a series that go beyond single formula evaluation:
//! observed frequencies, compatibility of a prefix with the target, the
//! probability that the series still reaches the target, next-outcome
//! odds, and the worlds where the target proportions can be realized.
//!
//! Probability queries accept the pre-series point `m = 0`.

pub mod family;
pub mod laws;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Pow};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::formula::{Comparator, Formula, Op};
use crate::model::{AtomId, Model, OutcomeDistribution, ValidatedSpec};
use crate::prob::{multinomial, Probability};
use crate::semantics::{next_value_from_prefix, EvalError, Evaluator, Selector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("world {world} is beyond the observed prefix of length {observed}")]
    WorldBeyondObservation { world: usize, observed: usize },
    #[error("world {world} is outside {min}..={n}")]
    WorldOutOfRange { world: usize, min: usize, n: usize },
    #[error("the observed prefix of length {world} is incompatible with the target frequencies")]
    IncompatiblePrefix { world: usize },
    #[error("no next outcome after the last world")]
    NextBeyondHorizon,
    #[error("the model has no outcome weights")]
    MissingWeights,
    #[error("outcome `{0}` has weight 0")]
    ZeroWeight(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown law `{0}`")]
    UnknownLaw(String),
    #[error("inconsistent update: {0}")]
    InconsistentUpdate(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Atom-indexed values that serialize as a JSON object in declared atom order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomMap(pub Vec<(String, Probability)>);

impl AtomMap {
    pub fn get(&self, atom: &str) -> Option<&Probability> {
        self.0.iter().find(|(a, _)| a == atom).map(|(_, p)| p)
    }

    pub fn total(&self) -> Ratio<BigUint> {
        self.0.iter().fold(Ratio::from_integer(BigUint::from(0u32)), |acc, (_, p)| acc + p.as_ratio())
    }
}

impl Serialize for AtomMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (a, p) in &self.0 {
            map.serialize_entry(a, p)?;
        }
        map.end()
    }
}

impl fmt::Display for AtomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, p)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}:{p}")?;
        }
        Ok(())
    }
}

fn check_observed(model: &Model, m: usize) -> Result<(), AnalysisError> {
    let observed = model.observed().len();
    if m > observed {
        Err(AnalysisError::WorldBeyondObservation { world: m, observed })
    } else {
        Ok(())
    }
}

/// Share of the observed worlds `w_1..=w_m` where `f` holds.
///
/// ```
/// use ltlf::{analysis::observed_frequency, parse, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Head,Head,Tail").unwrap();
/// let q = observed_frequency(&model, 3, &parse("Head").unwrap()).unwrap();
/// assert_eq!(q.to_string(), "2/3");
/// ```
pub fn observed_frequency(model: &Model, m: usize, f: &Formula) -> Result<Probability, AnalysisError> {
    if m == 0 || m > model.n() {
        return Err(AnalysisError::WorldOutOfRange { world: m, min: 1, n: model.n() });
    }
    check_observed(model, m)?;
    let ev = Evaluator::new(model, Default::default());
    Ok(ev.max_index(m, &Selector::Observed, Op::WhiteBox, f)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Compatibility {
    Compatible,
    Incompatible,
}

/// Observed and target count of one atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomBound {
    pub atom: String,
    /// `l_p`: occurrences in the prefix.
    pub observed: usize,
    /// `r_p = μ(p)·n`: occurrences required over the whole series.
    pub target: usize,
}

/// Why a prefix cannot be completed into a member of `F_Ω`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub atom: String,
    pub observed: usize,
    pub target: usize,
    /// `exceeded` when `l_p > r_p`, `unreachable` when `r_p − l_p > n − m`.
    pub kind: &'static str,
    /// `circ[>=l/n] p & !star[>=l/n] p`, true at `w_m` exactly when `l_p > r_p`.
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityVerdict {
    pub status: Compatibility,
    pub step: usize,
    pub bounds: Vec<AtomBound>,
    pub violation: Option<Violation>,
}

impl CompatibilityVerdict {
    pub fn is_compatible(&self) -> bool {
        self.status == Compatibility::Compatible
    }
}

/// Formula true at `w_m` of an assignment that already holds more
/// occurrences of `atom` than `F_Ω` allows.
pub fn incompatibility_witness(spec: &ValidatedSpec, atom: AtomId, observed: usize) -> Formula {
    let q = Probability::ratio(observed.min(spec.n()), spec.n());
    let p = Formula::atom(spec.atom(atom).as_str());
    Formula::modal(Op::Circle, Comparator::Geq, q.clone(), p.clone())
        .and(Formula::modal(Op::Star, Comparator::Geq, q, p).not())
}

/// Verdict from the count bounds of the first `m` observed outcomes.
pub(crate) fn verdict_from_counts(spec: &ValidatedSpec, m: usize, seen: &[usize]) -> CompatibilityVerdict {
    let n = spec.n();
    let mut bounds = Vec::with_capacity(spec.num_atoms());
    let mut violation = None;
    for id in spec.ids() {
        let (l, r) = (seen[id.index()], spec.target_count(id));
        let atom = spec.atom(id).to_string();
        if violation.is_none() && (l > r || r - l > n - m) {
            violation = Some(Violation {
                atom: atom.clone(),
                observed: l,
                target: r,
                kind: if l > r { "exceeded" } else { "unreachable" },
                formula: incompatibility_witness(spec, id, l).to_string(),
            });
        }
        bounds.push(AtomBound { atom, observed: l, target: r });
    }
    // An unreachable bound always comes with an exceeded one; report that.
    if let Some(v) = &violation {
        if v.kind == "unreachable" {
            if let Some(id) = spec.ids().find(|&id| seen[id.index()] > spec.target_count(id)) {
                let l = seen[id.index()];
                violation = Some(Violation {
                    atom: spec.atom(id).to_string(),
                    observed: l,
                    target: spec.target_count(id),
                    kind: "exceeded",
                    formula: incompatibility_witness(spec, id, l).to_string(),
                });
            }
        }
    }
    CompatibilityVerdict {
        status: if violation.is_some() { Compatibility::Incompatible } else { Compatibility::Compatible },
        step: m,
        bounds,
        violation,
    }
}

/// Whether some member of `F_Ω` extends the first `m` observed outcomes.
///
/// ```
/// use ltlf::{analysis::check_compatibility, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Tail,Tail,Tail").unwrap();
/// assert!(check_compatibility(&model, 2).unwrap().is_compatible());
/// let v = check_compatibility(&model, 3).unwrap();
/// assert_eq!(v.violation.unwrap().formula, "circ[>=3/4] Tail & !star[>=3/4] Tail");
/// ```
pub fn check_compatibility(model: &Model, m: usize) -> Result<CompatibilityVerdict, AnalysisError> {
    check_observed(model, m)?;
    let spec = model.spec();
    Ok(verdict_from_counts(spec, m, &spec.counts_of(model.observed().prefix(m))))
}

/// Remaining occurrences per atom after `seen`, or `None` if some atom is over.
fn remaining(spec: &ValidatedSpec, seen: &[usize]) -> Option<Vec<u64>> {
    spec.ids()
        .map(|id| spec.target_count(id).checked_sub(seen[id.index()]).map(|r| r as u64))
        .collect()
}

pub(crate) fn uniform_completion(spec: &ValidatedSpec, seen: &[usize]) -> Probability {
    let m: usize = seen.iter().sum();
    let Some(rest) = remaining(spec, seen) else {
        return Probability::zero();
    };
    let k = BigUint::from(spec.num_atoms());
    let total: BigUint = Pow::pow(&k, (spec.n() - m) as u32);
    Probability::new(multinomial(&rest), total).expect("completions are a subset of all continuations")
}

pub(crate) fn weighted_completion(spec: &ValidatedSpec, weights: &[Probability], seen: &[usize]) -> Probability {
    let Some(rest) = remaining(spec, seen) else {
        return Probability::zero();
    };
    let mut acc = Ratio::from_integer(multinomial(&rest));
    for (w, &r) in weights.iter().zip(&rest) {
        acc *= Pow::pow(w.as_ratio(), r as u32);
    }
    Probability::from_ratio(acc).expect("a probability")
}

/// Probability that a uniformly random continuation of the first `m`
/// observed outcomes lands in `F_Ω`. Weights, if any, are ignored.
///
/// ```
/// use ltlf::{analysis::completion_probability, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Tail,Tail").unwrap();
/// assert_eq!(completion_probability(&model, 0).unwrap().to_string(), "3/8");
/// assert_eq!(completion_probability(&model, 2).unwrap().to_string(), "1/4");
/// ```
pub fn completion_probability(model: &Model, m: usize) -> Result<Probability, AnalysisError> {
    check_observed(model, m)?;
    let spec = model.spec();
    Ok(uniform_completion(spec, &spec.counts_of(model.observed().prefix(m))))
}

/// As [`completion_probability`], with independent trials drawn from the
/// model's outcome weights.
pub fn completion_probability_weighted(model: &Model, m: usize) -> Result<Probability, AnalysisError> {
    check_observed(model, m)?;
    let weights = model.weights().ok_or(AnalysisError::MissingWeights)?;
    let spec = model.spec();
    Ok(weighted_completion(spec, weights.values(), &spec.counts_of(model.observed().prefix(m))))
}

/// The weighted probability when the model has weights, the uniform one otherwise.
pub fn completion_probability_auto(model: &Model, m: usize) -> Result<Probability, AnalysisError> {
    match model.weights() {
        Some(_) => completion_probability_weighted(model, m),
        None => completion_probability(model, m),
    }
}

/// Odds of each atom at `w_{m+1}`, given that the series ends in `F_Ω`.
///
/// ```
/// use ltlf::{analysis::next_outcome_distribution, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "Tail").unwrap();
/// assert_eq!(next_outcome_distribution(&model, 1).unwrap().to_string(), "Head:2/3 Tail:1/3");
/// ```
pub fn next_outcome_distribution(model: &Model, m: usize) -> Result<AtomMap, AnalysisError> {
    let spec = model.spec();
    let mut out = Vec::with_capacity(spec.num_atoms());
    for id in spec.ids() {
        let name = spec.atom(id).as_str();
        let q = next_value_from_prefix(model, m, name).map_err(|e| match e {
            EvalError::NextBeyondHorizon => AnalysisError::NextBeyondHorizon,
            EvalError::IncompatiblePrefix { world } => AnalysisError::IncompatiblePrefix { world },
            EvalError::UnobservedWorld { observed } => AnalysisError::WorldBeyondObservation { world: m, observed },
            other => AnalysisError::Eval(other),
        })?;
        out.push((name.to_string(), q));
    }
    Ok(AtomMap(out))
}

/// `P_{m+1}` from `P_m` and the next value `q` of the atom observed at
/// `w_{m+1}`: `P_m · q · k` for `k` equiprobable outcomes, `P_m · q / P(p)`
/// under weights.
///
/// ```
/// use ltlf::{analysis::step_probability_update, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
/// let model = Model::observe(spec, "").unwrap();
/// let p = step_probability_update(&"3/8".parse().unwrap(), &"2/3".parse().unwrap(), &model, "Tail").unwrap();
/// assert_eq!(p.to_string(), "1/2");
/// ```
pub fn step_probability_update(
    p_m: &Probability,
    q_next: &Probability,
    model: &Model,
    observed_atom: &str,
) -> Result<Probability, AnalysisError> {
    let spec = model.spec();
    let id = spec.atom_id(observed_atom).ok_or_else(|| AnalysisError::UnknownAtom(observed_atom.to_string()))?;
    recurrence(spec, model.weights(), p_m, q_next, id)
}

pub(crate) fn recurrence(
    spec: &ValidatedSpec,
    weights: Option<&OutcomeDistribution>,
    p_m: &Probability,
    q_next: &Probability,
    id: AtomId,
) -> Result<Probability, AnalysisError> {
    let product = p_m.as_ratio() * q_next.as_ratio();
    let next = match weights {
        None => product * Ratio::from_integer(BigUint::from(spec.num_atoms())),
        Some(w) => {
            let w = w.get(id);
            if w.is_zero() {
                return Err(AnalysisError::ZeroWeight(spec.atom(id).to_string()));
            }
            product / w.as_ratio()
        }
    };
    Probability::from_ratio(next).map_err(|e| AnalysisError::InconsistentUpdate(e.to_string()))
}

/// Worlds `m` at which every `m·μ(p)` is an integer: the multiples of the
/// least common denominator of the non-zero target frequencies.
///
/// ```
/// use ltlf::{analysis::realization_points, Model, ValidatedSpec};
///
/// let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 1)]).unwrap();
/// let model = Model::observe(spec, "").unwrap();
/// assert_eq!(realization_points(&model).into_iter().collect::<Vec<_>>(), [3]);
/// ```
pub fn realization_points(model: &Model) -> BTreeSet<usize> {
    let l = model.spec().lcd();
    (1..=model.n()).filter(|m| m % l == 0).collect()
}

/// `bbox[>=1/L] (box[>=μ(p_1)] p_1 & ... & box[>=μ(p_k)] p_k)`, the formula
/// whose truth peaks at the realization points.
pub fn realization_formula(spec: &ValidatedSpec) -> Formula {
    let parts = spec
        .ids()
        .map(|id| Formula::modal(Op::WhiteBox, Comparator::Geq, spec.mu(id).clone(), Formula::atom(spec.atom(id).as_str())));
    let body = Formula::all(parts).expect("at least one atom");
    Formula::modal(Op::BlackBox, Comparator::Geq, Probability::ratio(1, spec.lcd()), body)
}

/// Worlds where [`realization_formula`] holds while failing at the
/// neighbouring worlds that exist.
pub fn peak_points(model: &Model) -> Result<BTreeSet<usize>, AnalysisError> {
    let ev = Evaluator::new(model, Default::default());
    let f = realization_formula(model.spec());
    let n = model.n();
    let mut holds = vec![false; n + 2];
    let row = 0;
    for (m, slot) in holds.iter_mut().enumerate().take(n + 1).skip(1) {
        *slot = ev.eval_row(row, m, &f)?;
    }
    Ok((1..=n).filter(|&m| holds[m] && !holds[m - 1] && !holds[m + 1]).collect())
}

/// Direct check: some member of `F_Ω` meets every `(φ, cmp, q)` constraint
/// on its first `m` worlds at once.
pub fn joint_frequency_exists(
    model: &Model,
    m: usize,
    constraints: &[(Formula, Comparator, Probability)],
) -> Result<bool, AnalysisError> {
    if m == 0 || m > model.n() {
        return Err(AnalysisError::WorldOutOfRange { world: m, min: 1, n: model.n() });
    }
    let ev = Evaluator::new(model, Default::default());
    let tables = constraints.iter().map(|(f, _, _)| ev.table(f)).collect::<Result<Vec<_>, _>>()?;
    'member: for r in 0..ev.members().len() {
        for ((_, cmp, q), t) in constraints.iter().zip(&tables) {
            let mut count = 0;
            for l in 1..=m {
                count += ev.cell_result(t.cell(r, l))? as usize;
            }
            let ratio = Probability::ratio(count, m);
            if !cmp.holds(ratio.cmp(q)) {
                continue 'member;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// The formula encoding of [`joint_frequency_exists`]:
/// `circ[=m/n] ⊤ & bbox[>=1/m] (circ[=m/n] ⊤ & box[cmp q_1] φ_1 & ...)`.
/// The first conjunct pins the world, so the black box can only use `w_m`.
pub fn joint_frequency_formula(
    spec: &ValidatedSpec,
    m: usize,
    constraints: &[(Formula, Comparator, Probability)],
) -> Formula {
    let p = Formula::atom(spec.atom(AtomId(0)).as_str());
    let here = Formula::modal(Op::Circle, Comparator::Eq, Probability::ratio(m, spec.n()), p.tautology_over());
    let boxes = constraints.iter().map(|(f, c, q)| Formula::modal(Op::WhiteBox, *c, q.clone(), f.clone()));
    let body = Formula::all(std::iter::once(here.clone()).chain(boxes)).expect("non-empty");
    here.and(Formula::modal(Op::BlackBox, Comparator::Geq, Probability::ratio(1, m), body))
}

/// [`joint_frequency_exists`] computed through [`joint_frequency_formula`].
/// The formula is evaluated against a member row, since it never depends
/// on the observation.
pub fn joint_frequency_by_formula(
    model: &Model,
    m: usize,
    constraints: &[(Formula, Comparator, Probability)],
) -> Result<bool, AnalysisError> {
    if m == 0 || m > model.n() {
        return Err(AnalysisError::WorldOutOfRange { world: m, min: 1, n: model.n() });
    }
    let ev = Evaluator::new(model, Default::default());
    let f = joint_frequency_formula(model.spec(), m, constraints);
    Ok(ev.eval_row(0, m, &f)?)
}

/// Enumerates every continuation of the observed `m`-prefix, inside
/// `F_Ω` or not, and sums the probability of those that land in it.
/// Exponential; meant as an oracle for small models.
pub fn completion_by_enumeration(model: &Model, m: usize, weighted: bool) -> Result<Probability, AnalysisError> {
    check_observed(model, m)?;
    let spec = model.spec();
    let k = spec.num_atoms();
    let weights: Vec<Ratio<BigUint>> = match (weighted, model.weights()) {
        (true, Some(w)) => w.values().iter().map(|p| p.as_ratio().clone()).collect(),
        (true, None) => return Err(AnalysisError::MissingWeights),
        (false, _) => vec![Ratio::new(BigUint::one(), BigUint::from(k)); k],
    };
    let mut word: Vec<AtomId> = model.observed().prefix(m).to_vec();
    let mut total = Ratio::from_integer(BigUint::from(0u32));
    fn walk(
        spec: &ValidatedSpec,
        weights: &[Ratio<BigUint>],
        word: &mut Vec<AtomId>,
        weight: Ratio<BigUint>,
        total: &mut Ratio<BigUint>,
    ) {
        if word.len() == spec.n() {
            if spec.is_member(word) {
                *total += weight;
            }
            return;
        }
        for id in spec.ids() {
            word.push(id);
            walk(spec, weights, word, &weight * &weights[id.index()], total);
            word.pop();
        }
    }
    walk(spec, &weights, &mut word, Ratio::from_integer(BigUint::one()), &mut total);
    Ok(Probability::from_ratio(total).expect("a probability"))
}

#[cfg(test)]
mod tests;
