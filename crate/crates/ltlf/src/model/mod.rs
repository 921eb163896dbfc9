//! Frequency specifications, assignments, observations and models.
//!
//! Worlds are numbered `1..=n`. A world `w_m` sees exactly the worlds
//! `w_1..=w_m`, so the accessibility relation is never stored.

mod file;

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::prob::{multinomial, Probability};

pub use file::{parse_model, FileError, FileErrorKind, ModelFile};

/// Words that cannot name an atom because the formula syntax uses them.
pub const RESERVED_WORDS: &[&str] = &["box", "bbox", "circ", "next", "star"];

/// Name of one outcome of a trial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Atom(String);

impl Atom {
    /// Identifiers are `[A-Za-z_][A-Za-z0-9_]*`, minus [`RESERVED_WORDS`].
    pub fn new(name: impl Into<String>) -> Result<Self, SpecError> {
        let name = name.into();
        if is_identifier(&name) && !RESERVED_WORDS.contains(&name.as_str()) {
            Ok(Atom(name))
        } else {
            Err(SpecError::BadAtomName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Position of an atom in its specification's declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("`{0}` is not a valid atom name")]
    BadAtomName(String),
    #[error("atom `{0}` is declared twice")]
    DuplicateAtom(String),
    #[error("a specification needs at least one atom")]
    NoAtoms,
    #[error("series length must be positive")]
    ZeroLength,
    #[error("target frequencies sum to {0}, not 1")]
    NonUnitMass(String),
    #[error("frequency {mu} of `{atom}` times n = {n} is not an integer")]
    NonIntegralCount { atom: String, mu: Probability, n: usize },
}

/// Target frequencies over a series of `n` trials, not yet checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySpec {
    pub atoms: Vec<Atom>,
    pub mu: Vec<Probability>,
    pub n: usize,
}

impl FrequencySpec {
    pub fn new<S: Into<String>>(
        n: usize,
        pairs: impl IntoIterator<Item = (S, Probability)>,
    ) -> Result<Self, SpecError> {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut mu = Vec::new();
        for (name, p) in pairs {
            let atom = Atom::new(name)?;
            if atoms.contains(&atom) {
                return Err(SpecError::DuplicateAtom(atom.0));
            }
            atoms.push(atom);
            mu.push(p);
        }
        Ok(FrequencySpec { atoms, mu, n })
    }

    pub fn validate(self) -> Result<ValidatedSpec, SpecError> {
        if self.atoms.is_empty() {
            return Err(SpecError::NoAtoms);
        }
        if self.n == 0 {
            return Err(SpecError::ZeroLength);
        }
        let mut seen: Vec<&Atom> = Vec::new();
        for a in &self.atoms {
            if seen.contains(&a) {
                return Err(SpecError::DuplicateAtom(a.0.clone()));
            }
            seen.push(a);
        }
        let total = self
            .mu
            .iter()
            .fold(num_rational::Ratio::<BigUint>::zero(), |acc, p| acc + p.as_ratio());
        if total != num_rational::Ratio::from_integer(BigUint::from(1u32)) {
            return Err(SpecError::NonUnitMass(format!("{}/{}", total.numer(), total.denom())));
        }
        let mut counts = Vec::with_capacity(self.atoms.len());
        for (atom, p) in self.atoms.iter().zip(&self.mu) {
            let scaled = p.numer() * BigUint::from(self.n);
            let (q, r) = scaled.div_rem(p.denom());
            if !r.is_zero() {
                return Err(SpecError::NonIntegralCount {
                    atom: atom.0.clone(),
                    mu: p.clone(),
                    n: self.n,
                });
            }
            counts.push(q.to_usize().expect("count bounded by n"));
        }
        Ok(ValidatedSpec { atoms: self.atoms, mu: self.mu, n: self.n, counts })
    }
}

/// A specification whose frequencies sum to one and scale to whole counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedSpec {
    atoms: Vec<Atom>,
    mu: Vec<Probability>,
    n: usize,
    counts: Vec<usize>,
}

impl ValidatedSpec {
    /// Builds the specification whose atom `i` occurs exactly `counts[i]` times.
    ///
    /// ```
    /// let spec = ltlf::ValidatedSpec::from_counts(&[("H", 2), ("T", 2)]).unwrap();
    /// assert_eq!(spec.n(), 4);
    /// assert_eq!(spec.count_members().to_string(), "6");
    /// ```
    pub fn from_counts(counts: &[(&str, usize)]) -> Result<Self, SpecError> {
        let n: usize = counts.iter().map(|(_, c)| c).sum();
        if n == 0 {
            return Err(SpecError::ZeroLength);
        }
        FrequencySpec::new(n, counts.iter().map(|&(a, c)| (a, Probability::ratio(c, n))))?
            .validate()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atoms.iter().position(|a| a.0 == name).map(|i| AtomId(i as u32))
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    pub fn mu(&self, id: AtomId) -> &Probability {
        &self.mu[id.index()]
    }

    /// `μ(p) · n`, the number of worlds `p` must occupy in every member.
    pub fn target_count(&self, id: AtomId) -> usize {
        self.counts[id.index()]
    }

    pub fn target_counts(&self) -> &[usize] {
        &self.counts
    }

    /// `|F_Ω| = n! / Π (μ(p)·n)!`.
    pub fn count_members(&self) -> BigUint {
        let parts: Vec<u64> = self.counts.iter().map(|&c| c as u64).collect();
        multinomial(&parts)
    }

    /// All members of `F_Ω` in lexicographic order over the declared atoms.
    ///
    /// ```
    /// let spec = ltlf::ValidatedSpec::from_counts(&[("H", 1), ("T", 1)]).unwrap();
    /// let words: Vec<String> = spec.members().map(|a| spec.render(a.outcomes())).collect();
    /// assert_eq!(words, ["H,T", "T,H"]);
    /// ```
    pub fn members(&self) -> Members {
        let mut first = Vec::with_capacity(self.n);
        for (i, &c) in self.counts.iter().enumerate() {
            first.extend(std::iter::repeat(AtomId(i as u32)).take(c));
        }
        Members { next: Some(first) }
    }

    /// Least common denominator of the non-zero target frequencies.
    pub fn lcd(&self) -> usize {
        self.mu
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.denom().to_usize().expect("denominator divides n"))
            .fold(1, |acc, d| acc.lcm(&d))
    }

    /// Resolves a comma separated list of atom names.
    pub fn parse_word(&self, text: &str) -> Result<Vec<AtomId>, ModelError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(',')
            .map(|t| {
                let t = t.trim();
                self.atom_id(t).ok_or_else(|| ModelError::UnknownAtom(t.to_string()))
            })
            .collect()
    }

    pub fn assignment(&self, text: &str) -> Result<Assignment, ModelError> {
        let word = self.parse_word(text)?;
        if word.len() != self.n {
            return Err(ModelError::WrongLength { expected: self.n, found: word.len() });
        }
        Ok(Assignment(word))
    }

    pub fn render(&self, word: &[AtomId]) -> String {
        let names: Vec<&str> = word.iter().map(|&id| self.atom(id).as_str()).collect();
        names.join(",")
    }

    /// Per-atom occurrence counts of a word.
    pub fn counts_of(&self, word: &[AtomId]) -> Vec<usize> {
        let mut counts = vec![0; self.atoms.len()];
        for id in word {
            counts[id.index()] += 1;
        }
        counts
    }

    pub fn is_member(&self, word: &[AtomId]) -> bool {
        word.len() == self.n && self.counts_of(word) == self.counts
    }
}

impl fmt::Display for ValidatedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        for (a, p) in self.atoms.iter().zip(&self.mu) {
            write!(f, " {a}:{p}")?;
        }
        Ok(())
    }
}

/// Lexicographic stream over `F_Ω`, stepping by next-permutation of a multiset.
#[derive(Debug, Clone)]
pub struct Members {
    next: Option<Vec<AtomId>>,
}

impl Iterator for Members {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Assignment(current))
    }
}

fn next_permutation(v: &mut [AtomId]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A total map from worlds to atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<AtomId>);

impl Assignment {
    pub fn new(outcomes: Vec<AtomId>) -> Self {
        Assignment(outcomes)
    }

    pub fn outcomes(&self) -> &[AtomId] {
        &self.0
    }

    /// Atom at the 1-based world `w`.
    pub fn at(&self, w: usize) -> AtomId {
        self.0[w - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The known prefix of the real series.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Observation(Vec<AtomId>);

impl Observation {
    pub fn new(outcomes: Vec<AtomId>) -> Self {
        Observation(outcomes)
    }

    pub fn outcomes(&self) -> &[AtomId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, m: usize) -> &[AtomId] {
        &self.0[..m]
    }
}

/// Whether `a` agrees with `prefix` on every position the prefix covers.
pub fn extends(prefix: &[AtomId], a: &Assignment) -> bool {
    prefix.len() <= a.len() && a.0[..prefix.len()] == *prefix
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("expected {expected} outcomes, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("observation of length {found} exceeds the series length {n}")]
    ObservationTooLong { found: usize, n: usize },
    #[error("weights must cover every atom exactly once; `{0}` is missing or repeated")]
    WeightCoverage(String),
    #[error("weights sum to {0}, not 1")]
    WeightMass(String),
}

/// Independent per-trial outcome probabilities, indexed by atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDistribution(Vec<Probability>);

impl OutcomeDistribution {
    pub fn new<S: AsRef<str>>(
        spec: &ValidatedSpec,
        pairs: impl IntoIterator<Item = (S, Probability)>,
    ) -> Result<Self, ModelError> {
        let mut slots: Vec<Option<Probability>> = vec![None; spec.num_atoms()];
        for (name, p) in pairs {
            let name = name.as_ref();
            let id = spec.atom_id(name).ok_or_else(|| ModelError::UnknownAtom(name.to_string()))?;
            if slots[id.index()].replace(p).is_some() {
                return Err(ModelError::WeightCoverage(name.to_string()));
            }
        }
        let mut weights = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            weights.push(slot.ok_or_else(|| ModelError::WeightCoverage(spec.atoms[i].0.clone()))?);
        }
        let total = weights
            .iter()
            .fold(num_rational::Ratio::<BigUint>::zero(), |acc, p| acc + p.as_ratio());
        if total != num_rational::Ratio::from_integer(BigUint::from(1u32)) {
            return Err(ModelError::WeightMass(format!("{}/{}", total.numer(), total.denom())));
        }
        Ok(OutcomeDistribution(weights))
    }

    /// Every atom equally likely.
    pub fn uniform(spec: &ValidatedSpec) -> Self {
        let k = spec.num_atoms();
        OutcomeDistribution(vec![Probability::ratio(1, k); k])
    }

    pub fn get(&self, id: AtomId) -> &Probability {
        &self.0[id.index()]
    }

    pub fn values(&self) -> &[Probability] {
        &self.0
    }
}

/// A specification together with the real observation and optional weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    spec: ValidatedSpec,
    observed: Observation,
    weights: Option<OutcomeDistribution>,
}

impl Model {
    pub fn new(
        spec: ValidatedSpec,
        observed: Observation,
        weights: Option<OutcomeDistribution>,
    ) -> Result<Self, ModelError> {
        if observed.len() > spec.n {
            return Err(ModelError::ObservationTooLong { found: observed.len(), n: spec.n });
        }
        if let Some(w) = &weights {
            if w.0.len() != spec.num_atoms() {
                return Err(ModelError::WeightCoverage(String::new()));
            }
        }
        if observed.0.iter().any(|id| id.index() >= spec.num_atoms()) {
            return Err(ModelError::UnknownAtom(format!("{:?}", observed.0)));
        }
        Ok(Model { spec, observed, weights })
    }

    /// Model with the observation given as comma separated atom names.
    ///
    /// ```
    /// use ltlf::{Model, ValidatedSpec};
    ///
    /// let spec = ValidatedSpec::from_counts(&[("H", 2), ("T", 2)]).unwrap();
    /// let model = Model::observe(spec, "H,H,T").unwrap();
    /// assert_eq!(model.observed().len(), 3);
    /// ```
    pub fn observe(spec: ValidatedSpec, word: &str) -> Result<Self, ModelError> {
        let observed = Observation(spec.parse_word(word)?);
        Model::new(spec, observed, None)
    }

    pub fn with_weights(mut self, weights: OutcomeDistribution) -> Result<Self, ModelError> {
        if weights.0.len() != self.spec.num_atoms() {
            return Err(ModelError::WeightCoverage(String::new()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn spec(&self) -> &ValidatedSpec {
        &self.spec
    }

    pub fn observed(&self) -> &Observation {
        &self.observed
    }

    pub fn weights(&self) -> Option<&OutcomeDistribution> {
        self.weights.as_ref()
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} obs=[{}]", self.spec, self.spec.render(self.observed.outcomes()))?;
        if let Some(w) = &self.weights {
            f.write_str(" weights=")?;
            for (i, (a, p)) in self.spec.atoms.iter().zip(&w.0).enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}:{p}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Probability {
        s.parse().unwrap()
    }

    fn spec(n: usize, pairs: &[(&str, &str)]) -> Result<ValidatedSpec, SpecError> {
        FrequencySpec::new(n, pairs.iter().map(|&(a, p)| (a, q(p))))?.validate()
    }

    #[test]
    fn validation() {
        assert!(spec(4, &[("H", "1/2"), ("T", "1/2")]).is_ok());
        assert!(matches!(
            spec(3, &[("H", "1/2"), ("T", "1/2")]),
            Err(SpecError::NonIntegralCount { .. })
        ));
        assert!(spec(1, &[("H", "1")]).is_ok());
        assert!(matches!(spec(4, &[("H", "1/2"), ("T", "1/4")]), Err(SpecError::NonUnitMass(_))));
        assert!(matches!(spec(4, &[("H", "1/2"), ("H", "1/2")]), Err(SpecError::DuplicateAtom(_))));
        assert!(matches!(spec(0, &[("H", "1")]), Err(SpecError::ZeroLength)));
        assert!(matches!(spec(2, &[]), Err(SpecError::NoAtoms)));
        assert!(matches!(spec(2, &[("box", "1")]), Err(SpecError::BadAtomName(_))));
        assert!(matches!(spec(2, &[("9a", "1")]), Err(SpecError::BadAtomName(_))));
    }

    #[test]
    fn member_counts() {
        assert_eq!(spec(4, &[("H", "1/2"), ("T", "1/2")]).unwrap().count_members(), 6u32.into());
        assert_eq!(spec(5, &[("H", "1")]).unwrap().count_members(), 1u32.into());
        assert_eq!(spec(3, &[("H", "2/3"), ("T", "1/3")]).unwrap().count_members(), 3u32.into());
    }

    #[test]
    fn enumeration_examples() {
        let s = spec(2, &[("H", "1/2"), ("T", "1/2")]).unwrap();
        let words: Vec<_> = s.members().map(|a| s.render(a.outcomes())).collect();
        assert_eq!(words, ["H,T", "T,H"]);
        let s = spec(2, &[("H", "1")]).unwrap();
        let words: Vec<_> = s.members().map(|a| s.render(a.outcomes())).collect();
        assert_eq!(words, ["H,H"]);
        let s = spec(4, &[("H", "1/2"), ("T", "1/2")]).unwrap();
        assert_eq!(s.members().count(), 6);
    }

    #[test]
    fn extends_examples() {
        let s = ValidatedSpec::from_counts(&[("H", 2), ("T", 2)]).unwrap();
        let ht = s.assignment("H,T,T,H").unwrap();
        assert!(extends(&[], &ht));
        let th = s.assignment("T,H,H,T").unwrap();
        assert!(extends(&s.parse_word("T").unwrap(), &th));
        assert!(!extends(&s.parse_word("T,T").unwrap(), &th));
    }

    #[test]
    fn lcd() {
        assert_eq!(ValidatedSpec::from_counts(&[("H", 2), ("T", 2)]).unwrap().lcd(), 2);
        assert_eq!(ValidatedSpec::from_counts(&[("H", 2), ("T", 1)]).unwrap().lcd(), 3);
        assert_eq!(ValidatedSpec::from_counts(&[("H", 3), ("T", 0)]).unwrap().lcd(), 1);
        assert_eq!(ValidatedSpec::from_counts(&[("a", 2), ("b", 1), ("c", 3)]).unwrap().lcd(), 6);
    }

    #[test]
    fn weights_validation() {
        let s = ValidatedSpec::from_counts(&[("H", 1), ("T", 1)]).unwrap();
        assert!(OutcomeDistribution::new(&s, [("H", q("2/3")), ("T", q("1/3"))]).is_ok());
        assert!(matches!(
            OutcomeDistribution::new(&s, [("H", q("2/3"))]),
            Err(ModelError::WeightCoverage(_))
        ));
        assert!(matches!(
            OutcomeDistribution::new(&s, [("H", q("2/3")), ("T", q("2/3"))]),
            Err(ModelError::WeightMass(_))
        ));
        assert!(matches!(
            OutcomeDistribution::new(&s, [("H", q("1/2")), ("X", q("1/2"))]),
            Err(ModelError::UnknownAtom(_))
        ));
    }

    #[test]
    fn observation_bounds() {
        let s = ValidatedSpec::from_counts(&[("H", 1), ("T", 1)]).unwrap();
        assert!(matches!(Model::observe(s.clone(), "H,T,H"), Err(ModelError::ObservationTooLong { .. })));
        assert!(matches!(Model::observe(s.clone(), "H,X"), Err(ModelError::UnknownAtom(_))));
        assert!(Model::observe(s, "").unwrap().observed().is_empty());
    }

    fn arb_counts() -> impl proptest::strategy::Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0usize..5, 1..=3)
            .prop_filter("non-empty series", |v| v.iter().sum::<usize>() > 0)
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn enumeration_matches_count(counts in arb_counts()) {
            let names = ["a", "b", "c"];
            let pairs: Vec<(&str, usize)> = counts.iter().enumerate().map(|(i, &c)| (names[i], c)).collect();
            let s = ValidatedSpec::from_counts(&pairs).unwrap();
            let members: Vec<Assignment> = s.members().collect();
            prop_assert_eq!(BigUint::from(members.len()), s.count_members());
            for w in members.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for a in &members {
                prop_assert!(s.is_member(a.outcomes()));
            }
        }
    }
}
