//! Seeded random models and formulas for property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Comparator, Formula, Op};
use crate::model::{AtomId, Model, Observation, OutcomeDistribution, ValidatedSpec};
use crate::prob::Probability;

const ATOM_NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Bounds for [`random_model`].
#[derive(Debug, Clone, Copy)]
pub struct FamilyBounds {
    pub max_n: usize,
    pub max_atoms: usize,
    /// Probability of attaching random outcome weights.
    pub weighted: f64,
}

impl Default for FamilyBounds {
    fn default() -> Self {
        FamilyBounds { max_n: 6, max_atoms: 3, weighted: 0.5 }
    }
}

/// A random specification, observation and optional weights.
///
/// The observation is a random member of `F_Ω`, an arbitrary word, or a
/// prefix of either; zero target counts and zero weights both occur.
pub fn random_model(rng: &mut impl Rng, bounds: FamilyBounds) -> Model {
    let k = rng.random_range(1..=bounds.max_atoms.min(ATOM_NAMES.len()));
    let n = rng.random_range(1..=bounds.max_n);
    let mut counts = vec![0usize; k];
    for _ in 0..n {
        counts[rng.random_range(0..k)] += 1;
    }
    let pairs: Vec<(&str, usize)> = ATOM_NAMES[..k].iter().copied().zip(counts.iter().copied()).collect();
    let spec = ValidatedSpec::from_counts(&pairs).expect("counts sum to n");

    let mut word: Vec<AtomId> = if rng.random_bool(0.5) {
        let mut w: Vec<AtomId> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat(AtomId(i as u32)).take(c))
            .collect();
        w.shuffle(rng);
        w
    } else {
        (0..n).map(|_| AtomId(rng.random_range(0..k) as u32)).collect()
    };
    if rng.random_bool(0.2) {
        word.truncate(rng.random_range(0..=n));
    }

    let weights = rng.random_bool(bounds.weighted).then(|| random_weights(rng, &spec));
    Model::new(spec, Observation::new(word), weights).expect("well-formed model")
}

fn random_weights(rng: &mut impl Rng, spec: &ValidatedSpec) -> OutcomeDistribution {
    let k = spec.num_atoms();
    let mut raw: Vec<usize> = (0..k).map(|_| rng.random_range(0..4)).collect();
    if raw.iter().all(|&r| r == 0) {
        raw[rng.random_range(0..k)] = 1;
    }
    let total: usize = raw.iter().sum();
    OutcomeDistribution::new(
        spec,
        spec.atoms().iter().zip(&raw).map(|(a, &r)| (a.as_str(), Probability::ratio(r, total))),
    )
    .expect("weights sum to one")
}

/// `count` models from one seed; the same seed gives the same family.
pub fn random_family(seed: u64, count: usize, bounds: FamilyBounds) -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng, bounds)).collect()
}

/// A random formula over the atoms of `spec`, at most `depth` operators
/// deep, with indices drawn from small denominators.
pub fn random_formula(rng: &mut impl Rng, spec: &ValidatedSpec, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        let id = rng.random_range(0..spec.num_atoms());
        return Formula::atom(spec.atoms()[id].as_str());
    }
    match rng.random_range(0..8) {
        0 => random_formula(rng, spec, depth - 1).not(),
        1 => random_formula(rng, spec, depth - 1).and(random_formula(rng, spec, depth - 1)),
        2 => random_formula(rng, spec, depth - 1).or(random_formula(rng, spec, depth - 1)),
        _ => {
            let op = match rng.random_range(0..6) {
                0 => Op::WhiteBox,
                1 => Op::BlackBox,
                2 => Op::Circle,
                3 => Op::Star,
                4 => Op::NEXT,
                _ => Op::next_within(2).expect("positive"),
            };
            let cmp = Comparator::ALL[rng.random_range(0..Comparator::ALL.len())];
            let den = rng.random_range(1..=spec.n().max(2));
            let q = Probability::ratio(rng.random_range(0..=den), den);
            Formula::modal(op, cmp, q, random_formula(rng, spec, depth - 1))
        }
    }
}
