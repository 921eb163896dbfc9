pub mod analysis;
pub mod formula;
pub mod model;
pub mod monitor;
pub mod prob;
pub mod semantics;

pub use formula::{parse, Comparator, Formula, Op};
pub use model::{
    extends, parse_model, Assignment, Atom, AtomId, FrequencySpec, Model, ModelError, Observation,
    OutcomeDistribution, SpecError, ValidatedSpec,
};
pub use prob::Probability;
pub use semantics::{Engine, EvalError, Evaluator, Selector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/probabilities.md")]
    mod probabilities {}
    #[doc = include_str!("../../../book/src/monitoring.md")]
    mod monitoring {}
    #[doc = include_str!("../../../book/src/laws.md")]
    mod laws {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
