//! Streaming monitor: outcomes arrive one at a time, and each step reports
//! frequencies, the compatibility verdict, the completion probability and
//! the odds of the next outcome.
//!
//! ```
//! use ltlf::monitor::MonitorState;
//! use ltlf::ValidatedSpec;
//!
//! let spec = ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 2)]).unwrap();
//! let mut mon = MonitorState::new(spec, None);
//! assert_eq!(mon.completion_probability().to_string(), "3/8");
//! mon.ingest("Tail").unwrap();
//! let report = mon.ingest("Tail").unwrap();
//! assert_eq!(report.completion_prob.to_string(), "1/4");
//! assert_eq!(report.next_dist.unwrap().to_string(), "Head:1 Tail:0");
//! ```

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    check_compatibility, completion_probability_auto, recurrence, uniform_completion, verdict_from_counts,
    weighted_completion, AnalysisError, AtomMap, CompatibilityVerdict,
};
use crate::model::{AtomId, Model, Observation, OutcomeDistribution, ValidatedSpec};
use crate::prob::Probability;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("the series is complete: all {n} outcomes were already ingested")]
    SeriesComplete { n: usize },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("the series is incomplete: {step} of {n} outcomes ingested")]
    SeriesIncomplete { step: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorConfig {
    /// Recompute the completion probability from its closed form after
    /// every step and panic on disagreement with the recurrence.
    pub verify: bool,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { verify: true }
    }
}

/// Report for one ingested outcome. Field names are stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub outcome: String,
    pub observed_freq: AtomMap,
    pub verdict: CompatibilityVerdict,
    pub completion_prob: Probability,
    /// Absent at the last world and once the prefix is incompatible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_dist: Option<AtomMap>,
    pub first_violation: Option<usize>,
}

/// Report for a complete series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryReport {
    pub steps: usize,
    pub final_freq: AtomMap,
    pub member: bool,
    pub completion_prob: Probability,
    pub first_violation: Option<usize>,
}

/// Quantities the monitor keeps, in a form that can be compared with a
/// recomputation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub step: usize,
    pub counts: Vec<usize>,
    pub compatible: bool,
    pub completion_prob: Probability,
}

/// Monitor for one series. Single owner; [`MonitorState::ingest`] is the
/// only mutation.
#[derive(Debug, Clone)]
pub struct MonitorState {
    spec: ValidatedSpec,
    weights: Option<OutcomeDistribution>,
    config: MonitorConfig,
    prefix: Vec<AtomId>,
    counts: Vec<usize>,
    prob: Probability,
    first_violation: Option<usize>,
}

impl MonitorState {
    pub fn new(spec: ValidatedSpec, weights: Option<OutcomeDistribution>) -> Self {
        Self::with_config(spec, weights, MonitorConfig::default())
    }

    pub fn with_config(spec: ValidatedSpec, weights: Option<OutcomeDistribution>, config: MonitorConfig) -> Self {
        let counts = vec![0; spec.num_atoms()];
        let prob = closed_form(&spec, weights.as_ref(), &counts);
        MonitorState { spec, weights, config, prefix: Vec::new(), counts, prob, first_violation: None }
    }

    pub fn spec(&self) -> &ValidatedSpec {
        &self.spec
    }

    pub fn step(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[AtomId] {
        &self.prefix
    }

    pub fn completion_probability(&self) -> &Probability {
        &self.prob
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.first_violation
    }

    fn compatible_now(&self) -> bool {
        self.spec.ids().all(|id| self.counts[id.index()] <= self.spec.target_count(id))
    }

    /// Odds of each atom at the next world: remaining count over remaining
    /// worlds, which is the share of compatible members continuing with it.
    fn next_values(&self) -> Option<Vec<Probability>> {
        let m = self.step();
        let n = self.spec.n();
        if m >= n || !self.compatible_now() {
            return None;
        }
        Some(
            self.spec
                .ids()
                .map(|id| Probability::ratio(self.spec.target_count(id) - self.counts[id.index()], n - m))
                .collect(),
        )
    }

    fn atom_map(&self, values: impl IntoIterator<Item = Probability>) -> AtomMap {
        AtomMap(self.spec.atoms().iter().map(|a| a.to_string()).zip(values).collect())
    }

    /// Consumes the outcome at `w_{m+1}`.
    pub fn ingest(&mut self, outcome: &str) -> Result<StepReport, MonitorError> {
        let n = self.spec.n();
        if self.step() == n {
            return Err(MonitorError::SeriesComplete { n });
        }
        let id = self.spec.atom_id(outcome).ok_or_else(|| MonitorError::UnknownAtom(outcome.to_string()))?;
        let before = self.next_values();
        self.prefix.push(id);
        self.counts[id.index()] += 1;
        let m = self.step();

        self.prob = match &before {
            None => Probability::zero(),
            Some(q) => match recurrence(&self.spec, self.weights.as_ref(), &self.prob, &q[id.index()], id) {
                Ok(p) => p,
                Err(AnalysisError::ZeroWeight(_)) => closed_form(&self.spec, self.weights.as_ref(), &self.counts),
                Err(e) => panic!("completion recurrence failed: {e}"),
            },
        };
        if self.config.verify {
            let direct = closed_form(&self.spec, self.weights.as_ref(), &self.counts);
            assert_eq!(self.prob, direct, "recurrence and closed form disagree at step {m}");
        }

        let verdict = verdict_from_counts(&self.spec, m, &self.counts);
        if !verdict.is_compatible() && self.first_violation.is_none() {
            self.first_violation = Some(m);
        }
        let freq = self.counts.iter().map(|&c| Probability::ratio(c, m)).collect::<Vec<_>>();
        Ok(StepReport {
            step: m,
            outcome: outcome.to_string(),
            observed_freq: self.atom_map(freq),
            verdict,
            completion_prob: self.prob.clone(),
            next_dist: self.next_values().map(|v| self.atom_map(v)),
            first_violation: self.first_violation,
        })
    }

    pub fn finalize(&self) -> Result<SummaryReport, MonitorError> {
        let n = self.spec.n();
        if self.step() < n {
            return Err(MonitorError::SeriesIncomplete { step: self.step(), n });
        }
        let freq = self.counts.iter().map(|&c| Probability::ratio(c, n)).collect::<Vec<_>>();
        Ok(SummaryReport {
            steps: n,
            final_freq: self.atom_map(freq),
            member: self.spec.is_member(&self.prefix),
            completion_prob: self.prob.clone(),
            first_violation: self.first_violation,
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            step: self.step(),
            counts: self.counts.clone(),
            compatible: self.first_violation.is_none(),
            completion_prob: self.prob.clone(),
        }
    }

    /// Rebuilds the snapshot from the prefix alone, through the analysis
    /// functions on a fresh model.
    pub fn from_scratch(&self) -> Snapshot {
        let model = Model::new(self.spec.clone(), Observation::new(self.prefix.clone()), self.weights.clone())
            .expect("the prefix fits the series");
        let m = self.step();
        let mut counts = vec![0; self.spec.num_atoms()];
        for a in &self.prefix {
            counts[a.index()] += 1;
        }
        let compatible = check_compatibility(&model, m).expect("observed prefix").is_compatible();
        Snapshot {
            step: m,
            counts,
            compatible,
            completion_prob: completion_probability_auto(&model, m).expect("observed prefix"),
        }
    }
}

fn closed_form(spec: &ValidatedSpec, weights: Option<&OutcomeDistribution>, counts: &[usize]) -> Probability {
    match weights {
        Some(w) => weighted_completion(spec, w.values(), counts),
        None => uniform_completion(spec, counts),
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(out: &mut impl Write, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, record).map_err(io::Error::other)?;
    out.write_all(b"\n")
}
