//! The line-oriented model file format.
//!
//! ```text
//! # fair coin, four tosses
//! n = 4
//! freq H = 1/2
//! freq T = 1/2
//! weight H = 2/3
//! weight T = 1/3
//! obs = H,H,T,H
//! ```
//!
//! Atoms are declared by their `freq` lines, in order. `weight` lines are
//! optional but must cover every atom when present. The `obs` line may be
//! empty or absent. Blank lines and `#` comments are ignored.

use std::fmt;

use super::{FrequencySpec, Model, ModelError, Observation, OutcomeDistribution, SpecError};
use crate::prob::{Probability, ProbabilityError};

/// A parsed model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileError {
    /// 1-based line number, or 0 for whole-file problems.
    pub line: usize,
    pub kind: FileErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FileErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("missing `n = <int>` line")]
    MissingLength,
    #[error("`{0}` given twice")]
    Duplicate(String),
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "line {}: {}", self.line, self.kind)
        }
    }
}

impl std::error::Error for FileError {}

fn at(line: usize, kind: impl Into<FileErrorKind>) -> FileError {
    FileError { line, kind: kind.into() }
}

/// Parses the text of a model file.
///
/// ```
/// let model = ltlf::parse_model("n = 2\nfreq H = 1/2\nfreq T = 1/2\nobs = H").unwrap();
/// assert_eq!(model.n(), 2);
/// assert_eq!(model.observed().len(), 1);
/// ```
pub fn parse_model(text: &str) -> Result<Model, FileError> {
    let mut n: Option<(usize, usize)> = None;
    let mut freqs: Vec<(usize, String, Probability)> = Vec::new();
    let mut weights: Vec<(usize, String, Probability)> = Vec::new();
    let mut obs: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = line.split_once('=') else {
            return Err(at(line_no, FileErrorKind::Syntax(format!("expected `=` in `{line}`"))));
        };
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let mut words = lhs.split_whitespace();
        match (words.next(), words.next(), words.next()) {
            (Some("n"), None, None) => {
                if n.is_some() {
                    return Err(at(line_no, FileErrorKind::Duplicate("n".into())));
                }
                let value = rhs.parse::<usize>().map_err(|_| {
                    at(line_no, FileErrorKind::Syntax(format!("`{rhs}` is not a length")))
                })?;
                n = Some((line_no, value));
            }
            (Some(kw @ ("freq" | "weight")), Some(atom), None) => {
                let p: Probability = rhs.parse().map_err(|e| at(line_no, FileErrorKind::Probability(e)))?;
                let list = if kw == "freq" { &mut freqs } else { &mut weights };
                if list.iter().any(|(_, a, _)| a == atom) {
                    return Err(at(line_no, FileErrorKind::Duplicate(format!("{kw} {atom}"))));
                }
                list.push((line_no, atom.to_string(), p));
            }
            (Some("obs"), None, None) => {
                if obs.is_some() {
                    return Err(at(line_no, FileErrorKind::Duplicate("obs".into())));
                }
                obs = Some((line_no, rhs.to_string()));
            }
            _ => {
                return Err(at(line_no, FileErrorKind::Syntax(format!("unrecognised line `{line}`"))));
            }
        }
    }

    let (n_line, n) = n.ok_or(at(0, FileErrorKind::MissingLength))?;
    let first_freq = freqs.first().map_or(n_line, |f| f.0);
    let spec = FrequencySpec::new(n, freqs.iter().map(|(_, a, p)| (a.clone(), p.clone())))
        .and_then(FrequencySpec::validate)
        .map_err(|e| at(first_freq, e))?;
    let weights = if weights.is_empty() {
        None
    } else {
        let line = weights[0].0;
        Some(
            OutcomeDistribution::new(&spec, weights.iter().map(|(_, a, p)| (a.as_str(), p.clone())))
                .map_err(|e| at(line, e))?,
        )
    };
    let obs_line = obs.as_ref().map_or(0, |o| o.0);
    let observed = match obs {
        None => Observation::default(),
        Some((line, word)) => Observation::new(spec.parse_word(&word).map_err(|e| at(line, e))?),
    };
    Model::new(spec, observed, weights).map_err(|e| at(obs_line, e))
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        parse_model(text).map(|model| ModelFile { model })
    }
}

impl fmt::Display for ModelFile {
    /// Writes the model back in file syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = self.model.spec();
        writeln!(f, "n = {}", spec.n())?;
        for id in spec.ids() {
            writeln!(f, "freq {} = {}", spec.atom(id), spec.mu(id))?;
        }
        if let Some(w) = self.model.weights() {
            for id in spec.ids() {
                writeln!(f, "weight {} = {}", spec.atom(id), w.get(id))?;
            }
        }
        writeln!(f, "obs = {}", spec.render(self.model.observed().outcomes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let text = "# comment\nn = 4\nfreq H = 1/2   # trailing\nfreq T = 1/2\n\nweight H = 2/3\nweight T = 1/3\nobs = H, H ,T\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.n(), 4);
        assert_eq!(m.spec().render(m.observed().outcomes()), "H,H,T");
        assert_eq!(m.weights().unwrap().values()[0].to_string(), "2/3");
        let again = ModelFile::parse(&ModelFile { model: m.clone() }.to_string()).unwrap();
        assert_eq!(again.model, m);
    }

    #[test]
    fn empty_and_missing_obs() {
        let m = parse_model("n = 2\nfreq H = 1\nobs =").unwrap();
        assert!(m.observed().is_empty());
        let m = parse_model("n = 2\nfreq H = 1\n").unwrap();
        assert!(m.observed().is_empty());
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_model("n = 3\nfreq H = 1/2\nfreq T = 1/2").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, FileErrorKind::Spec(SpecError::NonIntegralCount { .. })));
        let e = parse_model("n = 2\nfreq H = 3/2").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, FileErrorKind::Probability(_)));
        let e = parse_model("n = 2\nfreq H = 1\nobs = H,X").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, FileErrorKind::Model(ModelError::UnknownAtom(_))));
        let e = parse_model("freq H = 1").unwrap_err();
        assert_eq!(e.kind, FileErrorKind::MissingLength);
        let e = parse_model("n = 2\nn = 2\nfreq H = 1").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_model("n = 2\nbogus\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.to_string().starts_with("line 2:"));
        let e = parse_model("n = 2\nfreq H = 1/2\nfreq T = 1/2\nweight H = 1").unwrap_err();
        assert!(matches!(e.kind, FileErrorKind::Model(ModelError::WeightCoverage(_))));
    }
}
