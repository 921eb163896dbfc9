//! Formula syntax trees, their concrete syntax, and rewrites.
//!
//! Concrete syntax:
//!
//! ```text
//! formula  ::= disj
//! disj     ::= conj { "|" conj }
//! conj     ::= unary { "&" unary }
//! unary    ::= "!" unary | modal unary | "(" formula ")" | atom
//! modal    ::= op "[" cmp q "]"
//! op       ::= "box" | "bbox" | "circ" | "star" | "next" [ "^" int ]
//! cmp      ::= ">=" | "<" | "<=" | "=" | ">" | "max"
//! q        ::= int [ "/" int ]
//! atom     ::= [A-Za-z_][A-Za-z0-9_]*   (other than an op keyword)
//! ```
//!
//! `&` binds tighter than `|`; both associate to the left. Prefix operators
//! bind tightest, so `box[>=1/2] a & b` is `(box[>=1/2] a) & b`.

mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroU32;

use crate::prob::Probability;

pub use parse::{parse, ParseError};

/// How an operator's value is compared with its index.
///
/// `Max` asks that the index be the greatest one making the `>=` form true,
/// that is, the operator's value equals the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Geq,
    Lt,
    Leq,
    Eq,
    Gt,
    Max,
}

impl Comparator {
    pub const ALL: [Comparator; 6] =
        [Comparator::Geq, Comparator::Lt, Comparator::Leq, Comparator::Eq, Comparator::Gt, Comparator::Max];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Geq => ">=",
            Comparator::Lt => "<",
            Comparator::Leq => "<=",
            Comparator::Eq => "=",
            Comparator::Gt => ">",
            Comparator::Max => "max",
        }
    }

    /// Applies the comparator to `value ⋈ index` given their ordering.
    /// `Max` behaves like `Eq` on a single value.
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Geq => ord != Less,
            Comparator::Lt => ord == Less,
            Comparator::Leq => ord != Greater,
            Comparator::Eq | Comparator::Max => ord == Equal,
            Comparator::Gt => ord == Greater,
        }
    }
}

/// The five modal operators. `Next` carries its look-ahead horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// Observed frequency over the worlds seen so far.
    WhiteBox,
    /// Some member of `F_Ω` reaches the frequency over the worlds seen so far.
    BlackBox,
    /// Observed count over the worlds seen so far, relative to the whole series.
    Circle,
    /// Share of compatible members satisfying the argument within the horizon.
    Next(NonZeroU32),
    /// Some world where the share of members satisfying the argument is reached.
    Star,
}

impl Op {
    pub const NEXT: Op = Op::Next(NonZeroU32::MIN);

    pub fn next_within(steps: u32) -> Option<Op> {
        NonZeroU32::new(steps).map(Op::Next)
    }

    pub fn keyword(self) -> String {
        match self {
            Op::WhiteBox => "box".into(),
            Op::BlackBox => "bbox".into(),
            Op::Circle => "circ".into(),
            Op::Next(i) if i.get() == 1 => "next".into(),
            Op::Next(i) => format!("next^{i}"),
            Op::Star => "star".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Modal { op: Op, cmp: Comparator, q: Probability, arg: Box<Formula> },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn modal(op: Op, cmp: Comparator, q: Probability, arg: Formula) -> Formula {
        Formula::Modal { op, cmp, q, arg: Box::new(arg) }
    }

    /// `φ ∨ ¬φ`.
    pub fn tautology_over(self) -> Formula {
        let neg = self.clone().not();
        self.or(neg)
    }

    /// Conjunction of a non-empty list, associated to the left.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Disjunction of a non-empty list, associated to the left.
    pub fn any(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_propositional(),
            Formula::And(f, g) | Formula::Or(f, g) => f.is_propositional() && g.is_propositional(),
            Formula::Modal { .. } => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Modal { arg: f, .. } => 1 + f.depth(),
            Formula::And(f, g) | Formula::Or(f, g) => 1 + f.depth().max(g.depth()),
        }
    }

    /// Atom names occurring in the formula.
    ///
    /// ```
    /// let f = ltlf::formula::parse("box[>=1/2] (Head | !Tail)").unwrap();
    /// let atoms: Vec<String> = f.atoms().into_iter().collect();
    /// assert_eq!(atoms, ["Head", "Tail"]);
    /// ```
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) | Formula::Modal { arg: f, .. } => f.collect_atoms(out),
            Formula::And(f, g) | Formula::Or(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
        }
    }

    /// Rewrites every `next^i[⋈q] φ` with `i > 1` into
    /// `next[⋈q] (φ | next[>=1] (φ | ... next[>=1] φ))` with `i - 1` inner
    /// `next[>=1]`.
    ///
    /// ```
    /// use ltlf::formula::parse;
    ///
    /// let f = parse("next^3[>=1/2] Head").unwrap();
    /// assert_eq!(
    ///     f.expand_indexed_next().to_string(),
    ///     "next[>=1/2] (Head | next[>=1] (Head | next[>=1] Head))"
    /// );
    /// ```
    pub fn expand_indexed_next(&self) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::Not(f) => f.expand_indexed_next().not(),
            Formula::And(f, g) => f.expand_indexed_next().and(g.expand_indexed_next()),
            Formula::Or(f, g) => f.expand_indexed_next().or(g.expand_indexed_next()),
            Formula::Modal { op: Op::Next(i), cmp, q, arg } if i.get() > 1 => {
                let inner = arg.expand_indexed_next();
                let mut chain = inner.clone();
                for _ in 1..i.get() {
                    chain = inner.clone().or(Formula::modal(Op::NEXT, Comparator::Geq, Probability::one(), chain));
                }
                Formula::modal(Op::NEXT, *cmp, q.clone(), chain)
            }
            Formula::Modal { op, cmp, q, arg } => Formula::modal(*op, *cmp, q.clone(), arg.expand_indexed_next()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(g) => {
                f.write_str("!")?;
                child(f, g, 2)
            }
            Formula::And(g, h) => {
                child(f, g, 1)?;
                f.write_str(" & ")?;
                child(f, h, 2)
            }
            Formula::Or(g, h) => {
                child(f, g, 0)?;
                f.write_str(" | ")?;
                child(f, h, 1)
            }
            Formula::Modal { op, cmp, q, arg } => {
                let sep = if *cmp == Comparator::Max { " " } else { "" };
                write!(f, "{}[{}{sep}{q}] ", op.keyword(), cmp.symbol())?;
                child(f, arg, 2)
            }
        }
    }
}
