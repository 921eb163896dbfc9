use std::cmp::Ordering;

use num_bigint::BigUint;

use super::{atomic_next_ratio, holds_at_atom, Engine, EvalError, Evaluator};
use crate::formula::{Comparator, Formula, Op};
use crate::prob::Probability;

/// Truth of a formula at one (row, world) cell.
///
/// Undefined cells order above the truth values so that combining two
/// cells with `max` keeps the undefinedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Cell {
    False = 0,
    True = 1,
    BeyondHorizon = 2,
    Unobserved = 3,
}

impl Cell {
    fn of(b: bool) -> Cell {
        if b {
            Cell::True
        } else {
            Cell::False
        }
    }

    pub fn is_defined(self) -> bool {
        self <= Cell::True
    }

    pub fn is_true(self) -> bool {
        self == Cell::True
    }
}

/// Truth values of one formula for every row and every world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    n: usize,
    cells: Vec<Cell>,
}

impl Table {
    /// Cell of `row` at the 1-based `world`.
    pub fn cell(&self, row: usize, world: usize) -> Cell {
        self.cells[row * self.n + world - 1]
    }

    fn row(&self, row: usize) -> &[Cell] {
        &self.cells[row * self.n..(row + 1) * self.n]
    }
}

/// A comparator and index, ready to test ratios against.
struct Threshold {
    cmp: Comparator,
    small: Option<(u128, u128)>,
    q: Probability,
}

impl Threshold {
    fn new(cmp: Comparator, q: &Probability) -> Self {
        let small = q.to_u64_pair().map(|(a, b)| (a as u128, b as u128));
        Threshold { cmp, small, q: q.clone() }
    }

    fn order(&self, num: u64, den: u64) -> Ordering {
        match self.small {
            Some((qn, qd)) => (num as u128 * qd).cmp(&(qn * den as u128)),
            None => self.q.cmp_ratio(&BigUint::from(num), &BigUint::from(den)).reverse(),
        }
    }

    fn test(&self, num: usize, den: usize) -> bool {
        self.cmp.holds(self.order(num as u64, den as u64))
    }

    fn test_big(&self, num: &BigUint, den: &BigUint) -> bool {
        self.cmp.holds(self.q.cmp_ratio(num, den).reverse())
    }

    /// Existential reading over a set of ratios; `Max` asks the largest
    /// ratio to equal the index. An empty set has value 0.
    fn test_any(&self, ratios: impl Iterator<Item = (usize, usize)>) -> bool {
        if self.cmp == Comparator::Max {
            let best = ratios.fold((0usize, 1usize), |(a, b), (c, d)| {
                if (c as u128 * b as u128) > (a as u128 * d as u128) {
                    (c, d)
                } else {
                    (a, b)
                }
            });
            return self.test(best.0, best.1);
        }
        let mut any = false;
        for (num, den) in ratios {
            if self.test(num, den) {
                any = true;
                break;
            }
        }
        any
    }
}

impl Evaluator<'_> {
    fn fill(&self, mut f: impl FnMut(usize, usize) -> Cell) -> Table {
        let n = self.n();
        let mut cells = Vec::with_capacity(self.rows() * n);
        for r in 0..self.rows() {
            for w in 1..=n {
                cells.push(f(r, w));
            }
        }
        Table { n, cells }
    }

    pub(super) fn build(&self, f: &Formula) -> Result<Table, EvalError> {
        let n = self.n();
        let accel = self.engine == Engine::Accelerated;
        Ok(match f {
            Formula::Atom(name) => {
                let id = self.atom(name)?;
                self.fill(|r, w| match self.word(r).get(w - 1) {
                    Some(&a) => Cell::of(a == id),
                    None => Cell::Unobserved,
                })
            }
            Formula::Not(g) => {
                let t = self.table(g)?;
                self.fill(|r, w| match t.cell(r, w) {
                    Cell::True => Cell::False,
                    Cell::False => Cell::True,
                    bad => bad,
                })
            }
            Formula::And(g, h) | Formula::Or(g, h) => {
                let (a, b) = (self.table(g)?, self.table(h)?);
                let conj = matches!(f, Formula::And(..));
                self.fill(|r, w| {
                    let (x, y) = (a.cell(r, w), b.cell(r, w));
                    if !x.is_defined() || !y.is_defined() {
                        x.max(y)
                    } else if conj {
                        Cell::of(x.is_true() && y.is_true())
                    } else {
                        Cell::of(x.is_true() || y.is_true())
                    }
                })
            }
            Formula::Modal { op, cmp, q, arg } => {
                let th = Threshold::new(*cmp, q);
                match op {
                    Op::WhiteBox | Op::Circle => {
                        let t = self.table(arg)?;
                        let white = *op == Op::WhiteBox;
                        let mut cells = Vec::with_capacity(self.rows() * n);
                        for r in 0..self.rows() {
                            let (mut count, mut bad) = (0, Cell::False);
                            for (i, &c) in t.row(r).iter().enumerate() {
                                if c.is_defined() {
                                    count += c as usize;
                                } else {
                                    bad = bad.max(c);
                                }
                                cells.push(if bad != Cell::False {
                                    bad
                                } else {
                                    Cell::of(th.test(count, if white { i + 1 } else { n }))
                                });
                            }
                        }
                        Table { n, cells }
                    }
                    Op::BlackBox => {
                        let column: Vec<Cell> = if accel && arg.is_propositional() {
                            let mut col = Vec::with_capacity(n);
                            for w in 1..=n {
                                let (lo, hi) = self.propositional_range(arg, w)?;
                                col.push(Cell::of(th.test_any((lo..=hi).map(|c| (c, w)))));
                            }
                            col
                        } else {
                            self.black_box_column(&*self.table(arg)?, &th)
                        };
                        self.fill(|_, w| column[w - 1])
                    }
                    Op::Star => {
                        let value = if accel && arg.is_propositional() {
                            let mut inside = 0;
                            let spec = self.spec();
                            for id in spec.ids() {
                                if holds_at_atom(spec, arg, id)? {
                                    inside += spec.target_count(id);
                                }
                            }
                            Cell::of(th.test(inside, n))
                        } else {
                            self.star_cell(&*self.table(arg)?, &th)
                        };
                        self.fill(|_, _| value)
                    }
                    Op::Next(steps) => {
                        let steps = steps.get() as usize;
                        let atomic = match (accel, arg.as_ref()) {
                            (true, Formula::Atom(name)) => Some(self.atom(name)?),
                            _ => None,
                        };
                        let child = match atomic {
                            Some(_) => None,
                            None => Some(self.table(arg)?),
                        };
                        self.fill(|r, w| {
                            if w + steps > n {
                                return Cell::BeyondHorizon;
                            }
                            let word = self.word(r);
                            if w > word.len() {
                                return Cell::Unobserved;
                            }
                            let prefix = &word[..w];
                            if let Some(id) = atomic {
                                return match atomic_next_ratio(self.spec(), prefix, id, steps) {
                                    Some((num, den)) => Cell::of(th.test_big(&num, &den)),
                                    None => Cell::of(th.test(0, 1)),
                                };
                            }
                            let t = child.as_ref().expect("child table");
                            let compat = self.compatible(prefix);
                            if compat.is_empty() {
                                return Cell::of(th.test(0, 1));
                            }
                            let (mut hits, mut bad) = (0, Cell::False);
                            for &b in compat.iter() {
                                let mut any = false;
                                for j in 1..=steps {
                                    let c = t.cell(b as usize, w + j);
                                    if c.is_defined() {
                                        any |= c.is_true();
                                    } else {
                                        bad = bad.max(c);
                                    }
                                }
                                hits += any as usize;
                            }
                            if bad != Cell::False {
                                bad
                            } else {
                                Cell::of(th.test(hits, compat.len()))
                            }
                        })
                    }
                }
            }
        })
    }

    /// Per world, whether some member's prefix ratio meets the threshold.
    fn black_box_column(&self, t: &Table, th: &Threshold) -> Vec<Cell> {
        let n = self.n();
        let members = self.members().len();
        let mut counts = vec![0usize; members];
        let mut bad = Cell::False;
        let mut seen = vec![false; n + 1];
        let mut column = Vec::with_capacity(n);
        for w in 1..=n {
            seen.iter_mut().for_each(|s| *s = false);
            for (r, count) in counts.iter_mut().enumerate() {
                let c = t.cell(r, w);
                if c.is_defined() {
                    *count += c as usize;
                } else {
                    bad = bad.max(c);
                }
                seen[*count] = true;
            }
            column.push(if bad != Cell::False {
                bad
            } else {
                Cell::of(th.test_any((0..=w).filter(|&c| seen[c]).map(|c| (c, w))))
            });
        }
        column
    }

    /// Whether some world has a member share meeting the threshold.
    fn star_cell(&self, t: &Table, th: &Threshold) -> Cell {
        let members = self.members().len();
        let mut bad = Cell::False;
        let mut shares = Vec::with_capacity(self.n());
        for w in 1..=self.n() {
            let mut count = 0;
            for r in 0..members {
                let c = t.cell(r, w);
                if c.is_defined() {
                    count += c as usize;
                } else {
                    bad = bad.max(c);
                }
            }
            shares.push((count, members));
        }
        if bad != Cell::False {
            bad
        } else {
            Cell::of(th.test_any(shares.into_iter()))
        }
    }
}
