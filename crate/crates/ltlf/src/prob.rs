//! Exact probabilities and the integer combinatorics behind them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An exact rational number in `[0, 1]`, always held in lowest terms.
///
/// Arithmetic that could leave the unit interval is exposed through
/// `checked_*` methods; multiplication is total.
///
/// ```
/// use ltlf::Probability;
///
/// let p: Probability = "6/16".parse().unwrap();
/// assert_eq!(p.to_string(), "3/8");
/// assert_eq!(p.complement().to_string(), "5/8");
/// assert!("5/4".parse::<Probability>().is_err());
/// ```
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(Ratio<BigUint>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProbabilityError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{0} is not in [0, 1]")]
    OutOfRange(String),
    #[error("malformed probability `{0}`")]
    Malformed(String),
}

impl Probability {
    pub fn new(
        numer: impl Into<BigUint>,
        denom: impl Into<BigUint>,
    ) -> Result<Self, ProbabilityError> {
        let (numer, denom) = (numer.into(), denom.into());
        if denom.is_zero() {
            return Err(ProbabilityError::ZeroDenominator);
        }
        Self::from_ratio(Ratio::new(numer, denom))
    }

    pub fn from_ratio(r: Ratio<BigUint>) -> Result<Self, ProbabilityError> {
        if r > Ratio::one() {
            return Err(ProbabilityError::OutOfRange(format!("{}/{}", r.numer(), r.denom())));
        }
        Ok(Probability(r))
    }

    /// `count / total`, panicking when `count > total` or `total == 0`.
    pub(crate) fn ratio(count: usize, total: usize) -> Self {
        assert!(total > 0 && count <= total, "bad ratio {count}/{total}");
        Probability(Ratio::new(BigUint::from(count), BigUint::from(total)))
    }

    pub fn zero() -> Self {
        Probability(Ratio::zero())
    }

    pub fn one() -> Self {
        Probability(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Probability(Ratio::one() - &self.0)
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        Self::from_ratio(&self.0 + &other.0).ok()
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        (self.0 >= other.0).then(|| Probability(&self.0 - &other.0))
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Self::from_ratio(&self.0 / &other.0).ok()
    }

    /// `self * k`, if the product stays within `[0, 1]`.
    pub fn checked_mul_int(&self, k: u64) -> Option<Self> {
        Self::from_ratio(&self.0 * BigUint::from(k)).ok()
    }

    /// Numerator and denominator as machine integers, when both fit.
    pub fn to_u64_pair(&self) -> Option<(u64, u64)> {
        Some((self.numer().to_u64()?, self.denom().to_u64()?))
    }

    /// Compares `self` against the non-negative ratio `num / den`.
    pub(crate) fn cmp_ratio(&self, num: &BigUint, den: &BigUint) -> Ordering {
        (self.numer() * den).cmp(&(num * self.denom()))
    }
}

impl Mul for &Probability {
    type Output = Probability;
    fn mul(self, rhs: &Probability) -> Probability {
        Probability(&self.0 * &rhs.0)
    }
}

impl Mul for Probability {
    type Output = Probability;
    fn mul(self, rhs: Probability) -> Probability {
        &self * &rhs
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Probability {
    type Err = ProbabilityError;

    /// Accepts `<int>` or `<int>/<int>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let malformed = || ProbabilityError::Malformed(s.to_string());
        let digits = |t: &str| -> Result<BigUint, ProbabilityError> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            t.parse().map_err(|_| malformed())
        };
        match s.split_once('/') {
            Some((n, d)) => Probability::new(digits(n)?, digits(d)?),
            None => Probability::new(digits(s)?, 1u32),
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `(Σ parts)! / Π parts!`.
pub fn multinomial(parts: &[u64]) -> BigUint {
    let mut total = 0u64;
    let mut acc = BigUint::one();
    for &p in parts {
        total += p;
        acc *= binomial(total, p);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Probability {
        s.parse().unwrap()
    }

    #[test]
    fn reduces_and_prints() {
        assert_eq!(p("2/4").to_string(), "1/2");
        assert_eq!(p("0/7").to_string(), "0");
        assert_eq!(p("3/3").to_string(), "1");
        assert_eq!(p("1").to_string(), "1");
        assert_eq!(p(" 3 / 8 ").to_string(), "3/8");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!("1/0".parse::<Probability>(), Err(ProbabilityError::ZeroDenominator));
        assert!(matches!("3/2".parse::<Probability>(), Err(ProbabilityError::OutOfRange(_))));
        assert!(matches!("-1/2".parse::<Probability>(), Err(ProbabilityError::Malformed(_))));
        assert!(matches!("0.5".parse::<Probability>(), Err(ProbabilityError::Malformed(_))));
        assert!(matches!("".parse::<Probability>(), Err(ProbabilityError::Malformed(_))));
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(p("1/3").checked_add(&p("1/6")), Some(p("1/2")));
        assert_eq!(p("2/3").checked_add(&p("1/2")), None);
        assert_eq!(p("1/3").checked_sub(&p("1/2")), None);
        assert_eq!(p("1/2").checked_sub(&p("1/3")), Some(p("1/6")));
        assert_eq!(&p("3/8") * &p("2/3"), p("1/4"));
        assert_eq!(p("1/4").checked_mul_int(2), Some(p("1/2")));
        assert_eq!(p("2/3").checked_mul_int(2), None);
        assert_eq!(p("2/9").checked_div(&p("1/3")), Some(p("2/3")));
        assert_eq!(p("1/2").checked_div(&p("1/3")), None);
        assert_eq!(p("1/2").checked_div(&Probability::zero()), None);
        assert!(p("1/3") < p("1/2"));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(60, 30), "118264581564861424".parse().unwrap());
        assert_eq!(multinomial(&[2, 2]), BigUint::from(6u32));
        assert_eq!(multinomial(&[3, 3, 2]), BigUint::from(560u32));
        assert_eq!(multinomial(&[]), BigUint::one());
    }

    proptest::proptest! {
        #[test]
        fn complement_involutive(n in 0u64..50, d in 1u64..50) {
            proptest::prop_assume!(n <= d);
            let q = Probability::new(n, d).unwrap();
            proptest::prop_assert_eq!(q.complement().complement(), q.clone());
            proptest::prop_assert_eq!(q.checked_add(&q.complement()), Some(Probability::one()));
        }

        #[test]
        fn display_parse_roundtrip(n in 0u64..1000, d in 1u64..1000) {
            proptest::prop_assume!(n <= d);
            let q = Probability::new(n, d).unwrap();
            proptest::prop_assert_eq!(q.to_string().parse::<Probability>().unwrap(), q);
        }

        #[test]
        fn pascal(n in 1u64..40, k in 1u64..40) {
            proptest::prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
        }
    }
}
