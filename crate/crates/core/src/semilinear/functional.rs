//! Finitely supported linear functionals with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SemilinearError;

/// `Σ c_i x_i`, stored sparsely with nonzero coefficients only.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinFunctional {
    coeffs: BTreeMap<usize, BigRational>,
}

impl LinFunctional {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The coordinate functional `x_i`.
    pub fn coord(i: usize) -> Self {
        Self::from_pairs([(i, BigRational::one())])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, BigRational)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (i, c) in pairs {
            let e = coeffs.entry(i).or_insert_with(BigRational::zero);
            *e += c;
        }
        coeffs.retain(|_, c: &mut BigRational| !c.is_zero());
        Self { coeffs }
    }

    pub fn from_ints(pairs: &[(usize, i64)]) -> Self {
        Self::from_pairs(
            pairs
                .iter()
                .map(|&(i, c)| (i, BigRational::from_integer(c.into()))),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(&i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Evaluates at a point given as coordinate values; missing
    /// coordinates are zero.
    pub fn eval(&self, point: &BTreeMap<usize, BigRational>) -> BigRational {
        self.coeffs
            .iter()
            .filter_map(|(i, c)| point.get(i).map(|v| c * v))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(
            self.coeffs
                .iter()
                .chain(&other.coeffs)
                .map(|(&i, c)| (i, c.clone())),
        )
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::from_pairs(self.coeffs.iter().map(|(&i, c)| (i, c * k)))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// The primitive integer direction of this functional, and whether the
    /// functional is a negative multiple of it. `None` for zero.
    pub fn direction(&self) -> Option<(Direction, bool)> {
        if self.is_zero() {
            return None;
        }
        let lcm = self
            .coeffs
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<(usize, BigInt)> = self
            .coeffs
            .iter()
            .map(|(&i, c)| (i, (c * BigRational::from_integer(lcm.clone())).to_integer()))
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c));
        let flipped = ints[0].1.is_negative();
        let terms = ints
            .into_iter()
            .map(|(i, c)| {
                let c = c / &g;
                (i, if flipped { -c } else { c })
            })
            .collect();
        Some((Direction(terms), flipped))
    }

    pub fn to_json(&self) -> FunctionalJson {
        FunctionalJson {
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (i.to_string(), c.to_string()))
                .collect(),
        }
    }

    pub fn from_json(json: &FunctionalJson) -> Result<Self, SemilinearError> {
        let mut pairs = Vec::new();
        for (k, v) in &json.coeffs {
            let i: usize = k
                .parse()
                .map_err(|_| SemilinearError::Parse(format!("bad coordinate {k:?}")))?;
            pairs.push((i, parse_rational(v)?));
        }
        Ok(Self::from_pairs(pairs))
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, SemilinearError> {
    let bad = || SemilinearError::Parse(format!("bad rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for LinFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (i, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            match (k, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            if mag.is_one() {
                write!(f, "x{i}")?;
            } else {
                write!(f, "{mag}*x{i}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LinFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses sums like `x0 + 2*x1 - 1/2*x3`. The letters `x`, `y`, `z` alone
/// stand for coordinates 0, 1, 2.
impl FromStr for LinFunctional {
    type Err = SemilinearError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| SemilinearError::Parse(format!("{msg} in functional {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty input"));
        }
        if compact == "0" {
            return Ok(Self::zero());
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && !current.is_empty() {
                terms.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            } else if ch == '+' || ch == '-' {
                negative ^= ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(bad("dangling sign"));
        }
        terms.push((negative, current));
        let mut pairs = Vec::new();
        for (neg, term) in terms {
            let (coef, var) = match term.rsplit_once('*') {
                Some((c, v)) => (parse_rational(c)?, v.to_string()),
                None => {
                    let split = term
                        .find(|c: char| c.is_ascii_alphabetic())
                        .ok_or_else(|| bad("term without a variable"))?;
                    let (c, v) = term.split_at(split);
                    let coef = if c.is_empty() {
                        BigRational::one()
                    } else {
                        parse_rational(c)?
                    };
                    (coef, v.to_string())
                }
            };
            let index = match var.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                v => v
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| bad("unknown variable"))?,
            };
            pairs.push((index, if neg { -coef } else { coef }));
        }
        Ok(Self::from_pairs(pairs))
    }
}

/// JSON form: `{"coeffs": {"0": "1", "1": "-2/3"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalJson {
    pub coeffs: BTreeMap<String, String>,
}

/// A primitive integer functional whose first nonzero coefficient is
/// positive; one representative per line of functionals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(pub(crate) Vec<(usize, BigInt)>);

impl Direction {
    pub fn terms(&self) -> &[(usize, BigInt)] {
        &self.0
    }

    pub fn to_functional(&self) -> LinFunctional {
        LinFunctional::from_pairs(
            self.0
                .iter()
                .map(|(i, c)| (*i, BigRational::from_integer(c.clone()))),
        )
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|(i, _)| *i)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_functional())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let f: LinFunctional = "x0 + x1".parse().unwrap();
        assert_eq!(f, LinFunctional::from_ints(&[(0, 1), (1, 1)]));
        let g: LinFunctional = "2*x0 - 1/2*x3".parse().unwrap();
        assert_eq!(g.to_string(), "2*x0 - 1/2*x3");
        assert_eq!(g.to_string().parse::<LinFunctional>().unwrap(), g);
        let h: LinFunctional = "-x + y".parse().unwrap();
        assert_eq!(h, LinFunctional::from_ints(&[(0, -1), (1, 1)]));
        assert!("x0 +".parse::<LinFunctional>().is_err());
        assert!("w".parse::<LinFunctional>().is_err());
        assert!("x0 - x0".parse::<LinFunctional>().unwrap().is_zero());
    }

    #[test]
    fn directions_identify_nonzero_multiples() {
        let f: LinFunctional = "-2/3*x0 + 4/3*x2".parse().unwrap();
        let (d, flipped) = f.direction().unwrap();
        assert!(flipped);
        assert_eq!(d.to_functional(), "x0 - 2*x2".parse().unwrap());
        let (d2, flipped2) = f.scale(&BigRational::new((-5).into(), 7.into())).direction().unwrap();
        assert_eq!(d, d2);
        assert!(!flipped2);
        assert!(LinFunctional::zero().direction().is_none());
    }

    #[test]
    fn json_round_trip() {
        let f: LinFunctional = "x0 - 2/3*x1".parse().unwrap();
        let j = f.to_json();
        assert_eq!(j.coeffs["1"], "-2/3");
        let text = serde_json::to_string(&j).unwrap();
        let back: FunctionalJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LinFunctional::from_json(&back).unwrap(), f);
    }
}
