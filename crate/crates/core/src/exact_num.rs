//! Stirling numbers, falling factorials and multi-index arithmetic.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, FkError, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn big_to_rat(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Parses "p/q", "p" or a JSON-ish integer into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || FkError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(FkError::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

struct Triangle {
    rows: RwLock<Vec<Vec<BigInt>>>,
    next: fn(&[BigInt], usize) -> Vec<BigInt>,
}

impl Triangle {
    fn get(&self, n: usize, k: usize) -> BigInt {
        if let Some(row) = self.rows.read().unwrap().get(n) {
            return row[k].clone();
        }
        let mut rows = self.rows.write().unwrap();
        while rows.len() <= n {
            let m = rows.len();
            let row = (self.next)(&rows[m - 1], m);
            rows.push(row);
        }
        rows[n][k].clone()
    }
}

// s(m,k) = s(m-1,k-1) - (m-1) s(m-1,k)
fn first_kind_row(prev: &[BigInt], m: usize) -> Vec<BigInt> {
    (0..=m)
        .map(|k| {
            let left = if k > 0 { prev[k - 1].clone() } else { BigInt::zero() };
            let up = prev.get(k).cloned().unwrap_or_default();
            left - BigInt::from(m - 1) * up
        })
        .collect()
}

// S(m,k) = S(m-1,k-1) + k S(m-1,k)
fn second_kind_row(prev: &[BigInt], m: usize) -> Vec<BigInt> {
    (0..=m)
        .map(|k| {
            let left = if k > 0 { prev[k - 1].clone() } else { BigInt::zero() };
            let up = prev.get(k).cloned().unwrap_or_default();
            left + BigInt::from(k) * up
        })
        .collect()
}

static FIRST: Triangle = Triangle { rows: RwLock::new(Vec::new()), next: first_kind_row };
static SECOND: Triangle = Triangle { rows: RwLock::new(Vec::new()), next: second_kind_row };

fn seed(t: &Triangle) {
    let mut rows = t.rows.write().unwrap();
    if rows.is_empty() {
        rows.push(vec![BigInt::one()]);
    }
}

/// Signed Stirling number of the first kind: (N)_n = sum_k s(n,k) N^k.
pub fn stirling_first(n: usize, k: usize) -> Result<BigInt> {
    if k > n {
        return domain(format!("stirling_first({n},{k}) needs k <= n"));
    }
    seed(&FIRST);
    Ok(FIRST.get(n, k))
}

/// Stirling number of the second kind: partitions of [q] into p blocks.
pub fn stirling_second(q: usize, p: usize) -> Result<BigInt> {
    if p > q {
        return domain(format!("stirling_second({q},{p}) needs p <= q"));
    }
    seed(&SECOND);
    Ok(SECOND.get(q, p))
}

pub fn falling_factorial(n: u64, q: u64) -> BigInt {
    if q > n {
        return BigInt::zero();
    }
    (0..q).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

pub fn factorial(n: u64) -> BigInt {
    falling_factorial(n, n)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    falling_factorial(n, k) / factorial(k)
}

pub fn pow_rat(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

pub fn abs_rat(x: &Rational) -> Rational {
    x.abs()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub Vec<usize>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexAlgebra {
    pub falling: BigInt,
    pub factorial: BigInt,
    pub stirling: BigInt,
    pub abs: usize,
    pub le: bool,
}

impl MultiIndex {
    pub fn new(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }

    pub fn constant(len: usize, value: usize) -> Self {
        MultiIndex(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn abs(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&p| factorial(p as u64)).product()
    }

    fn check_len(&self, other: &MultiIndex) -> Result<()> {
        if self.len() != other.len() {
            return domain(format!("multi-index length mismatch: {} vs {}", self.len(), other.len()));
        }
        Ok(())
    }

    /// Componentwise p <= l.
    pub fn le(&self, l: &MultiIndex) -> Result<bool> {
        self.check_len(l)?;
        Ok(self.0.iter().zip(&l.0).all(|(a, b)| a <= b))
    }

    /// (l)_p with self = p.
    pub fn falling_of(&self, l: &MultiIndex) -> Result<BigInt> {
        self.check_len(l)?;
        Ok(self.0.iter().zip(&l.0).map(|(&p, &l)| falling_factorial(l as u64, p as u64)).product())
    }

    /// s(l, p) with self = p.
    pub fn stirling_of(&self, l: &MultiIndex) -> Result<BigInt> {
        self.check_len(l)?;
        let mut acc = BigInt::one();
        for (&p, &l) in self.0.iter().zip(&l.0) {
            acc *= stirling_first(l, p)?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        self.check_len(other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &MultiIndex) -> Result<MultiIndex> {
        self.check_len(other)?;
        let mut out = Vec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if b > a {
                return domain("multi-index subtraction would go negative");
            }
            out.push(a - b);
        }
        Ok(MultiIndex(out))
    }
}

/// All derived quantities for the pair (p, l) at once.
pub fn multi_index_algebra(p: &MultiIndex, l: &MultiIndex) -> Result<MultiIndexAlgebra> {
    let le = p.le(l)?;
    if !le {
        return domain("(l)_p and s(l,p) need p <= l");
    }
    Ok(MultiIndexAlgebra {
        falling: p.falling_of(l)?,
        factorial: p.factorial(),
        stirling: p.stirling_of(l)?,
        abs: p.abs(),
        le,
    })
}

/// Compositions of `total` into `parts` nonnegative parts, in colex order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    // colex: the last coordinate varies slowest
    for last in 0..=total {
        for mut head in compositions(total - last, parts - 1) {
            head.push(last);
            out.push(head);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_examples() {
        assert_eq!(stirling_first(2, 1).unwrap(), BigInt::from(-1));
        assert_eq!(stirling_first(3, 2).unwrap(), BigInt::from(-3));
        assert_eq!(stirling_first(4, 2).unwrap(), BigInt::from(11));
        assert_eq!(stirling_second(3, 2).unwrap(), BigInt::from(3));
        assert_eq!(stirling_second(4, 4).unwrap(), BigInt::from(1));
        assert_eq!(stirling_second(4, 1).unwrap(), BigInt::from(1));
        assert_eq!(stirling_first(0, 0).unwrap(), BigInt::from(1));
        assert!(stirling_first(2, 3).is_err());
        assert!(stirling_second(1, 2).is_err());
    }

    #[test]
    fn falling_examples() {
        assert_eq!(falling_factorial(5, 2), BigInt::from(20));
        assert_eq!(falling_factorial(3, 3), BigInt::from(6));
        assert_eq!(falling_factorial(4, 0), BigInt::from(1));
        assert_eq!(falling_factorial(2, 3), BigInt::from(0));
    }

    #[test]
    fn multi_index_examples() {
        let p = MultiIndex::new(vec![1, 2]);
        let l = MultiIndex::new(vec![2, 3]);
        let alg = multi_index_algebra(&p, &l).unwrap();
        assert_eq!(alg.falling, BigInt::from(12));
        assert_eq!(alg.factorial, BigInt::from(2));
        assert_eq!(alg.abs, 3);
        let p = MultiIndex::new(vec![2, 2]);
        let l = MultiIndex::new(vec![3, 3]);
        assert_eq!(p.stirling_of(&l).unwrap(), BigInt::from(9));
        assert!(p.le(&MultiIndex::new(vec![1])).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), rint(-3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
    }

    #[test]
    fn compositions_colex() {
        let c = compositions(2, 2);
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
    }
}
