//! Multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in display order: ascending total degree, and within a
//! degree in descending graded-lex order over lexicographically sorted
//! variable names. So `1 - x + x y` renders the way it is usually written.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable `{0}` has no value")]
    UnboundVariable(String),
    #[error("denominator does not divide the numerator")]
    NotAFactor,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A power product, factors sorted by variable name with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    factors: Vec<(String, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        Monomial { factors: vec![(name.to_string(), 1)] }
    }

    pub fn from_factors<I, S>(factors: I) -> Self
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut map: BTreeMap<String, u32> = BTreeMap::new();
        for (v, e) in factors {
            if e > 0 {
                *map.entry(v.into()).or_insert(0) += e;
            }
        }
        Monomial { factors: map.into_iter().collect() }
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, var: &str) -> u32 {
        self.factors
            .binary_search_by(|(v, _)| v.as_str().cmp(var))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(v, _)| v.as_str())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = &self.factors[i];
            let (b, eb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        let mut j = 0;
        for (v, e) in &self.factors {
            let mut e = *e;
            if j < other.factors.len() && other.factors[j].0 == *v {
                let d = other.factors[j].1;
                if d > e {
                    return None;
                }
                e -= d;
                j += 1;
            }
            if e > 0 {
                out.push((v.clone(), e));
            }
        }
        if j != other.factors.len() {
            return None;
        }
        Some(Monomial { factors: out })
    }

    /// Graded lexicographic term order, `x > y` when `x` sorts first.
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.lex_cmp(other))
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.factors.get(i), other.factors.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }

    /// Drops every exponent above one for the listed variables.
    pub fn reduce_idempotent(&self, vars: &BTreeSet<String>) -> Monomial {
        Monomial {
            factors: self
                .factors
                .iter()
                .map(|(v, e)| (v.clone(), if vars.contains(v) { 1 } else { *e }))
                .collect(),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.lex_cmp(self))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::term(c, Monomial::one())
    }

    pub fn from_int(n: i64) -> Self {
        Polynomial::constant(crate::rational::int(n))
    }

    pub fn var(name: &str) -> Self {
        Polynomial::term(Rational::one(), Monomial::var(name))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.variables().map(str::to_string))
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Leading term under graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    /// Replaces variables by polynomials; unmentioned variables stay.
    pub fn substitute(&self, map: &BTreeMap<String, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone());
            let mut rest = Vec::new();
            for (v, e) in m.factors() {
                match map.get(v) {
                    Some(p) => prod = &prod * &p.pow(*e),
                    None => rest.push((v.clone(), *e)),
                }
            }
            if !rest.is_empty() {
                prod = &prod * &Polynomial::term(Rational::one(), Monomial::from_factors(rest));
            }
            out = out + prod;
        }
        out
    }

    /// Applies `v^k = v` for the listed variables.
    pub fn idempotent_reduce(&self, vars: &BTreeSet<String>) -> Polynomial {
        Polynomial::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (m.reduce_idempotent(vars), c.clone())),
        )
    }

    /// Applies `v^k = v` to every variable.
    pub fn idempotent_reduce_all(&self) -> Polynomial {
        self.idempotent_reduce(&self.variables())
    }

    pub fn evaluate(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, PolyError> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let x = point
                    .get(v)
                    .ok_or_else(|| PolyError::UnboundVariable(v.clone()))?;
                t *= num_traits::pow(x.clone(), *e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn evaluate_f64(&self, point: &BTreeMap<String, f64>) -> Result<f64, PolyError> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = crate::rational::to_f64(c);
            for (v, e) in m.factors() {
                let x = point
                    .get(v)
                    .ok_or_else(|| PolyError::UnboundVariable(v.clone()))?;
                t *= x.powi(*e as i32);
            }
            total += t;
        }
        Ok(total)
    }

    /// Exact multivariate division; errors unless the remainder is zero.
    pub fn div_exact(&self, divisor: &Polynomial) -> Result<Polynomial, PolyError> {
        let (lm, lc) = match divisor.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(PolyError::ZeroDenominator),
        };
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.checked_div(&lm).ok_or(PolyError::NotAFactor)?;
            let qc = c / &lc;
            let t = Polynomial::term(qc, qm);
            rem = rem - &t * divisor;
            quot = quot + t;
        }
        Ok(quot)
    }

    /// Divides by the leading coefficient so the leading term is monic.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            Some((_, c)) => {
                let inv = Rational::one() / c;
                self.scale(&inv)
            }
            None => Polynomial::zero(),
        }
    }

    /// Scales by the absolute value of the leading coefficient.
    pub fn sign_preserving_normal(&self) -> Polynomial {
        match self.leading_term() {
            Some((_, c)) => {
                let inv = Rational::one() / c.abs();
                self.scale(&inv)
            }
            None => Polynomial::zero(),
        }
    }

    pub fn parse(s: &str) -> Result<Polynomial, PolyError> {
        crate::expr::parse_plain_polynomial(s).map_err(PolyError::Parse)
    }
}

impl FromStr for Polynomial {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Polynomial::parse(s)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            let body = if m.is_one() {
                format_rational(&a)
            } else if a.is_one() {
                m.to_string()
            } else {
                format!("{} {}", format_rational(&a), m)
            };
            match (i, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -(self.clone())
    }
}

/// A quotient kept exactly as written; nothing is cancelled implicitly.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FractionalPolynomial {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl FractionalPolynomial {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self, PolyError> {
        if denominator.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        Ok(FractionalPolynomial { numerator, denominator })
    }

    /// Divides out the denominator when it is a factor of the numerator.
    pub fn cancel_structural_factor(&self) -> Result<Polynomial, PolyError> {
        self.numerator.div_exact(&self.denominator)
    }

    /// `None` when the denominator vanishes at the point.
    pub fn evaluate(&self, point: &BTreeMap<String, Rational>) -> Result<Option<Rational>, PolyError> {
        let d = self.denominator.evaluate(point)?;
        if d.is_zero() {
            return Ok(None);
        }
        Ok(Some(self.numerator.evaluate(point)? / d))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut v = self.numerator.variables();
        v.extend(self.denominator.variables());
        v
    }
}

impl fmt::Display for FractionalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    #[test]
    fn display_order_matches_convention() {
        assert_eq!(p("x y + 1 - x").to_string(), "1 - x + x y");
        assert_eq!(p("x y - x z + z").to_string(), "z + x y - x z");
        assert_eq!(p("1 - x - z + x z").to_string(), "1 - x - z + x z");
        assert_eq!(p("x/2 - 3").to_string(), "-3 + 1/2 x");
        assert_eq!(p("x^2 + x y + y^2").to_string(), "x^2 + x y + y^2");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn arithmetic() {
        let a = p("1 - x");
        let b = p("1 - z");
        assert_eq!(&a * &b, p("1 - x - z + x z"));
        assert_eq!(&a + &b, p("2 - x - z"));
        assert_eq!(&a - &a, Polynomial::zero());
        assert_eq!(a.pow(2), p("1 - 2x + x^2"));
    }

    #[test]
    fn evaluation_and_substitution() {
        let q = p("z + x y - x z");
        let mut pt = BTreeMap::new();
        pt.insert("x".to_string(), ratio(1, 2));
        pt.insert("y".to_string(), int(1));
        pt.insert("z".to_string(), int(0));
        assert_eq!(q.evaluate(&pt).unwrap(), ratio(1, 2));
        let mut sub = BTreeMap::new();
        sub.insert("y".to_string(), Polynomial::one());
        assert_eq!(q.substitute(&sub), p("x + z - x z"));
        let mut partial = BTreeMap::new();
        partial.insert("x".to_string(), int(1));
        assert!(matches!(q.evaluate(&partial), Err(PolyError::UnboundVariable(_))));
    }

    #[test]
    fn idempotent_reduction() {
        let q = p("x^2 y + x y^3 - 2 x y");
        assert_eq!(q.idempotent_reduce_all(), Polynomial::zero());
    }

    #[test]
    fn exact_division() {
        let num = p("w - x w - z w + x z w");
        let den = p("1 - x");
        assert_eq!(num.div_exact(&den).unwrap(), p("w - w z"));
        let f = FractionalPolynomial::new(p("x y"), p("x")).unwrap();
        assert_eq!(f.cancel_structural_factor().unwrap(), p("y"));
        let g = FractionalPolynomial::new(p("x y"), p("z + x y - x z")).unwrap();
        assert_eq!(g.cancel_structural_factor(), Err(PolyError::NotAFactor));
        assert!(FractionalPolynomial::new(p("x"), Polynomial::zero()).is_err());
    }

    #[test]
    fn fraction_keeps_factor() {
        let f = FractionalPolynomial::new(p("x y"), p("x")).unwrap();
        assert_eq!(f.to_string(), "(x y) / (x)");
        let mut pt = BTreeMap::new();
        pt.insert("x".to_string(), int(0));
        pt.insert("y".to_string(), int(1));
        assert_eq!(f.evaluate(&pt).unwrap(), None);
    }
}
