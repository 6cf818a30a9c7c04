//! Sparse multivariate polynomials with complex coefficients over named real parameters.
//!
//! These are the coefficients of every [`PauliSum`](crate::pauli::PauliSum): a Hamiltonian such
//! as `x*XX + ZZ` is stored once with `x` symbolic, its powers are expanded once, and each sweep
//! point only evaluates coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are treated as zero and dropped.
pub const ZERO_TOL: f64 = 1e-15;

/// Values for named parameters.
pub type Assignment = BTreeMap<String, f64>;

/// Builds an [`Assignment`] from `(name, value)` pairs.
pub fn assign<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Assignment {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Product of parameter powers, e.g. `x^2*lambda^1`. Factors are sorted by name, exponents > 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[(Arc<str>, u32); 2]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(name: &str) -> Self {
        Monomial(smallvec::smallvec![(Arc::from(name), 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(n, e)| (n.as_ref(), *e))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        if other.0.is_empty() {
            return self.clone();
        }
        if self.0.is_empty() {
            return other.clone();
        }
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (&self.0[i], &other.0[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b.clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0.clone(), a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(other.0[j..].iter().cloned());
        Monomial(out)
    }

    fn eval(&self, values: &Assignment) -> Result<f64> {
        let mut acc = 1.0;
        for (name, exp) in &self.0 {
            let v = values
                .get(name.as_ref())
                .ok_or_else(|| Error::UnboundParameter(name.to_string()))?;
            acc *= v.powi(*exp as i32);
        }
        Ok(acc)
    }
}

// Higher total degree first, then lexicographic on factors; constants come last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial `sum_m c_m * m` with complex `c_m` and monomials `m` in named parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamPoly {
    terms: BTreeMap<Monomial, Complex64>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// The polynomial `coeff * name`.
    pub fn param(name: &str, coeff: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(name), Complex64::new(coeff, 0.0));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    /// Constant value if the polynomial has no parameter dependence.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.len() {
            0 => Some(Complex64::new(0.0, 0.0)),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().map(|(n, _)| n.to_string()))
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if c.norm() >= ZERO_TOL {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v.norm() < ZERO_TOL {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &ParamPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), *c);
        }
    }

    /// Adds `phase * a * b` without materializing the product.
    pub fn add_product(&mut self, a: &ParamPoly, b: &ParamPoly, phase: crate::pauli::Phase) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(mb), phase.apply(ca * cb));
            }
        }
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        out.add_product(self, other, crate::pauli::Phase::One);
        out
    }

    pub fn scale(&self, s: Complex64) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn conj(&self) -> ParamPoly {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Evaluates at real parameter values; every parameter present must be assigned.
    pub fn eval(&self, values: &Assignment) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            acc += c * m.eval(values)?;
        }
        Ok(acc)
    }

    /// Substitutes values for the assigned parameters and keeps the rest symbolic.
    pub fn partial_eval(&self, values: &Assignment) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let mut scale = 1.0;
            let mut rest = SmallVec::new();
            for (name, exp) in &m.0 {
                match values.get(name.as_ref()) {
                    Some(v) => scale *= v.powi(*exp as i32),
                    None => rest.push((name.clone(), *exp)),
                }
            }
            out.add_term(Monomial(rest), c * scale);
        }
        out
    }
}

fn fmt_complex(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.im < 0.0 {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad coefficient `{s}`"));
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        // split at the sign that starts the imaginary part (not a leading sign, not an exponent sign)
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let im: f64 = body[k..].trim_start_matches('+').parse().map_err(|_| bad())?;
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = body.parse().map_err(|_| bad())?;
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("(0)");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            f.write_str("(")?;
            fmt_complex(*c, f)?;
            f.write_str(")")?;
            for (name, exp) in m.factors() {
                write!(f, "*{name}^{exp}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ParamPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = ParamPoly::zero();
        for term in s.split(" + ") {
            let term = term.trim();
            let rest = term
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("term `{term}` must start with `(`")))?;
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed coefficient in `{term}`")))?;
            let coeff = parse_complex(&rest[..close])?;
            let mut mono = Monomial::one();
            for factor in rest[close + 1..].split('*').skip(1) {
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                    ),
                    None => (factor, 1),
                };
                if name.is_empty() || !name.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
                    return Err(Error::Parse(format!("bad parameter name `{name}`")));
                }
                if exp > 0 {
                    mono = mono.mul(&Monomial(smallvec::smallvec![(Arc::from(name), exp)]));
                }
            }
            out.add_term(mono, coeff);
        }
        Ok(out)
    }
}
