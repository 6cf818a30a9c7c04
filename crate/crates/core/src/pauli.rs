//! Pauli strings in X/Z bitmask form and sums of strings with polynomial coefficients.
//!
//! A string on `n` qubits is stored as two `n`-bit masks. Qubit `i` carries `I`, `X`, `Z` or `Y`
//! for `(x_i, z_i) = (0,0), (1,0), (0,1), (1,1)`, and the operator is
//! `i^{|x & z|} X^x Z^z`, so every string is Hermitian and squares to the identity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Assignment, ParamPoly};

/// Maximum qubit count representable by the `u64` masks.
pub const MAX_QUBITS: usize = 64;

/// One of the four phases `{1, i, -1, -i}`, stored as the exponent of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u32) -> Phase {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.apply(Complex64::new(1.0, 0.0))
    }

    /// Multiplies `c` by the phase. Exact: only swaps and negates components.
    #[inline]
    pub fn apply(self, c: Complex64) -> Complex64 {
        match self {
            Phase::One => c,
            Phase::I => Complex64::new(-c.im, c.re),
            Phase::MinusOne => -c,
            Phase::MinusI => Complex64::new(c.im, -c.re),
        }
    }
}

/// Tensor product of single-qubit Paulis on `n_qubits` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let m = low_mask(n_qubits);
        if x_mask & !m != 0 || z_mask & !m != 0 {
            return Err(Error::Parse(format!(
                "mask bits beyond qubit {} (x={x_mask:#x}, z={z_mask:#x})",
                n_qubits - 1
            )));
        }
        Ok(PauliString { n_qubits, x: x_mask, z: z_mask })
    }

    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits > 0 && n_qubits <= MAX_QUBITS, "qubit count {n_qubits}");
        PauliString { n_qubits, x: 0, z: 0 }
    }

    /// Single-qubit `letter` (one of `I`, `X`, `Y`, `Z`) on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Result<Self> {
        Self::from_letters(n_qubits, &[(qubit, letter)])
    }

    /// Product of the given single-qubit letters on distinct qubits.
    pub fn from_letters(n_qubits: usize, letters: &[(usize, char)]) -> Result<Self> {
        let mut p = Self::new(n_qubits, 0, 0)?;
        for &(q, l) in letters {
            if q >= n_qubits {
                return Err(Error::InvalidSite { i: q, j: q, n_sites: n_qubits });
            }
            let (xb, zb) = letter_bits(l)?;
            p.x |= (xb as u64) << q;
            p.z |= (zb as u64) << q;
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    fn check_same(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// `self * other = phase * product`.
    pub fn mul(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^{y1} X^{x1} Z^{z1} i^{y2} X^{x2} Z^{z2} = i^{y1+y2} (-1)^{|z1 & x2|} X^x Z^z
        //                                         = i^{y1+y2+2|z1 & x2|-y} P
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4
            - (x & z).count_ones() % 4;
        (Phase::from_exponent(k), PauliString { n_qubits: self.n_qubits, x, z })
    }

    /// True when the strings commute as operators.
    pub fn commutes(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase * |b'>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let k = self.y_count() + 2 * (self.z & b).count_ones();
        (Phase::from_exponent(k).to_complex(), b ^ self.x)
    }
}

fn letter_bits(l: char) -> Result<(bool, bool)> {
    match l {
        'I' => Ok((false, false)),
        'X' => Ok((true, false)),
        'Z' => Ok((false, true)),
        'Y' => Ok((true, true)),
        other => Err(Error::Parse(format!("unknown Pauli letter `{other}`"))),
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.z, self.x, self.n_qubits).cmp(&(other.z, other.x, other.n_qubits))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Qubit 0 is the leftmost letter.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let n = s.chars().count();
        let mut p = PauliString::new(n, 0, 0)?;
        for (q, l) in s.chars().enumerate() {
            let (xb, zb) = letter_bits(l)?;
            p.x |= (xb as u64) << q;
            p.z |= (zb as u64) << q;
        }
        Ok(p)
    }
}

/// Linear combination of Pauli strings with [`ParamPoly`] coefficients.
///
/// Terms are kept in canonical `(z_mask, x_mask)` order and zero coefficients are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, ParamPoly>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(PauliString::identity(n_qubits), ParamPoly::real(1.0))
    }

    pub fn from_term(string: PauliString, coeff: ParamPoly) -> Self {
        let mut s = Self::zero(string.n_qubits());
        s.add_term(string, coeff).expect("same qubit count");
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.keys()
    }

    pub fn coeff(&self, s: &PauliString) -> Option<&ParamPoly> {
        self.terms.get(s)
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.terms.values().flat_map(ParamPoly::params).collect()
    }

    fn check_same(&self, n: usize) -> Result<()> {
        if self.n_qubits != n {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: n });
        }
        Ok(())
    }

    pub fn add_term(&mut self, string: PauliString, coeff: ParamPoly) -> Result<()> {
        self.check_same(string.n_qubits())?;
        let entry = self.terms.entry(string).or_default();
        entry.add_assign(&coeff);
        if entry.is_zero() {
            self.terms.remove(&string);
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other.n_qubits)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone())?;
        }
        Ok(out)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&self, factor: &ParamPoly) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits);
        for (s, c) in &self.terms {
            let p = c.mul(factor);
            if !p.is_zero() {
                out.terms.insert(*s, p);
            }
        }
        out
    }

    /// Operator product `self * other`, collecting like strings.
    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other.n_qubits)?;
        let mut acc: HashMap<PauliString, ParamPoly> =
            HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (phase, s) = sa.mul_unchecked(sb);
                acc.entry(s).or_default().add_product(ca, cb, phase);
            }
        }
        Ok(PauliSum {
            n_qubits: self.n_qubits,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// `[A, A^2, ..., A^k]` for `k` in `1..=4`, each computed as `A * A^(j-1)`.
    pub fn powers(&self, k: usize) -> Result<Vec<PauliSum>> {
        if !(1..=4).contains(&k) {
            return Err(Error::PowerOutOfRange(k));
        }
        let mut out = vec![self.clone()];
        for _ in 1..k {
            let next = self.multiply(out.last().expect("nonempty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Evaluates every coefficient at `values`; all parameters must be assigned.
    pub fn bind(&self, values: &Assignment) -> Result<PauliSum> {
        let terms = self
            .bound_terms(values)?
            .into_iter()
            .map(|(s, v)| (s, ParamPoly::constant(v)))
            .collect();
        Ok(PauliSum { n_qubits: self.n_qubits, terms })
    }

    /// The terms of `self.bind(values)` as plain `(string, coefficient)` pairs, canonical order.
    pub fn bound_terms(&self, values: &Assignment) -> Result<Vec<(PauliString, Complex64)>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (s, c) in &self.terms {
            let v = c.eval(values)?;
            if v.norm() >= crate::poly::ZERO_TOL {
                out.push((*s, v));
            }
        }
        Ok(out)
    }

    /// Substitutes the assigned parameters and leaves the others symbolic.
    pub fn partial_bind(&self, values: &Assignment) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| (*s, c.partial_eval(values)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    /// Constant coefficients of a fully bound sum, in canonical order.
    pub fn constant_terms(&self) -> Result<Vec<(PauliString, Complex64)>> {
        self.terms
            .iter()
            .map(|(s, c)| {
                c.as_constant().map(|v| (*s, v)).ok_or_else(|| {
                    Error::UnboundParameter(c.params().into_iter().next().unwrap_or_default())
                })
            })
            .collect()
    }

    /// Hermitian at `values` when every bound coefficient is real to `tol`.
    pub fn is_hermitian_at(&self, values: &Assignment, tol: f64) -> Result<bool> {
        for c in self.terms.values() {
            if c.eval(values)?.im.abs() >= tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        let ab = self.multiply(other)?;
        let ba = other.multiply(self)?;
        ab.add(&ba.scale(&ParamPoly::real(-1.0)))
    }

    /// Parses the one-term-per-line text form; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut out: Option<PauliSum> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            let (poly, string) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| ctx(Error::Parse("expected `<coeff> <string>`".into())))?;
            let string: PauliString = string.parse().map_err(ctx)?;
            let poly: ParamPoly = poly.parse().map_err(ctx)?;
            let sum = out.get_or_insert_with(|| PauliSum::zero(string.n_qubits()));
            sum.add_term(string, poly).map_err(ctx)?;
        }
        out.ok_or_else(|| Error::Parse("no terms".into()))
    }
}

/// One term per line: `<coeff-poly> <string>`, qubit 0 leftmost.
impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in &self.terms {
            writeln!(f, "{c} {s}")?;
        }
        Ok(())
    }
}
