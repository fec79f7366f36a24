//! Graded coefficient rings `Z/p^M [v, v^-1]` and their elements.
//!
//! An element is a finite map from the exponent of `v = v_n` to a residue
//! modulo `p^M`. The grading puts `v^e` in degree `e (1 - p^n)`; a height of
//! zero means the theory has no periodicity generator (Chow groups), in which
//! case only the exponent zero is ever populated.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::checked_pow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffMode {
    /// Residues modulo `p^M`, full grading retained.
    IntegralTruncated,
    /// Residues modulo `p`.
    ModP,
    /// `v = 1`: residues modulo `p^M`, gradings only defined modulo `p^n - 1`.
    SetVToOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoeffRing {
    prime: u64,
    precision: u32,
    height: u32,
    mode: CoeffMode,
    connective: bool,
}

impl CoeffRing {
    pub fn new(prime: u64, precision: u32, height: u32, mode: CoeffMode) -> Result<Self> {
        if prime < 2 || (2..prime).take_while(|k| k * k <= prime).any(|k| prime.is_multiple_of(k)) {
            return Err(Error::InvalidArgument(format!("{prime} is not prime")));
        }
        let precision = if mode == CoeffMode::ModP { 1 } else { precision };
        if precision == 0 {
            return Err(Error::InvalidArgument("precision M must be at least 1".into()));
        }
        match checked_pow(prime, precision) {
            Some(m) if m < (1u64 << 62) => {}
            _ => {
                return Err(Error::PrecisionOverflow(format!(
                    "{prime}^{precision} does not fit in a machine word"
                )))
            }
        }
        if height > 0 && checked_pow(prime, height).is_none_or(|q| q > (1u64 << 40)) {
            return Err(Error::InvalidArgument(format!("height {height} too large")));
        }
        Ok(CoeffRing { prime, precision, height, mode, connective: false })
    }

    /// `Z/2^M [v_n^{±1}]`.
    pub fn integral(precision: u32, height: u32) -> Self {
        Self::new(2, precision, height, CoeffMode::IntegralTruncated).expect("valid ring")
    }

    /// `F_2 [v_n^{±1}]`.
    pub fn mod2(height: u32) -> Self {
        Self::new(2, 1, height, CoeffMode::ModP).expect("valid ring")
    }

    /// `F_2`, the coefficients of Chow groups mod 2.
    pub fn chow_mod2() -> Self {
        Self::mod2(0)
    }

    /// Restrict to nonnegative powers of `v` (connective theories).
    pub fn connective(self) -> Self {
        CoeffRing { connective: true, ..self }
    }

    /// The same ring with negative powers of `v` allowed again.
    pub fn periodic(self) -> Self {
        CoeffRing { connective: false, ..self }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn mode(&self) -> CoeffMode {
        self.mode
    }
    pub fn is_connective(&self) -> bool {
        self.connective
    }

    pub fn modulus(&self) -> u64 {
        checked_pow(self.prime, self.precision).expect("checked at construction")
    }

    /// Degree of `v_n`, namely `1 - p^n`.
    pub fn periodicity_degree(&self) -> i64 {
        1 - checked_pow(self.prime, self.height).unwrap_or(1) as i64
    }

    /// `p^n - 1`, the period of gradings in set-v-to-one mode.
    pub fn period(&self) -> i64 {
        -self.periodicity_degree()
    }

    fn fold_exponent(&self, e: i32) -> i32 {
        if self.mode == CoeffMode::SetVToOne {
            0
        } else {
            e
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffElement {
    ring: CoeffRing,
    terms: BTreeMap<i32, u64>,
}

impl CoeffElement {
    pub fn zero(ring: CoeffRing) -> Self {
        CoeffElement { ring, terms: BTreeMap::new() }
    }

    pub fn one(ring: CoeffRing) -> Self {
        Self::from_int(ring, 1)
    }

    pub fn from_int(ring: CoeffRing, c: i64) -> Self {
        Self::monomial(ring, c, 0)
    }

    /// `c v^e`. Panics on a negative exponent in a connective ring and on a
    /// nonzero exponent in a ring without `v`.
    pub fn monomial(ring: CoeffRing, c: i64, e: i32) -> Self {
        assert!(ring.height > 0 || e == 0, "ring has no periodicity generator");
        assert!(!ring.connective || e >= 0, "negative power of v in a connective ring");
        let mut x = Self::zero(ring);
        let r = (c as i128).rem_euclid(ring.modulus() as i128) as u64;
        if r != 0 {
            x.terms.insert(ring.fold_exponent(e), r);
        }
        x
    }

    pub fn v(ring: CoeffRing) -> Self {
        Self::monomial(ring, 1, 1)
    }

    pub fn v_pow(ring: CoeffRing, e: i32) -> Self {
        Self::monomial(ring, 1, e)
    }

    pub fn from_terms(ring: CoeffRing, terms: impl IntoIterator<Item = (i32, u64)>) -> Self {
        let mut x = Self::zero(ring);
        for (e, r) in terms {
            x.add_term(e, r);
        }
        x
    }

    fn add_term(&mut self, e: i32, r: u64) {
        let m = self.ring.modulus();
        let e = self.ring.fold_exponent(e);
        let slot = self.terms.entry(e).or_insert(0);
        *slot = ((*slot as u128 + r as u128) % m as u128) as u64;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn terms(&self) -> &BTreeMap<i32, u64> {
        &self.terms
    }

    /// Residue at `v^e`.
    pub fn coeff(&self, e: i32) -> u64 {
        self.terms.get(&e).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0) == 1
    }

    /// The pair `(c, e)` when the element is a single monomial `c v^e`.
    pub fn as_monomial(&self) -> Option<(u64, i32)> {
        if self.terms.len() == 1 {
            let (&e, &c) = self.terms.iter().next().unwrap();
            Some((c, e))
        } else {
            None
        }
    }

    /// Zero or a single monomial.
    pub fn is_homogeneous(&self) -> bool {
        self.terms.len() <= 1 || self.ring.mode == CoeffMode::SetVToOne
    }

    /// Graded degree of a homogeneous nonzero element.
    pub fn degree(&self) -> Option<i64> {
        self.as_monomial().map(|(_, e)| e as i64 * self.ring.periodicity_degree())
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.ring, o.ring, "coefficient ring mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut x = self.clone();
        for (&e, &r) in &o.terms {
            x.add_term(e, r);
        }
        x
    }

    pub fn neg(&self) -> Self {
        let m = self.ring.modulus();
        CoeffElement {
            ring: self.ring,
            terms: self.terms.iter().map(|(&e, &r)| (e, m - r)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let m = self.ring.modulus() as u128;
        let mut x = Self::zero(self.ring);
        for (&e1, &r1) in &self.terms {
            for (&e2, &r2) in &o.terms {
                x.add_term(e1 + e2, (r1 as u128 * r2 as u128 % m) as u64);
            }
        }
        x
    }

    pub fn scale(&self, c: i64) -> Self {
        self.mul(&Self::from_int(self.ring, c))
    }

    /// Multiply by `v^e`.
    pub fn shift_v(&self, e: i32) -> Self {
        self.mul(&Self::v_pow(self.ring, e))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.ring);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Units are monomials `c v^e` with `c` prime to `p` (and `e = 0` in a
    /// connective ring).
    pub fn is_unit(&self) -> bool {
        match self.as_monomial() {
            Some((c, e)) => c % self.ring.prime != 0 && (!self.ring.connective || e == 0),
            None => false,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let (c, e) = self.as_monomial()?;
        let inv = mod_inverse(c, self.ring.modulus())?;
        Some(Self::from_terms(self.ring, [(-e, inv)]))
    }

    /// Reduction along the ring map to `target`: reduce residues, collapse
    /// exponents when `target` sets `v = 1`, embed polynomial into Laurent.
    pub fn reduce_to(&self, target: CoeffRing) -> Result<Self> {
        if target.prime != self.ring.prime || !self.ring.modulus().is_multiple_of(target.modulus()) {
            return Err(Error::TheoryMismatch("no reduction map between rings".into()));
        }
        if target.height != self.ring.height && !self.is_zero() && target.height != 0 {
            return Err(Error::TheoryMismatch("heights differ".into()));
        }
        let mut x = Self::zero(target);
        for (&e, &r) in &self.terms {
            if target.height == 0 && e != 0 {
                return Err(Error::TheoryMismatch(
                    "v-dependent coefficient cannot map to a ring without v".into(),
                ));
            }
            if target.connective && e < 0 {
                return Err(Error::TheoryMismatch("negative power of v in a connective ring".into()));
            }
            x.add_term(e, r % target.modulus());
        }
        Ok(x)
    }

    /// The map `v ↦ 0` into `target` (for instance from connective Morava
    /// K-theory to Chow groups mod p).
    pub fn kill_v(&self, target: CoeffRing) -> Result<Self> {
        if self.terms.keys().any(|&e| e < 0) {
            return Err(Error::TheoryMismatch("v ↦ 0 is undefined on negative powers".into()));
        }
        if target.prime != self.ring.prime || !self.ring.modulus().is_multiple_of(target.modulus()) {
            return Err(Error::TheoryMismatch("no reduction map between rings".into()));
        }
        Ok(Self::from_terms(target, [(0, self.coeff(0) % target.modulus())]))
    }

    /// Sum of residues, that is the image under `v ↦ 1`.
    pub fn eval_v_one(&self) -> u64 {
        let m = self.ring.modulus() as u128;
        (self.terms.values().map(|&r| r as u128).sum::<u128>() % m) as u64
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        if m == 1 {
            return Some(0);
        }
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

impl fmt::Display for CoeffElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let v = format!("v{}", self.ring.height);
        let mut first = true;
        for (&e, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c, e) {
                (c, 0) => write!(f, "{c}")?,
                (1, 1) => write!(f, "{v}")?,
                (1, e) => write!(f, "{v}^{e}")?,
                (c, 1) => write!(f, "{c}{v}")?,
                (c, e) => write!(f, "{c}{v}^{e}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_mod_256() {
        let r = CoeffRing::integral(8, 2);
        let a = CoeffElement::monomial(r, 3, 1);
        let b = CoeffElement::monomial(r, 255, -1);
        assert_eq!(a.mul(&b), CoeffElement::from_int(r, 253));
        assert!(a.add(&a.neg()).is_zero());
        assert_eq!(a.degree(), Some(-3));
    }

    #[test]
    fn inverse_of_units() {
        let r = CoeffRing::integral(8, 1);
        let a = CoeffElement::monomial(r, 7, 2);
        assert!(a.mul(&a.inverse().unwrap()).is_one());
        assert!(CoeffElement::from_int(r, 2).inverse().is_none());
        let ck = CoeffRing::mod2(2).connective();
        assert!(CoeffElement::v(ck).inverse().is_none());
    }

    #[test]
    fn set_v_to_one_collapses() {
        let r = CoeffRing::new(2, 4, 2, CoeffMode::SetVToOne).unwrap();
        let x = CoeffElement::monomial(r, 3, 5).add(&CoeffElement::monomial(r, 1, -2));
        assert_eq!(x, CoeffElement::from_int(r, 4));
    }

    #[test]
    fn ring_maps() {
        let ck = CoeffRing::mod2(2).connective();
        let x = CoeffElement::one(ck).add(&CoeffElement::v(ck));
        assert!(x.kill_v(CoeffRing::chow_mod2()).unwrap().is_one());
        let k = x.reduce_to(CoeffRing::mod2(2)).unwrap();
        assert_eq!(k.terms().len(), 2);
        let int = CoeffRing::integral(8, 2);
        let y = CoeffElement::monomial(int, 6, 1).reduce_to(CoeffRing::mod2(2)).unwrap();
        assert!(y.is_zero());
    }

    #[test]
    fn display() {
        let r = CoeffRing::integral(8, 2);
        let x = CoeffElement::from_int(r, 2).add(&CoeffElement::monomial(r, 255, 1));
        assert_eq!(x.to_string(), "2 + 255v2");
    }
}
