//! Capped relative-precision p-adic numbers.
//!
//! A value is `p^val * unit` where `unit` is known modulo `p^rel`. Products
//! keep the smaller relative precision, sums keep the smaller absolute
//! precision `val + rel`. Inputs built from integers start at the full cap, so
//! intermediate values with negative valuation (p-power denominators) are
//! carried exactly until the cap forces a loss. The loss is never silent:
//! [`PAdic::to_residue`] refuses to produce a residue it does not know.

use crate::error::{Error, Result};

const EXACT_ZERO: i32 = i32::MAX / 4;

/// `p^k`, or `None` on `u64` overflow.
pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// Largest `w` with `p^w < 2^62`, so that products of two residues fit in `u128`
/// and sums of two residues fit in `u64`.
pub fn word_cap(p: u64) -> u32 {
    let mut w = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 62) {
        acc *= p as u128;
        w += 1;
    }
    w
}

fn pow(p: u64, k: u32) -> u64 {
    checked_pow(p, k).expect("p-adic cap exceeds machine word")
}

#[derive(Clone, Copy, Debug)]
pub struct PAdic {
    p: u64,
    cap: u32,
    val: i32,
    unit: u64,
    rel: u32,
}

impl PAdic {
    pub fn zero(p: u64, cap: u32) -> Self {
        PAdic { p, cap, val: EXACT_ZERO, unit: 0, rel: 0 }
    }

    pub fn one(p: u64, cap: u32) -> Self {
        Self::from_int(p, cap, 1)
    }

    pub fn from_int(p: u64, cap: u32, n: i64) -> Self {
        if n == 0 {
            return Self::zero(p, cap);
        }
        let mut m = n.unsigned_abs();
        let mut v = 0;
        while m.is_multiple_of(p) {
            m /= p;
            v += 1;
        }
        let modulus = pow(p, cap) as i128;
        let signed = if n < 0 { -(m as i128) } else { m as i128 };
        let unit = signed.rem_euclid(modulus) as u64;
        PAdic { p, cap, val: v, unit, rel: cap }
    }

    /// `n / p^k`.
    pub fn from_frac(p: u64, cap: u32, n: i64, k: u32) -> Self {
        let mut x = Self::from_int(p, cap, n);
        if !x.is_exact_zero() {
            x.val -= k as i32;
        }
        x
    }

    fn zero_to(&self, abs: i32) -> Self {
        PAdic { p: self.p, cap: self.cap, val: abs, unit: 0, rel: 0 }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        self.val == EXACT_ZERO
    }

    /// True when the value is zero to the precision it is known.
    pub fn is_zero(&self) -> bool {
        self.unit == 0
    }

    /// Valuation of a nonzero value.
    pub fn valuation(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Absolute precision: the value is known modulo `p^abs_prec`.
    pub fn abs_prec(&self) -> Option<i32> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.val + self.rel as i32)
        }
    }

    fn term(&self, v0: i32, k: u32) -> u64 {
        let shift = self.val - v0;
        if self.is_zero() || shift >= k as i32 {
            return 0;
        }
        let m = pow(self.p, k) as u128;
        let u = self.unit as u128 % m;
        (u * pow(self.p, shift as u32) as u128 % m) as u64
    }

    fn normalize(&self, v0: i32, k: u32, a: u64) -> Self {
        if a == 0 {
            return self.zero_to(v0 + k as i32);
        }
        let mut a = a;
        let mut s = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            s += 1;
        }
        PAdic { p: self.p, cap: self.cap, val: v0 + s as i32, unit: a, rel: k - s }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        if self.is_exact_zero() {
            return *o;
        }
        if o.is_exact_zero() {
            return *self;
        }
        let abs = (self.val + self.rel as i32).min(o.val + o.rel as i32);
        let v0 = self.val.min(o.val);
        if abs <= v0 {
            return self.zero_to(abs);
        }
        let k = (abs - v0) as u32;
        let m = pow(self.p, k);
        let a = (self.term(v0, k) as u128 + o.term(v0, k) as u128) % m as u128;
        self.normalize(v0, k, a as u64)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        let m = pow(self.p, self.rel);
        PAdic { unit: m - self.unit, ..*self }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero(self.p, self.cap);
        }
        let val = self.val + o.val;
        let rel = self.rel.min(o.rel);
        if rel == 0 || self.is_zero() || o.is_zero() {
            return self.zero_to(val + rel as i32);
        }
        let m = pow(self.p, rel) as u128;
        let u = (self.unit as u128 % m) * (o.unit as u128 % m) % m;
        PAdic { p: self.p, cap: self.cap, val, unit: u as u64, rel }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(self.p, self.cap, n))
    }

    /// Residue modulo `p^m`. Fails if the value is not p-integral or is not
    /// known to absolute precision `m`.
    pub fn to_residue(&self, m: u32) -> Result<u64> {
        if self.is_exact_zero() {
            return Ok(0);
        }
        if self.is_zero() {
            if self.val >= m as i32 {
                return Ok(0);
            }
            return Err(Error::PrecisionOverflow(format!(
                "value known only modulo {}^{}, need {}^{}",
                self.p, self.val, self.p, m
            )));
        }
        if self.val < 0 {
            return Err(Error::NonIntegral(format!(
                "valuation {} at prime {}",
                self.val, self.p
            )));
        }
        if (self.val + self.rel as i32) < m as i32 {
            return Err(Error::PrecisionOverflow(format!(
                "value known modulo {}^{}, need {}^{}",
                self.p,
                self.val + self.rel as i32,
                self.p,
                m
            )));
        }
        if self.val >= m as i32 {
            return Ok(0);
        }
        let md = pow(self.p, m) as u128;
        let r = (self.unit as u128 % md) * pow(self.p, self.val as u32) as u128 % md;
        Ok(r as u64)
    }
}

impl PartialEq for PAdic {
    /// Equality to the common known precision.
    fn eq(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_times_two_is_one() {
        let h = PAdic::from_frac(2, 20, 1, 1);
        let x = h.mul_int(2);
        assert_eq!(x.to_residue(8).unwrap(), 1);
        assert!(matches!(h.to_residue(4), Err(Error::NonIntegral(_))));
    }

    #[test]
    fn cancellation_of_denominators() {
        // 1/4 + 3/4 = 1
        let a = PAdic::from_frac(2, 20, 1, 2);
        let b = PAdic::from_frac(2, 20, 3, 2);
        assert_eq!(a.add(&b).to_residue(10).unwrap(), 1);
        // 1/4 - 1/4 = 0 exactly to the known precision
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn negative_residues() {
        let x = PAdic::from_int(2, 16, -3);
        assert_eq!(x.to_residue(8).unwrap(), 253);
        assert_eq!(x.neg().to_residue(8).unwrap(), 3);
    }

    #[test]
    fn precision_loss_is_reported() {
        // adding a value with denominator 2^10 at cap 12 leaves two known digits
        let tiny = PAdic::from_frac(2, 12, 1, 10);
        let x = tiny.add(&PAdic::one(2, 12)).sub(&tiny);
        assert_eq!(x.to_residue(2).unwrap(), 1);
        assert!(matches!(x.to_residue(3), Err(Error::PrecisionOverflow(_))));
    }

    #[test]
    fn odd_prime() {
        let a = PAdic::from_frac(3, 10, 2, 1); // 2/3
        let b = PAdic::from_frac(3, 10, 1, 1); // 1/3
        assert_eq!(a.add(&b).to_residue(5).unwrap(), 1);
        assert_eq!(word_cap(3), 39);
        assert_eq!(word_cap(2), 61);
    }
}
