//! The free standard-basis module `A(Q)` of a split quadric of dimension `D`.
//!
//! With `d = ⌊D/2⌋` the basis is `h^0 .. h^d, l_0 .. l_d` for odd `D`, and
//! `h^0 .. h^{d-1}, l_0 .. l_d, l̃_d` for even `D`. In the even case `h^d` is
//! not a basis element; it is expanded through
//! `h^d = l_d + l̃_d + Σ_{i=1}^{d} b_{i+1} l_{d-i}`.
//! Higher powers follow `h^k = Σ_{j=1}^{D+1-k} b_j l_{D+1-k-j}` for `k > d`,
//! where `b_j` are the coefficients of the 2-series of the theory.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffElement, CoeffRing};
use crate::error::{Error, Result};
use crate::fgl::{additive_log, default_truncation, fgl_from_log, morava_log, FormalGroupLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoryKind {
    Chow,
    Morava(u32),
    ConnectiveMorava(u32),
}

/// An oriented theory: its formal group law over a coefficient ring, with
/// the 2-series and point classes `[P^i]` precomputed.
#[derive(Debug)]
pub struct Theory {
    kind: TheoryKind,
    fgl: FormalGroupLaw,
    points: Vec<CoeffElement>,
}

impl PartialEq for Theory {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
            && self.fgl.ring() == o.fgl.ring()
            && self.fgl.truncation() == o.fgl.truncation()
    }
}

impl Theory {
    pub fn new(kind: TheoryKind, ring: CoeffRing, truncation: usize) -> Result<Arc<Theory>> {
        let log = match kind {
            TheoryKind::Chow => {
                if ring.height() != 0 {
                    return Err(Error::TheoryMismatch("Chow groups use a ring without v".into()));
                }
                additive_log(ring, truncation)
            }
            TheoryKind::Morava(n) => {
                if ring.is_connective() {
                    return Err(Error::TheoryMismatch("Morava K-theory inverts v".into()));
                }
                morava_log(n, ring, truncation)?
            }
            TheoryKind::ConnectiveMorava(n) => {
                if !ring.is_connective() {
                    return Err(Error::TheoryMismatch(
                        "connective Morava K-theory needs a connective ring".into(),
                    ));
                }
                morava_log(n, ring, truncation)?
            }
        };
        let fgl = fgl_from_log(&log)?;
        let points = (0..truncation).map(|i| fgl.projective_space_class(i)).collect::<Result<_>>()?;
        Ok(Arc::new(Theory { kind, fgl, points }))
    }

    /// Chow groups mod 2.
    pub fn chow_mod2(truncation: usize) -> Arc<Theory> {
        Self::new(TheoryKind::Chow, CoeffRing::chow_mod2(), truncation).expect("valid theory")
    }

    /// Chow groups with coefficients `Z/2^M`.
    pub fn chow_integral(precision: u32, truncation: usize) -> Arc<Theory> {
        Self::new(TheoryKind::Chow, CoeffRing::integral(precision, 0), truncation)
            .expect("valid theory")
    }

    /// `K(n)` with `F_2[v_n^{±1}]` coefficients.
    pub fn morava_mod2(n: u32, truncation: usize) -> Result<Arc<Theory>> {
        Self::new(TheoryKind::Morava(n), CoeffRing::mod2(n), truncation)
    }

    /// The integral Morava theory with coefficients `Z/2^M [v_n^{±1}]`.
    pub fn morava_integral(n: u32, precision: u32, truncation: usize) -> Result<Arc<Theory>> {
        Self::new(TheoryKind::Morava(n), CoeffRing::integral(precision, n), truncation)
    }

    /// `CK(n)` with `F_2[v_n]` coefficients.
    pub fn connective_morava_mod2(n: u32, truncation: usize) -> Result<Arc<Theory>> {
        Self::new(TheoryKind::ConnectiveMorava(n), CoeffRing::mod2(n).connective(), truncation)
    }

    /// Truncation large enough for quadrics of dimension `dim` and for the
    /// default `2^{n+1} + 2`.
    pub fn truncation_for(kind: TheoryKind, dim: u32) -> usize {
        let base = match kind {
            TheoryKind::Chow => 0,
            TheoryKind::Morava(n) | TheoryKind::ConnectiveMorava(n) => default_truncation(n),
        };
        base.max(dim as usize + 1)
    }

    pub fn kind(&self) -> TheoryKind {
        self.kind
    }
    pub fn ring(&self) -> CoeffRing {
        self.fgl.ring()
    }
    pub fn fgl(&self) -> &FormalGroupLaw {
        &self.fgl
    }
    pub fn truncation(&self) -> usize {
        self.fgl.truncation()
    }
    /// Height `n`, zero for Chow groups.
    pub fn height(&self) -> u32 {
        match self.kind {
            TheoryKind::Chow => 0,
            TheoryKind::Morava(n) | TheoryKind::ConnectiveMorava(n) => n,
        }
    }

    /// Whether the coefficients are `F_2`-based (mod 2 reduction).
    pub fn is_mod2(&self) -> bool {
        self.ring().prime() == 2 && self.ring().modulus() == 2
    }

    pub fn b(&self, k: usize) -> CoeffElement {
        self.fgl.b(k).expect("truncation checked by the quadric")
    }

    pub fn point_class(&self, i: usize) -> CoeffElement {
        self.points[i].clone()
    }
}

/// Standard basis elements. `H(k)` stands for `h^k`, `LTilde` for `l̃_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    H(u32),
    L(u32),
    LTilde,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::H(0) => write!(f, "1"),
            Basis::H(1) => write!(f, "h"),
            Basis::H(k) => write!(f, "h^{k}"),
            Basis::L(i) => write!(f, "l_{i}"),
            Basis::LTilde => write!(f, "l~"),
        }
    }
}

/// An element of `A(Q)` in canonical sparse form: zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadClass {
    dim: u32,
    ring: CoeffRing,
    terms: BTreeMap<Basis, CoeffElement>,
}

impl QuadClass {
    pub fn zero(dim: u32, ring: CoeffRing) -> Self {
        QuadClass { dim, ring, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn ring(&self) -> CoeffRing {
        self.ring
    }
    pub fn terms(&self) -> &BTreeMap<Basis, CoeffElement> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: Basis) -> CoeffElement {
        self.terms.get(&b).cloned().unwrap_or_else(|| CoeffElement::zero(self.ring))
    }

    pub(crate) fn add_term(&mut self, b: Basis, c: &CoeffElement) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(b).or_insert_with(|| CoeffElement::zero(c.ring()));
        *slot = slot.add(c);
        if slot.is_zero() {
            self.terms.remove(&b);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.dim, self.ring), (o.dim, o.ring), "classes on different quadrics");
        let mut x = self.clone();
        for (b, c) in &o.terms {
            x.add_term(*b, c);
        }
        x
    }

    pub fn neg(&self) -> Self {
        QuadClass {
            terms: self.terms.iter().map(|(b, c)| (*b, c.neg())).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CoeffElement) -> Self {
        let mut x = QuadClass::zero(self.dim, self.ring);
        for (b, y) in &self.terms {
            x.add_term(*b, &y.mul(c));
        }
        x
    }

    /// Apply a coefficient map termwise, landing in `ring`.
    pub fn map_coeffs(
        &self,
        ring: CoeffRing,
        f: impl Fn(&CoeffElement) -> Result<CoeffElement>,
    ) -> Result<Self> {
        let mut x = QuadClass::zero(self.dim, ring);
        for (b, c) in &self.terms {
            x.add_term(*b, &f(c)?);
        }
        Ok(x)
    }

    /// Codimension of every term, or `None` if the class is not homogeneous
    /// in the graded sense (coefficients of `v` counted by their degree).
    pub fn homogeneous_codim(&self) -> Option<i64> {
        let d = self.dim / 2;
        let mut out = None;
        for (b, c) in &self.terms {
            let cb = match b {
                Basis::H(k) => *k as i64,
                Basis::L(i) => (self.dim - i) as i64,
                Basis::LTilde => (self.dim - d) as i64,
            };
            for &e in c.terms().keys() {
                let total = cb + e as i64 * self.ring.periodicity_degree();
                match out {
                    None => out = Some(total),
                    Some(t) if t != total => return None,
                    _ => {}
                }
            }
        }
        out
    }
}

impl fmt::Display for QuadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| if c.is_one() { b.to_string() } else { format!("({c}) {b}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A split quadric of dimension `D` together with an oriented theory.
#[derive(Clone, Debug)]
pub struct SplitQuadric {
    dim: u32,
    theory: Arc<Theory>,
}

impl PartialEq for SplitQuadric {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && (Arc::ptr_eq(&self.theory, &o.theory) || *self.theory == *o.theory)
    }
}

impl SplitQuadric {
    pub fn new(dim: u32, theory: Arc<Theory>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("quadric dimension must be at least 1".into()));
        }
        if theory.truncation() < dim as usize + 1 {
            return Err(Error::Truncation(format!(
                "a quadric of dimension {dim} needs truncation at least {}, theory has {}",
                dim + 1,
                theory.truncation()
            )));
        }
        Ok(SplitQuadric { dim, theory })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn d(&self) -> u32 {
        self.dim / 2
    }
    pub fn is_even(&self) -> bool {
        self.dim.is_multiple_of(2)
    }
    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }
    pub fn ring(&self) -> CoeffRing {
        self.theory.ring()
    }

    /// The standard basis in a fixed order.
    pub fn basis(&self) -> Vec<Basis> {
        let d = self.d();
        let top = if self.is_even() { d } else { d + 1 };
        let mut out: Vec<Basis> = (0..top).map(Basis::H).collect();
        out.extend((0..=d).map(Basis::L));
        if self.is_even() {
            out.push(Basis::LTilde);
        }
        out
    }

    pub fn contains(&self, b: Basis) -> bool {
        let d = self.d();
        match b {
            Basis::H(k) => k < d || (k == d && !self.is_even()),
            Basis::L(i) => i <= d,
            Basis::LTilde => self.is_even(),
        }
    }

    pub fn codim(&self, b: Basis) -> u32 {
        match b {
            Basis::H(k) => k,
            Basis::L(i) => self.dim - i,
            Basis::LTilde => self.dim - self.d(),
        }
    }

    pub fn zero(&self) -> QuadClass {
        QuadClass::zero(self.dim, self.ring())
    }

    pub fn one(&self) -> QuadClass {
        self.basis_class(Basis::H(0))
    }

    fn coeff_one(&self) -> CoeffElement {
        CoeffElement::one(self.ring())
    }

    /// A single basis element; `H(k)` outside the basis is expanded via [`Self::h_power`].
    pub fn basis_class(&self, b: Basis) -> QuadClass {
        if let Basis::H(k) = b {
            if !self.contains(b) {
                return self.h_power_unchecked(k);
            }
        }
        assert!(self.contains(b), "{b} is not a basis element for D = {}", self.dim);
        let mut x = self.zero();
        x.add_term(b, &self.coeff_one());
        x
    }

    /// `l_i`, zero for negative `i`.
    pub fn l(&self, i: i64) -> Result<QuadClass> {
        if i < 0 {
            return Ok(self.zero());
        }
        if i > self.d() as i64 {
            return Err(Error::OutOfRange(format!("l_{i} with d = {}", self.d())));
        }
        Ok(self.basis_class(Basis::L(i as u32)))
    }

    pub fn l_tilde(&self) -> Result<QuadClass> {
        if !self.is_even() {
            return Err(Error::OutOfRange("l~_d exists only in even dimension".into()));
        }
        Ok(self.basis_class(Basis::LTilde))
    }

    /// `h^k`, zero for negative `k` or `k > D`.
    pub fn h(&self, k: i64) -> QuadClass {
        if k < 0 {
            self.zero()
        } else {
            self.h_power_unchecked(k as u32)
        }
    }

    /// `h^k` for `0 ≤ k ≤ D` in the standard basis.
    pub fn h_power(&self, k: u32) -> Result<QuadClass> {
        if k > self.dim {
            return Err(Error::OutOfRange(format!("h^{k} on a quadric of dimension {}", self.dim)));
        }
        Ok(self.h_power_unchecked(k))
    }

    fn h_power_unchecked(&self, k: u32) -> QuadClass {
        let (dd, d) = (self.dim, self.d());
        let th = &self.theory;
        let mut x = self.zero();
        if k > dd {
            return x;
        }
        if self.contains(Basis::H(k)) {
            x.add_term(Basis::H(k), &self.coeff_one());
        } else if k == d {
            // even dimension, middle power
            x.add_term(Basis::L(d), &self.coeff_one());
            x.add_term(Basis::LTilde, &self.coeff_one());
            for j in 2..=(d + 1) {
                x.add_term(Basis::L(d + 1 - j), &th.b(j as usize));
            }
        } else {
            let top = dd + 1 - k;
            for j in 1..=top {
                x.add_term(Basis::L(top - j), &th.b(j as usize));
            }
        }
        x
    }

    fn check(&self, x: &QuadClass) -> Result<()> {
        if x.dim != self.dim {
            return Err(Error::QuadricMismatch(format!(
                "class of dimension {} on a quadric of dimension {}",
                x.dim, self.dim
            )));
        }
        if x.ring != self.ring() {
            return Err(Error::TheoryMismatch("class has a different coefficient ring".into()));
        }
        Ok(())
    }

    /// Product of two basis elements.
    pub fn mul_basis(&self, a: Basis, b: Basis) -> QuadClass {
        use Basis::*;
        let (dd, d) = (self.dim, self.d());
        let one = self.coeff_one();
        let mut x = self.zero();
        let middle_square = self.is_even() && dd % 4 == 0;
        match (a, b) {
            (H(i), H(j)) => return self.h_power_unchecked(i + j),
            (H(k), L(i)) | (L(i), H(k)) => {
                if i >= k {
                    x.add_term(L(i - k), &one);
                }
            }
            (H(k), LTilde) | (LTilde, H(k)) => {
                if k == 0 {
                    x.add_term(LTilde, &one);
                } else if d >= k {
                    x.add_term(L(d - k), &one);
                }
            }
            (L(i), L(j)) => {
                if self.is_even() && i == d && j == d && middle_square {
                    x.add_term(L(0), &one);
                }
            }
            (L(i), LTilde) | (LTilde, L(i)) => {
                if self.is_even() && i == d && !middle_square {
                    x.add_term(L(0), &one);
                }
            }
            (LTilde, LTilde) => {
                if middle_square {
                    x.add_term(L(0), &one);
                }
            }
        }
        x
    }

    pub fn mul(&self, x: &QuadClass, y: &QuadClass) -> Result<QuadClass> {
        self.check(x)?;
        self.check(y)?;
        let mut out = self.zero();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                let c = ca.mul(cb);
                if c.is_zero() {
                    continue;
                }
                for (e, ce) in self.mul_basis(*a, *b).terms {
                    out.add_term(e, &ce.mul(&c));
                }
            }
        }
        Ok(out)
    }

    /// Push-forward to the point of a basis element.
    pub fn degree_basis(&self, b: Basis) -> CoeffElement {
        let th = &self.theory;
        match b {
            Basis::L(i) => th.point_class(i as usize),
            Basis::LTilde => th.point_class(self.d() as usize),
            Basis::H(k) => {
                // [Q] = [2]_F(H) in A(P^{D+1}); deg(h^k) = Σ_j b_j [P^{D+1-k-j}]
                let top = self.dim + 1 - k;
                let mut acc = CoeffElement::zero(self.ring());
                for j in 1..=top {
                    acc = acc.add(&th.b(j as usize).mul(&th.point_class((top - j) as usize)));
                }
                acc
            }
        }
    }

    pub fn degree(&self, x: &QuadClass) -> Result<CoeffElement> {
        self.check(x)?;
        let mut acc = CoeffElement::zero(self.ring());
        for (b, c) in &x.terms {
            acc = acc.add(&c.mul(&self.degree_basis(*b)));
        }
        Ok(acc)
    }

    /// `deg(a · b)` for basis elements.
    pub fn pairing(&self, a: Basis, b: Basis) -> CoeffElement {
        self.degree(&self.mul_basis(a, b)).expect("same quadric")
    }

    /// Gram matrix of the intersection pairing in the order of [`Self::basis`].
    pub fn gram(&self) -> Vec<Vec<CoeffElement>> {
        let basis = self.basis();
        basis.iter().map(|a| basis.iter().map(|b| self.pairing(*a, *b)).collect()).collect()
    }

    /// The reflection: swaps `l_d` and `l̃_d` in even dimension, fixes the rest.
    pub fn reflect(&self, x: &QuadClass) -> QuadClass {
        if !self.is_even() {
            return x.clone();
        }
        let d = self.d();
        let mut out = self.zero();
        for (b, c) in &x.terms {
            let nb = match b {
                Basis::L(i) if *i == d => Basis::LTilde,
                Basis::LTilde => Basis::L(d),
                other => *other,
            };
            out.add_term(nb, c);
        }
        out
    }
}
