//! Total Steenrod operation on Chow groups mod 2 of split quadrics and their
//! products, the `η` homomorphism on BP coefficient monomials, and the Chow
//! traces `φ^{t^r}` of symmetric operations.
//!
//! On the standard basis
//! `St(h^i) = h^i (t+h)^i` and `St(l_i) = l_i (t+h)^{D+1-i} t^{-1}`,
//! with the same rule for `l̃_d` as for `l_d`. Every binomial coefficient is
//! taken mod 2 through Lucas's theorem.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corr::Correspondence;
use crate::error::{Error, Result};
use crate::quadring::{Basis, QuadClass, SplitQuadric, TheoryKind};

/// `C(a, b) mod 2`, digit by digit in base 2.
pub fn lucas_binom_mod2(a: u64, b: u64) -> u8 {
    let (mut a, mut b) = (a, b);
    while b > 0 {
        if (b & 1) > (a & 1) {
            return 0;
        }
        a >>= 1;
        b >>= 1;
    }
    1
}

/// A Laurent polynomial in `t` with class coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentClassPoly<T> {
    terms: BTreeMap<i64, T>,
}

impl<T> LaurentClassPoly<T> {
    pub fn terms(&self) -> &BTreeMap<i64, T> {
        &self.terms
    }
    pub fn coeff(&self, e: i64) -> Option<&T> {
        self.terms.get(&e)
    }
    /// Whether no negative power of `t` occurs.
    pub fn is_power_series(&self) -> bool {
        self.terms.keys().all(|&e| e >= 0)
    }
}

impl LaurentClassPoly<QuadClass> {
    fn empty() -> Self {
        LaurentClassPoly { terms: BTreeMap::new() }
    }

    fn push(&mut self, e: i64, x: QuadClass) {
        if x.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&e) {
            Some(y) => y.add(&x),
            None => x,
        };
        if !merged.is_zero() {
            self.terms.insert(e, merged);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, x) in &o.terms {
            out.push(*e, x.clone());
        }
        out
    }

    pub fn mul(&self, q: &SplitQuadric, o: &Self) -> Result<Self> {
        let mut out = Self::empty();
        for (e1, x) in &self.terms {
            for (e2, y) in &o.terms {
                out.push(e1 + e2, q.mul(x, y)?);
            }
        }
        Ok(out)
    }
}

impl LaurentClassPoly<Correspondence> {
    fn push_corr(&mut self, e: i64, x: Correspondence) -> Result<()> {
        if x.is_zero() {
            return Ok(());
        }
        let merged = match self.terms.remove(&e) {
            Some(y) => y.add(&x)?,
            None => x,
        };
        if !merged.is_zero() {
            self.terms.insert(e, merged);
        }
        Ok(())
    }
}

fn require_chow_mod2(q: &SplitQuadric) -> Result<()> {
    let th = q.theory();
    if th.kind() != TheoryKind::Chow || !th.is_mod2() {
        return Err(Error::TheoryMismatch("Steenrod operations act on Chow groups mod 2".into()));
    }
    Ok(())
}

fn steenrod_basis(q: &SplitQuadric, b: Basis) -> LaurentClassPoly<QuadClass> {
    let mut out = LaurentClassPoly::empty();
    let dd = q.dim() as i64;
    match b {
        Basis::H(i) => {
            let i = i as i64;
            for k in 0..=i {
                if lucas_binom_mod2(i as u64, k as u64) == 1 {
                    out.push(i - k, q.h(i + k));
                }
            }
        }
        Basis::L(_) | Basis::LTilde => {
            let i = match b {
                Basis::L(i) => i as i64,
                _ => q.d() as i64,
            };
            let top = dd + 1 - i;
            for k in 0..=top {
                if lucas_binom_mod2(top as u64, k as u64) == 0 {
                    continue;
                }
                let class = if k == 0 {
                    q.basis_class(b)
                } else {
                    q.mul(&q.h(k), &q.basis_class(b)).expect("same quadric")
                };
                out.push(dd - i - k, class);
            }
        }
    }
    out
}

/// `St(x)` for a class on a split quadric, Chow groups mod 2.
pub fn steenrod_total(q: &SplitQuadric, x: &QuadClass) -> Result<LaurentClassPoly<QuadClass>> {
    require_chow_mod2(q)?;
    let mut out = LaurentClassPoly::empty();
    for (b, c) in x.terms() {
        // coefficients are in F_2, so c = 1
        debug_assert!(c.is_one());
        out = out.add(&steenrod_basis(q, *b));
    }
    Ok(out)
}

/// `St` on `A(Q1 × Q2)`, by multiplicativity on Künneth factors.
pub fn steenrod_product(c: &Correspondence) -> Result<LaurentClassPoly<Correspondence>> {
    let (q1, q2) = (c.source(), c.target());
    require_chow_mod2(q1)?;
    require_chow_mod2(q2)?;
    let mut out = LaurentClassPoly { terms: BTreeMap::new() };
    for (a, b) in c.terms().keys() {
        let sa = steenrod_basis(q1, *a);
        let sb = steenrod_basis(q2, *b);
        for (e1, x) in sa.terms() {
            for (e2, y) in sb.terms() {
                out.push_corr(e1 + e2, Correspondence::product(q1, q2, x, y))?;
            }
        }
    }
    Ok(out)
}

/// The graded codimension of a basis pair.
fn pair_codim(c: &Correspondence, a: Basis, b: Basis) -> u32 {
    c.source().codim(a) + c.target().codim(b)
}

/// Maximal codimension of a term in a `t`-polynomial of correspondences.
pub fn max_codim(p: &LaurentClassPoly<Correspondence>) -> Option<u32> {
    p.terms()
        .values()
        .flat_map(|c| c.terms().keys().map(move |(a, b)| pair_codim(c, *a, *b)))
        .max()
}

/// Outcome of the Steenrod lemma for `D = 2^n - 1 + r`, `0 < r < 2^n`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub n: u32,
    pub r: u64,
    pub dim: u64,
    /// `St(l_0) = l_0 t^D`.
    pub item1: bool,
    /// For every `m < n`: whether `l_{2^n-2^m}` is a basis element, and
    /// whether `St(l_{2^n-2^m})` has a summand `l_0 t^c`.
    pub l0_summands: Vec<(u32, bool, bool)>,
    /// `(m, x)` with `r = 2^{n-1} + … + 2^{m+1} + x`, `x < 2^m`; absent for `r = 2^n - 1`.
    pub predicted: Option<(u32, u64)>,
    pub item2: Option<bool>,
    pub item3: Option<bool>,
    pub item4: Option<bool>,
    pub item5: Option<bool>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.item1
            && [self.item2, self.item3, self.item4, self.item5].iter().all(|x| x.unwrap_or(true))
    }
}

/// Terms `(index, t-exponent)` of `l_a (t+h)^{D+1-a} t^{-1}` read formally,
/// that is without requiring `l_a` to be a basis element.
pub fn formal_st_l(dim: u64, a: u64) -> Vec<(u64, i64)> {
    let top = dim + 1 - a;
    (0..=top.min(a))
        .filter(|&k| lucas_binom_mod2(top, k) == 1)
        .map(|k| (a - k, dim as i64 - a as i64 - k as i64))
        .collect()
}

/// The highest zero digit among the `n` lower binary digits of `r`, and the
/// remainder below it.
pub fn predicted_m(n: u32, r: u64) -> Option<(u32, u64)> {
    (0..n).rev().find(|&m| r & (1 << m) == 0).map(|m| (m, r & ((1 << m) - 1)))
}

pub fn steenrod_lemma_predicates(n: u32, r: u64) -> Result<LemmaReport> {
    if n == 0 || r == 0 || r >= (1u64 << n) {
        return Err(Error::InvalidArgument(format!("need 0 < r < 2^n, got n = {n}, r = {r}")));
    }
    let dim = (1u64 << n) - 1 + r;
    let q = SplitQuadric::new(dim as u32, crate::quadring::Theory::chow_mod2(dim as usize + 1))?;
    let d = q.d() as u64;
    let l = |i: u64| q.basis_class(Basis::L(i as u32));
    let st = |i: u64| steenrod_basis(&q, Basis::L(i as u32));
    let has_l = |p: &LaurentClassPoly<QuadClass>, idx: u64, e: Option<i64>| {
        p.terms().iter().any(|(k, x)| {
            e.is_none_or(|e| e == *k) && x.terms().contains_key(&Basis::L(idx as u32))
        })
    };

    let st0 = st(0);
    let item1 = st0.terms().len() == 1 && st0.coeff(dim as i64) == Some(&l(0));

    let mut l0_summands = Vec::new();
    for m in 0..n {
        let a = (1u64 << n) - (1u64 << m);
        let in_basis = a <= d;
        let has = if in_basis {
            has_l(&st(a), 0, None)
        } else {
            formal_st_l(dim, a).iter().any(|&(i, _)| i == 0)
        };
        l0_summands.push((m, in_basis, has));
    }
    let predicted = if r == (1u64 << n) - 1 { None } else { predicted_m(n, r) };
    let (item2, item3, item4, item5) = match predicted {
        None => (Some(l0_summands.iter().all(|&(_, _, h)| !h)), None, None, None),
        Some((m, x)) => {
            let hits: Vec<u32> = l0_summands.iter().filter(|s| s.2).map(|s| s.0).collect();
            let item3 = hits == vec![m];
            let a = (1u64 << n) - (1u64 << m);
            let target = (1u64 << m) - x;
            let texp = (1i64 << m) - 1;
            let item4 = if a <= d {
                has_l(&st(a), target, Some(texp))
            } else {
                formal_st_l(dim, a).contains(&(target, texp))
            };
            let mut item5 = true;
            for qq in 0..=n {
                if qq == m {
                    continue;
                }
                let b = (1u64 << n) - (1u64 << qq);
                if b <= d && target <= d && has_l(&st(b), target, None) {
                    item5 = false;
                }
            }
            (None, Some(item3), Some(item4), Some(item5))
        }
    };
    Ok(LemmaReport {
        n,
        r,
        dim,
        item1,
        l0_summands,
        predicted,
        item2,
        item3,
        item4,
        item5,
    })
}

/// One failing case of the codimension bound on `Q2 × Q1`.
#[derive(Clone, Debug, Serialize)]
pub struct CodimViolation {
    pub dims: (u32, u32),
    pub m: u32,
    pub s: u32,
    pub a: u32,
    pub b: u32,
    pub kind: &'static str,
    pub codim: u32,
}

/// Checks that `St(h^a × l_b)` and `St(l_b × h^a)` on `Q2 × Q1` lie in
/// codimension `< D1 - s` for the admissible `a`, `b`, with `D_j` equal to
/// `2^{n+1} - 2` or `2^{n+1} - 3`.
pub fn product_codim_bound(n: u32) -> Result<(usize, Vec<CodimViolation>)> {
    let mut checked = 0;
    let mut bad = Vec::new();
    let top = (1u32 << (n + 1)) - 2;
    for d1 in [top, top - 1] {
        for d2 in [top, top - 1] {
            let q1 = SplitQuadric::new(d1, crate::quadring::Theory::chow_mod2(d1 as usize + 1))?;
            let q2 = SplitQuadric::new(d2, crate::quadring::Theory::chow_mod2(d2 as usize + 1))?;
            for m in 0..n {
                for s in 0..(1u32 << n) {
                    let shift = s + (1 << n) - (1 << m);
                    for a in 0..=q2.d() {
                        let b = a + shift;
                        if b > q1.d() {
                            continue;
                        }
                        let c = Correspondence::product(
                            &q2,
                            &q1,
                            &q2.basis_class(Basis::H(a)),
                            &q1.basis_class(Basis::L(b)),
                        );
                        checked += 1;
                        if let Some(mc) = max_codim(&steenrod_product(&c)?) {
                            if mc >= d1 - s {
                                bad.push(CodimViolation {
                                    dims: (d1, d2),
                                    m,
                                    s,
                                    a,
                                    b,
                                    kind: "h^a x l_b",
                                    codim: mc,
                                });
                            }
                        }
                    }
                    for a in 0..=q1.d() {
                        let b = a as i64 + d2 as i64 - d1 as i64 + shift as i64;
                        if b < 0 || b > q2.d() as i64 {
                            continue;
                        }
                        let b = b as u32;
                        let c = Correspondence::product(
                            &q2,
                            &q1,
                            &q2.basis_class(Basis::L(b)),
                            &q1.basis_class(Basis::H(a)),
                        );
                        checked += 1;
                        if let Some(mc) = max_codim(&steenrod_product(&c)?) {
                            if mc >= d1 - s {
                                bad.push(CodimViolation {
                                    dims: (d1, d2),
                                    m,
                                    s,
                                    a,
                                    b,
                                    kind: "l_b x h^a",
                                    codim: mc,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((checked, bad))
}

/// A monomial `2^k · Π v_r^{e_r}` in `BP(pt)`, `p = 2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BPMonomial {
    pub p_exponent: u32,
    pub v_exponents: BTreeMap<u32, u32>,
}

impl BPMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn v(r: u32) -> Self {
        assert!(r >= 1, "v_r needs r ≥ 1");
        BPMonomial { p_exponent: 0, v_exponents: [(r, 1)].into_iter().collect() }
    }

    pub fn p() -> Self {
        BPMonomial { p_exponent: 1, v_exponents: BTreeMap::new() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut v = self.v_exponents.clone();
        for (r, e) in &o.v_exponents {
            *v.entry(*r).or_insert(0) += e;
        }
        v.retain(|_, e| *e > 0);
        BPMonomial { p_exponent: self.p_exponent + o.p_exponent, v_exponents: v }
    }

    /// `Σ e_r (2^r - 1)`, so that the monomial lies in `BP^{-d}(pt)`.
    pub fn d(&self) -> i64 {
        self.v_exponents.iter().map(|(r, e)| *e as i64 * ((1i64 << r) - 1)).sum()
    }

    /// Cohomological degree `-d`.
    pub fn degree(&self) -> i64 {
        -self.d()
    }

    pub fn total_v_exponent(&self) -> u32 {
        self.v_exponents.values().sum()
    }
}

/// `η` mod 2 on a monomial: `1` on `1` and on each `v_r`, zero on multiples of
/// `p` and on products of at least two generators.
pub fn eta(m: &BPMonomial) -> u8 {
    u8::from(m.p_exponent == 0 && m.total_v_exponent() <= 1)
}

/// Classes admitting Steenrod operations and squares, so that traces can be
/// computed on single quadrics and on products alike.
pub trait SteenrodClass: Sized + Clone {
    fn st(&self) -> Result<Vec<(i64, Self)>>;
    fn square(&self) -> Result<Self>;
    fn zero_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Result<Self>;
}

/// A quadric class paired with its quadric.
#[derive(Clone, Debug)]
pub struct OnQuadric {
    pub quadric: SplitQuadric,
    pub class: QuadClass,
}

impl SteenrodClass for OnQuadric {
    fn st(&self) -> Result<Vec<(i64, Self)>> {
        Ok(steenrod_total(&self.quadric, &self.class)?
            .terms
            .into_iter()
            .map(|(e, c)| (e, OnQuadric { quadric: self.quadric.clone(), class: c }))
            .collect())
    }
    fn square(&self) -> Result<Self> {
        Ok(OnQuadric {
            quadric: self.quadric.clone(),
            class: self.quadric.mul(&self.class, &self.class)?,
        })
    }
    fn zero_like(&self) -> Self {
        OnQuadric { quadric: self.quadric.clone(), class: self.quadric.zero() }
    }
    fn plus(&self, o: &Self) -> Result<Self> {
        Ok(OnQuadric { quadric: self.quadric.clone(), class: self.class.add(&o.class) })
    }
}

impl SteenrodClass for Correspondence {
    fn st(&self) -> Result<Vec<(i64, Self)>> {
        Ok(steenrod_product(self)?.terms.into_iter().collect())
    }
    fn square(&self) -> Result<Self> {
        self.mul_pointwise(self)
    }
    fn zero_like(&self) -> Self {
        Correspondence::zero(self.source(), self.target())
    }
    fn plus(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
}

/// Coefficient of `St(x)` at `t^e`, which is the trace `st^{t^{-e}}(x)`.
pub fn st_coefficient<C: SteenrodClass>(x: &C, e: i64) -> Result<C> {
    Ok(x.st()?.into_iter().find(|(k, _)| *k == e).map(|(_, c)| c).unwrap_or_else(|| x.zero_like()))
}

/// `φ^{t^r}` of `Σ u_i · x_i`, where `u_i` are BP monomials and `x_i` the Chow
/// images of the cofactors.
///
/// Terms with a `v`-factor contribute `η(u) · st^{t^{r-2d}}(x)`, the
/// coefficient of `t^{2d-r}` in `St(x)`. Multiples of `2` without `v`
/// vanish for `r > 0`; for `r = 0` the term `2x` contributes `x²` and `2^k x`
/// with `k ≥ 2` contributes nothing. A term without any coefficient factor
/// is not determined by its Chow image.
pub fn phi_trace<C: SteenrodClass>(terms: &[(BPMonomial, C)], r: i64) -> Result<C> {
    if r < 0 {
        return Err(Error::InvalidArgument("r must be nonnegative".into()));
    }
    let first = terms.first().ok_or_else(|| Error::InvalidArgument("empty sum".into()))?;
    let mut acc = first.1.zero_like();
    for (u, x) in terms {
        let d = u.d();
        if d > 0 {
            if eta(u) == 1 {
                acc = acc.plus(&st_coefficient(x, 2 * d - r)?)?;
            }
        } else if u.p_exponent == 0 {
            return Err(Error::NotComputable(
                "a summand without a coefficient factor is not determined by traces".into(),
            ));
        } else if r == 0 && u.p_exponent == 1 {
            acc = acc.plus(&x.square()?)?;
        }
    }
    Ok(acc)
}
