//! Truncated power series in one or several variables over a generic
//! coefficient type.

use std::collections::BTreeMap;

use crate::coeff::CoeffElement;
use crate::padic::PAdic;

/// Minimal ring interface used by the series code.
pub trait Scalar: Clone + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
}

impl Scalar for CoeffElement {
    fn zero_like(&self) -> Self {
        CoeffElement::zero(self.ring())
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
}

/// Laurent polynomial in `v` with p-adic rational coefficients; the
/// coefficient type of logarithms and exponentials.
#[derive(Clone, Debug)]
pub struct RatLaurent {
    p: u64,
    cap: u32,
    terms: BTreeMap<i32, PAdic>,
}

impl RatLaurent {
    pub fn zero(p: u64, cap: u32) -> Self {
        RatLaurent { p, cap, terms: BTreeMap::new() }
    }

    /// `(num / p^den_exp) v^e`.
    pub fn monomial(p: u64, cap: u32, num: i64, den_exp: u32, e: i32) -> Self {
        let mut x = Self::zero(p, cap);
        let c = PAdic::from_frac(p, cap, num, den_exp);
        if !c.is_exact_zero() {
            x.terms.insert(e, c);
        }
        x
    }

    pub fn terms(&self) -> &BTreeMap<i32, PAdic> {
        &self.terms
    }

    pub fn mul_int(&self, n: i64) -> Self {
        RatLaurent {
            terms: self.terms.iter().map(|(&e, c)| (e, c.mul_int(n))).collect(),
            ..self.clone()
        }
    }

    fn insert_sum(&mut self, e: i32, c: PAdic) {
        let slot = self.terms.entry(e).or_insert_with(|| PAdic::zero(self.p, self.cap));
        *slot = slot.add(&c);
        if slot.is_exact_zero() {
            self.terms.remove(&e);
        }
    }
}

impl Scalar for RatLaurent {
    fn zero_like(&self) -> Self {
        Self::zero(self.p, self.cap)
    }
    fn is_zero_elem(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }
    fn plus(&self, o: &Self) -> Self {
        let mut x = self.clone();
        for (&e, c) in &o.terms {
            x.insert_sum(e, *c);
        }
        x
    }
    fn minus(&self, o: &Self) -> Self {
        let mut x = self.clone();
        for (&e, c) in &o.terms {
            x.insert_sum(e, c.neg());
        }
        x
    }
    fn times(&self, o: &Self) -> Self {
        let mut x = self.zero_like();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &o.terms {
                x.insert_sum(e1 + e2, c1.mul(c2));
            }
        }
        x
    }
}

/// Product of univariate series truncated at degree `n` (inclusive).
pub fn mul_trunc<C: Scalar>(a: &[C], b: &[C], n: usize, zero: &C) -> Vec<C> {
    let mut out = vec![zero.clone(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero_elem() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            if y.is_zero_elem() {
                continue;
            }
            out[i + j] = out[i + j].plus(&x.times(y));
        }
    }
    out
}

/// `f(g(t))` truncated at degree `n`; `g` must have zero constant term.
pub fn compose<C: Scalar>(f: &[C], g: &[C], n: usize, zero: &C) -> Vec<C> {
    let mut out = vec![zero.clone(); n + 1];
    if let Some(c0) = f.first() {
        out[0] = c0.clone();
    }
    let mut power = g.to_vec();
    power.resize(n + 1, zero.clone());
    for c in f.iter().skip(1).take(n) {
        if !c.is_zero_elem() {
            for (o, p) in out.iter_mut().zip(&power) {
                *o = o.plus(&c.times(p));
            }
        }
        power = mul_trunc(&power, g, n, zero);
    }
    out
}

/// Compositional inverse of `f = t + O(t^2)`, truncated at degree `n`.
///
/// Solves `f(e(t)) = t` one coefficient at a time: with `e_1 .. e_{m-1}`
/// known, the coefficient of `t^m` in `f(e)` is `e_m + c_m`, where `c_m`
/// only involves the earlier coefficients.
pub fn revert<C: Scalar>(f: &[C], n: usize, one: &C) -> Vec<C> {
    let zero = one.zero_like();
    let mut e = vec![zero.clone(); n + 1];
    if n >= 1 {
        e[1] = one.clone();
    }
    for m in 2..=n {
        let val = compose(f, &e[..m], m, &zero);
        e[m] = zero.minus(&val[m]);
    }
    e
}

/// Sparse truncated series in `nvars` variables; monomials of total degree
/// above `trunc` are discarded.
#[derive(Clone, Debug)]
pub struct MultiSeries<C> {
    nvars: usize,
    trunc: u32,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Scalar> MultiSeries<C> {
    pub fn zero(nvars: usize, trunc: u32) -> Self {
        MultiSeries { nvars, trunc, terms: BTreeMap::new() }
    }

    pub fn monomial(nvars: usize, trunc: u32, exps: Vec<u32>, c: C) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut s = Self::zero(nvars, trunc);
        if exps.iter().sum::<u32>() <= trunc && !c.is_zero_elem() {
            s.terms.insert(exps, c);
        }
        s
    }

    /// The variable `x_i` with coefficient `one`.
    pub fn var(nvars: usize, trunc: u32, i: usize, one: C) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, trunc, e, one)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn trunc(&self) -> u32 {
        self.trunc
    }
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C> {
        &self.terms
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&C> {
        self.terms.get(exps)
    }

    fn accumulate(&mut self, k: Vec<u32>, c: C) {
        if c.is_zero_elem() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(slot) => {
                *slot = slot.plus(&c);
                if slot.is_zero_elem() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (k, c) in &o.terms {
            s.accumulate(k.clone(), c.clone());
        }
        s
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut s = Self::zero(self.nvars, self.trunc);
        for (k, x) in &self.terms {
            s.accumulate(k.clone(), x.times(c));
        }
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut s = Self::zero(self.nvars, self.trunc.min(o.trunc));
        for (ka, a) in &self.terms {
            let da: u32 = ka.iter().sum();
            for (kb, b) in &o.terms {
                let db: u32 = kb.iter().sum();
                if da + db > s.trunc {
                    continue;
                }
                let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                s.accumulate(k, a.times(b));
            }
        }
        s
    }

    /// Substitute the series `args[i]` for the variable `x_i`. Every argument
    /// must have zero constant term.
    pub fn substitute(&self, args: &[MultiSeries<C>], one: &C) -> MultiSeries<C> {
        assert_eq!(args.len(), self.nvars);
        let out_vars = args[0].nvars;
        let trunc = args[0].trunc;
        let mut powers: Vec<Vec<MultiSeries<C>>> = Vec::new();
        for a in args {
            let mut ps = vec![MultiSeries::monomial(out_vars, trunc, vec![0; out_vars], one.clone())];
            for _ in 0..trunc {
                let next = ps.last().unwrap().mul(a);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = MultiSeries::zero(out_vars, trunc);
        for (k, c) in &self.terms {
            let mut term = MultiSeries::monomial(out_vars, trunc, vec![0; out_vars], c.clone());
            for (i, &e) in k.iter().enumerate() {
                if e as usize >= powers[i].len() {
                    term = MultiSeries::zero(out_vars, trunc);
                    break;
                }
                term = term.mul(&powers[i][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
