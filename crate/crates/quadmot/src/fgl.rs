//! Formal group laws given by a logarithm: the additive law and the
//! Hazewinkel-type Morava laws `log(t) = Σ_k p^{-k} v^{(p^{nk}-1)/(p^n-1)} t^{p^{nk}}`.
//!
//! The law `F(x, y) = exp(log x + log y)` is computed over Laurent
//! polynomials in `v` with p-adic rational coefficients and then reduced to
//! the target [`CoeffRing`]. Reduction fails loudly when a coefficient is not
//! p-integral or not known to the required precision.

use std::collections::BTreeMap;

use crate::coeff::{CoeffElement, CoeffRing};
use crate::error::{Error, Result};
use crate::padic::{checked_pow, word_cap};
use crate::series::{revert, MultiSeries, RatLaurent, Scalar};

/// Default truncation degree `2^{n+1} + 2`.
pub fn default_truncation(n: u32) -> usize {
    (1usize << (n + 1)) + 2
}

/// A logarithm `Σ_{k ≥ 1} c_k t^k`, `c_1 = 1`, truncated at degree `N`.
#[derive(Clone, Debug)]
pub struct LogSeries {
    ring: CoeffRing,
    truncation: usize,
    cap: u32,
    coeffs: Vec<RatLaurent>,
}

impl LogSeries {
    pub fn ring(&self) -> CoeffRing {
        self.ring
    }
    pub fn truncation(&self) -> usize {
        self.truncation
    }
    /// Coefficient of `t^k` (zero beyond the truncation).
    pub fn coeff(&self, k: usize) -> RatLaurent {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| RatLaurent::zero(self.ring.prime(), self.cap))
    }
    /// Nonzero terms as `(degree, v-exponent, numerator residue, denominator exponent)`.
    pub fn nonzero_terms(&self) -> Vec<(usize, i32, i64, u32)> {
        let mut out = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            for (&e, x) in c.terms() {
                if let Some(v) = x.valuation() {
                    let den = (-v).max(0) as u32;
                    let num = x.mul_int(checked_pow(self.ring.prime(), den).unwrap() as i64);
                    let m = self.ring.precision();
                    let r = num.to_residue(m).unwrap_or(0) as i64;
                    out.push((k, e, r, den));
                }
            }
        }
        out
    }
}

fn resolve_cap(ring: &CoeffRing, guard: Option<u32>) -> Result<u32> {
    let max = word_cap(ring.prime());
    match guard {
        None => Ok(max),
        Some(k) => {
            let cap = ring.precision() + k;
            if cap > max {
                Err(Error::PrecisionOverflow(format!(
                    "precision M + K = {cap} exceeds the machine word ({max} digits at p = {})",
                    ring.prime()
                )))
            } else {
                Ok(cap)
            }
        }
    }
}

/// The additive logarithm `log(t) = t`.
pub fn additive_log(ring: CoeffRing, truncation: usize) -> LogSeries {
    let cap = word_cap(ring.prime());
    let mut coeffs = vec![RatLaurent::zero(ring.prime(), cap); truncation + 1];
    if truncation >= 1 {
        coeffs[1] = RatLaurent::monomial(ring.prime(), cap, 1, 0, 0);
    }
    LogSeries { ring, truncation, cap, coeffs }
}

/// Morava logarithm of height `n` with the default guard precision.
pub fn morava_log(n: u32, ring: CoeffRing, truncation: usize) -> Result<LogSeries> {
    morava_log_with_guard(n, ring, truncation, None)
}

/// Morava logarithm of height `n`; `guard` is the number of extra p-adic
/// digits carried beyond `M` (defaults to everything a machine word holds).
pub fn morava_log_with_guard(
    n: u32,
    ring: CoeffRing,
    truncation: usize,
    guard: Option<u32>,
) -> Result<LogSeries> {
    if n == 0 || truncation == 0 {
        return Err(Error::InvalidArgument("need n ≥ 1 and N ≥ 1".into()));
    }
    if ring.height() != n {
        return Err(Error::TheoryMismatch(format!(
            "ring has height {}, requested n = {n}",
            ring.height()
        )));
    }
    let cap = resolve_cap(&ring, guard)?;
    let p = ring.prime();
    let q = checked_pow(p, n).unwrap();
    let mut coeffs = vec![RatLaurent::zero(p, cap); truncation + 1];
    let mut k = 0u32;
    let mut deg = 1u64;
    while deg as usize <= truncation {
        if k > cap - ring.precision() {
            return Err(Error::PrecisionOverflow(format!(
                "denominator {p}^{k} needs more guard digits than the {} available",
                cap - ring.precision()
            )));
        }
        let e = ((deg - 1) / (q - 1)) as i32;
        coeffs[deg as usize] = RatLaurent::monomial(p, cap, 1, k, e);
        k += 1;
        deg = match deg.checked_mul(q) {
            Some(x) => x,
            None => break,
        };
    }
    Ok(LogSeries { ring, truncation, cap, coeffs })
}

fn rat_to_coeff(x: &RatLaurent, ring: CoeffRing) -> Result<CoeffElement> {
    let mut terms = Vec::new();
    for (&e, c) in x.terms() {
        let r = c.to_residue(ring.precision())?;
        if r != 0 && ring.height() == 0 && e != 0 {
            return Err(Error::TheoryMismatch("v-term in a ring without v".into()));
        }
        terms.push((e, r));
    }
    Ok(CoeffElement::from_terms(ring, terms))
}

/// A one-dimensional commutative formal group law, truncated at total degree `N`.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw {
    ring: CoeffRing,
    truncation: usize,
    log: LogSeries,
    exp: Vec<RatLaurent>,
    coeffs: BTreeMap<(u32, u32), CoeffElement>,
    two_series: Vec<CoeffElement>,
}

/// Build `F(x, y) = exp(log x + log y)` by series reversion.
pub fn fgl_from_log(log: &LogSeries) -> Result<FormalGroupLaw> {
    let n = log.truncation;
    let p = log.ring.prime();
    let cap = log.cap;
    let one = RatLaurent::monomial(p, cap, 1, 0, 0);
    if n >= 1 {
        let c1 = &log.coeffs[1];
        if c1.minus(&one).terms().values().any(|c| !c.is_zero()) {
            return Err(Error::InvalidArgument("logarithm must start with t".into()));
        }
    }
    let exp = revert(&log.coeffs, n, &one);

    // s = log(x) + log(y) as a bivariate series
    let t = n as u32;
    let mut s = MultiSeries::zero(2, t);
    for (k, c) in log.coeffs.iter().enumerate().skip(1) {
        if c.is_zero_elem() {
            continue;
        }
        s = s.add(&MultiSeries::monomial(2, t, vec![k as u32, 0], c.clone()));
        s = s.add(&MultiSeries::monomial(2, t, vec![0, k as u32], c.clone()));
    }
    let mut f = MultiSeries::zero(2, t);
    let mut power = s.clone();
    for e in exp.iter().skip(1) {
        if !e.is_zero_elem() {
            f = f.add(&power.scale(e));
        }
        power = power.mul(&s);
        if power.is_zero() {
            break;
        }
    }

    let mut coeffs = BTreeMap::new();
    for (k, c) in f.terms() {
        let x = rat_to_coeff(c, log.ring).map_err(|err| match err {
            Error::NonIntegral(m) => {
                Error::NonIntegral(format!("coefficient of x^{} y^{}: {m}", k[0], k[1]))
            }
            other => other,
        })?;
        if !x.is_zero() {
            coeffs.insert((k[0], k[1]), x);
        }
    }
    let mut law = FormalGroupLaw {
        ring: log.ring,
        truncation: n,
        log: log.clone(),
        exp,
        coeffs,
        two_series: Vec::new(),
    };
    law.two_series = law.n_series(2);
    Ok(law)
}

impl FormalGroupLaw {
    pub fn ring(&self) -> CoeffRing {
        self.ring
    }
    pub fn truncation(&self) -> usize {
        self.truncation
    }
    pub fn log(&self) -> &LogSeries {
        &self.log
    }
    pub fn exp_coeffs(&self) -> &[RatLaurent] {
        &self.exp
    }
    pub fn coeffs(&self) -> &BTreeMap<(u32, u32), CoeffElement> {
        &self.coeffs
    }

    /// Coefficient of `x^i y^j`.
    pub fn coeff(&self, i: u32, j: u32) -> CoeffElement {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(|| CoeffElement::zero(self.ring))
    }

    /// `b_k`, the coefficient of `t^k` in `[2]_F(t)`; `None` beyond the truncation.
    pub fn b(&self, k: usize) -> Option<CoeffElement> {
        self.two_series.get(k).cloned()
    }

    pub fn two_series(&self) -> &[CoeffElement] {
        &self.two_series
    }

    /// `F(a, b)` for univariate series `a`, `b` without constant term.
    pub fn apply_univariate(&self, a: &[CoeffElement], b: &[CoeffElement]) -> Vec<CoeffElement> {
        let t = self.truncation as u32;
        let to_ms = |s: &[CoeffElement]| {
            let mut m = MultiSeries::zero(1, t);
            for (k, c) in s.iter().enumerate().take(self.truncation + 1) {
                m = m.add(&MultiSeries::monomial(1, t, vec![k as u32], c.clone()));
            }
            m
        };
        let out = self.as_series().substitute(&[to_ms(a), to_ms(b)], &CoeffElement::one(self.ring));
        (0..=self.truncation)
            .map(|k| {
                out.coeff(&[k as u32]).cloned().unwrap_or_else(|| CoeffElement::zero(self.ring))
            })
            .collect()
    }

    /// The law as a bivariate series.
    pub fn as_series(&self) -> MultiSeries<CoeffElement> {
        let t = self.truncation as u32;
        let mut m = MultiSeries::zero(2, t);
        for (&(i, j), c) in &self.coeffs {
            m = m.add(&MultiSeries::monomial(2, t, vec![i, j], c.clone()));
        }
        m
    }

    /// `[m]_F(t)`: `[0] = 0`, `[m] = F(t, [m-1])`.
    pub fn n_series(&self, m: u32) -> Vec<CoeffElement> {
        let zero = CoeffElement::zero(self.ring);
        let mut acc = vec![zero.clone(); self.truncation + 1];
        if m == 0 {
            return acc;
        }
        let mut t = vec![zero; self.truncation + 1];
        if self.truncation >= 1 {
            t[1] = CoeffElement::one(self.ring);
        }
        acc = t.clone();
        for _ in 1..m {
            acc = self.apply_univariate(&t, &acc);
        }
        acc
    }

    /// Class of `P^i` in the coefficient ring, `(i + 1)` times the log
    /// coefficient of `t^{i+1}`.
    pub fn projective_space_class(&self, i: usize) -> Result<CoeffElement> {
        if i + 1 > self.truncation {
            return Err(Error::Truncation(format!(
                "[P^{i}] needs the logarithm up to degree {}, truncation is {}",
                i + 1,
                self.truncation
            )));
        }
        rat_to_coeff(&self.log.coeffs[i + 1].mul_int(i as i64 + 1), self.ring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PAdic;

    fn frac(x: &RatLaurent, e: i32) -> Option<PAdic> {
        x.terms().get(&e).copied()
    }

    #[test]
    fn height_one_log_terms() {
        let r = CoeffRing::integral(8, 1);
        let log = morava_log(1, r, 8).unwrap();
        let expect = [(1usize, 0i32, 0u32), (2, 1, 1), (4, 3, 2), (8, 7, 3)];
        for (k, e, den) in expect {
            let c = frac(&log.coeff(k), e).unwrap();
            assert_eq!(c.valuation(), Some(-(den as i32)));
        }
        for k in [3usize, 5, 6, 7] {
            assert!(log.coeff(k).is_zero_elem());
        }
    }

    #[test]
    fn height_two_log_starts_at_t4() {
        let log = morava_log(2, CoeffRing::integral(8, 2), 3).unwrap();
        assert_eq!(log.nonzero_terms(), vec![(1, 0, 1, 0)]);
    }

    #[test]
    fn additive_law() {
        let r = CoeffRing::integral(8, 0);
        let f = fgl_from_log(&additive_log(r, 6)).unwrap();
        assert_eq!(f.coeffs().len(), 2);
        assert!(f.coeff(1, 0).is_one() && f.coeff(0, 1).is_one());
        let three = f.n_series(3);
        assert_eq!(three[1], CoeffElement::from_int(r, 3));
        assert!(three.iter().skip(2).all(|c| c.is_zero()));
    }

    #[test]
    fn height_one_two_series() {
        let r = CoeffRing::integral(8, 1);
        let f = fgl_from_log(&morava_log(1, r, 2).unwrap()).unwrap();
        assert_eq!(f.b(1).unwrap(), CoeffElement::from_int(r, 2));
        let (c, e) = f.b(2).unwrap().as_monomial().unwrap();
        assert_eq!(e, 1);
        assert_eq!(c % 2, 1);
    }

    #[test]
    fn point_classes() {
        let r = CoeffRing::integral(8, 1);
        let f = fgl_from_log(&morava_log(1, r, 4).unwrap()).unwrap();
        assert!(f.projective_space_class(0).unwrap().is_one());
        assert_eq!(f.projective_space_class(1).unwrap(), CoeffElement::v(r));
        let r2 = CoeffRing::mod2(2);
        let f2 = fgl_from_log(&morava_log(2, r2, 6).unwrap()).unwrap();
        assert!(f2.projective_space_class(3).unwrap().is_zero());
    }

    #[test]
    fn two_series_shape_up_to_height_three() {
        for n in 1..=3u32 {
            let r = CoeffRing::integral(8, n);
            let f = fgl_from_log(&morava_log(n, r, default_truncation(n)).unwrap()).unwrap();
            let q = 1usize << n;
            assert_eq!(f.b(1).unwrap(), CoeffElement::from_int(r, 2));
            for k in 2..q {
                assert!(f.b(k).unwrap().is_zero(), "n={n} k={k}");
            }
            let (c, e) = f.b(q).unwrap().as_monomial().unwrap();
            assert_eq!((c % 2, e), (1, 1));
        }
    }

    #[test]
    fn small_guard_overflows() {
        let r = CoeffRing::integral(8, 1);
        assert!(matches!(
            morava_log_with_guard(1, r, 16, Some(2)),
            Err(Error::PrecisionOverflow(_))
        ));
    }
}
