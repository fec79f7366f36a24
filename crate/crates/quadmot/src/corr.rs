//! Correspondences between split quadrics, the projector families of the
//! Morava and Chow motives of a quadric, the reflection, and normal forms of
//! isomorphisms between Tate-split summands.
//!
//! A correspondence `Σ c · a⊗b` from `Q1` to `Q2` (with `a` a basis element of
//! `Q1` and `b` one of `Q2`) acts by `x ↦ Σ c · deg(a·x) · b`. Composition is
//! `(c⊗d) ∘ (a⊗b) = deg(b·c) · a⊗d`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffElement, CoeffRing};
use crate::error::{Error, Result};
use crate::quadring::{Basis, QuadClass, SplitQuadric, TheoryKind};

#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    source: SplitQuadric,
    target: SplitQuadric,
    terms: BTreeMap<(Basis, Basis), CoeffElement>,
}

impl Correspondence {
    pub fn zero(source: &SplitQuadric, target: &SplitQuadric) -> Self {
        Correspondence { source: source.clone(), target: target.clone(), terms: BTreeMap::new() }
    }

    /// The exterior product `x × y`.
    pub fn product(source: &SplitQuadric, target: &SplitQuadric, x: &QuadClass, y: &QuadClass) -> Self {
        let mut out = Self::zero(source, target);
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                out.add_term(*a, *b, &ca.mul(cb));
            }
        }
        out
    }

    pub fn source(&self) -> &SplitQuadric {
        &self.source
    }
    pub fn target(&self) -> &SplitQuadric {
        &self.target
    }
    pub fn terms(&self) -> &BTreeMap<(Basis, Basis), CoeffElement> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn ring(&self) -> CoeffRing {
        self.source.ring()
    }

    pub fn coeff(&self, a: Basis, b: Basis) -> CoeffElement {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(|| CoeffElement::zero(self.ring()))
    }

    pub(crate) fn add_term(&mut self, a: Basis, b: Basis, c: &CoeffElement) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((a, b)).or_insert_with(|| CoeffElement::zero(c.ring()));
        *slot = slot.add(c);
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.source != o.source || self.target != o.target {
            return Err(Error::QuadricMismatch("correspondences between different quadrics".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut x = self.clone();
        for ((a, b), c) in &o.terms {
            x.add_term(*a, *b, c);
        }
        Ok(x)
    }

    pub fn neg(&self) -> Self {
        let mut x = Self::zero(&self.source, &self.target);
        for ((a, b), c) in &self.terms {
            x.add_term(*a, *b, &c.neg());
        }
        x
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CoeffElement) -> Self {
        let mut x = Self::zero(&self.source, &self.target);
        for ((a, b), y) in &self.terms {
            x.add_term(*a, *b, &y.mul(c));
        }
        x
    }

    /// Sum of an iterator of correspondences with a common shape.
    pub fn sum<'a>(
        source: &SplitQuadric,
        target: &SplitQuadric,
        items: impl IntoIterator<Item = &'a Correspondence>,
    ) -> Result<Self> {
        let mut acc = Self::zero(source, target);
        for x in items {
            acc = acc.add(x)?;
        }
        Ok(acc)
    }

    /// `self ∘ u`, where `u` goes from `Q1` to `Q2` and `self` from `Q2` to `Q3`.
    pub fn compose(&self, u: &Correspondence) -> Result<Correspondence> {
        if u.target != self.source {
            return Err(Error::QuadricMismatch(
                "target of the inner correspondence differs from the source of the outer one".into(),
            ));
        }
        let q2 = &self.source;
        let mut out = Self::zero(&u.source, &self.target);
        for ((a, b), cu) in &u.terms {
            for ((c, d), cv) in &self.terms {
                let deg = q2.pairing(*b, *c);
                if deg.is_zero() {
                    continue;
                }
                out.add_term(*a, *d, &cu.mul(cv).mul(&deg));
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Correspondence {
        let mut out = Self::zero(&self.target, &self.source);
        for ((a, b), c) in &self.terms {
            out.add_term(*b, *a, c);
        }
        out
    }

    /// Push-forward action on classes of the source.
    pub fn apply(&self, x: &QuadClass) -> Result<QuadClass> {
        let mut out = self.target.zero();
        for ((a, b), c) in &self.terms {
            let deg = self.source.degree(&self.source.mul(&self.source.basis_class(*a), x)?)?;
            let coef = c.mul(&deg);
            if !coef.is_zero() {
                out = out.add(&self.target.basis_class(*b).scale(&coef));
            }
        }
        Ok(out)
    }

    /// Product in the ring `A(Q1 × Q2)`: `(a⊗b)(c⊗d) = ac ⊗ bd`.
    pub fn mul_pointwise(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = Self::zero(&self.source, &self.target);
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &o.terms {
                let x = self.source.mul_basis(*a, *c);
                let y = self.target.mul_basis(*b, *d);
                let k = c1.mul(c2);
                for (e, ce) in x.terms() {
                    for (f, cf) in y.terms() {
                        out.add_term(*e, *f, &k.mul(ce).mul(cf));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Transport along a coefficient map to quadrics of the same dimensions
    /// over another theory.
    pub fn map_coeffs(
        &self,
        source: &SplitQuadric,
        target: &SplitQuadric,
        f: impl Fn(&CoeffElement) -> Result<CoeffElement>,
    ) -> Result<Self> {
        if source.dim() != self.source.dim() || target.dim() != self.target.dim() {
            return Err(Error::QuadricMismatch("coefficient change must keep dimensions".into()));
        }
        let mut out = Self::zero(source, target);
        for ((a, b), c) in &self.terms {
            out.add_term(*a, *b, &f(c)?);
        }
        Ok(out)
    }

    /// Graded codimension of every term, if homogeneous.
    pub fn homogeneous_codim(&self) -> Option<i64> {
        let vdeg = self.ring().periodicity_degree();
        let mut out = None;
        for ((a, b), c) in &self.terms {
            let base = (self.source.codim(*a) + self.target.codim(*b)) as i64;
            for &e in c.terms().keys() {
                let t = base + e as i64 * vdeg;
                match out {
                    None => out = Some(t),
                    Some(x) if x != t => return None,
                    _ => {}
                }
            }
        }
        out
    }
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                if c.is_one() {
                    format!("{a}x{b}")
                } else {
                    format!("({c}) {a}x{b}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Inverse of a square matrix over the coefficient ring by Gauss–Jordan
/// elimination with unit pivots.
pub fn invert_matrix(m: &[Vec<CoeffElement>], ring: CoeffRing) -> Result<Vec<Vec<CoeffElement>>> {
    let n = m.len();
    let mut a: Vec<Vec<CoeffElement>> = m.to_vec();
    let mut inv: Vec<Vec<CoeffElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { CoeffElement::one(ring) } else { CoeffElement::zero(ring) })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| a[r][col].is_unit())
            .ok_or_else(|| Error::Singular(format!("no unit pivot in column {col}")))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].inverse().expect("unit");
        for j in 0..n {
            a[col][j] = a[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let x = a[col][j].mul(&f);
                a[r][j] = a[r][j].sub(&x);
                let y = inv[col][j].mul(&f);
                inv[r][j] = inv[r][j].sub(&y);
            }
        }
    }
    Ok(inv)
}

/// The diagonal `Δ = Σ M_{kl} e_k ⊗ e_l`, `M` the inverse Gram matrix.
pub fn kunneth_diagonal(q: &SplitQuadric) -> Result<Correspondence> {
    let basis = q.basis();
    let inv = invert_matrix(&q.gram(), q.ring())?;
    let mut out = Correspondence::zero(q, q);
    for (k, a) in basis.iter().enumerate() {
        for (l, b) in basis.iter().enumerate() {
            out.add_term(*a, *b, &inv[k][l]);
        }
    }
    Ok(out)
}

/// The classical Chow decomposition of the diagonal mod 2:
/// `Σ_{i≤d} l_i×h^i + Σ_{i<D/2} h^i×l_i`, plus `h^d×l_d + deg(l_d²) h^d×h^d` for even `D`.
pub fn chow_diagonal(q: &SplitQuadric) -> Result<Correspondence> {
    let th = q.theory();
    if th.kind() != TheoryKind::Chow || !th.is_mod2() {
        return Err(Error::TheoryMismatch("the Chow diagonal formula is stated mod 2".into()));
    }
    let (dd, d) = (q.dim() as i64, q.d() as i64);
    let mut parts = Vec::new();
    for i in 0..=d {
        parts.push(Correspondence::product(q, q, &q.l(i)?, &q.h(i)));
    }
    for i in 0..d + (dd % 2) {
        if 2 * i < dd {
            parts.push(Correspondence::product(q, q, &q.h(i), &q.l(i)?));
        }
    }
    if dd % 2 == 0 {
        let hd = q.h(d);
        parts.push(Correspondence::product(q, q, &hd, &q.l(d)?));
        let ld = q.l(d)?;
        let c = q.degree(&q.mul(&ld, &ld)?)?;
        parts.push(Correspondence::product(q, q, &hd, &hd).scale(&c));
    }
    Correspondence::sum(q, q, &parts)
}

/// Diagonal of the requested kind: the closed Chow formula for Chow mod 2,
/// the sum of the `π` and `ϖ` families for Morava theories, and the
/// Künneth diagonal otherwise.
pub fn diagonal(q: &SplitQuadric) -> Result<Correspondence> {
    let th = q.theory();
    match th.kind() {
        TheoryKind::Chow if th.is_mod2() => chow_diagonal(q),
        TheoryKind::Morava(n) if th.is_mod2() && n >= 2 && q.dim() + 1 >= (1 << n) => {
            let pi = ProjectorFamily::new(FamilyKind::Pi, q, n)?;
            let varpi = ProjectorFamily::new(FamilyKind::Varpi, q, n)?;
            pi.sum()?.add(&varpi.sum()?)
        }
        _ => kunneth_diagonal(q),
    }
}

/// The graph of a reflection: `(τ ⊗ id)(Δ)`, acting as `l_d ↔ l̃_d`.
pub fn reflection(q: &SplitQuadric) -> Result<Correspondence> {
    let delta = kunneth_diagonal(q)?;
    let mut out = Correspondence::zero(q, q);
    for ((a, b), c) in delta.terms() {
        let ta = q.reflect(&q.basis_class(*a));
        for (e, ce) in ta.terms() {
            out.add_term(*e, *b, &c.mul(ce));
        }
    }
    Ok(out)
}

fn morava_shift(q: &SplitQuadric, n: u32) -> (i64, i64) {
    let dp = q.dim() as i64 - (1i64 << n) + 1;
    (dp, dp - q.d() as i64)
}

fn v(q: &SplitQuadric, e: i32) -> CoeffElement {
    CoeffElement::v_pow(q.ring(), e)
}

/// `a_i = h^i + v l_{D'-i}`; classes with negative index vanish.
pub fn a_class(q: &SplitQuadric, n: u32, i: i64) -> Result<QuadClass> {
    let (dp, _) = morava_shift(q, n);
    Ok(q.h(i).add(&q.l(dp - i)?.scale(&v(q, 1))))
}

/// The right-hand partner of `a_i` in the factorisation `ϖ_j = v^{-1} a_j × a*_{D'-j}`.
/// It equals `a_i` except for `D ≡ 0 mod 4` and `i = d'`, where `l_d` is
/// replaced by `l̃_d`.
pub fn a_dual_class(q: &SplitQuadric, n: u32, i: i64) -> Result<QuadClass> {
    let (dp, dprime) = morava_shift(q, n);
    if q.dim().is_multiple_of(4) && i == dprime && dp - i == q.d() as i64 {
        return Ok(q.h(i).add(&q.l_tilde()?.scale(&v(q, 1))));
    }
    a_class(q, n, i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Pi,
    Varpi,
    OmegaCh,
    OmegaCkn,
}

/// One of the projector families `π_i`, `ϖ_j`, `ω^Ch_j`, `ω^CK(n)_j`.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    pub kind: FamilyKind,
    pub n: u32,
    /// `D' = D - 2^n + 1`.
    pub d_shift: i64,
    /// `d' = D' - d`.
    pub d_prime: i64,
    pub members: Vec<(i64, Correspondence)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub kind: FamilyKind,
    pub non_idempotent: Vec<i64>,
    pub non_orthogonal: Vec<(i64, i64)>,
    pub orthogonality_checked: bool,
}

impl FamilyReport {
    pub fn ok(&self) -> bool {
        self.non_idempotent.is_empty() && self.non_orthogonal.is_empty()
    }
}

impl ProjectorFamily {
    pub fn new(kind: FamilyKind, q: &SplitQuadric, n: u32) -> Result<Self> {
        let th = q.theory();
        if n == 0 {
            return Err(Error::InvalidArgument("height must be positive".into()));
        }
        if !th.is_mod2() {
            return Err(Error::ModeMismatch("projector families are defined mod 2".into()));
        }
        let expected_ok = match kind {
            FamilyKind::Pi | FamilyKind::Varpi => th.kind() == TheoryKind::Morava(n),
            FamilyKind::OmegaCh => th.kind() == TheoryKind::Chow,
            FamilyKind::OmegaCkn => th.kind() == TheoryKind::ConnectiveMorava(n),
        };
        if !expected_ok {
            return Err(Error::TheoryMismatch(format!("{kind:?} is not defined for {:?}", th.kind())));
        }
        let (dp, dprime) = morava_shift(q, n);
        if dp < 0 {
            return Err(Error::OutOfRange(format!(
                "D = {} is below the window start 2^n - 1 = {}",
                q.dim(),
                (1u32 << n) - 1
            )));
        }
        if matches!(kind, FamilyKind::OmegaCh | FamilyKind::OmegaCkn)
            && (n < 2 || q.dim() > (1u32 << (n + 1)) - 2)
        {
            return Err(Error::OutOfRange(format!(
                "the ω families need n ≥ 2 and D ≤ 2^(n+1) - 2, got n = {n}, D = {}",
                q.dim()
            )));
        }
        let d = q.d() as i64;
        let mod4zero = q.dim().is_multiple_of(4);
        let mut members = Vec::new();
        match kind {
            FamilyKind::Pi => {
                for i in 0..=dp {
                    let c = Correspondence::product(q, q, &q.h(i), &q.h(dp - i)).scale(&v(q, -1));
                    members.push((i, c));
                }
            }
            FamilyKind::Varpi => {
                for j in dprime..=d {
                    let left = a_class(q, n, j)?;
                    let right = a_dual_class(q, n, dp - j)?.scale(&v(q, -1));
                    members.push((j, Correspondence::product(q, q, &left, &right)));
                }
            }
            FamilyKind::OmegaCh | FamilyKind::OmegaCkn => {
                for j in dprime..=d {
                    let lj = if mod4zero && j == d { q.l_tilde()? } else { q.l(j)? };
                    let mut c = Correspondence::product(q, q, &q.h(j), &lj).add(
                        &Correspondence::product(q, q, &q.l(dp - j)?, &q.h(dp - j)),
                    )?;
                    if kind == FamilyKind::OmegaCkn {
                        let extra = Correspondence::product(q, q, &q.l(dp - j)?, &lj);
                        c = c.add(&extra.scale(&v(q, 1)))?;
                    }
                    members.push((j, c));
                }
            }
        }
        Ok(ProjectorFamily { kind, n, d_shift: dp, d_prime: dprime, members })
    }

    pub fn quadric(&self) -> &SplitQuadric {
        self.members[0].1.source()
    }

    pub fn member(&self, idx: i64) -> Option<&Correspondence> {
        self.members.iter().find(|(i, _)| *i == idx).map(|(_, c)| c)
    }

    pub fn sum(&self) -> Result<Correspondence> {
        let q = self.quadric();
        Correspondence::sum(q, q, self.members.iter().map(|(_, c)| c))
    }

    /// Sum of the members with index in `set`.
    pub fn sum_over(&self, set: &[i64]) -> Result<Correspondence> {
        let q = self.quadric();
        let picked: Vec<&Correspondence> =
            self.members.iter().filter(|(i, _)| set.contains(i)).map(|(_, c)| c).collect();
        Correspondence::sum(q, q, picked)
    }

    /// Idempotency of each member and pairwise orthogonality. For `n = 1`
    /// the members are not mutually orthogonal and that check is skipped.
    pub fn verify(&self) -> Result<FamilyReport> {
        let mut report = FamilyReport {
            kind: self.kind,
            non_idempotent: Vec::new(),
            non_orthogonal: Vec::new(),
            orthogonality_checked: self.n >= 2,
        };
        for (i, p) in &self.members {
            if p.compose(p)? != *p {
                report.non_idempotent.push(*i);
            }
            if !report.orthogonality_checked {
                continue;
            }
            for (j, r) in &self.members {
                if i != j && !r.compose(p)?.is_zero() {
                    report.non_orthogonal.push((*i, *j));
                }
            }
        }
        Ok(report)
    }
}

/// How to match the two middle indices `d'` and `d` of even-dimensional
/// quadrics when both are present and `s = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleChoice {
    /// `d' ↦ d'`, `d ↦ d`: the form `v^{-1}(a_{d'}×b_d + a_d×b_{d'})`.
    Straight,
    /// `d' ↦ d`, `d ↦ d'`: the form `v^{-2} a_{d'}×b_{d'} + a_d×b_d`.
    Swapped,
}

/// An isomorphism between Tate-split summands together with its inverse.
#[derive(Clone, Debug)]
pub struct IsoNormalForm {
    pub assignment: Vec<(i64, i64)>,
    pub forward: Correspondence,
    pub inverse: Correspondence,
}

/// The normal form `Σ_{i∈I1} v^{-1+k_i} a_i × b_{D2'-f(i)}` of an isomorphism
/// `M(Q1, Σ_{I1} ϖ_i) → M(Q2, Σ_{I2} ϖ_j)(s)` over the algebraic closure,
/// with `f(i) ≡ i - s mod (2^n - 1)` and `k_i = (i - f(i) - s) / (2^n - 1)`.
/// The power `v^{k_i}` makes every term homogeneous; modulo 2 with `v`
/// inverted it is a unit and does not change the isomorphism class.
pub fn iso_normal_form(
    q1: &SplitQuadric,
    q2: &SplitQuadric,
    i1: &[i64],
    i2: &[i64],
    s: i64,
    middle: MiddleChoice,
) -> Result<IsoNormalForm> {
    let n = match (q1.theory().kind(), q2.theory().kind()) {
        (TheoryKind::Morava(a), TheoryKind::Morava(b)) if a == b && q1.ring() == q2.ring() => a,
        _ => return Err(Error::TheoryMismatch("both quadrics need the same Morava theory".into())),
    };
    if i1.len() != i2.len() {
        return Err(Error::IncompatibleIndexSets(format!(
            "index sets of sizes {} and {}",
            i1.len(),
            i2.len()
        )));
    }
    let period = (1i64 << n) - 1;
    let (dp1, dpr1) = morava_shift(q1, n);
    let (dp2, dpr2) = morava_shift(q2, n);
    let range_ok = |set: &[i64], lo: i64, hi: i64| set.iter().all(|&i| lo <= i && i <= hi);
    if !range_ok(i1, dpr1, q1.d() as i64) || !range_ok(i2, dpr2, q2.d() as i64) {
        return Err(Error::IncompatibleIndexSets("indices outside [d', d]".into()));
    }
    let mut free: Vec<i64> = i2.to_vec();
    free.sort_unstable();
    free.dedup();
    if free.len() != i2.len() {
        return Err(Error::IncompatibleIndexSets("repeated index".into()));
    }
    let mut src: Vec<i64> = i1.to_vec();
    src.sort_unstable();
    if middle == MiddleChoice::Swapped {
        src.reverse();
    }
    let mut assignment = Vec::new();
    for &i in &src {
        let pos = free
            .iter()
            .position(|&j| (i - j - s).rem_euclid(period) == 0)
            .ok_or_else(|| {
                Error::IncompatibleIndexSets(format!("no partner for {i} with shift {s}"))
            })?;
        assignment.push((i, free.remove(pos)));
    }
    assignment.sort_unstable();
    let mut forward = Correspondence::zero(q1, q2);
    let mut inverse = Correspondence::zero(q2, q1);
    for &(i, j) in &assignment {
        let k = (i - j - s).div_euclid(period) as i32;
        let f = Correspondence::product(q1, q2, &a_class(q1, n, i)?, &a_dual_class(q2, n, dp2 - j)?);
        forward = forward.add(&f.scale(&v(q1, -1 + k)))?;
        let g = Correspondence::product(q2, q1, &a_class(q2, n, j)?, &a_dual_class(q1, n, dp1 - i)?);
        inverse = inverse.add(&g.scale(&v(q1, -1 - k)))?;
    }
    Ok(IsoNormalForm { assignment, forward, inverse })
}

/// A declared set of rational endo-correspondences of one quadric. Membership
/// is tested in the `F_p`-span after `v ↦ 1` and reduction mod `p`.
#[derive(Clone, Debug)]
pub struct RationalSet {
    quadric: SplitQuadric,
    tagged: Vec<(String, Correspondence)>,
}

impl RationalSet {
    pub fn new(quadric: &SplitQuadric) -> Self {
        RationalSet { quadric: quadric.clone(), tagged: Vec::new() }
    }

    pub fn tag(&mut self, name: impl Into<String>, c: Correspondence) -> Result<()> {
        if c.source() != &self.quadric || c.target() != &self.quadric {
            return Err(Error::QuadricMismatch("tagged correspondence lives elsewhere".into()));
        }
        self.tagged.push((name.into(), c));
        Ok(())
    }

    pub fn tagged(&self) -> &[(String, Correspondence)] {
        &self.tagged
    }

    fn vector(&self, c: &Correspondence) -> BTreeMap<(Basis, Basis), u64> {
        let p = self.quadric.ring().prime();
        c.terms()
            .iter()
            .map(|(k, x)| (*k, x.eval_v_one() % p))
            .filter(|(_, r)| *r != 0)
            .collect()
    }

    /// Whether `c` lies in the span of the tagged correspondences.
    pub fn spans(&self, c: &Correspondence) -> bool {
        let p = self.quadric.ring().prime();
        let mut rows: Vec<BTreeMap<(Basis, Basis), u64>> =
            self.tagged.iter().map(|(_, t)| self.vector(t)).collect();
        let base = rank_mod_p(rows.clone(), p);
        rows.push(self.vector(c));
        rank_mod_p(rows, p) == base
    }

    /// Names of closure failures under composition, transpose and
    /// multiplication by `h × 1` and `1 × h`.
    pub fn closure_violations(&self) -> Result<Vec<String>> {
        let q = &self.quadric;
        let mut out = Vec::new();
        let h1 = Correspondence::product(q, q, &q.h(1), &q.one());
        let h2 = Correspondence::product(q, q, &q.one(), &q.h(1));
        for (na, a) in &self.tagged {
            if !self.spans(&a.transpose()) {
                out.push(format!("transpose({na})"));
            }
            if !self.spans(&a.mul_pointwise(&h1)?) {
                out.push(format!("(h x 1)·{na}"));
            }
            if !self.spans(&a.mul_pointwise(&h2)?) {
                out.push(format!("(1 x h)·{na}"));
            }
            for (nb, b) in &self.tagged {
                if !self.spans(&a.compose(b)?) {
                    out.push(format!("{na} ∘ {nb}"));
                }
            }
        }
        Ok(out)
    }
}

fn rank_mod_p(mut rows: Vec<BTreeMap<(Basis, Basis), u64>>, p: u64) -> usize {
    let mut rank = 0;
    while let Some(pos) = rows.iter().position(|r| !r.is_empty()) {
        let pivot = rows.swap_remove(pos);
        let (&lead, &lc) = pivot.iter().next().expect("nonempty");
        let inv = mod_inv(lc, p);
        for r in rows.iter_mut() {
            if let Some(&x) = r.get(&lead) {
                let f = x * inv % p;
                for (k, pc) in &pivot {
                    let e = r.entry(*k).or_insert(0);
                    *e = (*e + p - f * pc % p) % p;
                    if *e == 0 {
                        r.remove(k);
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is prime here
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}
