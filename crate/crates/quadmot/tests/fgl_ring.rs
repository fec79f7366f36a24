use std::collections::BTreeMap;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use quadmot::fgl::default_truncation;
use quadmot::quadring::Basis;
use quadmot::series::{compose, MultiSeries, Scalar};
use quadmot::{fgl_from_log, morava_log, CoeffElement, CoeffRing, QuadClass, SplitQuadric, Theory};

type Poly2 = BTreeMap<(usize, usize), BigRational>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The law at `v = 1` with exact rationals: `exp(log x + log y)` for
/// `log t = Σ_j 2^{-j} t^{2^{nj}}`.
fn oracle_law(n: u32, trunc: usize) -> Poly2 {
    let mut log = vec![BigRational::zero(); trunc + 1];
    let (mut deg, mut j) = (1usize, 0u32);
    while deg <= trunc {
        log[deg] = rat(1, 1 << j);
        deg <<= n;
        j += 1;
    }
    // exp by fixed-point iteration on coefficients: log(exp t) = t
    let mut exp = vec![BigRational::zero(); trunc + 1];
    exp[1] = BigRational::one();
    for m in 2..=trunc {
        let mut comp = vec![BigRational::zero(); trunc + 1];
        let mut power = exp.clone();
        for k in 1..=m {
            if k > 1 {
                let mut next = vec![BigRational::zero(); trunc + 1];
                for (a, x) in power.iter().enumerate() {
                    for (b, y) in exp.iter().enumerate() {
                        if a + b <= trunc && !x.is_zero() && !y.is_zero() {
                            next[a + b] += x * y;
                        }
                    }
                }
                power = next;
            }
            comp[m] += &log[k] * &power[m];
        }
        exp[m] = -comp[m].clone();
    }
    let mut s: Poly2 = BTreeMap::new();
    for (k, c) in log.iter().enumerate().skip(1) {
        if !c.is_zero() {
            *s.entry((k, 0)).or_insert_with(BigRational::zero) += c;
            *s.entry((0, k)).or_insert_with(BigRational::zero) += c;
        }
    }
    let mul = |a: &Poly2, b: &Poly2| {
        let mut out: Poly2 = BTreeMap::new();
        for ((i, j), x) in a {
            for ((k, l), y) in b {
                if i + j + k + l <= trunc {
                    *out.entry((i + k, j + l)).or_insert_with(BigRational::zero) += x * y;
                }
            }
        }
        out
    };
    let mut f: Poly2 = BTreeMap::new();
    let mut power = s.clone();
    for e in exp.iter().skip(1) {
        for (k, c) in &power {
            *f.entry(*k).or_insert_with(BigRational::zero) += e * c;
        }
        power = mul(&power, &s);
    }
    f.retain(|_, c| !c.is_zero());
    f
}

fn residue_mod_256(c: &BigRational) -> i64 {
    let m = BigInt::from(256);
    let den = c.denom();
    assert!(den.is_odd(), "coefficient {c} is not 2-integral");
    let inv = den.modpow(&BigInt::from(127), &m); // odd units of Z/256 have order dividing 128
    let r = (c.numer() * inv).mod_floor(&m);
    r.to_i64().unwrap()
}

#[test]
fn morava_laws_match_the_rational_oracle() {
    for n in 1..=3u32 {
        let trunc = default_truncation(n);
        let ring = CoeffRing::integral(8, n);
        let law = fgl_from_log(&morava_log(n, ring, trunc).unwrap()).unwrap();
        let oracle = oracle_law(n, trunc);
        let period = (1usize << n) - 1;
        for i in 0..=trunc {
            for j in 0..=trunc - i {
                let got = law.coeff(i as u32, j as u32);
                match oracle.get(&(i, j)) {
                    None => assert!(got.is_zero(), "n={n} x^{i}y^{j}"),
                    Some(c) => {
                        assert_eq!((i + j - 1) % period, 0, "inhomogeneous oracle term");
                        let e = ((i + j - 1) / period) as i32;
                        let want = CoeffElement::v_pow(ring, e).scale(residue_mod_256(c));
                        assert_eq!(got, want, "n={n} x^{i}y^{j}");
                        assert!(c.abs() > BigRational::zero());
                    }
                }
            }
        }
    }
}

#[test]
fn law_axioms() {
    for n in 1..=3u32 {
        let trunc = default_truncation(n);
        let ring = CoeffRing::integral(8, n);
        let law = fgl_from_log(&morava_log(n, ring, trunc).unwrap()).unwrap();
        assert!(law.coeff(1, 0).is_one() && law.coeff(0, 1).is_one());
        for (&(i, j), c) in law.coeffs() {
            assert_eq!(&law.coeff(j, i), c, "commutativity n={n}");
            if i == 0 || j == 0 {
                assert_eq!(i + j, 1, "F(x, 0) = x fails, n={n}");
            }
        }
        let one = CoeffElement::one(ring);
        let t = trunc as u32;
        let f = law.as_series();
        let vars: Vec<MultiSeries<CoeffElement>> = (0..3).map(|k| MultiSeries::var(3, t, k, one.clone())).collect();
        let fxy = f.substitute(&[vars[0].clone(), vars[1].clone()], &one);
        let fyz = f.substitute(&[vars[1].clone(), vars[2].clone()], &one);
        let left = f.substitute(&[fxy, vars[2].clone()], &one);
        let right = f.substitute(&[vars[0].clone(), fyz], &one);
        assert!(left.add(&right.scale(&CoeffElement::from_int(ring, -1))).is_zero(), "associativity n={n}");
    }
}

#[test]
fn log_and_exp_are_inverse() {
    for n in 1..=3u32 {
        let trunc = default_truncation(n);
        let ring = CoeffRing::integral(8, n);
        let law = fgl_from_log(&morava_log(n, ring, trunc).unwrap()).unwrap();
        let log: Vec<_> = (0..=trunc).map(|k| law.log().coeff(k)).collect();
        let exp = law.exp_coeffs();
        let zero = log[0].zero_like();
        for (f, g) in [(&log[..], exp), (exp, &log[..])] {
            let c = compose(f, g, trunc, &zero);
            for (k, x) in c.iter().enumerate() {
                let expect_one = k == 1;
                let diff = if expect_one { x.minus(&log[1]) } else { x.clone() };
                assert!(diff.is_zero_elem(), "n={n} coefficient {k}");
            }
        }
    }
}

#[test]
fn two_series_shape() {
    for n in 1..=3u32 {
        let ring = CoeffRing::integral(8, n);
        let law = fgl_from_log(&morava_log(n, ring, default_truncation(n)).unwrap()).unwrap();
        let q = 1usize << n;
        assert_eq!(law.b(1).unwrap(), CoeffElement::from_int(ring, 2));
        for k in 2..q {
            assert!(law.b(k).unwrap().is_zero());
        }
        let (c, e) = law.b(q).unwrap().as_monomial().unwrap();
        assert_eq!((c % 2, e), (1, 1));
        // the oracle agrees on b_k as well
        let oracle = oracle_law(n, default_truncation(n));
        let mut b = BigRational::zero();
        for ((i, j), x) in &oracle {
            if i + j == q {
                b += x;
            }
        }
        assert_eq!(residue_mod_256(&b) as u64, c);
    }
}

#[test]
fn h_power_identity() {
    for n in 1..=3u32 {
        let k = (1u32 << n) - 1;
        for dim in (2 * k + 1)..=(2 * k + 10) {
            let th = Theory::morava_integral(n, 8, dim as usize + 1).unwrap();
            let q = SplitQuadric::new(dim, th).unwrap();
            let x = q.h_power(dim - k).unwrap();
            let ring = q.ring();
            assert_eq!(x.terms().len(), 2, "n={n} D={dim}: {x}");
            assert_eq!(x.coeff(Basis::L(k)), CoeffElement::from_int(ring, 2), "n={n} D={dim}");
            let (c, e) = x.coeff(Basis::L(0)).as_monomial().unwrap();
            assert_eq!((c % 2, e), (1, 1), "n={n} D={dim}");
        }
    }
}

#[test]
fn chow_multiplication_table() {
    // h^i l_j = l_{j-i}, l_i l_j = 0 unless it is the point class
    for dim in 1..=12u32 {
        let q = SplitQuadric::new(dim, Theory::chow_integral(8, dim as usize + 1)).unwrap();
        let d = q.d();
        for i in 0..=d {
            for j in 0..=d {
                let got = q.mul(&q.h(i as i64), &q.l(j as i64).unwrap()).unwrap();
                let want = if i <= j { q.l((j - i) as i64).unwrap() } else { q.zero() };
                assert_eq!(got, want, "D={dim} h^{i} l_{j}");
            }
        }
        // deg(h^D) = 2 for D ≥ 1
        assert_eq!(q.degree(&q.h(dim as i64)).unwrap(), CoeffElement::from_int(q.ring(), 2));
    }
}

fn random_class(q: &SplitQuadric, coeffs: &[i8]) -> QuadClass {
    let mut x = q.zero();
    for (b, c) in q.basis().into_iter().zip(coeffs) {
        x = x.add(&q.basis_class(b).scale(&CoeffElement::from_int(q.ring(), *c as i64)));
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn multiplication_is_commutative_and_associative(
        dim in 1u32..=20,
        n in 1u32..=3,
        a in prop::collection::vec(-3i8..4, 24),
        b in prop::collection::vec(-3i8..4, 24),
        c in prop::collection::vec(-3i8..4, 24),
    ) {
        let th = Theory::morava_integral(n, 8, Theory::truncation_for(quadmot::TheoryKind::Morava(n), dim)).unwrap();
        let q = SplitQuadric::new(dim, th).unwrap();
        let (x, y, z) = (random_class(&q, &a), random_class(&q, &b), random_class(&q, &c));
        prop_assert_eq!(q.mul(&x, &y).unwrap(), q.mul(&y, &x).unwrap());
        let l = q.mul(&q.mul(&x, &y).unwrap(), &z).unwrap();
        let r = q.mul(&x, &q.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        prop_assert_eq!(q.mul(&q.one(), &x).unwrap(), x);
    }

    #[test]
    fn h_powers_step(dim in 1u32..=20, n in 1u32..=3, k in 0u32..24) {
        let th = Theory::morava_integral(n, 8, Theory::truncation_for(quadmot::TheoryKind::Morava(n), dim)).unwrap();
        let q = SplitQuadric::new(dim, th).unwrap();
        let k = k % dim;
        let next = q.h_power(k + 1).unwrap();
        prop_assert_eq!(next, q.mul(&q.h(1), &q.h_power(k).unwrap()).unwrap());
    }
}
