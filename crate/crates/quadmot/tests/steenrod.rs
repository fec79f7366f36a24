use proptest::prelude::*;
use quadmot::ops::{
    eta, lucas_binom_mod2, phi_trace, product_codim_bound, steenrod_lemma_predicates,
    steenrod_total, BPMonomial, OnQuadric,
};
use quadmot::quadring::Basis;
use quadmot::{Error, QuadClass, SplitQuadric, Theory};

fn chow(dim: u32) -> SplitQuadric {
    SplitQuadric::new(dim, Theory::chow_mod2(dim as usize + 1)).unwrap()
}

/// Rows of Pascal's triangle mod 2 built by the recurrence.
fn pascal_mod2(rows: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![vec![1]];
    for n in 1..rows {
        let prev = &out[n - 1];
        let mut row = vec![1u8; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] ^ prev[k];
        }
        out.push(row);
    }
    out
}

/// `St` of a basis element read off the defining formulas with Pascal binomials.
fn st_oracle(q: &SplitQuadric, b: Basis, pascal: &[Vec<u8>]) -> Vec<(i64, QuadClass)> {
    let dd = q.dim() as i64;
    let (base, top, shift) = match b {
        Basis::H(i) => (q.h(i as i64), i as i64, 0),
        Basis::L(i) => (q.basis_class(b), dd + 1 - i as i64, -1),
        Basis::LTilde => (q.basis_class(b), dd + 1 - q.d() as i64, -1),
    };
    let mut out: Vec<(i64, QuadClass)> = Vec::new();
    for k in 0..=top {
        if pascal[top as usize][k as usize] == 0 {
            continue;
        }
        let x = q.mul(&base, &q.h(k)).unwrap();
        out.push((top - k + shift, x));
    }
    out
}

fn random_class(q: &SplitQuadric, mask: u64) -> QuadClass {
    let basis = q.basis();
    let mut x = q.zero();
    for (i, b) in basis.iter().enumerate() {
        if mask >> i & 1 == 1 {
            x = x.add(&q.basis_class(*b));
        }
    }
    x
}

#[test]
fn lucas_matches_pascal_up_to_4096() {
    let mut row: Vec<u8> = vec![1];
    for a in 0..=4096u64 {
        for (b, &bit) in row.iter().enumerate() {
            assert_eq!(lucas_binom_mod2(a, b as u64), bit, "C({a},{b})");
        }
        assert_eq!(lucas_binom_mod2(a, a + 1), 0);
        let mut next = vec![1u8; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] ^ row[k];
        }
        row = next;
    }
}

#[test]
fn basis_values_match_the_oracle() {
    let pascal = pascal_mod2(40);
    for dim in 1..=14 {
        let q = chow(dim);
        for b in q.basis() {
            let st = steenrod_total(&q, &q.basis_class(b)).unwrap();
            let mut expect = std::collections::BTreeMap::new();
            for (e, x) in st_oracle(&q, b, &pascal) {
                let slot = expect.entry(e).or_insert_with(|| q.zero());
                *slot = (*slot).add(&x);
            }
            expect.retain(|_, x: &mut QuadClass| !x.is_zero());
            assert_eq!(st.terms(), &expect, "D={dim} {b}");
        }
    }
}

#[test]
fn grading_of_individual_squares() {
    // on codimension m the coefficient at t^e has codimension 2m - e
    for dim in 1..=14 {
        let q = chow(dim);
        for b in q.basis() {
            let m = q.codim(b) as i64;
            let st = steenrod_total(&q, &q.basis_class(b)).unwrap();
            for (e, x) in st.terms() {
                for c in x.terms().keys() {
                    assert_eq!(q.codim(*c) as i64, 2 * m - e, "D={dim} {b}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn steenrod_is_multiplicative(dim in 1u32..=14, mx in any::<u64>(), my in any::<u64>()) {
        let q = chow(dim);
        let x = random_class(&q, mx);
        let y = random_class(&q, my);
        let lhs = steenrod_total(&q, &q.mul(&x, &y).unwrap()).unwrap();
        let rhs = steenrod_total(&q, &x).unwrap().mul(&q, &steenrod_total(&q, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn phi_trace_divides_by_eta(
        dim in 1u32..=12,
        bidx in any::<prop::sample::Index>(),
        vexp in prop::collection::btree_map(1u32..4, 1u32..3, 0..3),
        pexp in 0u32..2,
        r in 0i64..16,
    ) {
        let q = chow(dim);
        let pascal = pascal_mod2(40);
        let b = *bidx.get(&q.basis());
        let u = BPMonomial { p_exponent: pexp, v_exponents: vexp };
        prop_assume!(u.d() > 0);
        let x = OnQuadric { quadric: q.clone(), class: q.basis_class(b) };
        let got = phi_trace(&[(u.clone(), x)], r).unwrap().class;
        let mut expect = q.zero();
        if eta(&u) == 1 {
            for (e, c) in st_oracle(&q, b, &pascal) {
                if e == 2 * u.d() - r {
                    expect = expect.add(&c);
                }
            }
        }
        prop_assert_eq!(got, expect);
    }
}

#[test]
fn phi_trace_recovers_the_class() {
    // φ^{t^k}(v_r x) = x for k = 2d - codim(x) ≥ 0
    for dim in 1..=10 {
        let q = chow(dim);
        for b in q.basis() {
            for r in 1..=4u32 {
                let u = BPMonomial::v(r);
                let k = 2 * u.d() - q.codim(b) as i64;
                if k < 0 {
                    continue;
                }
                let x = OnQuadric { quadric: q.clone(), class: q.basis_class(b) };
                assert_eq!(phi_trace(&[(u, x)], k).unwrap().class, q.basis_class(b));
            }
        }
    }
}

#[test]
fn phi_trace_square_correction() {
    let q = chow(8);
    for b in q.basis() {
        let x = OnQuadric { quadric: q.clone(), class: q.basis_class(b) };
        let sq = q.mul(&x.class, &x.class).unwrap();
        assert_eq!(phi_trace(&[(BPMonomial::p(), x.clone())], 0).unwrap().class, sq);
        let four = BPMonomial::p().mul(&BPMonomial::p());
        assert!(phi_trace(&[(four, x.clone())], 0).unwrap().class.is_zero());
        assert!(phi_trace(&[(BPMonomial::p(), x.clone())], 2).unwrap().class.is_zero());
        let both = [(BPMonomial::p(), x.clone()), (BPMonomial::v(1).mul(&BPMonomial::v(2)), x.clone())];
        assert_eq!(phi_trace(&both, 0).unwrap().class, sq);
        assert!(matches!(
            phi_trace(&[(BPMonomial::one(), x)], 0),
            Err(Error::NotComputable(_))
        ));
    }
}

#[test]
fn lemma_items_hold() {
    for n in 2..=3u32 {
        for r in 1..(1u64 << n) {
            let rep = steenrod_lemma_predicates(n, r).unwrap();
            assert!(rep.all_hold(), "{rep:?}");
        }
    }
    // larger heights as a sanity margin
    for r in 1..16 {
        assert!(steenrod_lemma_predicates(4, r).unwrap().all_hold());
    }
}

#[test]
fn codimension_bound_on_products() {
    for n in 2..=3 {
        let (checked, bad) = product_codim_bound(n).unwrap();
        assert!(checked > 0);
        assert!(bad.is_empty(), "{bad:?}");
    }
}
