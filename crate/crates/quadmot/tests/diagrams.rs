use proptest::prelude::*;
use quadmot::forms::{build_tower, kn_kernel_index, validate, FormProfile};
use quadmot::mdt::{
    check_outer_excellent, chow_to_morava, classify_k2, kernel_shift_equiv, morava_to_chow,
    small_kahn_diagram, stable_reduce, window_cells, Cell, Flavor, MDTDiagram,
};
use quadmot::Error;

fn ids(parts: &[&[&str]]) -> Vec<Vec<String>> {
    parts.iter().map(|c| c.iter().map(|s| s.to_string()).collect()).collect()
}

fn labels(m: &MDTDiagram) -> Vec<String> {
    m.labels().iter().map(|l| l.map(ToString::to_string).unwrap_or_default()).collect()
}

fn profile(dim: u32, k1: Option<u32>, k2: u32) -> FormProfile {
    let mut p = FormProfile::new(dim, vec![]).with_kahn(2, k2).with_symbol(2, "a");
    if let Some(k) = k1 {
        p = p.with_kahn(1, k);
    }
    p
}

/// The table rows written out by hand for dim q = 7 (d = 2) and dim q = 8 (d = 3).
#[test]
fn table_rows() {
    let rows: Vec<(FormProfile, &str, Vec<Vec<String>>, Vec<&str>)> = vec![
        (profile(7, None, 1), "• • •", ids(&[&["1"], &["2"], &["3"]]), vec!["L_a(1)", "L_a(2)", "L_a(0)"]),
        (profile(7, None, 3), "• •–•", ids(&[&["1"], &["2", "3"]]), vec!["L_a(1)", "R_[C0(q)] ⊗ L_a(2)"]),
        (profile(7, None, 5), "•–•–•", ids(&[&["1", "2", "3"]]), vec!["Ker[Mker](1)"]),
        (
            profile(8, None, 0),
            "• • • •",
            ids(&[&["2"], &["3u"], &["3l"], &["4"]]),
            vec!["L_a(2)", "L_a(0)", "L_a(0)", "L_a(1)"],
        ),
        (
            profile(8, None, 2),
            "• •–• •",
            ids(&[&["2"], &["3u", "3l"], &["4"]]),
            vec!["L_a(2)", "R_[disc(q)] ⊗ L_a(0)", "L_a(1)"],
        ),
        (
            profile(8, Some(0), 4),
            "•–• •–•",
            ids(&[&["2", "3u"], &["3l", "4"]]),
            vec!["R_[C(q)] ⊗ L_a(2)", "R_[C(q)] ⊗ L_a(0)"],
        ),
        (profile(8, Some(2), 4), "•–•–•–•", ids(&[&["2", "3u", "3l", "4"]]), vec!["Ker[Q'] ⊗ L_a(2)"]),
        (profile(8, Some(2), 6), "•–•–•–•", ids(&[&["2", "3u", "3l", "4"]]), vec!["Ker[Mker](2)"]),
    ];
    for (p, glyph, parts, labs) in rows {
        let c = classify_k2(&p).unwrap();
        assert_eq!(c.glyph, glyph, "{}", c.row);
        assert_eq!(c.diagram.partition(), parts, "{}", c.row);
        assert_eq!(labels(&c.diagram), labs, "{}", c.row);
        assert_eq!(c.diagram.flavor(), Flavor::Morava(2));
    }
}

#[test]
fn classify_needs_data() {
    assert!(matches!(classify_k2(&FormProfile::new(7, vec![])), Err(Error::MissingData(_))));
    assert!(matches!(classify_k2(&profile(8, None, 4)), Err(Error::MissingData(_))));
    assert!(matches!(classify_k2(&profile(8, None, 3)), Err(Error::Parity(_))));
    assert!(classify_k2(&profile(3, None, 1)).is_err());
}

#[test]
fn small_kahn_matches_the_table() {
    for dim in 5..=8u32 {
        for k2 in (dim % 2..=4).step_by(2) {
            for k1 in [Some(0), Some(2)] {
                let p = profile(dim, k1, k2);
                let table = classify_k2(&p).unwrap().diagram;
                let built = small_kahn_diagram(&p, 2).unwrap();
                assert_eq!(built.partition(), table.partition(), "dim {dim} dim2 {k2}");
                assert_eq!(labels(&built), labels(&table), "dim {dim} dim2 {k2}");
                let chow = morava_to_chow(&built, 2).unwrap();
                assert!(check_outer_excellent(&chow, 2).unwrap().ok());
                assert_eq!(chow_to_morava(&chow, 2).unwrap().partition(), table.partition());
                assert_eq!(chow.dual().unwrap(), chow, "dim {dim} dim2 {k2}");
            }
        }
    }
}

#[test]
fn example_form_pictures() {
    let chow = MDTDiagram::from_ids(Flavor::Chow, 6, &[&["0", "2", "3u", "5"], &["1", "3l", "4", "6"]]).unwrap();
    assert!(check_outer_excellent(&chow, 2).unwrap().ok());
    assert_eq!(chow.dual().unwrap(), chow);
    let k = chow_to_morava(&chow, 2).unwrap();
    assert_eq!(k.partition(), ids(&[&["2", "3u"], &["3l", "4"]]));
    assert_eq!(k.complementary_tates(), &[0, 1, 5, 6]);
    assert_eq!(morava_to_chow(&k, 2).unwrap(), chow);
    let outer: Vec<String> = chow
        .edges(Some(2))
        .iter()
        .filter(|e| e.outer)
        .map(|e| format!("{}~{}", e.a, e.b))
        .collect();
    assert_eq!(outer, ["0~3u", "1~4", "2~5", "3l~6"]);
    let svg = chow.to_svg(Some(2));
    assert_eq!(svg.matches("stroke=\"red\"").count(), 4);
    assert_eq!(svg, chow.to_svg(Some(2)));
    let ascii = k.to_ascii(None);
    assert!(ascii.contains("o   o   *"), "{ascii}");
}

#[test]
fn pfister_quadrics_pass_and_split_into_rost_pairs() {
    for n in 2..=3u32 {
        let k = (1i64 << n) - 1;
        let dim = 2 * k as u32;
        let mut comps = Vec::new();
        for i in 0..=k {
            let a = if i == k { Cell::lower(i) } else { Cell::plain(i) };
            let b = if i == 0 { Cell::upper(k) } else { Cell::plain(i + k) };
            comps.push(vec![a, b]);
        }
        let chow = MDTDiagram::new(Flavor::Chow, dim, comps).unwrap();
        assert!(check_outer_excellent(&chow, n).unwrap().ok());
        let morava = chow_to_morava(&chow, n).unwrap();
        assert!(morava.components().iter().all(|c| c.cells.len() == 1));
        assert_eq!(morava.components().len(), 1 << n);
    }
}

#[test]
fn pfister_neighbour_of_dimension_five() {
    // R(0) on {0, 3} and the conic's binary motive on {1, 2}
    let chow = MDTDiagram::from_ids(Flavor::Chow, 3, &[&["0", "3"], &["1", "2"]]).unwrap();
    let k = chow_to_morava(&chow, 2).unwrap();
    assert_eq!(k.partition(), ids(&[&["0"], &["1", "2"]]));
    assert_eq!(k.complementary_tates(), &[3]);
    let table = classify_k2(&profile(5, None, 3)).unwrap().diagram;
    assert_eq!(table.partition(), k.partition());
}

#[test]
fn split_diagrams() {
    for n in 2..=3u32 {
        for dim in 1..=(2 * ((1u32 << n) - 1)) {
            let k = MDTDiagram::singletons(Flavor::Morava(n), dim).unwrap();
            let chow = morava_to_chow(&k, n).unwrap();
            assert!(check_outer_excellent(&chow, n).unwrap().ok());
            assert_eq!(chow_to_morava(&chow, n).unwrap(), k);
        }
    }
}

#[test]
fn isotropic_and_large_inputs_rejected() {
    let chow = MDTDiagram::singletons(Flavor::Chow, 3).unwrap().with_anisotropic(false);
    assert!(check_outer_excellent(&chow, 2).is_err());
    let big = MDTDiagram::singletons(Flavor::Chow, 7).unwrap();
    assert!(matches!(check_outer_excellent(&big, 2), Err(Error::Unsupported(_))));
}

#[test]
fn middle_choice_independence() {
    // away from I^3 the middle pair is never split between components
    for k2 in [2u32, 4] {
        let p = profile(8, Some(2), k2);
        let m = classify_k2(&p).unwrap().diagram;
        for c in m.components() {
            let has_u = c.cells.iter().any(|x| x.role == quadmot::mdt::Role::Upper);
            let has_l = c.cells.iter().any(|x| x.role == quadmot::mdt::Role::Lower);
            assert_eq!(has_u, has_l);
        }
    }
}

#[test]
fn stable_reduction_offsets() {
    let p = FormProfile::new(16, vec![4, 4]);
    let r = stable_reduce(&p, 2).unwrap();
    assert_eq!((r.level, r.offset, r.kernel_dim), (1, 4, 8));
    let small = FormProfile::new(7, vec![1, 2]);
    let r = stable_reduce(&small, 2).unwrap();
    assert_eq!((r.level, r.offset), (0, 0));
    let deep = FormProfile::new(16, vec![8]).with_i_power(4);
    let r = stable_reduce(&deep, 2).unwrap();
    assert!(r.kernel_dim <= 1);
    assert!(r.shell.components().iter().all(|c| c.cells.len() == 1));
    assert_eq!(r.shell.cells(), window_cells(2, 14).as_slice());
}

#[test]
fn shift_equivalence() {
    let q = FormProfile::new(6, vec![1, 2]);
    let q2 = FormProfile::new(10, vec![3, 2]);
    assert_eq!(kernel_shift_equiv(&q, &q, 2, true).unwrap(), Some(0));
    assert_eq!(kernel_shift_equiv(&q, &q2, 2, true).unwrap(), Some(2));
    assert_eq!(kernel_shift_equiv(&q, &q2, 2, false).unwrap(), None);
    assert!(matches!(kernel_shift_equiv(&q, &FormProfile::new(7, vec![3]), 2, true), Err(Error::Parity(_))));
}

#[test]
fn tower_examples() {
    for n in 1..=4u32 {
        let p = FormProfile::new(1 << (n + 1), vec![1 << n]).with_i_power(n + 1);
        assert_eq!(build_tower(&p).unwrap().dims(), vec![1 << (n + 1), 0]);
        assert!(validate(&p).is_empty(), "{:?}", validate(&p));
    }
}

fn arb_profile() -> impl Strategy<Value = FormProfile> {
    (2u32..40, prop::collection::vec(1u32..6, 0..8)).prop_map(|(dim, raw)| {
        // keep only the prefix of indices that still fits
        let mut cur = dim;
        let mut pattern = Vec::new();
        for i in raw {
            if cur <= 1 {
                break;
            }
            let i = i.min(cur / 2);
            pattern.push(i);
            cur -= 2 * i;
        }
        if cur > 1 {
            pattern.push(cur / 2);
        }
        FormProfile::new(dim, pattern)
    })
}

proptest! {
    #[test]
    fn kernel_index_is_monotone(p in arb_profile()) {
        let tower = build_tower(&p).unwrap();
        let dims = tower.dims();
        prop_assert!(*dims.last().unwrap() <= 1);
        for w in dims.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        let mut prev = usize::MAX;
        for n in 1..6 {
            let (j, kd) = kn_kernel_index(&p, n).unwrap();
            prop_assert!(j <= prev);
            prop_assert!(kd as u64 <= 1u64 << (n + 1));
            prop_assert!(j == 0 || dims[j - 1] as u64 > 1u64 << (n + 1));
            prev = j;
        }
    }

    #[test]
    fn accepted_profiles_reduce(p in arb_profile(), n in 1u32..4) {
        prop_assume!(validate(&p).is_empty());
        let r = stable_reduce(&p, n).unwrap();
        prop_assert_eq!(2 * r.offset + r.kernel_dim, p.dim);
    }

    #[test]
    fn morava_round_trip(n in 2u32..4, seed in any::<u64>(), offset in 0u32..8) {
        let lo = (1u32 << n) - 1;
        let dim = lo + offset % lo;
        let cells = window_cells(n, dim);
        let mut s = seed;
        let mut comps: Vec<Vec<Cell>> = Vec::new();
        for c in cells {
            let k = (s % (comps.len() as u64 + 1)) as usize;
            s = s.rotate_right(7) ^ 0x9e37_79b9_7f4a_7c15;
            if k == comps.len() {
                comps.push(vec![c]);
            } else {
                comps[k].push(c);
            }
        }
        let m = MDTDiagram::new(Flavor::Morava(n), dim, comps).unwrap();
        let chow = morava_to_chow(&m, n).unwrap();
        prop_assert!(check_outer_excellent(&chow, n).unwrap().ok());
        prop_assert_eq!(chow_to_morava(&chow, n).unwrap(), m);
    }
}
