use concordance_core::abelian::FgAbGroup;
use concordance_core::engine::{tags, Engine, EngineError, KernelOutcome, ManifoldExpr};
use concordance_core::knowledge::{default_kb, load, BlockId};

fn g(s: &str) -> FgAbGroup {
    s.parse().unwrap()
}

fn engine() -> Engine {
    Engine::new(default_kb())
}

fn sum(parts: &[(BlockId, u64)]) -> ManifoldExpr {
    ManifoldExpr::new(parts.iter().copied()).unwrap()
}

fn answer(e: &Engine, parts: &[(BlockId, u64)]) -> Vec<FgAbGroup> {
    e.concordance_set(&sum(parts)).unwrap().value.candidates
}

fn elementary(p: u64, r: u32) -> FgAbGroup {
    FgAbGroup::cyclic(p).power(r as usize)
}

fn plus(a: &FgAbGroup, b: &FgAbGroup) -> FgAbGroup {
    FgAbGroup::sum(a, b)
}

#[test]
fn complex_projective_families() {
    let e = engine();
    for k in 1..=5u32 {
        let kk = k as u64;
        assert_eq!(
            answer(&e, &[(BlockId::cp(4), kk)]),
            vec![g("Z2")],
            "CP4 k={k}"
        );
        let cp5 = plus(&elementary(2, k + 1), &g("Z3"));
        assert_eq!(answer(&e, &[(BlockId::cp(5), kk)]), vec![cp5], "CP5 k={k}");
        let cp6 = plus(&elementary(2, 2 * k - 1), &elementary(3, k));
        assert_eq!(answer(&e, &[(BlockId::cp(6), kk)]), vec![cp6], "CP6 k={k}");
        let cp7 = plus(&elementary(2, k + 1), &elementary(3, k - 1));
        assert_eq!(answer(&e, &[(BlockId::cp(7), kk)]), vec![cp7], "CP7 k={k}");
    }
}

#[test]
fn quaternionic_families() {
    let e = engine();
    for k in 1..=5u32 {
        let kk = k as u64;
        assert_eq!(answer(&e, &[(BlockId::hp(2), kk)]), vec![g("Z2")]);
        assert_eq!(answer(&e, &[(BlockId::hp(3), kk)]), vec![elementary(2, k)]);
    }
    assert_eq!(answer(&e, &[(BlockId::hp(4), 1)]), vec![g("Z2")]);
}

#[test]
fn unresolved_families_report_candidates() {
    let e = engine();
    for k in 2..=4u32 {
        let a = e
            .concordance_set(&sum(&[(BlockId::hp(4), k as u64)]))
            .unwrap()
            .value;
        assert!(!a.resolved());
        assert!(a.candidates.contains(&elementary(2, k)));
        assert!(a
            .candidates
            .contains(&plus(&g("Z4"), &elementary(2, k - 2))));
        assert!(!a.missing.is_empty());
    }
    let a = e
        .concordance_set(&sum(&[(BlockId::op2(), 2)]))
        .unwrap()
        .value;
    assert_eq!(a.candidates, {
        let mut v = vec![g("Z2^3"), g("Z4+Z2")];
        v.sort();
        v
    });
    let a = e
        .concordance_set(&sum(&[(BlockId::cp(8), 2)]))
        .unwrap()
        .value;
    assert_eq!(a.candidates.len(), 2);
    assert!(a.candidates.contains(&g("Z2^4")));
    assert!(a.candidates.contains(&g("Z4+Z2^2")));
}

#[test]
fn mixed_cp6_hp3() {
    let e = engine();
    for k in 1..=4u32 {
        for l in 1..=4u32 {
            let want = plus(&elementary(2, 2 * k + l - 1), &elementary(3, k));
            let got = answer(
                &e,
                &[(BlockId::cp(6), k as u64), (BlockId::hp(3), l as u64)],
            );
            assert_eq!(got, vec![want], "k={k} l={l}");
        }
    }
}

#[test]
fn two_nontrivial_families_name_the_missing_overlap() {
    let e = engine();
    let d = e
        .concordance_set(&sum(&[(BlockId::cp(8), 2), (BlockId::hp(4), 1)]))
        .unwrap();
    let a = d.value;
    assert!(!a.resolved());
    let rights: Vec<FgAbGroup> = a.scenarios.iter().map(|s| s.right.clone()).collect();
    assert!(
        rights.contains(&g("Z2^3")) && rights.contains(&g("Z2^4")),
        "{rights:?}"
    );
    for c in ["Z2^4", "Z4+Z2^2", "Z2^5", "Z4+Z2^3"] {
        assert!(a.candidates.contains(&g(c)), "{c}");
    }
    assert_eq!(a.candidates.len(), 4);
    assert!(a
        .missing
        .iter()
        .any(|m| m.contains("image_overlap") && m.contains("CP8") && m.contains("HP4")));

    let k = e
        .kernel_of_attaching_sum(&sum(&[(BlockId::cp(8), 2), (BlockId::hp(4), 1)]))
        .unwrap();
    assert!(matches!(k.value, KernelOutcome::Ambiguous { .. }));
}

#[test]
fn stated_overlap_resolves_the_kernel() {
    let mut doc = concordance_core::knowledge::default_document()
        .replace("value = \"unknown\"", "value = \"0\"");
    doc.push('\n');
    let e = Engine::new(load(&doc).unwrap());
    let k = e
        .kernel_of_attaching_sum(&sum(&[(BlockId::cp(8), 2), (BlockId::hp(4), 1)]))
        .unwrap();
    assert_eq!(k.value, KernelOutcome::Determined(g("Z2^3")));
}

#[test]
fn ses_endpoints() {
    let e = engine();
    let ses = e.structure_ses(&sum(&[(BlockId::cp(5), 3)])).unwrap().value;
    assert_eq!(ses.scenarios.len(), 1);
    assert_eq!(ses.scenarios[0].left, g("Z2+Z3"));
    assert_eq!(ses.scenarios[0].right, g("Z2^3"));
    assert!(ses.scenarios[0].middle.contains(&g("Z2^4+Z3")));
    let ses = e.structure_ses(&sum(&[(BlockId::cp(7), 2)])).unwrap().value;
    assert_eq!(ses.scenarios[0].left, g("Z2"));
    assert_eq!(ses.scenarios[0].right, g("Z2^2+Z3"));
}

#[test]
fn inertia_is_trivial_for_default_blocks() {
    let e = engine();
    let d = e.inertia_group(&sum(&[(BlockId::cp(5), 2)])).unwrap();
    assert!(d.value.group.is_trivial());
    let h = e
        .homotopy_inertia_group(&sum(&[(BlockId::cp(6), 1), (BlockId::hp(3), 2)]))
        .unwrap();
    assert!(h.value.group.is_trivial());
    assert!(h
        .trace
        .steps()
        .iter()
        .any(|s| s.cite == tags::HOMOTOPY_INERTIA));
}

#[test]
fn homotopy_inertia_requires_hypotheses() {
    let e = engine();
    let r = e.homotopy_inertia_group(&sum(&[
        (BlockId::cp(5), 1),
        (BlockId::sphere_product(5), 1),
    ]));
    assert!(matches!(r, Err(EngineError::Hypothesis { .. })), "{r:?}");
}

const CUSTOM_INERTIA: &str = r#"
[[fact]]
kind = "theta"
key = "10"
value = "Z2+Z3"
cite = "t"

[[fact]]
kind = "inertia_c"
key = "CP5"
value = "subgroup[[1],[0]]"
cite = "t"

[[fact]]
kind = "inertia_c"
key = "SxS5"
value = "subgroup[[0],[1]]"
cite = "t"
"#;

#[test]
fn inertia_sum_and_collapse() {
    let e = Engine::new(load(CUSTOM_INERTIA).unwrap());
    let cp5 = sum(&[(BlockId::cp(5), 1)]);
    let both = sum(&[(BlockId::cp(5), 3), (BlockId::sphere_product(5), 2)]);
    assert_eq!(e.inertia_group(&cp5).unwrap().value.group, g("Z2"));
    assert_eq!(e.inertia_group(&both).unwrap().value.group, g("Z2+Z3"));
    let sxs = sum(&[(BlockId::sphere_product(5), 1)]);
    let joined = e
        .inertia_group(&cp5)
        .unwrap()
        .value
        .join(&e.inertia_group(&sxs).unwrap().value)
        .unwrap();
    assert!(joined.same_subgroup(&e.inertia_group(&both).unwrap().value));
    assert!(!e.collapse_map_injective(&cp5, &sxs).unwrap().value);
    let cp5_again = sum(&[(BlockId::cp(5), 1)]);
    assert!(e.collapse_map_injective(&cp5, &cp5_again).unwrap().value);
    let d = e.collapse_map_injective(&cp5, &sxs).unwrap();
    assert!(d
        .trace
        .steps()
        .iter()
        .any(|s| s.cite == tags::COLLAPSE_INJECTIVE));
}

#[test]
fn collapse_with_default_data_is_injective() {
    let e = engine();
    let d = e
        .collapse_map_injective(&sum(&[(BlockId::cp(6), 1)]), &sum(&[(BlockId::hp(3), 2)]))
        .unwrap();
    assert!(d.value);
    assert!(matches!(
        e.collapse_map_injective(&sum(&[(BlockId::cp(6), 1)]), &sum(&[(BlockId::cp(5), 1)])),
        Err(EngineError::DimensionMismatch { .. })
    ));
}

#[test]
fn simplification_drops_highly_connected_summands() {
    let e = engine();
    let m = sum(&[(BlockId::cp(5), 2), (BlockId::sphere_product(5), 3)]);
    let s = e.simplify_summands(&m);
    assert_eq!(s.value, sum(&[(BlockId::cp(5), 2)]));
    assert!(s
        .trace
        .steps()
        .iter()
        .any(|t| t.cite == tags::HIGHLY_CONNECTED));
    assert_eq!(
        answer(&e, &[(BlockId::cp(5), 2), (BlockId::sphere_product(5), 3)]),
        vec![g("Z2^3+Z3")]
    );
    // HP2 # CP4 in dimension 8
    let m = sum(&[(BlockId::hp(2), 2), (BlockId::cp(4), 1)]);
    assert_eq!(e.simplify_summands(&m).value, sum(&[(BlockId::cp(4), 1)]));
    assert_eq!(
        answer(&e, &[(BlockId::hp(2), 2), (BlockId::cp(4), 1)]),
        vec![g("Z2")]
    );
    // nothing is removed outside dimensions 6 to 12
    let m = sum(&[(BlockId::op2(), 1)]);
    assert_eq!(e.simplify_summands(&m).value, m);
}

#[test]
fn spheres_are_units() {
    let e = engine();
    assert_eq!(
        answer(&e, &[(BlockId::cp(6), 2), (BlockId::sphere(12), 4)]),
        answer(&e, &[(BlockId::cp(6), 2)])
    );
    assert_eq!(answer(&e, &[(BlockId::sphere(10), 2)]), vec![g("Z2+Z3")]);
}

#[test]
fn trace_cites_are_known() {
    let kb = default_kb();
    let cites: std::collections::BTreeSet<String> = kb.facts().map(|f| f.cite.clone()).collect();
    let e = Engine::new(kb);
    let exprs = [
        sum(&[(BlockId::cp(5), 3)]),
        sum(&[(BlockId::cp(7), 2)]),
        sum(&[(BlockId::cp(6), 2), (BlockId::hp(3), 1)]),
        sum(&[(BlockId::cp(8), 2), (BlockId::hp(4), 1)]),
        sum(&[(BlockId::hp(2), 1), (BlockId::cp(4), 2)]),
        sum(&[(BlockId::cp(5), 1), (BlockId::sphere_product(5), 1)]),
    ];
    for m in &exprs {
        let d = e.concordance_set(m).unwrap();
        assert!(!d.trace.is_empty());
        for s in d.trace.steps() {
            assert!(
                cites.contains(&s.cite) || tags::ALL.contains(&s.cite.as_str()),
                "{m}: {s}"
            );
        }
    }
}

#[test]
fn missing_theta_is_insufficient() {
    let e = engine();
    let r = e.concordance_set(&sum(&[(BlockId::sphere_product(9), 1)]));
    assert!(matches!(r, Err(EngineError::Knowledge(_))), "{r:?}");
}
