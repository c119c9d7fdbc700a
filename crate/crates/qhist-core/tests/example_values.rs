//! Per-operation checks of the built-in example against the independent
//! oracle: chain operators entry by entry, decoherence entries, excluded
//! branches, restricted sub-families, coarse structures, and the graph.

mod common;

use common::{example_vectors, oracle_decoherence, oracle_lp, oracle_probability, C};
use qhist_core::coarse::{
    check_minimal, check_sum_rule, check_weak, coarse_family, CoarseGraining, Partition,
};
use qhist_core::family::{Branch, Branches, HistoryFamily, StateDescriptor};
use qhist_core::graphs::{build_graph, to_dot, NodeId};
use qhist_core::lp::lp_value;
use qhist_core::search::example_family;

fn br(j: usize, k: usize, f: usize) -> Branch {
    Branch(vec![j - 1, k - 3, f - 6])
}

/// Outer-product entries `(C_h)_{ab} = f_a ⟨f|k⟩⟨k|j⟩ conj(j_b)` of a
/// rank-one chain, computed oracle-side.
fn oracle_chain_entry(vs: &common::ExampleVectors, h: &Branch, a: usize, b: usize) -> C {
    let path = vs.path(h.indices());
    let first = path[0];
    let last = *path.last().unwrap();
    // Amplitude of the middle transfer: ⟨f|k⟩⟨k|j⟩ … excluding ⟨j|0⟩.
    let mut amp = common::c(1.0, 0.0);
    for w in path.windows(2) {
        amp = common::oracle_inner(w[1], w[0]).mul(amp);
    }
    last[a].mul(amp).mul(first[b].conj())
}

#[test]
fn chain_operator_matches_oracle_outer_product() {
    let f = example_family();
    let vs = example_vectors();
    let h = br(1, 3, 6);
    let chain = f.chain_operator(&h).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let want = oracle_chain_entry(&vs, &h, a, b);
            let got = chain.entry(a, b);
            assert!(
                (got.re - want.re).abs() < 1e-12 && (got.im - want.im).abs() < 1e-12,
                "entry ({a},{b}): {got} vs oracle {want:?}"
            );
        }
    }
}

#[test]
fn chain_through_orthogonal_consecutive_projectors_vanishes() {
    // 1▷5▷6: the final state has no overlap with the middle one.
    let f = example_family();
    let chain = f.chain_operator(&Branch(vec![0, 2, 0])).unwrap();
    assert!(chain.max_norm() <= 1e-12);
}

#[test]
fn excluded_branches_all_carry_zero_probability() {
    let f = example_family();
    let vs = example_vectors();
    let Branches::Listed(listed) = f.branches() else { panic!("example lists branches") };
    let mut excluded = 0;
    for h in f.product_branches() {
        if listed.contains(&h) {
            continue;
        }
        excluded += 1;
        let p = f.probability(&h).unwrap();
        let oracle = oracle_probability(&vs.v0, &vs.path(h.indices()));
        assert!(p <= 1e-12, "excluded branch {h} has probability {p}");
        assert!(oracle <= 1e-12, "oracle disagrees on {h}");
    }
    assert_eq!(excluded, 8);
    assert!(f.validate().pass());
}

#[test]
fn decoherence_entries_match_oracle_on_all_pairs() {
    let f = example_family();
    let vs = example_vectors();
    let branches = f.branch_list().unwrap();
    for a in &branches {
        for b in &branches {
            let got = f.decoherence_functional(a, b).unwrap();
            let want = oracle_decoherence(&vs.v0, &vs.path(a.indices()), &vs.path(b.indices()));
            assert!(
                (got.re - want.re).abs() < 1e-12 && (got.im - want.im).abs() < 1e-12,
                "D({a},{b}) = {got} vs oracle {want:?}"
            );
        }
    }
}

#[test]
fn decoherence_vanishes_for_distinct_finals() {
    let f = example_family();
    let d = f.decoherence_matrix().unwrap();
    for i in 0..d.len() {
        for j in 0..d.len() {
            if d.branches()[i].indices().last() != d.branches()[j].indices().last() {
                assert!(d.entry(i, j).norm() <= 1e-12);
            }
        }
    }
    // Diagonal: eight times 1/16, twice 1/4.
    let diag: Vec<f64> = (0..d.len()).map(|i| d.entry(i, i).re).collect();
    assert_eq!(diag.iter().filter(|&&p| (p - 0.0625).abs() < 1e-12).count(), 8);
    assert_eq!(diag.iter().filter(|&&p| (p - 0.25).abs() < 1e-12).count(), 2);
}

#[test]
fn lp_values_match_oracle() {
    let f = example_family();
    let vs = example_vectors();
    for h in f.branch_list().unwrap() {
        let got = lp_value(&f, &h).unwrap();
        let want = oracle_lp(&vs.v0, &vs.path(h.indices()));
        assert!((got - want).abs() < 1e-12, "lp({h}) = {got} vs oracle {want}");
    }
}

#[test]
fn restricted_final_eight_family_is_weakly_decoherent() {
    let f = example_family()
        .with_branches(Branches::Listed(vec![br(1, 5, 8), br(2, 5, 8)]))
        .unwrap();
    let verdict = check_weak(&f).unwrap();
    assert!(verdict.pass);
    // The single cross term is purely imaginary (i/4).
    let d = f.decoherence_functional(&br(1, 5, 8), &br(2, 5, 8)).unwrap();
    assert!(d.re.abs() < 1e-12);
    assert!((d.im.abs() - 0.25).abs() < 1e-12);
}

#[test]
fn middle_merge_produces_summed_projector_slot() {
    let f = example_family();
    let g = CoarseGraining::new(
        vec![
            Partition::singletons(2),
            Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap(),
            Partition::singletons(3),
        ],
        &f,
    )
    .unwrap();
    let coarse = coarse_family(&f, &g).unwrap();
    assert_eq!(coarse.times()[1].len(), 2);
    assert_eq!(coarse.times()[1].outcome_labels()[0], "3+4");
    assert_eq!(coarse.times()[1].projectors()[0].rank(), 2);
    // Coarse branch count: the ten fine branches collapse to six cells.
    let Branches::Listed(coarse_branches) = coarse.branches() else { panic!() };
    assert_eq!(coarse_branches.len(), 6);

    let report = check_sum_rule(&f, &g).unwrap();
    assert!(report.pass, "the middle merge is one of the satisfied sum rules");
}

#[test]
fn first_slot_merge_sum_rule_holds() {
    let f = example_family();
    let g = CoarseGraining::new(
        vec![
            Partition::new(vec![vec![0, 1]], 2).unwrap(),
            Partition::singletons(3),
            Partition::singletons(3),
        ],
        &f,
    )
    .unwrap();
    let report = check_sum_rule(&f, &g).unwrap();
    assert!(report.pass);
    assert!(report.max_abs_residual <= 1e-12);
}

#[test]
fn full_merge_keeps_total_weight() {
    let f = example_family();
    let g = CoarseGraining::new(
        vec![
            Partition::new(vec![vec![0, 1]], 2).unwrap(),
            Partition::new(vec![vec![0, 1, 2]], 3).unwrap(),
            Partition::new(vec![vec![0, 1, 2]], 3).unwrap(),
        ],
        &f,
    )
    .unwrap();
    let coarse = coarse_family(&f, &g).unwrap();
    assert_eq!(coarse.product_count(), 1);
    // The first slot sums to the rank-two subspace containing the initial
    // state, the others to the identity.
    let p = coarse.probability(&Branch(vec![0, 0, 0])).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn replacing_the_initial_state_changes_the_minimal_verdict() {
    let f = example_family();
    let with_initial = |v: qhist_core::hilbert::Vector| {
        HistoryFamily::new(
            StateDescriptor::Pure(v),
            f.times().to_vec(),
            Branches::All,
            *f.tolerance(),
        )
        .unwrap()
    };

    // A state overlapping both first-slot rays revives the interference
    // terms that the sum rules forbid: merging the first slot over the
    // basis state |3⟩ leaves a cross term of 1/32.
    let broken = with_initial(qhist_core::hilbert::Vector::basis(3, 0).unwrap());
    let verdict = check_minimal(&broken).unwrap();
    assert!(!verdict.pass);
    assert!(verdict.worst_witness.unwrap().magnitude() > 1e-3);

    // Replacing the initial state by the first slot vector itself keeps
    // every rule intact: orthogonality to the other ray kills all cross
    // terms, so the verdict stays a pass.
    let aligned = with_initial(
        qhist_core::hilbert::Vector::new(vec![
            num_complex::Complex64::new(0.5, 0.0),
            num_complex::Complex64::new(0.5, 0.0),
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap(),
    );
    assert!(check_minimal(&aligned).unwrap().pass);
}

#[test]
fn all_singleton_slots_pass_minimal_vacuously() {
    let tol = qhist_core::hilbert::Tolerance::default();
    let p0 = qhist_core::hilbert::projector_from_vectors(
        &[qhist_core::hilbert::Vector::basis(2, 0).unwrap()],
        &tol,
    )
    .unwrap();
    let slot = qhist_core::family::TimeSlot::new("t1", vec![("0".into(), p0)], &tol).unwrap();
    let f = HistoryFamily::new(
        StateDescriptor::Pure(qhist_core::hilbert::Vector::basis(2, 0).unwrap()),
        vec![slot.clone(), slot],
        Branches::All,
        tol,
    )
    .unwrap();
    let verdict = check_minimal(&f).unwrap();
    assert!(verdict.pass);
    assert!(verdict.worst_witness.is_none());
}

#[test]
fn example_graph_has_the_published_shape() {
    let f = example_family();
    let g = build_graph(&f).unwrap();
    assert_eq!(g.node_count(), 9);

    let edge = |c1: usize, s1: usize, c2: usize, s2: usize| {
        (NodeId { column: c1, slot: s1 }, NodeId { column: c2, slot: s2 })
    };
    let expected = vec![
        edge(0, 0, 1, 0),
        edge(0, 0, 1, 1),
        edge(1, 0, 2, 0),
        edge(1, 0, 2, 1),
        edge(1, 0, 2, 2),
        edge(1, 1, 2, 0),
        edge(1, 1, 2, 1),
        edge(1, 1, 2, 2),
        edge(2, 0, 3, 0),
        edge(2, 0, 3, 1),
        edge(2, 1, 3, 0),
        edge(2, 1, 3, 1),
        edge(2, 2, 3, 2),
    ];
    assert_eq!(g.edges, expected.into_iter().collect());

    let dot = to_dot(&g);
    assert_eq!(dot.matches("rank=same").count(), 3);
    assert_eq!(dot.matches(" -> ").count(), 13);
    assert!(dot.contains("t0 -> t1_s1"));
    assert_eq!(dot, to_dot(&build_graph(&f).unwrap()));
}
