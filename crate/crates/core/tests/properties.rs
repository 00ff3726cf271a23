mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use pdpaths::algebra::{ConflictGraph, GroupElement, JoinResult, Symbol};
use pdpaths::cohomology::{is_prefeasible, normalize_instance, prefeasible_closure, CfpEdge, CfpInstance, VertexLabeling};
use pdpaths::corpus::{generate_one, CorpusSpec};
use pdpaths::homology::merge_words;
use pdpaths::oracle::{brute_force_solve, enumerate_divisors, OracleBudget, OracleVerdict};
use pdpaths::order::ClosedSet;
use pdpaths::pipeline::{solve_pipeline, RunConfig, Verdict};
use pdpaths::planar::{extract_paths, normalize_terminals, reduce_degree, trace_faces, validate_solution, PlanarInstance};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Arc<ConflictGraph>> {
    (1usize..=4, any::<u64>()).prop_map(|(k, bits)| {
        let pairs: Vec<(usize, usize)> = (1..=k)
            .flat_map(|i| (i + 1..=k).map(move |j| (i, j)))
            .enumerate()
            .filter(|(n, _)| bits >> n & 1 == 1)
            .map(|(_, p)| p)
            .collect();
        Arc::new(ConflictGraph::new(k, pairs).unwrap())
    })
}

fn raw_strategy(k: usize, max_len: usize) -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec((1..=k, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(g, pos)| if pos { Symbol::pos(g) } else { Symbol::neg(g) }).collect())
}

fn graph_and_words(n: usize, max_len: usize) -> impl Strategy<Value = (Arc<ConflictGraph>, Vec<Vec<Symbol>>)> {
    graph_strategy().prop_flat_map(move |g| {
        let k = g.k();
        (Just(g), prop::collection::vec(raw_strategy(k, max_len), n))
    })
}

fn corpus_instance() -> impl Strategy<Value = PlanarInstance> {
    any::<u64>().prop_map(|seed| generate_one(seed, &CorpusSpec { max_vertices: 7, max_edges: 11, ..CorpusSpec::default() }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn group_axioms((g, w) in graph_and_words(3, 8)) {
        let (x, y, z) = (element(&g, &w[0]), element(&g, &w[1]), element(&g, &w[2]));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert!((&x * &x.inverse()).is_identity());
        let concat: Vec<Symbol> = w[0].iter().chain(&w[1]).copied().collect();
        prop_assert_eq!(element(&g, &concat), &x * &y);
        // stored words are reduced and canonical
        prop_assert_eq!(x.word().len(), reachable_key(&g, x.word(), true).len());
    }

    #[test]
    fn order_is_a_lattice((g, w) in graph_and_words(2, 7)) {
        let (x, y) = (element(&g, &w[0]), element(&g, &w[1]));
        let m = x.meet(&y).unwrap();
        prop_assert!(m.leq(&x).unwrap() && m.leq(&y).unwrap());
        prop_assert_eq!(x.leq(&y).unwrap(), m == x);
        if let JoinResult::Finite(j) = x.join(&y).unwrap() {
            prop_assert!(x.leq(&j).unwrap() && y.leq(&j).unwrap());
            prop_assert!(j.len() <= x.len() + y.len());
        }
    }

    #[test]
    fn divisors_are_downward_closed((g, w) in graph_and_words(1, 6)) {
        let x = element(&g, &w[0]);
        let budget = OracleBudget::default();
        let ds = enumerate_divisors(&x, &budget).unwrap();
        for d in &ds {
            prop_assert!(d.leq(&x).unwrap());
            let below = enumerate_divisors(d, &budget).unwrap();
            prop_assert!(below.is_subset(&ds));
        }
    }

    #[test]
    fn peaks_have_one_maximal_symbol((g, w) in graph_and_words(1, 10)) {
        let x = element(&g, &w[0]);
        for p in x.peaks() {
            prop_assert_eq!(p.maximal_symbols().len(), 1);
            prop_assert!(p.leq(&x).unwrap());
        }
    }

    #[test]
    fn merge_reproduces_projections((g, w) in graph_and_words(1, 10)) {
        let k = g.k();
        let word = &w[0];
        let mut masks: Vec<u64> = g.pairs().iter().map(|&(i, j)| 1 << (i - 1) | 1 << (j - 1)).collect();
        masks.extend((1..=k).map(|i| 1u64 << (i - 1)));
        let project = |w: &[Symbol], m: u64| -> Vec<Symbol> { w.iter().copied().filter(|s| m & 1 << (s.generator() - 1) != 0).collect() };
        let parts: Vec<(u64, Vec<Symbol>)> = masks.iter().map(|&m| (m, project(word, m))).collect();
        let merged = merge_words(&parts).unwrap();
        for (m, part) in &parts {
            prop_assert_eq!(&project(&merged, *m), part);
        }
        prop_assert_eq!(reachable_key(&g, &merged, false), reachable_key(&g, word, false));
    }

    #[test]
    fn closure_dominates_and_is_prefeasible(
        (g, w) in graph_and_words(3, 1),
        ends in prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 3),
    ) {
        let edges: Vec<CfpEdge> = ends
            .iter()
            .zip(&w)
            .map(|(&(u, v, stable), raw)| CfpEdge {
                tail: u,
                head: v,
                phi: element(&g, raw),
                allowed: if stable { ClosedSet::Stable((1 << g.k()) - 1) } else { ClosedSet::Unit },
            })
            .collect();
        let norm = normalize_instance(&CfpInstance::new(Arc::clone(&g), 3, edges).unwrap());
        let mut start = norm.identity_labeling();
        let e0 = &norm.instance().edges[0];
        start[e0.tail] = e0.phi.clone();
        if let VertexLabeling::Finite(f) = prefeasible_closure(&norm, &start, 100) {
            prop_assert!(is_prefeasible(&norm, &f));
            for (a, b) in start.iter().zip(&f) {
                prop_assert!(a.leq(b).unwrap());
            }
            // already pre-feasible labelings are fixed points
            prop_assert_eq!(prefeasible_closure(&norm, &f, 100), VertexLabeling::Finite(f.clone()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn normalizations_stay_plane(inst in corpus_instance()) {
        for derived in [normalize_terminals(&inst).inst, reduce_degree(&inst).inst] {
            derived.validate().unwrap();
            let faces = trace_faces(&derived).unwrap();
            prop_assert_eq!(derived.vertex_count() + faces.len(), derived.edge_count() + 2);
        }
    }

    #[test]
    fn extraction_recovers_oracle_paths(inst in corpus_instance()) {
        if let OracleVerdict::Feasible(sol) = brute_force_solve(&inst, &OracleBudget::default()) {
            let labels = sol.edge_labels(&inst);
            let back = extract_paths(&inst, &labels).unwrap();
            validate_solution(&inst, &back).unwrap();
            prop_assert_eq!(back.edge_labels(&inst), labels);
        }
    }

    #[test]
    fn dropping_conflicts_keeps_solutions(inst in corpus_instance()) {
        let budget = OracleBudget::default();
        let before = brute_force_solve(&inst, &budget);
        let fewer: Vec<(usize, usize)> = inst.graph.pairs()[1..].to_vec();
        let relaxed = PlanarInstance { graph: Arc::new(ConflictGraph::new(inst.k(), fewer).unwrap()), ..inst.clone() };
        if let OracleVerdict::Feasible(sol) = &before {
            validate_solution(&relaxed, sol).unwrap();
            prop_assert!(brute_force_solve(&relaxed, &budget).is_feasible());
        }
    }

    #[test]
    fn pipeline_answers_validate(inst in corpus_instance()) {
        let report = solve_pipeline(&inst, &RunConfig::default()).unwrap();
        if let Verdict::Feasible(sol) = &report.verdict {
            validate_solution(&inst, sol).unwrap();
            if let Some(cert) = &report.certificate {
                prop_assert!(cert.dual.cfp.is_feasible_labeling(&cert.f));
                prop_assert_eq!(cert.dual.cfp.cohomologous(&cert.f), cert.psi.clone());
            }
        }
    }
}

#[test]
fn divisor_lattice_is_a_set_of_prefixes() {
    let g = Arc::new(ConflictGraph::parse("k=2; F={}").unwrap());
    let x = GroupElement::parse(&g, "g1 g2").unwrap();
    let ds: BTreeSet<String> = enumerate_divisors(&x, &OracleBudget::default()).unwrap().iter().map(|d| d.to_string()).collect();
    assert_eq!(ds, ["1", "g1", "g2", "g1 g2"].map(String::from).into());
}
