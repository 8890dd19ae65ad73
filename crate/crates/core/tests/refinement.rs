use oswl_core::oswl::{oswl_vertex_colors, OswlConfig};
use oswl_core::wl::{color_refinement, distinguish, k_wl, k_wl_vertex_colors, refines, Algorithm, ColorTable, KwlConfig};
use oswl_core::{build_graph, LabeledGraph};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = LabeledGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(any::<bool>(), pairs),
            proptest::collection::vec(0u32..3, n),
        )
            .prop_map(move |(bits, labels)| {
                let mut edges = Vec::new();
                let mut i = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        if bits[i] {
                            edges.push((u, v));
                        }
                        i += 1;
                    }
                }
                build_graph(n, &edges, Some(labels)).unwrap()
            })
    })
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_subgraphs_is_color_refinement(g in graph_strategy(12)) {
        let t = ColorTable::new();
        let a = oswl_vertex_colors(&g, &OswlConfig::new(0), &t).unwrap();
        let b = color_refinement(&g, &t);
        prop_assert_eq!(a.partition(), b.partition());
    }

    #[test]
    fn hierarchy_refines_color_refinement(g in graph_strategy(8)) {
        let t = ColorTable::new();
        let cr = color_refinement(&g, &t);
        let ordered = oswl_vertex_colors(&g, &OswlConfig::new(1), &t).unwrap();
        let unordered = oswl_vertex_colors(&g, &OswlConfig::new(1).unordered(), &t).unwrap();
        let two = oswl_vertex_colors(&g, &OswlConfig::new(2), &t).unwrap();
        prop_assert!(ordered.refines(&cr));
        prop_assert!(ordered.refines(&unordered));
        prop_assert!(two.refines(&ordered));
        if g.n() >= 2 {
            let kwl = k_wl(&g, KwlConfig::new(2), &t).unwrap();
            prop_assert!(refines(&k_wl_vertex_colors(&kwl, g.n()), &cr.colors));
        }
    }

    #[test]
    fn verdicts_are_monotone(g in graph_strategy(7), h in graph_strategy(7)) {
        let t = ColorTable::new();
        let run = |alg: &str| distinguish(&g, &h, &alg.parse::<Algorithm>().unwrap(), &t).unwrap().distinguished();
        let cr = run("cr");
        prop_assert!(!cr || run("oswl:1"));
        prop_assert!(!run("oswl:1:unordered") || run("oswl:1"));
        prop_assert!(!run("oswl:1") || run("oswl:2"));
        if g.n() >= 2 && h.n() >= 2 {
            prop_assert!(!cr || run("kwl:2"));
        }
    }

    #[test]
    fn graph_colors_are_isomorphism_invariant((g, perm) in graph_strategy(9).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), perm_strategy(n))
    })) {
        let h = g.permute(&perm).unwrap();
        for alg in ["cr", "oswl:1", "vs-oswl:1", "oswl:1:unordered"] {
            let alg: Algorithm = alg.parse().unwrap();
            let a = alg.run(&g, &ColorTable::new()).unwrap();
            let b = alg.run(&h, &ColorTable::new()).unwrap();
            prop_assert_eq!(a.graph_color, b.graph_color);
            prop_assert_eq!(a.final_histogram(), b.final_histogram());
        }
    }

    #[test]
    fn repeated_runs_are_identical(g in graph_strategy(9)) {
        for alg in ["oswl:1", "vs-oswl:1"] {
            let alg: Algorithm = alg.parse().unwrap();
            let a = alg.run(&g, &ColorTable::checked()).unwrap();
            let b = alg.run(&g, &ColorTable::new()).unwrap();
            prop_assert_eq!(&a.coloring, &b.coloring);
            prop_assert_eq!(a.round_histograms, b.round_histograms);
        }
    }
}
