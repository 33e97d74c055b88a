use lclt_core::rng::stream;
use lclt_core::scalar::binomial;
use lclt_core::{count_triangles, count_triangles_naive, sample_gnp, BitGraph, GnpSampler};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bitset_count_matches_triple_loop(n in 1usize..=64, edges in prop::collection::vec((0usize..64, 0usize..64), 0..600)) {
        let edges: Vec<_> = edges.into_iter().filter(|&(u, v)| u < n && v < n).collect();
        let g = BitGraph::from_edges(n, &edges);
        prop_assert!(g.is_well_formed());
        prop_assert_eq!(count_triangles(&g), count_triangles_naive(&g));
    }

    #[test]
    fn sampled_graphs_count_consistently(n in 1usize..=130, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let s = sample_gnp(n, p, seed, 3).unwrap();
        prop_assert!(s.graph.is_well_formed());
        let naive = count_triangles_naive(&s.graph);
        prop_assert_eq!(count_triangles(&s.graph), naive);
        let mut sampler = GnpSampler::new(n, p).unwrap();
        prop_assert_eq!(sampler.draw_count(&mut stream(seed, 3)), naive);
    }
}

#[test]
fn complete_and_cycle() {
    for n in [3usize, 5, 63, 64, 65, 130] {
        assert_eq!(u128::from(count_triangles(&BitGraph::complete(n))), binomial(n as u64, 3));
        let expect = u64::from(n == 3);
        assert_eq!(count_triangles(&BitGraph::cycle(n)), expect);
    }
}
