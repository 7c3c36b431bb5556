use proptest::prelude::*;

use ranking_core::graph::{generate_family, Family};
use ranking_core::Graph;
use ranking_forge::{exact_ratio, monte_carlo_ratio};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..=7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_filter_map("needs an edge", move |mask| {
            let edges: Vec<_> = pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&e, _)| e).collect();
            (!edges.is_empty()).then(|| Graph::new(n, &edges).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // any maximal matching has at least half the edges of a maximum one
    #[test]
    fn exact_ratio_is_at_least_half(g in arb_graph()) {
        let e = exact_ratio(&g).unwrap();
        prop_assert!(2 * e.numerator >= e.denominator);
        prop_assert!(e.numerator <= e.denominator);
    }

    #[test]
    fn estimate_is_a_bounded_mean(g in arb_graph(), k in 1u32..6, seed in any::<u64>()) {
        let est = monte_carlo_ratio(&g, 200, k, seed).unwrap();
        prop_assert!((0.5..=1.0).contains(&est.mean));
        prop_assert!(est.half_width >= 0.0);
        prop_assert_eq!(est.seed, seed);
        prop_assert_eq!(monte_carlo_ratio(&g, 200, k, seed).unwrap(), est);
    }
}

#[test]
fn planted_matching_graphs_use_their_matching() {
    let g = generate_family(&Family::RandomWithPerfectMatching { n: 8, density: 0.2, seed: 4 }).unwrap();
    let est = monte_carlo_ratio(&g, 1000, 10, 4).unwrap();
    assert_eq!(est.optimum, 4);
}

#[test]
fn any_bucket_count_matches_the_uniform_order() {
    let g = generate_family(&Family::Path { n: 4 }).unwrap();
    let exact = exact_ratio(&g).unwrap().value();
    for k in [1, 2, 50] {
        let est = monte_carlo_ratio(&g, 50_000, k, 3).unwrap();
        assert!((est.mean - exact).abs() <= 2.0 * est.half_width, "{est:?}");
    }
}
