use edgediff_core::diffusion::{active_posterior, degree_marginal_params, forward_marginal_sample};
use edgediff_core::graph::{edge_overlap, parse_edge_list, write_edge_list, ActiveMask, Graph};
use edgediff_core::sampler::{edge_reweighted_probs, reweight_nodes, rng_from_seed};
use edgediff_core::schedule::{expected_active_nodes, expected_active_nodes_direct};
use edgediff_core::stats::{clustering, gini, square_count, triangle_count};
use edgediff_core::{DegreeSequence, NoiseSchedule};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..(3 * n)).prop_map(move |pairs| {
            Graph::from_edges(n, pairs.into_iter().filter(|(i, j)| i != j)).unwrap()
        })
    })
}

fn schedule_strategy(max_t: usize) -> impl Strategy<Value = NoiseSchedule> {
    proptest::collection::vec(0.01f64..0.99, 1..=max_t)
        .prop_map(|b| NoiseSchedule::from_betas(b).unwrap())
}

proptest! {
    #[test]
    fn edge_list_round_trips(g in graph_strategy(30)) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn degree_sum_is_twice_edge_count(g in graph_strategy(40)) {
        prop_assert_eq!(g.degree_sequence().sum(), 2 * g.edge_count());
    }

    #[test]
    fn active_subgraph_count_bounds(g in graph_strategy(25), bits in proptest::collection::vec(any::<bool>(), 25)) {
        let mask = ActiveMask(bits[..g.node_count()].to_vec());
        let inside = g.active_subgraph_edge_count(&mask).unwrap();
        prop_assert!(inside <= g.edge_count());
        prop_assert_eq!(g.active_subgraph_edge_count(&ActiveMask::all(g.node_count(), true)).unwrap(), g.edge_count());
        prop_assert_eq!(g.active_subgraph_edge_count(&ActiveMask::all(g.node_count(), false)).unwrap(), 0);
    }

    #[test]
    fn edge_overlap_of_subgraph(g in graph_strategy(30), seed in any::<u64>(), keep in 0.0f64..1.0) {
        let sched = NoiseSchedule::from_betas(vec![1.0 - keep]).unwrap();
        let sub = forward_marginal_sample(&g, &sched, 1, &mut rng_from_seed(seed)).unwrap();
        let eo = edge_overlap(&sub, &g).unwrap();
        prop_assert!((0.0..=1.0).contains(&eo));
        prop_assert_eq!(sub.common_edge_count(&g), g.common_edge_count(&sub));
        prop_assert_eq!(sub.common_edge_count(&g), sub.edge_count());
        prop_assert_eq!(eo, sub.edge_count() as f64 / g.edge_count().max(1) as f64);
        prop_assert_eq!(edge_overlap(&g, &g).unwrap(), if g.edge_count() > 0 { 1.0 } else { 0.0 });
    }

    #[test]
    fn alpha_bar_is_nonincreasing(s in schedule_strategy(40)) {
        prop_assert_eq!(s.alpha_bar(0), 1.0);
        for t in 1..=s.horizon() {
            prop_assert!(s.alpha_bar(t) <= s.alpha_bar(t - 1));
            prop_assert!(s.alpha_bar(t) >= 0.0);
        }
    }

    #[test]
    fn degree_marginal_mean(d0 in 0usize..200, s in schedule_strategy(20)) {
        let t = s.horizon();
        let b = degree_marginal_params(d0, t, &s).unwrap();
        prop_assert!((b.mean() - d0 as f64 * s.alpha_bar(t)).abs() < 1e-9);
        let total: f64 = (0..=d0).map(|k| b.pmf(k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn active_posterior_is_probability_and_monotone(d0 in 0usize..50, s in schedule_strategy(12)) {
        for t in 1..=s.horizon() {
            let mut last = -1.0;
            for dt in (0..=d0).rev() {
                let p = active_posterior(dt, d0, t, &s).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(p >= last);
                last = p;
            }
            prop_assert_eq!(active_posterior(d0, d0, t, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn expected_active_forms_agree(
        degrees in proptest::collection::vec(0usize..=20, 1..30),
        alphas in proptest::collection::vec(0.05f64..1.0, 1..=16),
    ) {
        let d0 = DegreeSequence(degrees);
        for t in 1..=alphas.len() {
            let a = expected_active_nodes(&d0, &alphas, t);
            let b = expected_active_nodes_direct(&d0, &alphas, t);
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300) + 1e-300);
            prop_assert!(a <= d0.positive_count() as f64 + 1e-9);
        }
    }

    #[test]
    fn node_reweighting_hits_target_without_clamps(
        p in proptest::collection::vec(0.0f64..1.0, 1..40),
        frac in 0.0f64..1.0,
    ) {
        let total: f64 = p.iter().sum();
        prop_assume!(total > 0.0);
        let (q, clamps) = reweight_nodes(&p, frac * total).unwrap();
        prop_assert!(q.iter().all(|x| (0.0..=1.0).contains(x)));
        if clamps == 0 {
            prop_assert!((q.iter().sum::<f64>() - frac * total).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_reweighting_preserves_budget(
        raw in proptest::collection::vec(0.0f64..1.0, 1..60),
        delta in 0.0f64..20.0,
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 0.0);
        let r = edge_reweighted_probs(&raw, delta).unwrap();
        prop_assert!(r.probs.iter().all(|x| (0.0..=1.0).contains(x)));
        let s: f64 = r.probs.iter().sum();
        prop_assert!((s + r.clamped_mass - delta).abs() < 1e-9 * delta.max(1.0));
    }

    #[test]
    fn stat_bounds(g in graph_strategy(20)) {
        let c = clustering(&g);
        prop_assert!((0.0..=1.0).contains(&c));
        if let Ok(gi) = gini(&g.degree_sequence()) {
            prop_assert!(gi >= 0.0 && gi <= 1.0 - 1.0 / g.node_count() as f64 + 1e-12);
        }
        let n = g.node_count() as u64;
        prop_assert!(triangle_count(&g) <= n * n.saturating_sub(1) * n.saturating_sub(2) / 6);
        prop_assert!(square_count(&g) <= 3 * n * n.saturating_sub(1) * n.saturating_sub(2) * n.saturating_sub(3) / 24);
    }
}
