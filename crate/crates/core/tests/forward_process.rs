mod common;

use common::{random_graph_m, rng};
use edgediff_core::diffusion::{
    active_posterior, active_prob_given_prev_degree, degree_marginal_params,
    forward_marginal_sample, forward_trajectory, oracle_edge_posterior, trajectory_csv,
};
use edgediff_core::graph::ActiveMask;
use edgediff_core::schedule::expected_active_nodes;
use edgediff_core::NoiseSchedule;

/// Every removal-time assignment of `d0` edges over `T` steps, with its
/// probability. Removal time `T + 1` means the edge survives to `T`.
fn removal_times(d0: usize, betas: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let horizon = betas.len();
    let time_prob = |tau: usize| -> f64 {
        let mut p = 1.0;
        for b in &betas[..tau.min(horizon + 1) - 1] {
            p *= 1.0 - b;
        }
        if tau <= horizon {
            p * betas[tau - 1]
        } else {
            p
        }
    };
    let mut out = vec![(vec![], 1.0)];
    for _ in 0..d0 {
        let mut next = vec![];
        for (taus, p) in &out {
            for tau in 1..=horizon + 1 {
                let mut v: Vec<usize> = taus.clone();
                v.push(tau);
                next.push((v, p * time_prob(tau)));
            }
        }
        out = next;
    }
    out
}

fn schedules() -> Vec<Vec<f64>> {
    vec![
        vec![0.3],
        vec![0.2, 0.5],
        vec![0.1, 0.4, 0.7],
        vec![0.5, 0.5, 0.5],
        vec![0.9, 0.05, 0.3],
        vec![0.01, 0.02, 0.99],
    ]
}

#[test]
fn active_posterior_matches_enumeration() {
    for betas in schedules() {
        let sched = NoiseSchedule::from_betas(betas.clone()).unwrap();
        for d0 in 0..=4 {
            let worlds = removal_times(d0, &betas);
            for t in 1..=betas.len() {
                for dt in 0..=d0 {
                    let (mut joint, mut marginal) = (0.0, 0.0);
                    for (taus, p) in &worlds {
                        let deg = taus.iter().filter(|&&tau| tau > t).count();
                        if deg != dt {
                            continue;
                        }
                        marginal += p;
                        if taus.contains(&t) {
                            joint += p;
                        }
                    }
                    if marginal < 1e-300 {
                        continue;
                    }
                    let got = active_posterior(dt, d0, t, &sched).unwrap();
                    assert!(
                        (got - joint / marginal).abs() < 1e-10,
                        "betas {betas:?} d0 {d0} t {t} dt {dt}: {got} vs {}",
                        joint / marginal
                    );
                }
            }
        }
    }
}

#[test]
fn edge_posterior_matches_enumeration() {
    for betas in schedules() {
        let sched = NoiseSchedule::from_betas(betas.clone()).unwrap();
        let worlds = removal_times(1, &betas);
        for t in 1..=betas.len() {
            // Clean edge present, absent at t: was it still there at t − 1?
            let (mut present_prev, mut absent_now) = (0.0, 0.0);
            for (taus, p) in &worlds {
                if taus[0] <= t {
                    absent_now += p;
                    if taus[0] == t {
                        present_prev += p;
                    }
                }
            }
            let got = oracle_edge_posterior(false, true, t, &sched).unwrap();
            assert!((got - present_prev / absent_now).abs() < 1e-10);
            assert_eq!(oracle_edge_posterior(true, true, t, &sched).unwrap(), 1.0);
            assert_eq!(oracle_edge_posterior(false, false, t, &sched).unwrap(), 0.0);
        }
    }
}

#[test]
fn degree_marginal_matches_enumeration() {
    let betas = vec![0.2, 0.5, 0.3];
    let sched = NoiseSchedule::from_betas(betas.clone()).unwrap();
    for d0 in 0..=4 {
        let worlds = removal_times(d0, &betas);
        for t in 0..=3 {
            let bin = degree_marginal_params(d0, t, &sched).unwrap();
            for k in 0..=d0 {
                let p: f64 = worlds
                    .iter()
                    .filter(|(taus, _)| taus.iter().filter(|&&tau| tau > t).count() == k)
                    .map(|(_, p)| p)
                    .sum();
                assert!((bin.pmf(k) - p).abs() < 1e-12);
            }
        }
        // Activity given the previous degree.
        for t in 1..=3 {
            for dp in 0..=d0 {
                let q = active_prob_given_prev_degree(dp, t, &sched).unwrap();
                let mut stay = 1.0;
                for _ in 0..dp {
                    stay *= 1.0 - betas[t - 1];
                }
                assert!((q - (1.0 - stay)).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn trajectory_monte_carlo_matches_expectations() {
    let mut r = rng(11);
    let g = random_graph_m(20, 40, &mut r);
    let d0 = g.degree_sequence();
    let betas: Vec<f64> = (1..=8).map(|t| 0.05 + 0.03 * t as f64).collect();
    let sched = NoiseSchedule::from_betas(betas).unwrap();
    let runs = 4000;
    let mut active = [0.0; 8];
    let mut active_sq = [0.0; 8];
    let mut edges = [0.0; 8];
    for s in 0..runs {
        for step in forward_trajectory(&g, &sched, rng(1000 + s)) {
            let a = step.mask.count() as f64;
            active[step.t - 1] += a;
            active_sq[step.t - 1] += a * a;
            edges[step.t - 1] += step.graph.edge_count() as f64;
        }
    }
    for t in 1..=8 {
        let mean = active[t - 1] / runs as f64;
        let var = active_sq[t - 1] / runs as f64 - mean * mean;
        let se = (var / runs as f64).sqrt();
        let h = expected_active_nodes(&d0, sched.alphas(), t);
        assert!(
            (mean - h).abs() < 4.0 * se,
            "t {t}: {mean} vs {h} (se {se})"
        );
        let e_mean = edges[t - 1] / runs as f64;
        let e_exp = sched.alpha_bar(t) * g.edge_count() as f64;
        let e_se = (g.edge_count() as f64 * sched.alpha_bar(t) * (1.0 - sched.alpha_bar(t))
            / runs as f64)
            .sqrt();
        assert!((e_mean - e_exp).abs() < 4.0 * e_se);
    }
}

#[test]
fn trajectory_masks_mark_exactly_the_changed_nodes() {
    let mut r = rng(3);
    let g = random_graph_m(15, 30, &mut r);
    let sched = NoiseSchedule::from_betas(vec![0.3; 6]).unwrap();
    let mut prev = g.clone();
    for step in forward_trajectory(&g, &sched, rng(4)) {
        assert_eq!(step.mask, ActiveMask::between(&prev, &step.graph).unwrap());
        assert!(2 * (prev.edge_count() - step.graph.edge_count()) >= step.mask.count());
        for &(i, j) in step.graph.edges() {
            assert!(prev.has_edge(i, j));
        }
        prev = step.graph;
    }
}

#[test]
fn marginal_sample_is_subgraph_and_deterministic() {
    let mut r = rng(5);
    let g = random_graph_m(25, 60, &mut r);
    let sched = NoiseSchedule::from_betas(vec![0.1; 10]).unwrap();
    let a = forward_marginal_sample(&g, &sched, 6, &mut rng(9)).unwrap();
    let b = forward_marginal_sample(&g, &sched, 6, &mut rng(9)).unwrap();
    assert_eq!(a, b);
    assert!(a.edges().iter().all(|&(i, j)| g.has_edge(i, j)));
    assert_eq!(
        forward_marginal_sample(&g, &sched, 0, &mut rng(1)).unwrap(),
        g
    );
}

#[test]
fn zero_noise_keeps_every_edge() {
    let mut r = rng(6);
    let g = random_graph_m(10, 20, &mut r);
    let sched = NoiseSchedule::from_betas(vec![0.0; 4]).unwrap();
    let csv = trajectory_csv(forward_trajectory(&g, &sched, rng(0)));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,num_edges,num_active_nodes"));
    for (t, line) in lines.enumerate() {
        assert_eq!(line, format!("{},20,0", t + 1));
    }
}
