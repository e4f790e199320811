//! Invariants over randomized networks.
#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use proptest::sample::Index;

use ohmwalk::fixtures::{complete, triangle, unit_path, weighted_path};
use ohmwalk::solver::ExactSolver;
use ohmwalk::{
    attach_pendant, chain_to_network, estimate_excursions, estimate_hitting_time,
    estimate_return_time, generalized_pendant_check, relative_error, replay, return_time_formula,
    stationary_distribution, Network, ReplayOptions, SimParams, VertexId,
};

/// Connected network on 2..=12 vertices: random tree plus optional extra edges.
fn network(unit: bool) -> impl Strategy<Value = Network> {
    (2usize..=12).prop_flat_map(move |n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(any::<Index>(), n - 1),
            proptest::collection::vec(any::<bool>(), pairs),
            proptest::collection::vec(0.1f64..10.0, n - 1 + pairs),
        )
            .prop_map(move |(parents, extra, cs)| {
                let mut cs = cs.into_iter().map(|c| if unit { 1.0 } else { c });
                let mut edges = Vec::new();
                let mut tree = std::collections::HashSet::new();
                for (i, parent) in parents.iter().enumerate() {
                    let child = i + 1;
                    let parent = parent.index(child);
                    tree.insert((parent, child));
                    edges.push((parent, child, cs.next().unwrap()));
                }
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if extra[k] && !tree.contains(&(i, j)) {
                            edges.push((i, j, cs.next().unwrap()));
                        }
                        k += 1;
                    }
                }
                Network::from_edges(edges).unwrap()
            })
    })
}

fn rel(a: f64, b: f64) -> f64 {
    relative_error(a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conductance_sums(net in network(false)) {
        let edge_total: f64 = net.edges().iter().map(|e| e.conductance).sum();
        let vertex_total: f64 = net.vertex_conductances().iter().sum();
        prop_assert!(rel(net.total_conductance(), 2.0 * edge_total) <= 1e-12);
        prop_assert!(rel(net.total_conductance(), vertex_total) <= 1e-12);
        for i in 0..net.n() {
            let cz: f64 = net.neighbors(i).iter().map(|&(_, c)| c).sum();
            prop_assert_eq!(cz, net.vertex_conductances()[i]);
        }
    }

    #[test]
    fn unit_conductance_is_degree(net in network(true)) {
        prop_assert_eq!(net.total_conductance(), 2.0 * net.m() as f64);
        for z in net.vertices() {
            prop_assert_eq!(net.vertex_conductance(z).unwrap(), net.degree(z).unwrap() as f64);
        }
    }

    #[test]
    fn transition_rows_live_on_neighbors(net in network(false)) {
        for (i, y) in net.vertices().iter().enumerate() {
            let row = net.transition_distribution(y).unwrap();
            prop_assert!(row.is_normalized());
            for (j, w) in row.weights().iter().enumerate() {
                let adjacent = net.neighbors(i).iter().any(|&(k, _)| k == j);
                prop_assert_eq!(*w > 0.0, adjacent);
            }
        }
    }

    #[test]
    fn pendant_preserves_base(net in network(false), at in any::<Index>(), c in 0.1f64..10.0) {
        let z = net.label(at.index(net.n())).clone();
        let aug = attach_pendant(&net, &z, c).unwrap();
        prop_assert_eq!(aug.base(), &net);
        prop_assert_eq!(aug.strip_pendant().unwrap(), net.clone());
        prop_assert!(rel(aug.network().total_conductance(), net.total_conductance() + 2.0 * c) <= 1e-12);
        for e in net.edges() {
            let got = aug.network()
                .conductance_between(net.label(e.a), net.label(e.b))
                .unwrap()
                .unwrap();
            prop_assert_eq!(got.to_bits(), e.conductance.to_bits());
        }
    }

    #[test]
    fn resistance_is_a_metric(net in network(false)) {
        let solver = ExactSolver::new(&net);
        let n = net.n();
        let mut r = vec![vec![0.0; n]; n];
        for x in 0..n {
            for y in 0..n {
                r[x][y] = solver.effective_resistance(net.label(x), net.label(y)).unwrap();
            }
        }
        for x in 0..n {
            prop_assert_eq!(r[x][x], 0.0);
            for y in 0..n {
                prop_assert!(rel(r[x][y], r[y][x]) <= 1e-9);
                if x != y {
                    prop_assert!(r[x][y] > 0.0);
                }
                for w in 0..n {
                    prop_assert!(r[x][y] <= r[x][w] + r[w][y] + 1e-9 * r[x][y].max(1.0));
                }
            }
        }
    }

    #[test]
    fn rayleigh_monotonicity(net in network(false), which in any::<Index>(), bump in 1.0f64..20.0) {
        let e = net.edges()[which.index(net.m())];
        let stiffer = net
            .with_edge_conductance(net.label(e.a), net.label(e.b), e.conductance * bump)
            .unwrap();
        let (before, after) = (ExactSolver::new(&net), ExactSolver::new(&stiffer));
        for x in net.vertices() {
            for y in net.vertices() {
                let r0 = before.effective_resistance(x, y).unwrap();
                let r1 = after.effective_resistance(x, y).unwrap();
                prop_assert!(r1 <= r0 + 1e-9 * r0.max(1.0), "{r1} > {r0}");
            }
        }
    }

    #[test]
    fn commute_identity_and_harmonicity(net in network(false)) {
        let solver = ExactSolver::new(&net);
        let c = net.total_conductance();
        for y in net.vertices() {
            let profile = solver.hitting_time(y).unwrap();
            prop_assert_eq!(profile.get(y), Some(0.0));
            prop_assert!(profile.values().iter().all(|h| h.is_finite() && *h >= 0.0));
            prop_assert!(profile.harmonic_residual(&net) <= 1e-9);
            for x in net.vertices().iter().filter(|x| *x != y) {
                let commute = solver.commute_time(x, y).unwrap();
                let r = solver.effective_resistance(x, y).unwrap();
                prop_assert!(rel(commute, c * r) <= 1e-9);
            }
        }
    }

    #[test]
    fn return_time_equals_conductance_ratio(net in network(false)) {
        let solver = ExactSolver::new(&net);
        let pi = stationary_distribution(&net);
        for (i, z) in net.vertices().iter().enumerate() {
            let formula = return_time_formula(&net, z).unwrap();
            prop_assert!(rel(solver.return_time(z).unwrap(), formula) <= 1e-9);
            prop_assert!(rel(1.0 / pi.weights()[i], formula) <= 1e-12);
        }
    }

    #[test]
    fn unit_return_time_is_two_m_over_degree(net in network(true)) {
        for z in net.vertices() {
            let formula = return_time_formula(&net, z).unwrap();
            prop_assert_eq!(formula, 2.0 * net.m() as f64 / net.degree(z).unwrap() as f64);
        }
    }

    #[test]
    fn stationary_is_invariant(net in network(false)) {
        let pi = stationary_distribution(&net);
        prop_assert!(pi.is_normalized());
        let kernel = net.transition_kernel();
        for z in 0..net.n() {
            let flowed: f64 = (0..net.n()).map(|y| pi.weights()[y] * kernel.prob(y, z)).sum();
            prop_assert!((flowed - pi.weights()[z]).abs() <= 1e-12);
        }
    }

    #[test]
    fn replay_passes_everywhere(net in network(false)) {
        for z in net.vertices() {
            let trace = replay(&net, z, &ReplayOptions::default()).unwrap();
            prop_assert!(trace.verdict, "{:?}", trace);
            let first = &trace.steps[0];
            prop_assert!((first.computed - 1.0).abs() <= 1e-12);
            let formula = return_time_formula(&net, z).unwrap();
            prop_assert_eq!(trace.steps[5].expected.to_bits(), formula.to_bits());
        }
    }

    #[test]
    fn kernel_round_trip(net in network(false), scale in 0.5f64..5.0) {
        let kernel = net.transition_kernel();
        let rebuilt = chain_to_network(&kernel, scale).unwrap();
        prop_assert!(kernel.max_abs_diff(&rebuilt.transition_kernel()).unwrap() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generalized_pendant(net in network(false), at in any::<Index>()) {
        let z = net.label(at.index(net.n())).clone();
        for c in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let check = generalized_pendant_check(&net, &z, c, 1e-9, None).unwrap();
            prop_assert!(check.pass, "c={c}: {check:?}");
        }
    }
}

/// At least 95 of 100 independently seeded runs land within 4 standard errors.
fn consistent(reference: f64, run: impl Fn(u64) -> ohmwalk::Estimate) {
    let hits = (0..100)
        .filter(|&seed| run(seed).within(reference, 4.0))
        .count();
    assert!(
        hits >= 95,
        "only {hits}/100 runs within 4 standard errors of {reference}"
    );
}

#[test]
fn estimators_are_consistent() {
    let k4 = complete(4);
    let z = VertexId::from("0");
    consistent(4.0, |s| {
        estimate_return_time(&k4, &z, &SimParams::new(2000, s)).unwrap()
    });

    let path = weighted_path();
    consistent(6.0, |s| {
        estimate_return_time(&path, &VertexId::from("1"), &SimParams::new(2000, s)).unwrap()
    });

    let up = unit_path();
    consistent(4.0, |s| {
        estimate_hitting_time(&up, &"a".into(), &"c".into(), &SimParams::new(2000, s)).unwrap()
    });

    let aug = attach_pendant(&triangle(), &"a".into(), 1.0).unwrap();
    consistent(2.0, |s| {
        estimate_excursions(&aug, &SimParams::new(2000, s))
            .unwrap()
            .estimate
    });
}

#[test]
fn estimates_are_reproducible() {
    let k4 = complete(4);
    let params = SimParams::new(10_000, 42);
    let a = estimate_return_time(&k4, &"1".into(), &params).unwrap();
    let b = estimate_return_time(&k4, &"1".into(), &params).unwrap();
    assert_eq!(a, b);
    let c = estimate_return_time(&k4, &"1".into(), &SimParams::new(10_000, 43)).unwrap();
    assert_ne!(a.mean, c.mean);
}
