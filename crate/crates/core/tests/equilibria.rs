mod common;

use common::max_abs;
use wardrop_core::equilibria::{
    classify_equilibrium, solve, solve_social_optimum, solve_wardrop, solve_wardrop_from,
    verify_wardrop, verify_worst_delay_equilibrium, wardrop_set_dimension, Classification,
    SolverOptions, TieBreak, DEFAULT_TOLERANCE,
};
use wardrop_core::generators::{random_flow, random_network, RandomNetworkOptions};
use wardrop_core::io::builtin;
use wardrop_core::latency::{aggregate_delay, CostModel};
use wardrop_core::net::Network;
use wardrop_core::rng;

fn mixed() -> RandomNetworkOptions {
    RandomNetworkOptions {
        mm1_probability: 0.3,
        ..Default::default()
    }
}

#[test]
fn solutions_pass_the_wardrop_check() {
    let mut r = rng::stream(31, 0);
    for _ in 0..100 {
        let net = random_network(&mut r, &mixed());
        let eq = solve_wardrop(&net, &SolverOptions::default()).unwrap();
        assert!(eq.relative_gap <= 1e-10);
        let check = verify_wardrop(&net, &eq.flow, DEFAULT_TOLERANCE).unwrap();
        assert!(check.pass, "{:?} {:?}", check.violations, net.to_spec());
        for (i, u) in net.users().iter().enumerate() {
            let s: f64 = eq.flow.user(i).iter().sum();
            assert!((s - u.rate).abs() <= 1e-9);
            assert!(eq.flow.user(i).iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn potential_never_increases_across_iterations() {
    let mut r = rng::stream(32, 0);
    for _ in 0..50 {
        let net = random_network(&mut r, &mixed());
        let trace = solve(&net, CostModel::Latency, None, &SolverOptions::default()).unwrap();
        for w in trace.potentials.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0),
                "{} -> {}",
                w[0],
                w[1]
            );
        }
    }
}

fn reducible_networks(count: usize, seed: u64) -> Vec<Network> {
    let mut r = rng::stream(seed, 0);
    let mut out = vec![builtin::fig1b().network().unwrap()];
    while out.len() < count {
        let net = random_network(&mut r, &mixed());
        if net.redundancy().is_reducible() {
            out.push(net);
        }
    }
    out
}

#[test]
fn loads_are_unique_on_reducible_networks() {
    let mut r = rng::stream(33, 1);
    for net in reducible_networks(30, 33) {
        let a = solve_wardrop(&net, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            tie_break: TieBreak::Seeded(7),
            ..Default::default()
        };
        let x0 = random_flow(&net, &mut r);
        let b = solve_wardrop_from(&net, &x0, &opts).unwrap();
        assert!(max_abs(&a.loads, &b.loads) <= 1e-4);
        let diff: Vec<f64> = a
            .flow
            .values()
            .iter()
            .zip(b.flow.values())
            .map(|(u, v)| u - v)
            .collect();
        assert!(net.redundancy().kernel_residual(&diff) <= 1e-6);
    }
}

#[test]
fn strict_equilibria_are_unique() {
    let mut nets = vec![
        builtin::parallel2().network().unwrap(),
        builtin::parallel_affine(2.0, &[(1.0, 0.0), (1.0, 20.0), (2.0, 15.0)])
            .network()
            .unwrap(),
    ];
    let mut r = rng::stream(34, 0);
    let mut found = 0;
    while found < 10 {
        let net = random_network(&mut r, &mixed());
        let eq = solve_wardrop(&net, &SolverOptions::default()).unwrap();
        if eq.classification == Some(Classification::Strict) {
            nets.push(net);
            found += 1;
        }
    }
    for net in &nets {
        let eq = solve_wardrop(net, &SolverOptions::default()).unwrap();
        assert_eq!(eq.classification, Some(Classification::Strict));
        for _ in 0..10 {
            let x0 = random_flow(net, &mut r);
            let other = solve_wardrop_from(net, &x0, &SolverOptions::default()).unwrap();
            assert!(max_abs(eq.flow.values(), other.flow.values()) <= 1e-6);
        }
    }
}

#[test]
fn interior_equilibria_span_the_redundancy() {
    let mut r = rng::stream(35, 0);
    let mut checked = 0;
    let mut nets = vec![
        builtin::fig1b().network().unwrap(),
        builtin::braess().network().unwrap(),
    ];
    while nets.len() < 400 && checked < 20 {
        nets.push(random_network(&mut r, &mixed()));
        let net = nets.last().unwrap();
        let eq = solve_wardrop(net, &SolverOptions::default()).unwrap();
        if eq.classification == Some(Classification::Interior) {
            checked += 1;
        }
    }
    assert!(checked >= 5);
    for net in &nets {
        let eq = solve_wardrop(net, &SolverOptions::default()).unwrap();
        let dim = wardrop_set_dimension(net, &eq.flow, DEFAULT_TOLERANCE).unwrap();
        assert!(dim <= net.redundancy().redundancy);
        if eq.classification == Some(Classification::Interior) {
            assert_eq!(dim, net.redundancy().redundancy);
        }
    }
}

#[test]
fn social_optimum_never_does_worse() {
    let mut r = rng::stream(36, 0);
    for _ in 0..100 {
        let net = random_network(&mut r, &mixed());
        let eq = solve_wardrop(&net, &SolverOptions::default()).unwrap();
        let opt = solve_social_optimum(&net, &SolverOptions::default()).unwrap();
        let a = aggregate_delay(&net, &opt.flow).unwrap();
        let b = aggregate_delay(&net, &eq.flow).unwrap();
        assert!(a <= b + 1e-9, "{a} > {b}");
    }
}

#[test]
fn pigou_optimum() {
    let net = builtin::pigou().network().unwrap();
    let opt = solve_social_optimum(&net, &SolverOptions::default()).unwrap();
    assert!(max_abs(opt.flow.values(), &[0.5, 0.5]) <= 1e-6);
    assert!((opt.aggregate_delay - 0.75).abs() <= 1e-6);
}

#[test]
fn braess_checks() {
    let net = builtin::braess().network().unwrap();
    let bad = net.flow(vec![3.0, 3.0, 0.0]).unwrap();
    let check = verify_wardrop(&net, &bad, DEFAULT_TOLERANCE).unwrap();
    assert!(!check.pass);
    assert_eq!(check.violations[0].margin, 13.0);
    assert!(
        verify_worst_delay_equilibrium(&net, &bad, 60, DEFAULT_TOLERANCE)
            .unwrap()
            .pass
    );
    let eq = net.flow(vec![2.0, 2.0, 2.0]).unwrap();
    assert!(
        !verify_worst_delay_equilibrium(&net, &eq, 60, DEFAULT_TOLERANCE)
            .unwrap()
            .pass
    );
    let class = classify_equilibrium(&net, &eq, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(class.classification, Classification::Interior);
}
