use proptest::prelude::*;
use rand::Rng;

use wardrop_core::equilibria::{solve_wardrop, SolverOptions};
use wardrop_core::generators::{random_flow, random_network, RandomNetworkOptions};
use wardrop_core::io::builtin;
use wardrop_core::latency::{
    adjoint_potential, aggregate_delay, path_delays, potential_gradient, relative_entropy,
    rosenthal_potential, LatencySpec,
};
use wardrop_core::rng;

fn mixed_options() -> RandomNetworkOptions {
    RandomNetworkOptions {
        mm1_probability: 0.4,
        ..Default::default()
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng::stream(21, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let net = random_network(&mut r, &mixed_options());
        let x = random_flow(&net, &mut r);
        let g = potential_gradient(&net, &x).unwrap();
        for a in 0..net.path_count() {
            let h = 1e-6 * x.values()[a].max(1e-3);
            let mut plus = x.values().to_vec();
            let mut minus = x.values().to_vec();
            plus[a] += h;
            minus[a] -= h;
            let fp = rosenthal_potential(&net, &x.with_values(plus)).unwrap();
            let fm = rosenthal_potential(&net, &x.with_values(minus)).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            worst = worst.max((fd - g[a]).abs() / g[a].abs().max(1.0));
        }
    }
    assert!(worst <= 1e-5, "max relative error {worst}");
}

#[test]
fn latencies_are_strictly_increasing() {
    let mut r = rng::stream(22, 0);
    for _ in 0..1000 {
        let specs = [
            LatencySpec::affine(r.gen_range(0.01..10.0), r.gen_range(0.0..10.0)),
            LatencySpec::mm1(r.gen_range(0.5..10.0)),
            LatencySpec::monomial(
                r.gen_range(0.01..5.0),
                r.gen_range(1.0..4.0),
                r.gen_range(0.0..5.0),
            ),
        ];
        for s in &specs {
            let hi = s.capacity().map_or(20.0, |c| c * 0.999);
            let a = r.gen_range(0.0..hi);
            let b = r.gen_range(0.0..hi);
            let (lo, up) = if a < b { (a, b) } else { (b, a) };
            if lo < up {
                assert!(s.value(lo) < s.value(up), "{s:?} at {lo} and {up}");
                assert!(s.derivative(lo) > 0.0 || matches!(s, LatencySpec::Monomial { .. }));
            }
        }
    }
}

#[test]
fn adjoint_potential_dominates_the_potential_increase() {
    let mut r = rng::stream(23, 0);
    for _ in 0..20 {
        let net = random_network(&mut r, &mixed_options());
        let q = solve_wardrop(&net, &SolverOptions::default()).unwrap().flow;
        let phi_q = rosenthal_potential(&net, &q).unwrap();
        for _ in 0..500 {
            let x = random_flow(&net, &mut r);
            let l = adjoint_potential(&net, &q, &x).unwrap();
            let dphi = rosenthal_potential(&net, &x).unwrap() - phi_q;
            assert!(l >= dphi - 1e-9, "{l} < {dphi}");
        }
    }
}

#[test]
fn entropy_is_positive_away_from_the_reference() {
    let mut r = rng::stream(24, 0);
    let net = builtin::fig1b().network().unwrap();
    let q = random_flow(&net, &mut r);
    let lambda = [0.5, 1.0, 2.0];
    assert_eq!(relative_entropy(&q, &q, &lambda), 0.0);
    for _ in 0..10_000 {
        let x = random_flow(&net, &mut r);
        assert!(relative_entropy(&q, &x, &lambda) > 0.0);
    }
}

#[test]
fn braess_delays_and_disparity() {
    let net = builtin::braess().network().unwrap();
    let d = path_delays(&net, &net.flow(vec![2.0, 2.0, 2.0]).unwrap()).unwrap();
    assert_eq!(d.path, vec![92.0; 3]);
    let d = path_delays(&net, &net.flow(vec![3.0, 3.0, 0.0]).unwrap()).unwrap();
    assert_eq!(d.path, vec![83.0, 83.0, 70.0]);
    assert_eq!(d.worst, vec![83.0]);
    assert_eq!(d.fastest, vec![70.0]);
}

#[test]
fn mm1_example_value() {
    assert_eq!(LatencySpec::mm1(2.0).marginal(1.0), 2.0);
    assert_eq!(LatencySpec::affine(10.0, 0.0).marginal(4.0), 80.0);
    assert_eq!(LatencySpec::constant(3.0).marginal(4.0), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn average_delay_identity(seed in any::<u64>()) {
        let net = random_network(&mut rng::stream(seed, 0), &mixed_options());
        let x = random_flow(&net, &mut rng::stream(seed, 1));
        let d = path_delays(&net, &x).unwrap();
        let p = net.edge_loads(&x).unwrap();
        for (i, u) in net.users().iter().enumerate() {
            let by_edges: f64 = (0..net.edge_count()).map(|r| p.per_user[i][r] * d.edge[r]).sum();
            prop_assert!((u.rate * d.average[i] - by_edges).abs() <= 1e-9 * by_edges.abs().max(1.0));
        }
        if net.fixed_users().is_empty() {
            let total: f64 = net.users().iter().enumerate().map(|(i, u)| u.rate * d.average[i]).sum();
            let agg = aggregate_delay(&net, &x).unwrap();
            prop_assert!((total - agg).abs() <= 1e-9 * agg.max(1.0));
        }
    }
}
