mod common;

use rayon::prelude::*;

use common::max_abs;
use wardrop_core::dynamics::{
    integrate_ode, noise_covariance, noise_increments, replicator_rhs,
    simulate_exponential_learning, simulate_sde, simulate_sde_stream, Dynamics, OdeScheme,
    OdeStepper, SimConfig,
};
use wardrop_core::generators::{random_flow, random_network, RandomNetworkOptions};
use wardrop_core::io::builtin;
use wardrop_core::latency::{adjoint_potential, relative_entropy, NoiseSpec};
use wardrop_core::net::Network;
use wardrop_core::rng;

fn braess() -> Network {
    builtin::braess().network().unwrap()
}

#[test]
fn replicator_field_is_tangent() {
    let mut r = rng::stream(41, 0);
    for _ in 0..200 {
        let net = random_network(&mut r, &RandomNetworkOptions::default());
        let x = random_flow(&net, &mut r);
        let lambda = vec![0.7; net.user_count()];
        let v = replicator_rhs(&net, &x, &lambda).unwrap();
        for i in 0..net.user_count() {
            let s: f64 = v[net.user_range(i)].iter().sum();
            assert!(s.abs() <= 1e-12 * v.iter().map(|a| a.abs()).sum::<f64>().max(1.0));
        }
    }
}

#[test]
fn rest_points() {
    let net = braess();
    for x in [
        vec![2.0, 2.0, 2.0],
        vec![3.0, 3.0, 0.0],
        vec![6.0, 0.0, 0.0],
    ] {
        let v = replicator_rhs(&net, &net.flow(x).unwrap(), &[1.0]).unwrap();
        assert!(v.iter().all(|&a| a == 0.0), "{v:?}");
    }
}

#[test]
fn entropy_descends_at_the_adjoint_rate() {
    let net = braess();
    let q = net.flow(vec![2.0; 3]).unwrap();
    let lambda = [1.0];
    let mut stepper = OdeStepper::new(&net, Dynamics::Replicator, OdeScheme::Rk4, lambda.to_vec());
    let mut x = net.flow(vec![1.0, 2.0, 3.0]).unwrap();
    let dt = 1e-3;
    let mut h = relative_entropy(&q, &x, &lambda);
    let mut checked = 0;
    for _ in 0..2000 {
        let l = adjoint_potential(&net, &q, &x).unwrap();
        let mut next = x.values().to_vec();
        stepper.step(&mut next, dt).unwrap();
        let y = x.with_values(next);
        let l_next = adjoint_potential(&net, &q, &y).unwrap();
        let h_next = relative_entropy(&q, &y, &lambda);
        let expected = -0.5 * (l + l_next) * dt;
        if expected.abs() > 1e-10 {
            assert!(((h_next - h) - expected).abs() <= 0.1 * expected.abs());
            checked += 1;
        }
        assert!(h_next <= h + 1e-9);
        h = h_next;
        x = y;
    }
    assert!(checked > 100);
}

#[test]
fn braess_diagnostics_decrease() {
    let net = braess();
    let mut cfg = SimConfig::new(vec![1.0]);
    cfg.horizon = 50.0;
    cfg.reference = Some(net.flow(vec![2.0; 3]).unwrap());
    let t = integrate_ode(
        &net,
        &net.flow(vec![5.0, 0.5, 0.5]).unwrap(),
        &cfg,
        Dynamics::Replicator,
    )
    .unwrap();
    for w in t.diagnostics.windows(2) {
        assert!(w[1].entropy <= w[0].entropy + 1e-9);
        assert!(w[1].potential <= w[0].potential + 1e-9);
    }
    assert!(t.diagnostics.last().unwrap().gap < 1e-6);
}

#[test]
fn every_scheme_stays_on_the_simplex() {
    let net = builtin::fig1b().network().unwrap();
    let x0 = net.flow(vec![0.1, 0.9, 0.3, 0.7, 0.5, 0.5]).unwrap();
    let mut cfg = SimConfig::new(vec![0.5, 1.0, 2.0]);
    cfg.horizon = 5.0;
    let noise = NoiseSpec::uniform(5, 0.4);
    let mut trajs = vec![
        integrate_ode(&net, &x0, &cfg, Dynamics::Replicator).unwrap(),
        integrate_ode(&net, &x0, &cfg, Dynamics::Bnn).unwrap(),
        simulate_sde(&net, &x0, &cfg, &noise).unwrap(),
        simulate_exponential_learning(&net, &x0, &cfg, &noise).unwrap(),
    ];
    cfg.scheme = OdeScheme::Euler;
    trajs.push(integrate_ode(&net, &x0, &cfg, Dynamics::Replicator).unwrap());
    for t in &trajs {
        assert!(t.is_complete(), "{:?}", t.status);
        for w in t.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        for x in &t.flows {
            assert!(x.iter().all(|&v| v >= 0.0));
            for (i, u) in net.users().iter().enumerate() {
                let s: f64 = x[net.user_range(i)].iter().sum();
                assert!((s - u.rate).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn faces_stay_invariant_on_random_networks() {
    let mut r = rng::stream(42, 0);
    for _ in 0..20 {
        let net = random_network(&mut r, &RandomNetworkOptions::default());
        let mut x0 = random_flow(&net, &mut r);
        let (i, u) = net
            .users()
            .iter()
            .enumerate()
            .find(|(_, u)| u.paths.len() > 1)
            .unwrap();
        let range = net.user_range(i);
        let zeroed = range.start;
        let moved = x0.values()[zeroed];
        x0.values_mut()[zeroed] = 0.0;
        x0.values_mut()[zeroed + 1] += moved;
        assert!((x0.user(i).iter().sum::<f64>() - u.rate).abs() < 1e-12);
        let mut cfg = SimConfig::new(vec![1.0; net.user_count()]);
        cfg.horizon = 2.0;
        let t = integrate_ode(&net, &x0, &cfg, Dynamics::Replicator).unwrap();
        assert!(t.flows.iter().all(|x| x[zeroed] == 0.0));
    }
}

#[test]
fn simulations_are_bitwise_reproducible() {
    let net = builtin::fig1b().network().unwrap();
    let x0 = net.uniform_flow();
    let mut cfg = SimConfig::new(vec![0.5; 3]);
    cfg.horizon = 3.0;
    cfg.seed = 99;
    let noise = NoiseSpec::uniform(5, 0.3);
    let bits = |t: &wardrop_core::dynamics::Trajectory| -> Vec<u64> {
        t.flows.iter().flatten().map(|v| v.to_bits()).collect()
    };
    let a = simulate_sde(&net, &x0, &cfg, &noise).unwrap();
    let b = simulate_sde(&net, &x0, &cfg, &noise).unwrap();
    assert_eq!(bits(&a), bits(&b));
    let a = simulate_exponential_learning(&net, &x0, &cfg, &noise).unwrap();
    let b = simulate_exponential_learning(&net, &x0, &cfg, &noise).unwrap();
    assert_eq!(bits(&a), bits(&b));
    cfg.seed = 100;
    let c = simulate_exponential_learning(&net, &x0, &cfg, &noise).unwrap();
    assert_ne!(bits(&a), bits(&c));
}

#[test]
fn deterministic_scores_track_the_replicator_on_braess() {
    let net = braess();
    let x0 = net.flow(vec![1.0, 2.0, 3.0]).unwrap();
    let mut cfg = SimConfig::new(vec![1.0]);
    cfg.horizon = 10.0;
    cfg.dt = 1e-3;
    let exp = simulate_exponential_learning(&net, &x0, &cfg, &NoiseSpec::zero(5)).unwrap();
    let ode = integrate_ode(&net, &x0, &cfg, Dynamics::Replicator).unwrap();
    let dev = exp
        .flows
        .iter()
        .zip(&ode.flows)
        .map(|(a, b)| max_abs(a, b))
        .fold(0.0, f64::max);
    assert!(dev <= 10.0 * cfg.dt, "{dev}");
}

#[test]
fn disjoint_paths_have_uncorrelated_noise() {
    let net = builtin::parallel2().network().unwrap();
    let noise = NoiseSpec::uniform(2, 0.5);
    let dt = 0.01;
    let mut r = rng::stream(43, 0);
    let n = 100_000;
    let (mut s01, mut s00, mut s11) = (0.0, 0.0, 0.0);
    let mut sq01 = 0.0;
    for _ in 0..n {
        let du = noise_increments(&net, &noise, dt, &mut r);
        s01 += du[0] * du[1];
        sq01 += (du[0] * du[1]).powi(2);
        s00 += du[0] * du[0];
        s11 += du[1] * du[1];
    }
    let nf = n as f64;
    let mean01 = s01 / nf;
    let se01 = ((sq01 / nf - mean01 * mean01) / nf).sqrt();
    assert!(mean01.abs() <= 3.0 * se01);
    let var = 0.25 * dt;
    // Var of a squared N(0, v) sample is 2v²
    let se = (2.0f64).sqrt() * var / nf.sqrt();
    assert!((s00 / nf - var).abs() <= 3.0 * se);
    assert!((s11 / nf - var).abs() <= 3.0 * se);
    assert_eq!(
        noise_covariance(&net, &noise),
        vec![vec![0.25, 0.0], vec![0.0, 0.25]]
    );
}

fn strict_convergence_fraction(exp: bool) -> f64 {
    let net = builtin::parallel2().network().unwrap();
    let x0 = net.flow(vec![0.5, 0.5]).unwrap();
    let noise = NoiseSpec::uniform(2, 0.5);
    let mut cfg = SimConfig::new(vec![0.1]);
    cfg.horizon = 500.0;
    cfg.stride = 100_000;
    cfg.seed = 2024;
    let hits: usize = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let t = if exp {
                let mut c = cfg.clone();
                c.seed = cfg.seed.wrapping_add(k);
                simulate_exponential_learning(&net, &x0, &c, &noise).unwrap()
            } else {
                simulate_sde_stream(&net, &x0, &cfg, &noise, k).unwrap()
            };
            usize::from(t.final_flow().unwrap()[0] > 0.999)
        })
        .sum();
    hits as f64 / 200.0
}

#[test]
fn stochastic_replicator_settles_on_the_strict_equilibrium() {
    assert!(strict_convergence_fraction(false) >= 0.95);
}

#[test]
fn exponential_learning_settles_on_the_strict_equilibrium() {
    assert!(strict_convergence_fraction(true) >= 0.95);
}
