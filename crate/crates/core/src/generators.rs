//! Random networks and flows for property tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::latency::LatencySpec;
use crate::net::{EdgeSpec, Flow, Network, NetworkSpec, UserSpec};

#[derive(Clone, Debug)]
pub struct RandomNetworkOptions {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_users: usize,
    pub max_paths: usize,
    /// Probability that an edge gets an M/M/1 latency instead of an affine one.
    pub mm1_probability: f64,
}

impl Default for RandomNetworkOptions {
    fn default() -> Self {
        RandomNetworkOptions {
            max_nodes: 6,
            max_edges: 10,
            max_users: 4,
            max_paths: 8,
            mm1_probability: 0.0,
        }
    }
}

/// Draws a network description with at least one user that has two or more
/// paths. Latencies are strictly increasing; M/M/1 capacities exceed the
/// total traffic so that every flow is feasible.
pub fn random_network_spec<R: Rng + ?Sized>(
    rng: &mut R,
    opts: &RandomNetworkOptions,
) -> NetworkSpec {
    loop {
        if let Some(spec) = try_spec(rng, opts) {
            return spec;
        }
    }
}

pub fn random_network<R: Rng + ?Sized>(rng: &mut R, opts: &RandomNetworkOptions) -> Network {
    loop {
        if let Ok(net) = Network::build(&random_network_spec(rng, opts)) {
            if net.user_count() > 0 {
                return net;
            }
        }
    }
}

fn try_spec<R: Rng + ?Sized>(rng: &mut R, opts: &RandomNetworkOptions) -> Option<NetworkSpec> {
    let n = rng.gen_range(3..=opts.max_nodes.max(3));
    let nodes: Vec<String> = (0..n).map(|k| format!("n{k}")).collect();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(rng);
    let m = rng.gen_range(n..=opts.max_edges.max(n)).min(pairs.len());
    pairs.truncate(m);

    let users_n = rng.gen_range(1..=opts.max_users.max(1));
    let rates: Vec<f64> = (0..users_n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let total: f64 = rates.iter().sum();

    let edges: Vec<EdgeSpec> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| EdgeSpec {
            id: format!("e{k}"),
            from: nodes[a].clone(),
            to: nodes[b].clone(),
            latency: if rng.gen_bool(opts.mm1_probability) {
                LatencySpec::mm1(total * rng.gen_range(1.5..4.0))
            } else {
                LatencySpec::affine(rng.gen_range(0.2..5.0), rng.gen_range(0.0..10.0))
            },
        })
        .collect();

    let built_edges: Vec<crate::net::Edge> = pairs
        .iter()
        .zip(&edges)
        .map(|(&(a, b), e)| crate::net::Edge {
            id: e.id.clone(),
            tail: a,
            head: b,
            latency: e.latency.clone(),
        })
        .collect();

    let mut users = Vec::new();
    let mut multi = false;
    for (i, &rate) in rates.iter().enumerate() {
        let mut od = None;
        for _ in 0..20 {
            let o = rng.gen_range(0..n);
            let d = rng.gen_range(0..n);
            if o == d {
                continue;
            }
            let paths = crate::net::enumerate_simple_paths(&built_edges, o, d, opts.max_paths);
            if !paths.is_empty() {
                multi |= paths.len() > 1;
                od = Some((o, d));
                break;
            }
        }
        let (o, d) = od?;
        users.push(UserSpec {
            id: format!("{}", i + 1),
            origin: nodes[o].clone(),
            destination: nodes[d].clone(),
            rate,
            paths: None,
            max_paths: Some(opts.max_paths),
        });
    }
    multi.then_some(NetworkSpec {
        nodes,
        edges,
        users,
    })
}

/// Uniform draw from the product of scaled simplices (flat Dirichlet per user).
pub fn random_flow<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Flow {
    let mut v = vec![0.0; net.path_count()];
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        let mut s = 0.0;
        for a in r.clone() {
            let e: f64 = Exp1.sample(rng);
            v[a] = e;
            s += e;
        }
        for a in r {
            v[a] *= u.rate / s;
        }
    }
    Flow::from_parts_unchecked(v, net.offsets().to_vec())
}

/// Like [`random_flow`] but each user is restricted to a random nonempty
/// subset of its paths, so that boundary faces are sampled too.
pub fn random_face_flow<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Flow {
    let mut x = random_flow(net, rng);
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        let keep = rng.gen_range(r.clone());
        let xi = &mut x.values_mut()[r.clone()];
        for (k, v) in xi.iter_mut().enumerate() {
            if r.start + k != keep && rng.gen_bool(0.5) {
                *v = 0.0;
            }
        }
        let s: f64 = xi.iter().sum();
        xi.iter_mut().for_each(|v| *v *= u.rate / s);
    }
    x
}

/// A tangent direction z = x − q towards a random point x of Δ (interior or
/// on a face), so that q + t z ∈ Δ for every t ∈ [0, 1].
pub fn random_ray<R: Rng + ?Sized>(net: &Network, q: &Flow, rng: &mut R) -> Vec<f64> {
    let x = if rng.gen_bool(0.5) {
        random_flow(net, rng)
    } else {
        random_face_flow(net, rng)
    };
    x.values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| a - b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn networks_respect_the_size_limits() {
        let opts = RandomNetworkOptions::default();
        let mut r = rng::stream(3, 0);
        for _ in 0..200 {
            let net = random_network(&mut r, &opts);
            assert!(net.nodes().len() <= 6);
            assert!(net.edge_count() <= 10);
            assert!(net.user_count() + net.fixed_users().len() <= 4);
            assert!(net.users().iter().any(|u| u.paths.len() > 1));
        }
    }

    #[test]
    fn flows_are_feasible() {
        let opts = RandomNetworkOptions {
            mm1_probability: 0.5,
            ..Default::default()
        };
        let mut r = rng::stream(4, 0);
        for _ in 0..100 {
            let net = random_network(&mut r, &opts);
            let x = random_flow(&net, &mut r);
            net.check_flow(&x).unwrap();
            let y = random_face_flow(&net, &mut r);
            net.check_flow(&y).unwrap();
            assert!(crate::latency::path_delays(&net, &y).is_ok());
            let z = random_ray(&net, &x, &mut r);
            for i in 0..net.user_count() {
                let s: f64 = z[net.user_range(i)].iter().sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }
}
