//! Built-in example configurations.

use std::collections::BTreeMap;

use super::{Config, NoiseConfig, SimulationConfig, CONFIG_VERSION};
use crate::latency::LatencySpec;
use crate::net::{EdgeSpec, NetworkSpec, PathSpec, UserSpec};
use crate::{Error, Result};

const NAMES: [&str; 5] = ["braess", "fig1a", "fig1b", "parallel2", "pigou"];

/// Capacities of the M/M/1 edges AB, AC, CB, BD, CD in `fig1a`/`fig1b`.
pub const FIG1_CAPACITIES: [f64; 5] = [3.0, 4.0, 4.0, 4.0, 3.0];

pub fn names() -> &'static [&'static str] {
    &NAMES
}

pub fn by_name(name: &str) -> Result<Config> {
    match name {
        "braess" => Ok(braess()),
        "fig1a" => Ok(fig1a()),
        "fig1b" => Ok(fig1b()),
        "parallel2" => Ok(parallel2()),
        "pigou" => Ok(pigou()),
        _ => Err(Error::UnknownExample {
            name: name.to_string(),
            available: NAMES.join(", "),
        }),
    }
}

fn edge(id: &str, latency: LatencySpec) -> EdgeSpec {
    let mut chars = id.chars();
    let from = chars.next().expect("two-letter id").to_string();
    let to = chars.next().expect("two-letter id").to_string();
    EdgeSpec {
        id: id.to_string(),
        from,
        to,
        latency,
    }
}

fn path(label: &str, edges: &[&str]) -> PathSpec {
    PathSpec {
        label: label.to_string(),
        edges: edges.iter().map(|e| e.to_string()).collect(),
    }
}

fn user(id: &str, origin: &str, destination: &str, rate: f64, paths: Vec<PathSpec>) -> UserSpec {
    UserSpec {
        id: id.to_string(),
        origin: origin.to_string(),
        destination: destination.to_string(),
        rate,
        paths: Some(paths),
        max_paths: None,
    }
}

fn nodes(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn config(name: &str, network: NetworkSpec) -> Config {
    Config {
        version: CONFIG_VERSION,
        name: Some(name.to_string()),
        network,
        noise: None,
        simulation: None,
    }
}

/// Braess's network: one user sending 6 units from A to D over the blue
/// (A→B→D), red (A→C→D) and green (A→B→C→D) paths.
pub fn braess() -> Config {
    let network = NetworkSpec {
        nodes: nodes(&["A", "B", "C", "D"]),
        edges: vec![
            edge("AB", LatencySpec::affine(10.0, 0.0)),
            edge("AC", LatencySpec::affine(1.0, 50.0)),
            edge("BD", LatencySpec::affine(1.0, 50.0)),
            edge("CD", LatencySpec::affine(10.0, 0.0)),
            edge("BC", LatencySpec::affine(1.0, 10.0)),
        ],
        users: vec![user(
            "1",
            "A",
            "D",
            6.0,
            vec![
                path("blue", &["AB", "BD"]),
                path("red", &["AC", "CD"]),
                path("green", &["AB", "BC", "CD"]),
            ],
        )],
    };
    config("braess", network)
}

fn fig1_edges(mu: &[f64; 5]) -> Vec<EdgeSpec> {
    ["AB", "AC", "CB", "BD", "CD"]
        .iter()
        .zip(mu)
        .map(|(id, &c)| edge(id, LatencySpec::mm1(c)))
        .collect()
}

fn fig1_users(rate1: f64, rate2: f64) -> Vec<UserSpec> {
    vec![
        user(
            "1",
            "A",
            "B",
            rate1,
            vec![path("a10", &["AB"]), path("a11", &["AC", "CB"])],
        ),
        user(
            "2",
            "C",
            "D",
            rate2,
            vec![path("a20", &["CD"]), path("a21", &["CB", "BD"])],
        ),
    ]
}

/// Irreducible two-user network with M/M/1 edges AB, AC, CB, BD, CD.
pub fn fig1a() -> Config {
    let mut c = fig1a_mm1(&FIG1_CAPACITIES, 1.0, 1.0);
    c.name = Some("fig1a".into());
    c
}

pub fn fig1a_mm1(capacities: &[f64; 5], rate1: f64, rate2: f64) -> Config {
    let network = NetworkSpec {
        nodes: nodes(&["A", "B", "C", "D"]),
        edges: fig1_edges(capacities),
        users: fig1_users(rate1, rate2),
    };
    config("fig1a-custom", network)
}

/// `fig1a` plus a third user from A to D via A→B→D or A→C→D, which makes
/// the network reducible.
pub fn fig1b() -> Config {
    let mut users = fig1_users(1.0, 1.0);
    users.push(user(
        "3",
        "A",
        "D",
        1.0,
        vec![path("a30", &["AB", "BD"]), path("a31", &["AC", "CD"])],
    ));
    let network = NetworkSpec {
        nodes: nodes(&["A", "B", "C", "D"]),
        edges: fig1_edges(&FIG1_CAPACITIES),
        users,
    };
    config("fig1b", network)
}

/// One user over parallel affine links `e1, e2, …` from `s` to `t`, with
/// `(slope, intercept)` per link; the paths are labelled `p1, p2, …`.
pub fn parallel_affine(rate: f64, links: &[(f64, f64)]) -> Config {
    parallel(
        rate,
        links
            .iter()
            .map(|&(a, b)| LatencySpec::affine(a, b))
            .collect(),
    )
}

pub fn parallel(rate: f64, latencies: Vec<LatencySpec>) -> Config {
    let edges: Vec<EdgeSpec> = latencies
        .into_iter()
        .enumerate()
        .map(|(k, latency)| EdgeSpec {
            id: format!("e{}", k + 1),
            from: "s".into(),
            to: "t".into(),
            latency,
        })
        .collect();
    let paths = (1..=edges.len())
        .map(|k| PathSpec {
            label: format!("p{k}"),
            edges: vec![format!("e{k}")],
        })
        .collect();
    let network = NetworkSpec {
        nodes: nodes(&["s", "t"]),
        edges,
        users: vec![user("1", "s", "t", rate, paths)],
    };
    config("parallel", network)
}

/// Two parallel links `1 + y` and `10 + y` carrying one unit: all traffic
/// on the first link is a strict equilibrium. Ships with noise σ = 0.5 per
/// edge and learning rate 0.1.
pub fn parallel2() -> Config {
    let mut c = parallel_affine(1.0, &[(1.0, 1.0), (1.0, 10.0)]);
    c.name = Some("parallel2".into());
    c.noise = Some(NoiseConfig {
        default: 0.5,
        edges: BTreeMap::new(),
    });
    c.simulation = Some(SimulationConfig {
        learning_rates: BTreeMap::from([("1".to_string(), 0.1)]),
        dt: Some(0.01),
        horizon: Some(200.0),
        ..SimulationConfig::default()
    });
    c
}

/// Pigou's pair: a constant link `1` and a link `y`, one unit of traffic.
pub fn pigou() -> Config {
    let mut c = parallel(
        1.0,
        vec![LatencySpec::constant(1.0), LatencySpec::affine(1.0, 0.0)],
    );
    c.name = Some("pigou".into());
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_builds() {
        for name in names() {
            let c = by_name(name).unwrap();
            c.validate().unwrap();
            c.network().unwrap();
        }
        assert!(matches!(by_name("nope"), Err(Error::UnknownExample { .. })));
    }

    #[test]
    fn fig1_paths_and_redundancy() {
        let a = fig1a().network().unwrap();
        assert_eq!(a.redundancy().redundancy, 0);
        let b = fig1b().network().unwrap();
        assert_eq!(b.redundancy().redundancy, 1);
        assert_eq!(b.path_count(), 6);
        // every path assignment stays below capacity
        for r in 0..b.edge_count() {
            let cap = b.edges()[r].latency.capacity().unwrap();
            assert!(b.max_edge_load(r) < cap);
        }
    }
}
