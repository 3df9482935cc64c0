use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{OdeScheme, SimConfig};
use crate::latency::NoiseSpec;
use crate::net::{Network, NetworkSpec};
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

/// A complete run description: network, optional noise and simulation
/// settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
}

/// σ_r per edge: `default` for every edge not listed in `edges`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub default: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edges: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// λ_i keyed by user id; missing users learn at rate 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub learning_rates: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<OdeScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
}

/// A validated configuration together with the objects built from it.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub config: Config,
    pub network: Network,
    pub noise: NoiseSpec,
    pub sim: SimConfig,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<Parsed> {
    let text = std::fs::read_to_string(path)?;
    Config::from_json(&text)?.into_parsed()
}

impl Config {
    /// Parses and validates JSON text.
    pub fn from_json(text: &str) -> Result<Config> {
        let c: Config = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn into_parsed(self) -> Result<Parsed> {
        let network = self.network()?;
        let noise = self.noise_spec(&network)?;
        let sim = self.sim_config(&network)?;
        Ok(Parsed {
            config: self,
            network,
            noise,
            sim,
        })
    }

    pub fn network(&self) -> Result<Network> {
        Network::build(&self.network)
    }

    pub fn noise_spec(&self, net: &Network) -> Result<NoiseSpec> {
        let mut spec = NoiseSpec::zero(net.edge_count());
        if let Some(n) = &self.noise {
            spec.sigma.iter_mut().for_each(|s| *s = n.default);
            for (id, &s) in &n.edges {
                let r = net
                    .edge_index(id)
                    .ok_or_else(|| Error::UnknownEdge(id.clone()))?;
                spec.sigma[r] = s;
            }
        }
        spec.validate(net.edge_count())?;
        Ok(spec)
    }

    /// λ_i in network user order. Users merged by origin/destination take
    /// the rate of the user whose id survived the merge.
    pub fn learning_rates(&self, net: &Network) -> Vec<f64> {
        let rates = self.simulation.as_ref().map(|s| &s.learning_rates);
        net.users()
            .iter()
            .map(|u| rates.and_then(|r| r.get(&u.id)).copied().unwrap_or(1.0))
            .collect()
    }

    pub fn sim_config(&self, net: &Network) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(self.learning_rates(net));
        if let Some(s) = &self.simulation {
            if let Some(v) = s.dt {
                cfg.dt = v;
            }
            if let Some(v) = s.horizon {
                cfg.horizon = v;
            }
            if let Some(v) = s.scheme {
                cfg.scheme = v;
            }
            if let Some(v) = s.seed {
                cfg.seed = v;
            }
            if let Some(v) = s.floor {
                cfg.floor = v;
            }
            if let Some(v) = s.stride {
                cfg.stride = v;
            }
        }
        cfg.validate(net)?;
        Ok(cfg)
    }

    /// Structural checks, all problems reported at once with field paths.
    /// Graph-level rules (path connectivity and the like) are left to
    /// [`Network::build`].
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.version != CONFIG_VERSION {
            problems.push(format!(
                "version: unsupported version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        let net = &self.network;
        let nodes: HashSet<&str> = net.nodes.iter().map(String::as_str).collect();
        let mut edge_ids = HashSet::new();
        for (k, e) in net.edges.iter().enumerate() {
            if !edge_ids.insert(e.id.as_str()) {
                problems.push(format!(
                    "network.edges[{k}].id: duplicate edge id `{}`",
                    e.id
                ));
            }
            for (field, node) in [("from", &e.from), ("to", &e.to)] {
                if !nodes.contains(node.as_str()) {
                    problems.push(format!("network.edges[{k}].{field}: unknown node `{node}`"));
                }
            }
            if let Err(reason) = e.latency.validate() {
                problems.push(format!("network.edges[{k}].latency: {reason}"));
            }
        }
        if net.edges.is_empty() {
            problems.push("network.edges: at least one edge is required".into());
        }
        if net.users.is_empty() {
            problems.push("network.users: at least one user is required".into());
        }
        let mut user_ids = HashSet::new();
        for (k, u) in net.users.iter().enumerate() {
            user_ids.insert(u.id.as_str());
            if !(u.rate.is_finite() && u.rate > 0.0) {
                problems.push(format!(
                    "network.users[{k}].rate: must be positive, got {}",
                    u.rate
                ));
            }
            for (field, node) in [("origin", &u.origin), ("destination", &u.destination)] {
                if !nodes.contains(node.as_str()) {
                    problems.push(format!("network.users[{k}].{field}: unknown node `{node}`"));
                }
            }
            if let Some(paths) = &u.paths {
                if paths.is_empty() {
                    problems.push(format!("network.users[{k}].paths: empty path list"));
                }
                for (j, p) in paths.iter().enumerate() {
                    for (m, e) in p.edges.iter().enumerate() {
                        if !edge_ids.contains(e.as_str()) {
                            problems.push(format!(
                                "network.users[{k}].paths[{j}].edges[{m}]: unknown edge `{e}`"
                            ));
                        }
                    }
                }
            }
        }
        if let Some(n) = &self.noise {
            if !(n.default.is_finite() && n.default >= 0.0) {
                problems.push(format!(
                    "noise.default: must be nonnegative, got {}",
                    n.default
                ));
            }
            for (id, &s) in &n.edges {
                if !edge_ids.contains(id.as_str()) {
                    problems.push(format!("noise.edges.{id}: unknown edge"));
                }
                if !(s.is_finite() && s >= 0.0) {
                    problems.push(format!("noise.edges.{id}: must be nonnegative, got {s}"));
                }
            }
        }
        if let Some(s) = &self.simulation {
            for (id, &l) in &s.learning_rates {
                if !user_ids.contains(id.as_str()) {
                    problems.push(format!("simulation.learning_rates.{id}: unknown user"));
                }
                if !(l.is_finite() && l > 0.0) {
                    problems.push(format!(
                        "simulation.learning_rates.{id}: must be positive, got {l}"
                    ));
                }
            }
            if let Some(dt) = s.dt {
                if !(dt.is_finite() && dt > 0.0) {
                    problems.push(format!("simulation.dt: must be positive, got {dt}"));
                }
            }
            if let Some(t) = s.horizon {
                if !(t.is_finite() && t >= 0.0) {
                    problems.push(format!("simulation.horizon: must be nonnegative, got {t}"));
                }
            }
            if let Some(f) = s.floor {
                if !(f > 0.0 && f <= 1e-6) {
                    problems.push(format!("simulation.floor: must lie in (0, 1e-6], got {f}"));
                }
            }
            if s.stride == Some(0) {
                problems.push("simulation.stride: must be at least 1".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    #[test]
    fn braess_parses() {
        let text = builtin::braess().to_json();
        let p = Config::from_json(&text).unwrap().into_parsed().unwrap();
        assert_eq!(p.network.path_count(), 3);
        assert!(p.noise.is_zero());
        assert_eq!(p.sim.lambda, vec![1.0]);
    }

    #[test]
    fn noise_and_rates_are_read() {
        let p = builtin::parallel2().into_parsed().unwrap();
        assert_eq!(p.noise.sigma, vec![0.5, 0.5]);
        assert_eq!(p.sim.lambda, vec![0.1]);
    }

    #[test]
    fn all_problems_reported_together() {
        let mut c = builtin::braess();
        c.version = 9;
        c.network.edges[0].to = "Z".into();
        c.network.users[0].rate = -1.0;
        c.noise = Some(NoiseConfig {
            default: -0.1,
            edges: BTreeMap::from([("XX".to_string(), 1.0)]),
        });
        match Config::from_json(&c.to_json()) {
            Err(Error::Config(list)) => {
                assert_eq!(list.len(), 5, "{list:?}");
                assert!(list.iter().any(|m| m.starts_with("network.edges[0].to")));
                assert!(list.iter().any(|m| m.starts_with("noise.edges.XX")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_bad_json_are_rejected() {
        assert!(matches!(Config::from_json("{"), Err(Error::Json(_))));
        let mut v: serde_json::Value = serde_json::from_str(&builtin::braess().to_json()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(matches!(
            Config::from_json(&v.to_string()),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn round_trip_is_structural_identity() {
        for name in builtin::names() {
            let c = builtin::by_name(name).unwrap();
            let again = Config::from_json(&c.to_json()).unwrap();
            assert_eq!(c, again);
            assert_eq!(c.network().unwrap(), again.network().unwrap());
        }
    }
}
