//! Networks, flows and load profiles.
//!
//! A [`Network`] is a directed graph together with a set of users, each
//! routing a fixed rate of traffic from an origin to a destination over an
//! explicit, ordered list of paths. Flows live on the product of scaled
//! simplices `Δ = Π_i {x_i ≥ 0 : Σ_α x_iα = ρ_i}`; path coordinates of all
//! users are concatenated in user order, so a flow is one flat vector.

mod flow;
mod geometry;
mod redundancy;

pub use flow::{Flow, LoadProfile, FLOW_SUM_TOLERANCE, SUPPORT_THRESHOLD};
pub use geometry::{essence, projective_distance, EssenceOptions, EssenceResult};
pub(crate) use redundancy::null_space;
pub use redundancy::{RedundancyInfo, RANK_TOLERANCE};

use std::collections::{HashMap, HashSet};

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::latency::LatencySpec;
use crate::{Error, Result};

/// Default cap on enumerated simple paths per user.
pub const DEFAULT_PATH_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub users: Vec<UserSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub latency: LatencySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub id: String,
    pub origin: String,
    pub destination: String,
    pub rate: f64,
    /// Explicit paths; when absent, all simple paths are enumerated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<PathSpec>>,
    /// Enumeration cap, only used when `paths` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_paths: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub label: String,
    pub edges: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub latency: LatencySpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub label: String,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct User {
    pub id: String,
    pub origin: usize,
    pub destination: usize,
    pub rate: f64,
    pub paths: Vec<Path>,
}

/// A user left with a single path; its traffic is a constant edge load.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedUser {
    pub id: String,
    pub origin: usize,
    pub destination: usize,
    pub rate: f64,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    users: Vec<User>,
    fixed: Vec<FixedUser>,
    background: Vec<f64>,
    offsets: Vec<usize>,
    /// Global path index → edge indices.
    path_edges: Vec<Vec<usize>>,
    redundancy: RedundancyInfo,
}

impl Network {
    /// Validates a description and builds the network: duplicate
    /// origin/destination pairs are merged, single-path users are folded into
    /// background loads, and the redundancy structure is computed.
    pub fn build(spec: &NetworkSpec) -> Result<Network> {
        let mut node_index = HashMap::new();
        for (k, n) in spec.nodes.iter().enumerate() {
            if node_index.insert(n.clone(), k).is_some() {
                return Err(Error::DuplicateNode(n.clone()));
            }
        }
        let node = |name: &str| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownNode(name.to_string()))
        };

        if spec.users.is_empty() {
            return Err(Error::Config(vec![
                "network.users: at least one user is required".into(),
            ]));
        }
        let mut edge_index = HashMap::new();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            if edge_index.insert(e.id.clone(), edges.len()).is_some() {
                return Err(Error::DuplicateEdge(e.id.clone()));
            }
            e.latency
                .validate()
                .map_err(|reason| Error::InvalidLatency {
                    edge: e.id.clone(),
                    reason,
                })?;
            edges.push(Edge {
                id: e.id.clone(),
                tail: node(&e.from)?,
                head: node(&e.to)?,
                latency: e.latency.clone(),
            });
        }

        // validate users, then merge by OD pair preserving first-seen order
        let mut merged: Vec<User> = Vec::new();
        let mut by_od: HashMap<(usize, usize), usize> = HashMap::new();
        for u in &spec.users {
            if !(u.rate.is_finite() && u.rate > 0.0) {
                return Err(Error::NonPositiveRate {
                    user: u.id.clone(),
                    rate: u.rate,
                });
            }
            let origin = node(&u.origin)?;
            let destination = node(&u.destination)?;
            if origin == destination {
                return Err(Error::InvalidPath {
                    user: u.id.clone(),
                    path: String::new(),
                    reason: "origin and destination coincide".into(),
                });
            }
            let paths = match &u.paths {
                Some(list) => {
                    let mut out = Vec::with_capacity(list.len());
                    for p in list {
                        let mut idx = Vec::with_capacity(p.edges.len());
                        for e in &p.edges {
                            idx.push(
                                edge_index
                                    .get(e)
                                    .copied()
                                    .ok_or_else(|| Error::UnknownEdge(e.clone()))?,
                            );
                        }
                        validate_path(&edges, origin, destination, &idx).map_err(|reason| {
                            Error::InvalidPath {
                                user: u.id.clone(),
                                path: p.label.clone(),
                                reason,
                            }
                        })?;
                        out.push(Path {
                            label: p.label.clone(),
                            edges: idx,
                        });
                    }
                    out
                }
                None => enumerate_simple_paths(
                    &edges,
                    origin,
                    destination,
                    u.max_paths.unwrap_or(DEFAULT_PATH_CAP),
                )
                .into_iter()
                .enumerate()
                .map(|(k, edges)| Path {
                    label: format!("p{k}"),
                    edges,
                })
                .collect(),
            };
            if paths.is_empty() {
                return Err(Error::NoPaths(u.id.clone()));
            }
            let mut seen = HashSet::new();
            for p in &paths {
                if !seen.insert(&p.edges) {
                    return Err(Error::InvalidPath {
                        user: u.id.clone(),
                        path: p.label.clone(),
                        reason: "path listed twice".into(),
                    });
                }
            }

            match by_od.get(&(origin, destination)) {
                Some(&k) => {
                    let target = &mut merged[k];
                    warn!(
                        "users `{}` and `{}` share an origin/destination pair; merging (rate {} + {})",
                        target.id, u.id, target.rate, u.rate
                    );
                    target.rate += u.rate;
                    for p in paths {
                        if target.paths.iter().any(|q| q.edges == p.edges) {
                            continue;
                        }
                        let mut label = p.label.clone();
                        while target.paths.iter().any(|q| q.label == label) {
                            label.push('\'');
                        }
                        target.paths.push(Path {
                            label,
                            edges: p.edges,
                        });
                    }
                }
                None => {
                    by_od.insert((origin, destination), merged.len());
                    merged.push(User {
                        id: u.id.clone(),
                        origin,
                        destination,
                        rate: u.rate,
                        paths,
                    });
                }
            }
        }

        let mut background = vec![0.0; edges.len()];
        let mut users = Vec::new();
        let mut fixed = Vec::new();
        for u in merged {
            if u.paths.len() == 1 {
                let path = u.paths.into_iter().next().expect("one path");
                for &r in &path.edges {
                    background[r] += u.rate;
                }
                fixed.push(FixedUser {
                    id: u.id,
                    origin: u.origin,
                    destination: u.destination,
                    rate: u.rate,
                    path,
                });
            } else {
                users.push(u);
            }
        }
        if users.is_empty() {
            return Err(Error::Config(vec![
                "network.users: no user has a choice between two or more paths".into(),
            ]));
        }

        let mut offsets = Vec::with_capacity(users.len() + 1);
        offsets.push(0);
        let mut path_edges = Vec::new();
        for u in &users {
            for p in &u.paths {
                path_edges.push(p.edges.clone());
            }
            offsets.push(path_edges.len());
        }

        let mut net = Network {
            nodes: spec.nodes.clone(),
            edges,
            users,
            fixed,
            background,
            offsets,
            path_edges,
            redundancy: RedundancyInfo::default(),
        };
        net.redundancy = RedundancyInfo::compute(&net);
        Ok(net)
    }

    /// Canonical description of this network: merged users with explicit
    /// paths, followed by the folded single-path users.
    pub fn to_spec(&self) -> NetworkSpec {
        let edge_ids = |p: &Path| p.edges.iter().map(|&r| self.edges[r].id.clone()).collect();
        let mut users: Vec<UserSpec> = self
            .users
            .iter()
            .map(|u| UserSpec {
                id: u.id.clone(),
                origin: self.nodes[u.origin].clone(),
                destination: self.nodes[u.destination].clone(),
                rate: u.rate,
                paths: Some(
                    u.paths
                        .iter()
                        .map(|p| PathSpec {
                            label: p.label.clone(),
                            edges: edge_ids(p),
                        })
                        .collect(),
                ),
                max_paths: None,
            })
            .collect();
        users.extend(self.fixed.iter().map(|u| UserSpec {
            id: u.id.clone(),
            origin: self.nodes[u.origin].clone(),
            destination: self.nodes[u.destination].clone(),
            rate: u.rate,
            paths: Some(vec![PathSpec {
                label: u.path.label.clone(),
                edges: edge_ids(&u.path),
            }]),
            max_paths: None,
        }));
        NetworkSpec {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    from: self.nodes[e.tail].clone(),
                    to: self.nodes[e.head].clone(),
                    latency: e.latency.clone(),
                })
                .collect(),
            users,
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn fixed_users(&self) -> &[FixedUser] {
        &self.fixed
    }

    /// Constant per-edge load contributed by single-path users.
    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn path_count(&self) -> usize {
        self.path_edges.len()
    }

    /// Global path index range of user `i`.
    pub fn user_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn rates(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.rate).collect()
    }

    /// ρ = Σ_i ρ_i over the strategic users.
    pub fn total_rate(&self) -> f64 {
        self.users.iter().map(|u| u.rate).sum()
    }

    /// Edges of the path with global index `a`.
    pub fn path_edges(&self, a: usize) -> &[usize] {
        &self.path_edges[a]
    }

    /// Owner of global path index `a`.
    pub fn path_user(&self, a: usize) -> usize {
        match self.offsets.binary_search(&a) {
            Ok(k) if k < self.users.len() => k,
            Ok(k) => k - 1,
            Err(k) => k - 1,
        }
    }

    /// Column label `u<i>.<path>` (1-based user index).
    pub fn path_name(&self, a: usize) -> String {
        let i = self.path_user(a);
        let local = a - self.offsets[i];
        format!("u{}.{}", i + 1, self.users[i].paths[local].label)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn redundancy(&self) -> &RedundancyInfo {
        &self.redundancy
    }

    /// Indicator matrix P (edges × paths), `P[r][α] = 1` iff `r ∈ α`.
    pub fn indicator(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.edges.len(), self.path_count());
        for (a, edges) in self.path_edges.iter().enumerate() {
            for &r in edges {
                p[(r, a)] = 1.0;
            }
        }
        p
    }

    /// Edges used by at least one path of a strategic user.
    pub fn used_edges(&self) -> Vec<usize> {
        let mut used = vec![false; self.edges.len()];
        for edges in &self.path_edges {
            for &r in edges {
                used[r] = true;
            }
        }
        (0..self.edges.len()).filter(|&r| used[r]).collect()
    }

    /// Lower bound |N| − |E'| on the redundancy.
    pub fn redundancy_lower_bound(&self) -> i64 {
        self.users.len() as i64 - self.used_edges().len() as i64
    }

    /// Largest load edge `r` can carry: background plus every user with a
    /// path through it.
    pub fn max_edge_load(&self, r: usize) -> f64 {
        let mut y = self.background[r];
        for (i, u) in self.users.iter().enumerate() {
            if self.user_range(i).any(|a| self.path_edges[a].contains(&r)) {
                y += u.rate;
            }
        }
        y
    }

    /// Adds `P·x` (without background) into `out`.
    pub fn accumulate_loads(&self, x: &[f64], out: &mut [f64]) {
        for (a, edges) in self.path_edges.iter().enumerate() {
            let v = x[a];
            if v != 0.0 {
                for &r in edges {
                    out[r] += v;
                }
            }
        }
    }

    /// Total loads `P·x + background`.
    pub fn loads(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.background.clone();
        self.accumulate_loads(x, &mut y);
        y
    }

    /// `P·z` for a displacement (no background).
    pub fn apply_indicator(&self, z: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.edges.len()];
        self.accumulate_loads(z, &mut w);
        w
    }

    /// Sums `v[r]` over the edges of each path: `Pᵀ·v`.
    pub fn path_sums(&self, per_edge: &[f64]) -> Vec<f64> {
        self.path_edges
            .iter()
            .map(|edges| edges.iter().map(|&r| per_edge[r]).sum())
            .collect()
    }

    /// Whether path `a` carries more than the support threshold of its
    /// user's rate.
    pub fn is_supported(&self, x: &[f64], a: usize) -> bool {
        x[a] > SUPPORT_THRESHOLD * self.users[self.path_user(a)].rate
    }

    /// Wraps raw coordinates as a flow, checking the simplex constraints.
    pub fn flow(&self, values: Vec<f64>) -> Result<Flow> {
        let f = Flow::from_parts(values, self.offsets.clone())?;
        self.check_flow(&f)?;
        Ok(f)
    }

    /// Per-user flows given as one vector per user.
    pub fn flow_from_users(&self, per_user: &[Vec<f64>]) -> Result<Flow> {
        if per_user.len() != self.users.len() {
            return Err(Error::DimensionMismatch {
                expected: self.users.len(),
                got: per_user.len(),
            });
        }
        let values: Vec<f64> = per_user.iter().flatten().copied().collect();
        self.flow(values)
    }

    /// Every user splits its rate evenly over its paths.
    pub fn uniform_flow(&self) -> Flow {
        let mut v = vec![0.0; self.path_count()];
        for (i, u) in self.users.iter().enumerate() {
            let r = self.user_range(i);
            let share = u.rate / r.len() as f64;
            v[r].iter_mut().for_each(|x| *x = share);
        }
        Flow::from_parts_unchecked(v, self.offsets.clone())
    }

    /// All of each user's rate on path `choice[i]` (local index).
    pub fn pure_flow(&self, choice: &[usize]) -> Result<Flow> {
        if choice.len() != self.users.len() {
            return Err(Error::DimensionMismatch {
                expected: self.users.len(),
                got: choice.len(),
            });
        }
        let mut v = vec![0.0; self.path_count()];
        for (i, &c) in choice.iter().enumerate() {
            let r = self.user_range(i);
            if c >= r.len() {
                return Err(Error::InvalidFlow(format!(
                    "user {} has no path index {c}",
                    self.users[i].id
                )));
            }
            v[r.start + c] = self.users[i].rate;
        }
        Ok(Flow::from_parts_unchecked(v, self.offsets.clone()))
    }

    /// Checks dimensions, nonnegativity and per-user sums.
    pub fn check_flow(&self, x: &Flow) -> Result<()> {
        if x.offsets() != self.offsets.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.path_count(),
                got: x.len(),
            });
        }
        for (i, u) in self.users.iter().enumerate() {
            let xi = x.user(i);
            if let Some(v) = xi.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidFlow(format!(
                    "user {}: coordinate {v} is negative or not finite",
                    u.id
                )));
            }
            let s: f64 = xi.iter().sum();
            if (s - u.rate).abs() > FLOW_SUM_TOLERANCE {
                return Err(Error::InvalidFlow(format!(
                    "user {}: flow sums to {s}, rate is {}",
                    u.id, u.rate
                )));
            }
        }
        Ok(())
    }

    /// Per-edge loads, total and per user.
    pub fn edge_loads(&self, x: &Flow) -> Result<LoadProfile> {
        if x.offsets() != self.offsets.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.path_count(),
                got: x.len(),
            });
        }
        let mut per_user = vec![vec![0.0; self.edges.len()]; self.users.len()];
        for (i, yi) in per_user.iter_mut().enumerate() {
            for a in self.user_range(i) {
                for &r in &self.path_edges[a] {
                    yi[r] += x.values()[a];
                }
            }
        }
        Ok(LoadProfile {
            total: self.loads(x.values()),
            per_user,
        })
    }
}

fn validate_path(
    edges: &[Edge],
    origin: usize,
    destination: usize,
    path: &[usize],
) -> std::result::Result<(), String> {
    let Some(&first) = path.first() else {
        return Err("path is empty".into());
    };
    if edges[first].tail != origin {
        return Err(format!(
            "path starts at edge `{}` which does not leave the origin",
            edges[first].id
        ));
    }
    for w in path.windows(2) {
        if edges[w[0]].head != edges[w[1]].tail {
            return Err(format!(
                "edges `{}` and `{}` are not consecutive",
                edges[w[0]].id, edges[w[1]].id
            ));
        }
    }
    let last = *path.last().expect("nonempty");
    if edges[last].head != destination {
        return Err(format!(
            "path ends at edge `{}` which does not reach the destination",
            edges[last].id
        ));
    }
    let mut seen = HashSet::new();
    for &r in path {
        if !seen.insert(r) {
            return Err(format!("edge `{}` repeated", edges[r].id));
        }
    }
    Ok(())
}

/// Node-simple paths from `origin` to `destination`, in lexicographic order
/// of edge indices, at most `cap` of them.
pub fn enumerate_simple_paths(
    edges: &[Edge],
    origin: usize,
    destination: usize,
    cap: usize,
) -> Vec<Vec<usize>> {
    let node_count = edges
        .iter()
        .map(|e| e.tail.max(e.head) + 1)
        .max()
        .unwrap_or(0)
        .max(origin + 1)
        .max(destination + 1);
    let mut out_edges = vec![Vec::new(); node_count];
    for (k, e) in edges.iter().enumerate() {
        out_edges[e.tail].push(k);
    }

    struct Search<'a> {
        destination: usize,
        edges: &'a [Edge],
        out_edges: &'a [Vec<usize>],
        cap: usize,
        visited: Vec<bool>,
        stack: Vec<usize>,
        found: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn visit(&mut self, node: usize) {
            if self.found.len() >= self.cap {
                return;
            }
            if node == self.destination {
                self.found.push(self.stack.clone());
                return;
            }
            self.visited[node] = true;
            for &k in &self.out_edges[node] {
                let next = self.edges[k].head;
                if !self.visited[next] {
                    self.stack.push(k);
                    self.visit(next);
                    self.stack.pop();
                }
            }
            self.visited[node] = false;
        }
    }

    let mut search = Search {
        destination,
        edges,
        out_edges: &out_edges,
        cap,
        visited: vec![false; node_count],
        stack: Vec::new(),
        found: Vec::new(),
    };
    if cap > 0 {
        search.visit(origin);
    }
    search.found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    fn two_link(rate: f64) -> NetworkSpec {
        NetworkSpec {
            nodes: vec!["s".into(), "t".into()],
            edges: vec![
                EdgeSpec {
                    id: "e1".into(),
                    from: "s".into(),
                    to: "t".into(),
                    latency: LatencySpec::affine(1.0, 1.0),
                },
                EdgeSpec {
                    id: "e2".into(),
                    from: "s".into(),
                    to: "t".into(),
                    latency: LatencySpec::affine(1.0, 10.0),
                },
            ],
            users: vec![UserSpec {
                id: "1".into(),
                origin: "s".into(),
                destination: "t".into(),
                rate,
                paths: Some(vec![
                    PathSpec {
                        label: "a".into(),
                        edges: vec!["e1".into()],
                    },
                    PathSpec {
                        label: "b".into(),
                        edges: vec!["e2".into()],
                    },
                ]),
                max_paths: None,
            }],
        }
    }

    #[test]
    fn networks_without_route_choice_are_rejected() {
        let mut spec = two_link(1.0);
        spec.users.clear();
        assert!(matches!(Network::build(&spec), Err(Error::Config(_))));
        let mut spec = two_link(1.0);
        spec.users[0].paths.as_mut().unwrap().pop();
        assert!(matches!(Network::build(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn braess_has_one_user_three_paths() {
        let net = builtin::braess().network().unwrap();
        assert_eq!(net.user_count(), 1);
        assert_eq!(net.path_count(), 3);
        assert_eq!(net.edge_count(), 5);
    }

    #[test]
    fn fig1a_has_two_users() {
        let net = builtin::fig1a().network().unwrap();
        assert_eq!(net.user_count(), 2);
        assert_eq!(net.path_count(), 4);
    }

    #[test]
    fn duplicate_od_pairs_merge() {
        let mut spec = two_link(1.0);
        let mut second = spec.users[0].clone();
        second.id = "2".into();
        second.rate = 2.0;
        spec.users.push(second);
        let net = Network::build(&spec).unwrap();
        assert_eq!(net.user_count(), 1);
        assert_eq!(net.users()[0].rate, 3.0);
        assert_eq!(net.path_count(), 2);
    }

    #[test]
    fn single_path_user_becomes_background() {
        let mut spec = two_link(1.0);
        spec.nodes.push("u".into());
        spec.edges.push(EdgeSpec {
            id: "tu".into(),
            from: "t".into(),
            to: "u".into(),
            latency: LatencySpec::affine(1.0, 0.0),
        });
        spec.users.push(UserSpec {
            id: "bg".into(),
            origin: "s".into(),
            destination: "u".into(),
            rate: 0.5,
            paths: Some(vec![PathSpec {
                label: "only".into(),
                edges: vec!["e1".into(), "tu".into()],
            }]),
            max_paths: None,
        });
        let net = Network::build(&spec).unwrap();
        assert_eq!(net.user_count(), 1);
        assert_eq!(net.fixed_users().len(), 1);
        assert_eq!(net.background(), &[0.5, 0.0, 0.5]);
        let x = net.flow(vec![0.25, 0.75]).unwrap();
        assert_eq!(net.edge_loads(&x).unwrap().total, vec![0.75, 0.75, 0.5]);
    }

    #[test]
    fn construction_errors() {
        let mut s = two_link(1.0);
        s.users[0].rate = 0.0;
        assert!(matches!(
            Network::build(&s),
            Err(Error::NonPositiveRate { .. })
        ));

        let mut s = two_link(1.0);
        s.edges[1].id = "e1".into();
        assert!(matches!(Network::build(&s), Err(Error::DuplicateEdge(_))));

        let mut s = two_link(1.0);
        s.edges[0].to = "nowhere".into();
        assert!(matches!(Network::build(&s), Err(Error::UnknownNode(_))));

        let mut s = two_link(1.0);
        s.users[0].paths.as_mut().unwrap()[0].edges = vec!["zz".into()];
        assert!(matches!(Network::build(&s), Err(Error::UnknownEdge(_))));

        let mut s = two_link(1.0);
        s.users[0].destination = "s".into();
        s.users[0].origin = "t".into();
        assert!(matches!(Network::build(&s), Err(Error::InvalidPath { .. })));
    }

    #[test]
    fn braess_loads() {
        let net = builtin::braess().network().unwrap();
        let y = |v: [f64; 3]| {
            net.edge_loads(&net.flow(v.to_vec()).unwrap())
                .unwrap()
                .total
        };
        // edge order AB, AC, BD, CD, BC
        assert_eq!(y([2.0, 2.0, 2.0]), vec![4.0, 2.0, 2.0, 4.0, 2.0]);
        assert_eq!(y([3.0, 3.0, 0.0]), vec![3.0, 3.0, 3.0, 3.0, 0.0]);
        let zero = Flow::from_parts_unchecked(vec![0.0; 3], net.offsets().to_vec());
        assert_eq!(net.edge_loads(&zero).unwrap().total, vec![0.0; 5]);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(
            builtin::fig1b().network().unwrap().redundancy_lower_bound(),
            -2
        );
        assert_eq!(
            builtin::braess()
                .network()
                .unwrap()
                .redundancy_lower_bound(),
            -4
        );
    }

    #[test]
    fn enumeration_is_lexicographic_and_capped() {
        let net = builtin::braess().network().unwrap();
        let all = enumerate_simple_paths(net.edges(), 0, 3, 64);
        assert_eq!(all.len(), 3);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(enumerate_simple_paths(net.edges(), 0, 3, 2).len(), 2);
    }

    #[test]
    fn spec_round_trip() {
        for ex in builtin::names() {
            let net = builtin::by_name(ex).unwrap().network().unwrap();
            let again = Network::build(&net.to_spec()).unwrap();
            assert_eq!(net, again);
        }
    }

    #[test]
    fn path_user_lookup() {
        let net = builtin::fig1b().network().unwrap();
        for i in 0..net.user_count() {
            for a in net.user_range(i) {
                assert_eq!(net.path_user(a), i);
            }
        }
        assert_eq!(net.path_name(0), "u1.a10");
    }
}
