use serde::{Deserialize, Serialize};

use super::{CostModel, LatencySpec};
use crate::net::{Flow, Network};
use crate::{Error, Result};

/// Delays induced by one flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayProfile {
    /// Total edge loads y_r, background included.
    pub loads: Vec<f64>,
    /// φ_r(y_r).
    pub edge: Vec<f64>,
    /// ω_iα, global path order.
    pub path: Vec<f64>,
    /// ω_i = ρ_i⁻¹ Σ_α x_iα ω_iα.
    pub average: Vec<f64>,
    /// ω̃_i, the slowest supported path.
    pub worst: Vec<f64>,
    /// min_α ω_iα over all of the user's paths.
    pub fastest: Vec<f64>,
}

/// Per-edge costs `c_r(y_r)`, failing on loads outside a latency domain.
pub fn edge_costs(net: &Network, loads: &[f64], model: CostModel) -> Result<Vec<f64>> {
    let mut out = vec![0.0; loads.len()];
    edge_costs_into(net, loads, model, &mut out)?;
    Ok(out)
}

pub(crate) fn edge_costs_into(
    net: &Network,
    loads: &[f64],
    model: CostModel,
    out: &mut [f64],
) -> Result<()> {
    for ((e, &y), c) in net.edges().iter().zip(loads).zip(out.iter_mut()) {
        if !e.latency.is_feasible(y) {
            return Err(infeasible(&e.id, &e.latency, y));
        }
        *c = model.cost(&e.latency, y);
    }
    Ok(())
}

fn infeasible(edge: &str, spec: &LatencySpec, y: f64) -> Error {
    Error::InfeasibleLoad {
        edge: edge.to_string(),
        load: y,
        capacity: spec.capacity().unwrap_or(f64::INFINITY),
    }
}

/// Whether every edge load lies in its latency domain.
pub fn loads_feasible(net: &Network, loads: &[f64]) -> bool {
    net.edges()
        .iter()
        .zip(loads)
        .all(|(e, &y)| e.latency.is_feasible(y))
}

pub fn path_delays(net: &Network, x: &Flow) -> Result<DelayProfile> {
    path_delays_with(net, x, CostModel::Latency)
}

pub fn path_delays_with(net: &Network, x: &Flow, model: CostModel) -> Result<DelayProfile> {
    if x.offsets() != net.offsets() {
        return Err(Error::DimensionMismatch {
            expected: net.path_count(),
            got: x.len(),
        });
    }
    let loads = net.loads(x.values());
    let edge = edge_costs(net, &loads, model)?;
    let path = net.path_sums(&edge);
    let n = net.user_count();
    let mut average = vec![0.0; n];
    let mut worst = vec![f64::NEG_INFINITY; n];
    let mut fastest = vec![f64::INFINITY; n];
    let xv = x.values();
    for (i, u) in net.users().iter().enumerate() {
        for a in net.user_range(i) {
            average[i] += xv[a] * path[a];
            fastest[i] = fastest[i].min(path[a]);
            if net.is_supported(xv, a) {
                worst[i] = worst[i].max(path[a]);
            }
        }
        average[i] /= u.rate;
    }
    Ok(DelayProfile {
        loads,
        edge,
        path,
        average,
        worst,
        fastest,
    })
}

/// Rosenthal potential Φ(y) = Σ_r ∫₀^{y_r} φ_r.
pub fn rosenthal_potential(net: &Network, x: &Flow) -> Result<f64> {
    potential_of_loads(net, &net.loads(x.values()), CostModel::Latency)
}

/// Σ_r of the per-edge potential of `model` at the given loads.
pub fn potential_of_loads(net: &Network, loads: &[f64], model: CostModel) -> Result<f64> {
    let mut total = 0.0;
    for (e, &y) in net.edges().iter().zip(loads) {
        if !e.latency.is_feasible(y) {
            return Err(infeasible(&e.id, &e.latency, y));
        }
        total += model.potential(&e.latency, y);
    }
    Ok(total)
}

/// ∂Φ/∂x_iα, which is the path delay ω_iα.
pub fn potential_gradient(net: &Network, x: &Flow) -> Result<Vec<f64>> {
    Ok(path_delays(net, x)?.path)
}

/// Adjoint potential L_q(x) = Σ_r (y_r − y*_r) φ_r(y_r).
pub fn adjoint_potential(net: &Network, q: &Flow, x: &Flow) -> Result<f64> {
    let y = net.loads(x.values());
    let ys = net.loads(q.values());
    let c = edge_costs(net, &y, CostModel::Latency)?;
    Ok(y.iter()
        .zip(&ys)
        .zip(&c)
        .map(|((a, b), c)| (a - b) * c)
        .sum())
}

/// Rate-adjusted relative entropy
/// H_q(x; λ) = Σ_i λ_i⁻¹ Σ_{α ∈ supp q_i} q_iα log(q_iα / x_iα),
/// `+∞` when the support of q is not contained in that of x.
pub fn relative_entropy(q: &Flow, x: &Flow, lambda: &[f64]) -> f64 {
    let mut h = 0.0;
    for (i, &l) in lambda.iter().enumerate().take(q.user_count()) {
        let mut hi = 0.0;
        for (&qa, &xa) in q.user(i).iter().zip(x.user(i)) {
            if qa > 0.0 {
                if xa <= 0.0 {
                    return f64::INFINITY;
                }
                hi += qa * (qa / xa).ln();
            }
        }
        h += hi / l;
    }
    h
}

/// φ*(y) = φ(y) + y·φ'(y), checked against the latency domain.
pub fn marginal_latency(spec: &LatencySpec, y: f64) -> Result<f64> {
    if !spec.is_feasible(y) {
        return Err(infeasible("(unnamed)", spec, y));
    }
    Ok(spec.marginal(y))
}

/// Total delay Σ_r y_r φ_r(y_r) experienced by all traffic, background
/// included. Equals Σ_i ρ_i ω_i when there is no background load.
pub fn aggregate_delay(net: &Network, x: &Flow) -> Result<f64> {
    potential_of_loads(net, &net.loads(x.values()), CostModel::Marginal)
}
