//! Learning dynamics on Δ.
//!
//! Deterministic: the rate-adjusted replicator dynamics
//! `ẋ_iα = λ_i x_iα (ω_i − ω_iα)` and BNN dynamics driven by the excess
//! delays `ψ_iα = [ω_i − ω_iα]⁺`. Stochastic: the replicator SDE with
//! edge-correlated noise, and exponential learning on cumulative scores.

mod generator;
mod noise;
mod ode;
mod score;
mod sde;

pub use generator::{entropy_generator, noise_covariance};
pub use noise::{noise_increments, path_variance};
pub use ode::{integrate_ode, OdeStepper};
pub use score::{simulate_exponential_learning, ScoreState};
pub use sde::{simulate_sde, simulate_sde_stream, ReplicatorSde};

use serde::{Deserialize, Serialize};

use crate::equilibria::gap_from_costs;
use crate::latency::{
    adjoint_potential, edge_costs_into, potential_of_loads, relative_entropy, CostModel,
};
use crate::net::{projective_distance, Flow, Network};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeScheme {
    #[default]
    Rk4,
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    Replicator,
    Bnn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// λ_i per user.
    pub lambda: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: OdeScheme,
    pub seed: u64,
    /// Stochastic paths are kept at least `floor · ρ_i` from the boundary.
    pub floor: f64,
    /// Reference flow for H_q, L_q and Θ_q diagnostics.
    pub reference: Option<Flow>,
    /// Record every `stride`-th step (the final state is always recorded).
    pub stride: usize,
}

impl SimConfig {
    pub fn new(lambda: Vec<f64>) -> SimConfig {
        SimConfig {
            lambda,
            dt: 0.01,
            horizon: 100.0,
            scheme: OdeScheme::Rk4,
            seed: 0,
            floor: 1e-12,
            reference: None,
            stride: 1,
        }
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.lambda.len() != net.user_count() {
            return Err(Error::DimensionMismatch {
                expected: net.user_count(),
                got: self.lambda.len(),
            });
        }
        if let Some(l) = self.lambda.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::OutOfRange(format!(
                "learning rate must be positive, got {l}"
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::OutOfRange(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        if !(self.floor > 0.0 && self.floor <= 1e-6) {
            return Err(Error::OutOfRange(format!(
                "floor must lie in (0, 1e-6], got {}",
                self.floor
            )));
        }
        if self.stride == 0 {
            return Err(Error::OutOfRange("stride must be at least 1".into()));
        }
        if let Some(q) = &self.reference {
            net.check_flow(q)?;
        }
        Ok(())
    }

    /// Number of steps of size `dt` covering the horizon.
    pub fn steps(&self) -> usize {
        let n = self.horizon / self.dt;
        let r = n.round();
        if (n - r).abs() <= 1e-9 * n.max(1.0) {
            r as usize
        } else {
            n.ceil() as usize
        }
    }

    /// ρ-weighted mean learning rate λ̄ = ρ⁻¹ Σ_i ρ_i λ_i.
    pub fn mean_rate(&self, net: &Network) -> f64 {
        net.users()
            .iter()
            .zip(&self.lambda)
            .map(|(u, l)| u.rate * l)
            .sum::<f64>()
            / net.total_rate()
    }
}

/// Lyapunov diagnostics of one sample; `NaN` where undefined (no reference
/// flow, or a boundary reference for Θ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub entropy: f64,
    pub potential: f64,
    pub adjoint: f64,
    pub theta: f64,
    pub gap: f64,
}

impl Diagnostics {
    pub fn compute(net: &Network, x: &Flow, lambda: &[f64], q: Option<&Flow>) -> Diagnostics {
        let y = net.loads(x.values());
        let potential = potential_of_loads(net, &y, CostModel::Latency).unwrap_or(f64::NAN);
        let mut edge = vec![0.0; net.edge_count()];
        let gap = match edge_costs_into(net, &y, CostModel::Latency, &mut edge) {
            Ok(()) => gap_from_costs(net, x.values(), &net.path_sums(&edge)).relative,
            Err(_) => f64::NAN,
        };
        let (entropy, adjoint, theta) = match q {
            Some(q) => (
                relative_entropy(q, x, lambda),
                adjoint_potential(net, q, x).unwrap_or(f64::NAN),
                if q.is_interior() {
                    projective_distance(q, x).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                },
            ),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        Diagnostics {
            entropy,
            potential,
            adjoint,
            theta,
            gap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    /// Integration stopped early; samples up to `time` are valid.
    Aborted {
        time: f64,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// `replicator`, `bnn`, `replicator-sde` or `exponential-learning`.
    pub kind: String,
    pub scheme: String,
    pub dt: f64,
    pub horizon: f64,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub path_names: Vec<String>,
    pub times: Vec<f64>,
    pub flows: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostics>,
    pub status: RunStatus,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    fn new(net: &Network, meta: TrajectoryMeta) -> Trajectory {
        Trajectory {
            path_names: (0..net.path_count()).map(|a| net.path_name(a)).collect(),
            times: Vec::new(),
            flows: Vec::new(),
            diagnostics: Vec::new(),
            status: RunStatus::Completed,
            meta,
        }
    }

    fn record(&mut self, net: &Network, cfg: &SimConfig, t: f64, x: &[f64]) {
        let f = Flow::from_parts_unchecked(x.to_vec(), net.offsets().to_vec());
        self.diagnostics.push(Diagnostics::compute(
            net,
            &f,
            &cfg.lambda,
            cfg.reference.as_ref(),
        ));
        self.times.push(t);
        self.flows.push(f.into_values());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn final_flow(&self) -> Option<&[f64]> {
        self.flows.last().map(Vec::as_slice)
    }
}

/// Reusable evaluation buffers: loads, edge costs and path delays.
pub(crate) struct Evaluator<'a> {
    pub net: &'a Network,
    pub loads: Vec<f64>,
    pub edge: Vec<f64>,
    pub path: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a Network) -> Self {
        Evaluator {
            net,
            loads: vec![0.0; net.edge_count()],
            edge: vec![0.0; net.edge_count()],
            path: vec![0.0; net.path_count()],
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<()> {
        self.loads.copy_from_slice(self.net.background());
        self.net.accumulate_loads(x, &mut self.loads);
        edge_costs_into(self.net, &self.loads, CostModel::Latency, &mut self.edge)?;
        for a in 0..self.path.len() {
            self.path[a] = self.net.path_edges(a).iter().map(|&r| self.edge[r]).sum();
        }
        Ok(())
    }

    /// `λ_i x_iα (ω_i − ω_iα)` into `out`.
    pub fn replicator(&mut self, x: &[f64], lambda: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval(x)?;
        for (i, u) in self.net.users().iter().enumerate() {
            let r = self.net.user_range(i);
            let avg: f64 = r.clone().map(|a| x[a] * self.path[a]).sum::<f64>() / u.rate;
            for a in r {
                out[a] = lambda[i] * x[a] * (avg - self.path[a]);
            }
        }
        Ok(())
    }

    /// `λ_i (ρ_i ψ_iα − x_iα Σ_β ψ_iβ)` into `out`.
    pub fn bnn(&mut self, x: &[f64], lambda: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval(x)?;
        for (i, u) in self.net.users().iter().enumerate() {
            let r = self.net.user_range(i);
            let avg: f64 = r.clone().map(|a| x[a] * self.path[a]).sum::<f64>() / u.rate;
            let mut total = 0.0;
            for a in r.clone() {
                let psi = (avg - self.path[a]).max(0.0);
                out[a] = psi;
                total += psi;
            }
            for a in r {
                out[a] = lambda[i] * (u.rate * out[a] - x[a] * total);
            }
        }
        Ok(())
    }
}

/// Rate-adjusted replicator field `ẋ_iα = λ_i x_iα (ω_i(x) − ω_iα(x))`.
pub fn replicator_rhs(net: &Network, x: &Flow, lambda: &[f64]) -> Result<Vec<f64>> {
    net.check_flow(x)?;
    check_lambda(net, lambda)?;
    let mut out = vec![0.0; net.path_count()];
    Evaluator::new(net).replicator(x.values(), lambda, &mut out)?;
    Ok(out)
}

/// Mass-preserving BNN field `ẋ_iα = ρ_i ψ_iα − x_iα Σ_β ψ_iβ`.
pub fn bnn_rhs(net: &Network, x: &Flow) -> Result<Vec<f64>> {
    net.check_flow(x)?;
    let ones = vec![1.0; net.user_count()];
    let mut out = vec![0.0; net.path_count()];
    Evaluator::new(net).bnn(x.values(), &ones, &mut out)?;
    Ok(out)
}

fn check_lambda(net: &Network, lambda: &[f64]) -> Result<()> {
    if lambda.len() != net.user_count() {
        return Err(Error::DimensionMismatch {
            expected: net.user_count(),
            got: lambda.len(),
        });
    }
    Ok(())
}

/// Rescales each user's coordinates to sum to ρ_i.
pub(crate) fn renormalize(net: &Network, x: &mut [f64]) {
    for (i, u) in net.users().iter().enumerate() {
        let xi = &mut x[net.user_range(i)];
        let s: f64 = xi.iter().sum();
        if s > 0.0 && s != u.rate {
            let k = u.rate / s;
            xi.iter_mut().for_each(|v| *v *= k);
        }
    }
}
