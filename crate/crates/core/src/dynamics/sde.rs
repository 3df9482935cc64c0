use log::warn;
use rand::Rng;

use super::noise::{increments_into, path_variance};
use super::{Evaluator, RunStatus, SimConfig, Trajectory, TrajectoryMeta};
use crate::latency::NoiseSpec;
use crate::net::{Flow, Network};
use crate::{rng, Result};

/// Euler–Maruyama integrator of the stochastic replicator dynamics
///
/// ```text
/// dX_iα = λ_i X_iα (ω_i − ω_iα) dt + λ_i X_iα (dU_iα − ρ_i⁻¹ Σ_β X_iβ dU_iβ)
/// ```
///
/// followed by flooring at `floor · ρ_i` and per-user renormalization.
pub struct ReplicatorSde<'a> {
    eval: Evaluator<'a>,
    noise: &'a NoiseSpec,
    lambda: Vec<f64>,
    dt: f64,
    sqrt_dt: f64,
    floor: f64,
    drift: Vec<f64>,
    dw: Vec<f64>,
    du: Vec<f64>,
}

impl<'a> ReplicatorSde<'a> {
    pub fn new(
        net: &'a Network,
        noise: &'a NoiseSpec,
        lambda: Vec<f64>,
        dt: f64,
        floor: f64,
    ) -> Self {
        ReplicatorSde {
            eval: Evaluator::new(net),
            noise,
            lambda,
            dt,
            sqrt_dt: dt.sqrt(),
            floor,
            drift: vec![0.0; net.path_count()],
            dw: vec![0.0; net.edge_count()],
            du: vec![0.0; net.path_count()],
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, x: &mut [f64], rng: &mut R) -> Result<()> {
        let net = self.eval.net;
        self.eval.replicator(x, &self.lambda, &mut self.drift)?;
        increments_into(
            net,
            self.noise,
            self.sqrt_dt,
            rng,
            &mut self.dw,
            &mut self.du,
        );
        for (i, u) in net.users().iter().enumerate() {
            let r = net.user_range(i);
            let mean: f64 = r.clone().map(|a| x[a] * self.du[a]).sum::<f64>() / u.rate;
            for a in r {
                x[a] += self.drift[a] * self.dt + self.lambda[i] * x[a] * (self.du[a] - mean);
            }
        }
        floor_and_renormalize(net, x, self.floor);
        Ok(())
    }
}

pub(crate) fn floor_and_renormalize(net: &Network, x: &mut [f64], floor: f64) {
    for (i, u) in net.users().iter().enumerate() {
        let lo = floor * u.rate;
        let xi = &mut x[net.user_range(i)];
        for v in xi.iter_mut() {
            if v.is_nan() || *v < lo {
                *v = lo;
            }
        }
        let s: f64 = xi.iter().sum();
        if s != u.rate {
            let k = u.rate / s;
            xi.iter_mut().for_each(|v| *v *= k);
        }
    }
}

pub(crate) fn warn_if_coarse(net: &Network, cfg: &SimConfig, noise: &NoiseSpec) {
    let max_var = path_variance(net, noise).into_iter().fold(0.0, f64::max);
    let level = cfg.mean_rate(net) * max_var * cfg.dt;
    if level > 0.01 {
        warn!("step may be too coarse for the noise level: λ̄·max σ_α²·dt = {level:.3} > 0.01");
    }
}

/// Simulates the stochastic replicator dynamics on stream 0 of the
/// configured seed.
pub fn simulate_sde(
    net: &Network,
    x0: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
) -> Result<Trajectory> {
    simulate_sde_stream(net, x0, cfg, noise, 0)
}

/// Same as [`simulate_sde`] on an explicit stream of the configured seed.
pub fn simulate_sde_stream(
    net: &Network,
    x0: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
    stream: u64,
) -> Result<Trajectory> {
    cfg.validate(net)?;
    net.check_flow(x0)?;
    noise.validate(net.edge_count())?;
    warn_if_coarse(net, cfg, noise);
    let meta = TrajectoryMeta {
        kind: "replicator-sde".into(),
        scheme: "euler-maruyama".into(),
        dt: cfg.dt,
        horizon: cfg.horizon,
        lambda: cfg.lambda.clone(),
        seed: Some(cfg.seed),
        stream: Some(stream),
        rng: Some(rng::ALGORITHM.into()),
        noise: Some(noise.sigma.clone()),
        floor: Some(cfg.floor),
    };
    let mut traj = Trajectory::new(net, meta);
    let mut rng = rng::stream(cfg.seed, stream);
    let mut stepper = ReplicatorSde::new(net, noise, cfg.lambda.clone(), cfg.dt, cfg.floor);
    let mut x = x0.values().to_vec();
    traj.record(net, cfg, 0.0, &x);
    let n = cfg.steps();
    for k in 1..=n {
        if let Err(e) = stepper.step(&mut x, &mut rng) {
            traj.status = RunStatus::Aborted {
                time: (k - 1) as f64 * cfg.dt,
                reason: e.to_string(),
            };
            return Ok(traj);
        }
        if k % cfg.stride == 0 || k == n {
            traj.record(net, cfg, k as f64 * cfg.dt, &x);
        }
    }
    Ok(traj)
}
