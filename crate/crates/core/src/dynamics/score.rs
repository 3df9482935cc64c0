use super::noise::increments_into;
use super::sde::warn_if_coarse;
use super::{Evaluator, RunStatus, SimConfig, Trajectory, TrajectoryMeta};
use crate::latency::NoiseSpec;
use crate::net::{Flow, Network};
use crate::{rng, Error, Result};

/// Cumulative path scores V_iα and the flow they induce,
/// `X_iα = ρ_i exp(λ_i V_iα) / Σ_β exp(λ_i V_iβ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreState {
    pub scores: Vec<f64>,
}

impl ScoreState {
    /// Scores reproducing an interior flow: `V_iα = λ_i⁻¹ log(x_iα/ρ_i)`.
    pub fn from_flow(net: &Network, x: &Flow, lambda: &[f64]) -> Result<ScoreState> {
        net.check_flow(x)?;
        if let Some(index) = x.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::NotInterior {
                index,
                value: x.values()[index],
            });
        }
        let mut scores = vec![0.0; net.path_count()];
        for (i, u) in net.users().iter().enumerate() {
            for a in net.user_range(i) {
                scores[a] = (x.values()[a] / u.rate).ln() / lambda[i];
            }
        }
        Ok(ScoreState { scores })
    }

    /// Writes the induced flow into `out` (max-subtracted softmax).
    pub fn flow_into(&self, net: &Network, lambda: &[f64], out: &mut [f64]) {
        for (i, u) in net.users().iter().enumerate() {
            let r = net.user_range(i);
            let top = r
                .clone()
                .map(|a| lambda[i] * self.scores[a])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for a in r.clone() {
                out[a] = (lambda[i] * self.scores[a] - top).exp();
                total += out[a];
            }
            for a in r {
                out[a] *= u.rate / total;
            }
        }
    }

    pub fn flow(&self, net: &Network, lambda: &[f64]) -> Flow {
        let mut v = vec![0.0; net.path_count()];
        self.flow_into(net, lambda, &mut v);
        Flow::from_parts_unchecked(v, net.offsets().to_vec())
    }
}

/// Exponential learning: Euler–Maruyama on `dV_iα = −ω_iα(X) dt + dU_iα`
/// with X recovered from the scores after every step.
pub fn simulate_exponential_learning(
    net: &Network,
    x0: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
) -> Result<Trajectory> {
    cfg.validate(net)?;
    noise.validate(net.edge_count())?;
    let mut state = ScoreState::from_flow(net, x0, &cfg.lambda)?;
    warn_if_coarse(net, cfg, noise);
    let meta = TrajectoryMeta {
        kind: "exponential-learning".into(),
        scheme: "euler-maruyama".into(),
        dt: cfg.dt,
        horizon: cfg.horizon,
        lambda: cfg.lambda.clone(),
        seed: Some(cfg.seed),
        stream: Some(0),
        rng: Some(rng::ALGORITHM.into()),
        noise: Some(noise.sigma.clone()),
        floor: None,
    };
    let mut traj = Trajectory::new(net, meta);
    let mut rng = rng::stream(cfg.seed, 0);
    let mut eval = Evaluator::new(net);
    let mut dw = vec![0.0; net.edge_count()];
    let mut du = vec![0.0; net.path_count()];
    let sqrt_dt = cfg.dt.sqrt();
    let mut x = x0.values().to_vec();
    traj.record(net, cfg, 0.0, &x);
    let n = cfg.steps();
    for k in 1..=n {
        if let Err(e) = eval.eval(&x) {
            traj.status = RunStatus::Aborted {
                time: (k - 1) as f64 * cfg.dt,
                reason: e.to_string(),
            };
            return Ok(traj);
        }
        increments_into(net, noise, sqrt_dt, &mut rng, &mut dw, &mut du);
        for ((s, c), d) in state.scores.iter_mut().zip(&eval.path).zip(&du) {
            *s += -c * cfg.dt + d;
        }
        state.flow_into(net, &cfg.lambda, &mut x);
        if k % cfg.stride == 0 || k == n {
            traj.record(net, cfg, k as f64 * cfg.dt, &x);
        }
    }
    Ok(traj)
}
