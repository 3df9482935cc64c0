use super::{
    renormalize, Dynamics, Evaluator, OdeScheme, RunStatus, SimConfig, Trajectory, TrajectoryMeta,
};
use crate::net::{Flow, Network};
use crate::Result;

/// Coordinates below this after a step trigger step halving.
const NEGATIVE_TOLERANCE: f64 = 1e-12;
const MAX_HALVINGS: u32 = 40;

/// Fixed-step integrator for the replicator or BNN field.
pub struct OdeStepper<'a> {
    eval: Evaluator<'a>,
    dynamics: Dynamics,
    scheme: OdeScheme,
    lambda: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> OdeStepper<'a> {
    pub fn new(net: &'a Network, dynamics: Dynamics, scheme: OdeScheme, lambda: Vec<f64>) -> Self {
        let n = net.path_count();
        OdeStepper {
            eval: Evaluator::new(net),
            dynamics,
            scheme,
            lambda,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn field(&mut self, x: &[f64], slot: usize) -> Result<()> {
        let mut out = std::mem::take(&mut self.k[slot]);
        let r = match self.dynamics {
            Dynamics::Replicator => self.eval.replicator(x, &self.lambda, &mut out),
            Dynamics::Bnn => self.eval.bnn(x, &self.lambda, &mut out),
        };
        self.k[slot] = out;
        r
    }

    fn raw_step(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        match self.scheme {
            OdeScheme::Euler => {
                self.field(x, 0)?;
                axpy(out, x, h, &self.k[0]);
            }
            OdeScheme::Rk4 => {
                self.field(x, 0)?;
                axpy(&mut self.tmp, x, 0.5 * h, &self.k[0]);
                let tmp = std::mem::take(&mut self.tmp);
                let r = self.field(&tmp, 1);
                self.tmp = tmp;
                r?;
                axpy(&mut self.tmp, x, 0.5 * h, &self.k[1]);
                let tmp = std::mem::take(&mut self.tmp);
                let r = self.field(&tmp, 2);
                self.tmp = tmp;
                r?;
                axpy(&mut self.tmp, x, h, &self.k[2]);
                let tmp = std::mem::take(&mut self.tmp);
                let r = self.field(&tmp, 3);
                self.tmp = tmp;
                r?;
                let [k0, k1, k2, k3] = &self.k;
                for (a, o) in out.iter_mut().enumerate() {
                    *o = x[a] + h / 6.0 * (k0[a] + 2.0 * k1[a] + 2.0 * k2[a] + k3[a]);
                }
            }
        }
        Ok(())
    }

    /// Advances `x` by `h`. A step that leaves Δ by more than 1e-12 (or
    /// leaves a latency domain) is retried as two half steps; small
    /// negative coordinates are clamped to zero and every user is rescaled
    /// to its rate.
    pub fn step(&mut self, x: &mut [f64], h: f64) -> Result<()> {
        self.step_depth(x, h, 0)
    }

    fn step_depth(&mut self, x: &mut [f64], h: f64, depth: u32) -> Result<()> {
        let mut next = vec![0.0; x.len()];
        let outcome = self.raw_step(x, h, &mut next);
        let bad = match &outcome {
            Ok(()) => next
                .iter()
                .any(|&v| v < -NEGATIVE_TOLERANCE || !v.is_finite()),
            Err(_) => true,
        };
        if bad && depth < MAX_HALVINGS {
            self.step_depth(x, 0.5 * h, depth + 1)?;
            return self.step_depth(x, 0.5 * h, depth + 1);
        }
        outcome?;
        for v in next.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        renormalize(self.eval.net, &mut next);
        x.copy_from_slice(&next);
        Ok(())
    }
}

/// Integrates the chosen field from `x0` over `[0, horizon]`. A fatal step
/// error ends the run early with an `Aborted` status.
pub fn integrate_ode(
    net: &Network,
    x0: &Flow,
    cfg: &SimConfig,
    dynamics: Dynamics,
) -> Result<Trajectory> {
    cfg.validate(net)?;
    net.check_flow(x0)?;
    let meta = TrajectoryMeta {
        kind: match dynamics {
            Dynamics::Replicator => "replicator",
            Dynamics::Bnn => "bnn",
        }
        .into(),
        scheme: match cfg.scheme {
            OdeScheme::Rk4 => "rk4",
            OdeScheme::Euler => "euler",
        }
        .into(),
        dt: cfg.dt,
        horizon: cfg.horizon,
        lambda: cfg.lambda.clone(),
        seed: None,
        stream: None,
        rng: None,
        noise: None,
        floor: None,
    };
    let mut traj = Trajectory::new(net, meta);
    let mut stepper = OdeStepper::new(net, dynamics, cfg.scheme, cfg.lambda.clone());
    let mut x = x0.values().to_vec();
    traj.record(net, cfg, 0.0, &x);
    let n = cfg.steps();
    for k in 1..=n {
        if let Err(e) = stepper.step(&mut x, cfg.dt) {
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

/// `out = x + h·k`.
fn axpy(out: &mut [f64], x: &[f64], h: f64, k: &[f64]) {
    for ((o, xa), ka) in out.iter_mut().zip(x).zip(k) {
        *o = xa + h * ka;
    }
}
