use rayon::prelude::*;
use serde_json::json;

use super::{mean_and_se, slow_learning_check, Check, ExperimentReport};
use crate::dynamics::{ReplicatorSde, SimConfig};
use crate::equilibria::Classification;
use crate::latency::{relative_entropy, NoiseSpec};
use crate::net::{Flow, Network};
use crate::{rng, Error, Result};

/// Bounds above this are reported as infinite.
const OVERFLOW_GUARD: f64 = 1e300;

/// Upper bound on the mean hitting time of the L¹ ball of radius δ around a
/// strict equilibrium: `(2H/Δω) · 2ρ/(δ(2ρ − δ))`.
pub fn hitting_time_bound(entropy: f64, delta_omega: f64, rho: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 2.0 * rho) {
        return Err(Error::OutOfRange(format!(
            "delta must lie in (0, 2rho) = (0, {}), got {delta}",
            2.0 * rho
        )));
    }
    if !(entropy.is_finite() && entropy >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "entropy must be finite and nonnegative, got {entropy}"
        )));
    }
    if delta_omega.is_nan() || delta_omega <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "delta_omega must be positive, got {delta_omega}"
        )));
    }
    let b = (2.0 * entropy / delta_omega) * (2.0 * rho / (delta * (2.0 * rho - delta)));
    Ok(if b.is_finite() && b <= OVERFLOW_GUARD {
        b
    } else {
        f64::INFINITY
    })
}

#[derive(Clone, Debug)]
pub struct HittingOptions {
    pub replicates: usize,
    /// Cap on each run, as a multiple of the theoretical bound.
    pub cap_factor: f64,
    /// Explicit cap overriding `cap_factor`.
    pub t_max: Option<f64>,
    /// Cap fraction above which the verdict is inconclusive.
    pub max_cap_fraction: f64,
    pub slack_se: f64,
}

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions {
            replicates: 500,
            cap_factor: 20.0,
            t_max: None,
            max_cap_fraction: 0.05,
            slack_se: 2.0,
        }
    }
}

/// Monte Carlo estimate of the mean first time the stochastic replicator
/// dynamics enter `K_δ = {x : ‖x − q‖₁ ≤ δ}`, replicate k using stream k of
/// `cfg.seed`.
pub fn estimate_hitting_time(
    net: &Network,
    q: &Flow,
    delta: f64,
    x0: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
    opts: &HittingOptions,
) -> Result<ExperimentReport> {
    cfg.validate(net)?;
    net.check_flow(x0)?;
    let slow = slow_learning_check(net, q, &cfg.lambda, noise)?;
    if slow.classification != Classification::Strict {
        return Err(Error::Precondition(
            "hitting times need a strict equilibrium".into(),
        ));
    }
    if !slow.pass {
        return Err(Error::Precondition(format!(
            "slow-learning condition fails: lambda_bar*sigma2 = {} >= delta_omega = {}",
            slow.value, slow.threshold
        )));
    }
    let entropy = relative_entropy(q, x0, &cfg.lambda);
    if !entropy.is_finite() {
        return Err(Error::SupportViolation);
    }
    let delta_omega = slow.delta_omega.expect("strict case");
    let bound = hitting_time_bound(entropy, delta_omega, slow.rho, delta)?;
    let t_max = opts.t_max.unwrap_or(opts.cap_factor * bound);
    if !t_max.is_finite() {
        return Err(Error::OutOfRange("hitting-time cap is infinite".into()));
    }
    if opts.replicates == 0 {
        return Err(Error::OutOfRange("replicates must be at least 1".into()));
    }
    let max_steps = (t_max / cfg.dt).ceil() as usize;

    let runs: Vec<Option<f64>> = (0..opts.replicates as u64)
        .into_par_iter()
        .map(|k| first_passage(net, q, delta, x0, cfg, noise, k, max_steps))
        .collect::<Result<_>>()?;
    let capped = runs.iter().filter(|r| r.is_none()).count();
    let samples: Vec<f64> = runs.iter().map(|r| r.unwrap_or(t_max)).collect();
    let (mean, se) = mean_and_se(&samples);
    let cap_fraction = capped as f64 / opts.replicates as f64;

    let mut report = ExperimentReport::new(
        "hitting-time",
        json!({
            "q": q.values(),
            "x0": x0.values(),
            "delta": delta,
            "lambda": cfg.lambda,
            "sigma": noise.sigma,
            "dt": cfg.dt,
            "replicates": opts.replicates,
            "seed": cfg.seed,
            "rng": rng::ALGORITHM,
            "t_max": t_max,
        }),
    );
    report.stat("mean", mean);
    report.stat("se", se);
    report.stat("cap_fraction", cap_fraction);
    report.stat("entropy", entropy);
    report.bound("hitting_time", bound);
    report.bound("delta_omega", delta_omega);
    report.bound("lambda_bar_sigma2", slow.value);
    let check = Check::at_most(
        "mean_hitting_time",
        mean,
        bound,
        opts.slack_se * se.max(0.0),
    );
    let check = if capped == opts.replicates {
        check.inconclusive("every replicate reached the cap")
    } else if cap_fraction > opts.max_cap_fraction {
        check.inconclusive(format!(
            "cap fraction {cap_fraction} exceeds {}",
            opts.max_cap_fraction
        ))
    } else {
        check
    };
    report.push(check);
    report.samples = samples;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn first_passage(
    net: &Network,
    q: &Flow,
    delta: f64,
    x0: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
    stream: u64,
    max_steps: usize,
) -> Result<Option<f64>> {
    let mut x = x0.values().to_vec();
    let dist = |x: &[f64]| -> f64 { x.iter().zip(q.values()).map(|(a, b)| (a - b).abs()).sum() };
    if dist(&x) <= delta {
        return Ok(Some(0.0));
    }
    let mut rng = rng::stream(cfg.seed, stream);
    let mut sde = ReplicatorSde::new(net, noise, cfg.lambda.clone(), cfg.dt, cfg.floor);
    for k in 1..=max_steps {
        sde.step(&mut x, &mut rng)?;
        if dist(&x) <= delta {
            return Ok(Some(k as f64 * cfg.dt));
        }
    }
    Ok(None)
}
