use serde_json::json;

use super::{mean_and_se, slow_learning_check, Check, ExperimentReport, DEFAULT_SLACK_SE};
use crate::dynamics::{ReplicatorSde, SimConfig};
use crate::equilibria::Classification;
use crate::latency::NoiseSpec;
use crate::net::{Flow, Network};
use crate::{rng, Error, Result};

/// Concentration radius θ_λ = ½ (m ρ κ² / (λ̄ σ²) − 1)^{-1/2} of the time
/// averages of Θ_q².
pub fn theta_lambda(m: f64, rho: f64, kappa: f64, lambda_bar: f64, sigma2: f64) -> Result<f64> {
    let ratio = m * rho * kappa * kappa / (lambda_bar * sigma2);
    if ratio.is_nan() || ratio <= 1.0 {
        return Err(Error::Precondition(format!(
            "recurrence condition m*rho*kappa^2/(lambda*sigma^2) > 1 unmet (ratio {ratio})"
        )));
    }
    Ok(0.5 / (ratio - 1.0).sqrt())
}

#[derive(Clone, Debug)]
pub struct InvariantOptions {
    /// Time discarded before recording.
    pub burn_in: f64,
    pub theta_grid: Vec<f64>,
    /// Batches for batch-means standard errors.
    pub batches: usize,
    /// Running averages of Θ² are reported at this many evenly spaced times.
    pub checkpoints: usize,
    pub slack_se: f64,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions {
            burn_in: 100.0,
            theta_grid: vec![0.25, 0.5, 0.75, 1.0],
            batches: 20,
            checkpoints: 10,
            slack_se: DEFAULT_SLACK_SE,
        }
    }
}

/// Follows one long stochastic trajectory on `[0, cfg.horizon]` and, after the
/// burn-in, records the occupancy of the projective balls
/// `B_θ = {Θ_q(x) ≤ θ}` and the time average of Θ_q².
pub fn estimate_invariant_measure(
    net: &Network,
    q: &Flow,
    cfg: &SimConfig,
    noise: &NoiseSpec,
    opts: &InvariantOptions,
) -> Result<ExperimentReport> {
    cfg.validate(net)?;
    if net.redundancy().is_reducible() {
        return Err(Error::Reducible(net.redundancy().redundancy));
    }
    let slow = slow_learning_check(net, q, &cfg.lambda, noise)?;
    if slow.classification != Classification::Interior || !q.is_interior() {
        return Err(Error::Precondition(
            "invariant measure needs an interior equilibrium".into(),
        ));
    }
    if !slow.pass {
        return Err(Error::Precondition(format!(
            "slow-learning condition fails: lambda_bar = {} >= {}",
            slow.value, slow.threshold
        )));
    }
    let (m, kappa) = (slow.m.expect("interior"), slow.kappa.expect("interior"));
    let theta_l = theta_lambda(m, slow.rho, kappa, slow.lambda_bar, slow.sigma2)?;

    let mut grid = opts.theta_grid.clone();
    grid.sort_by(f64::total_cmp);
    let burn = (opts.burn_in / cfg.dt).round() as usize;
    let total = cfg.steps();
    if burn >= total {
        return Err(Error::OutOfRange(format!(
            "burn-in {} must be shorter than the horizon {}",
            opts.burn_in, cfg.horizon
        )));
    }
    let recorded = total - burn;
    let batches = opts.batches.clamp(1, recorded);
    let checkpoints = opts.checkpoints.clamp(1, recorded);

    let qv = q.values();
    let theta_of = |x: &[f64]| -> f64 {
        x.iter()
            .zip(qv)
            .map(|(a, b)| 1.0 - a / b)
            .fold(0.0, f64::max)
            .min(1.0)
    };

    let mut rng = rng::stream(cfg.seed, 0);
    let mut sde = ReplicatorSde::new(net, noise, cfg.lambda.clone(), cfg.dt, cfg.floor);
    let mut x = q.values().to_vec();
    for _ in 0..burn {
        sde.step(&mut x, &mut rng)?;
    }

    let mut batch_sq = vec![0.0; batches];
    let mut batch_hits = vec![vec![0usize; grid.len()]; batches];
    let mut batch_len = vec![0usize; batches];
    let mut sum_sq = 0.0;
    let mut hits = vec![0usize; grid.len()];
    let mut running = Vec::with_capacity(checkpoints);
    let mut next_checkpoint = 1;
    for k in 0..recorded {
        sde.step(&mut x, &mut rng)?;
        let th = theta_of(&x);
        let b = k * batches / recorded;
        batch_sq[b] += th * th;
        batch_len[b] += 1;
        sum_sq += th * th;
        for (g, &level) in grid.iter().enumerate() {
            if th <= level {
                hits[g] += 1;
                batch_hits[b][g] += 1;
            }
        }
        if (k + 1) * checkpoints >= next_checkpoint * recorded {
            let t = (burn + k + 1) as f64 * cfg.dt;
            running.push((t, sum_sq / (k + 1) as f64));
            next_checkpoint += 1;
        }
    }

    let mean_sq = sum_sq / recorded as f64;
    let sq_means: Vec<f64> = (0..batches)
        .map(|b| batch_sq[b] / batch_len[b] as f64)
        .collect();
    let (_, se_sq) = mean_and_se(&sq_means);

    let mut report = ExperimentReport::new(
        "invariant-measure",
        json!({
            "q": q.values(),
            "lambda": cfg.lambda,
            "sigma": noise.sigma,
            "dt": cfg.dt,
            "horizon": cfg.horizon,
            "burn_in": opts.burn_in,
            "theta_grid": grid,
            "batches": batches,
            "seed": cfg.seed,
            "rng": rng::ALGORITHM,
        }),
    );
    report.stat("time_average_theta2", mean_sq);
    report.stat("time_average_theta2_se", se_sq);
    for (t, avg) in &running {
        report.stat(&format!("running_theta2[t={t}]"), *avg);
    }
    report.bound("theta_lambda", theta_l);
    report.bound("theta_lambda2", theta_l * theta_l);
    report.bound("m", m);
    report.bound("kappa", kappa);
    report.bound(
        "recurrence_ratio",
        slow.recurrence_ratio().unwrap_or(f64::NAN),
    );
    report.push(Check::at_most(
        "time_average_theta2",
        mean_sq,
        theta_l * theta_l,
        opts.slack_se * se_sq,
    ));

    let mut previous = 0.0;
    let mut monotone = true;
    for (g, &level) in grid.iter().enumerate() {
        let occupancy = hits[g] as f64 / recorded as f64;
        monotone &= occupancy >= previous;
        previous = occupancy;
        let per_batch: Vec<f64> = (0..batches)
            .map(|b| batch_hits[b][g] as f64 / batch_len[b] as f64)
            .collect();
        let (_, se) = mean_and_se(&per_batch);
        report.stat(&format!("occupancy[{level}]"), occupancy);
        report.stat(&format!("occupancy_se[{level}]"), se);
        if level > theta_l {
            let lower = 1.0 - theta_l * theta_l / (level * level);
            report.bound(&format!("occupancy[{level}]"), lower);
            report.push(Check::at_least(
                &format!("occupancy[{level}]"),
                occupancy,
                lower,
                opts.slack_se * se,
            ));
        }
    }
    report.push(Check::at_least(
        "occupancy_monotone",
        if monotone { 1.0 } else { 0.0 },
        1.0,
        0.0,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    #[test]
    fn theta_lambda_by_substitution() {
        // ratio 5 → θ_λ = 1/4
        assert_eq!(theta_lambda(1.0, 1.0, 1.0, 0.4, 0.5).unwrap(), 0.25);
        assert_eq!(theta_lambda(1.0, 1.0, 1.0, 0.0, 0.5).unwrap(), 0.0);
        assert!(theta_lambda(1.0, 1.0, 1.0, 2.0, 0.5).is_err());
        assert!(theta_lambda(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reducible_networks_are_refused() {
        let net = builtin::fig1b().network().unwrap();
        let q = net.uniform_flow();
        let cfg = SimConfig::new(vec![0.1; 3]);
        assert!(matches!(
            estimate_invariant_measure(
                &net,
                &q,
                &cfg,
                &NoiseSpec::uniform(5, 0.1),
                &Default::default()
            ),
            Err(Error::Reducible(1))
        ));
    }

    #[test]
    fn whole_simplex_has_full_occupancy() {
        let net = builtin::parallel_affine(1.0, &[(1.0, 0.0), (1.0, 0.0)])
            .network()
            .unwrap();
        let q = net.flow(vec![0.5, 0.5]).unwrap();
        let mut cfg = SimConfig::new(vec![0.5]);
        cfg.horizon = 60.0;
        let opts = InvariantOptions {
            burn_in: 10.0,
            ..Default::default()
        };
        let r =
            estimate_invariant_measure(&net, &q, &cfg, &NoiseSpec::uniform(2, 0.3), &opts).unwrap();
        assert_eq!(r.statistics["occupancy[1]"], 1.0);
        assert_eq!(
            r.check("occupancy_monotone").unwrap().verdict,
            super::super::Verdict::Pass
        );
    }
}
