use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde_json::json;

use super::{slow_learning_check, Check, ExperimentReport, DEFAULT_SLACK_SE};
use crate::dynamics::{ReplicatorSde, SimConfig};
use crate::equilibria::Classification;
use crate::latency::NoiseSpec;
use crate::net::{Flow, Network};
use crate::{rng, Error, Result};

/// Stream offset separating start-point draws from noise draws.
const START_STREAM: u64 = 1 << 40;

/// Fraction of replicates started at L¹ distance `start_radius` from the
/// strict equilibrium `q` that never leave the tube of radius
/// `10·start_radius` over `[0, cfg.horizon]` and end within
/// `start_radius/10`. Passes when the fraction reaches `target` within the
/// statistical slack.
pub fn stability_probability(
    net: &Network,
    q: &Flow,
    start_radius: f64,
    cfg: &SimConfig,
    noise: &NoiseSpec,
    replicates: usize,
    target: f64,
) -> Result<ExperimentReport> {
    cfg.validate(net)?;
    let slow = slow_learning_check(net, q, &cfg.lambda, noise)?;
    if slow.classification != Classification::Strict {
        return Err(Error::Precondition(
            "stochastic stability needs a strict equilibrium".into(),
        ));
    }
    let max_radius = 2.0 * net.total_rate();
    if !(start_radius > 0.0 && start_radius <= max_radius) {
        return Err(Error::OutOfRange(format!(
            "start radius must lie in (0, {max_radius}], got {start_radius}"
        )));
    }
    if replicates == 0 {
        return Err(Error::OutOfRange("replicates must be at least 1".into()));
    }
    let steps = cfg.steps();
    let outcomes: Vec<(bool, f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| {
            let mut start_rng = rng::stream(cfg.seed, START_STREAM + k);
            let mut x = start_on_sphere(net, q, start_radius, &mut start_rng);
            let mut rng = rng::stream(cfg.seed, k);
            let mut sde = ReplicatorSde::new(net, noise, cfg.lambda.clone(), cfg.dt, cfg.floor);
            let dist =
                |x: &[f64]| -> f64 { x.iter().zip(q.values()).map(|(a, b)| (a - b).abs()).sum() };
            let mut worst = dist(&x);
            for _ in 0..steps {
                sde.step(&mut x, &mut rng)?;
                worst = worst.max(dist(&x));
            }
            let end = dist(&x);
            let ok = worst <= 10.0 * start_radius && end <= start_radius / 10.0;
            Ok((ok, worst, end))
        })
        .collect::<Result<_>>()?;
    let n = replicates.max(1) as f64;
    let successes = outcomes.iter().filter(|o| o.0).count();
    let fraction = successes as f64 / n;
    let se = (fraction * (1.0 - fraction) / n).sqrt();
    let stayed = outcomes
        .iter()
        .filter(|o| o.1 <= 10.0 * start_radius)
        .count() as f64
        / n;

    let mut report = ExperimentReport::new(
        "stability",
        json!({
            "q": q.values(),
            "start_radius": start_radius,
            "tube_radius": 10.0 * start_radius,
            "end_radius": start_radius / 10.0,
            "horizon": cfg.horizon,
            "dt": cfg.dt,
            "lambda": cfg.lambda,
            "sigma": noise.sigma,
            "replicates": replicates,
            "seed": cfg.seed,
            "rng": rng::ALGORITHM,
        }),
    );
    report.stat("fraction", fraction);
    report.stat("se", se);
    report.stat("stayed_in_tube", stayed);
    report.bound("target", target);
    report.push(Check::at_least("success_fraction", fraction, target, 0.0));
    report.samples = outcomes.iter().map(|o| o.2).collect();
    Ok(report)
}

/// Runs [`stability_probability`] over a grid of start radii and checks that
/// the success fraction does not decrease as the radius shrinks, within
/// `DEFAULT_SLACK_SE` standard errors of each difference.
pub fn stability_by_radius(
    net: &Network,
    q: &Flow,
    radii: &[f64],
    cfg: &SimConfig,
    noise: &NoiseSpec,
    replicates: usize,
    target: f64,
) -> Result<ExperimentReport> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut report = ExperimentReport::new(
        "stability-by-radius",
        json!({ "radii": sorted, "replicates": replicates, "seed": cfg.seed }),
    );
    let mut prev: Option<(f64, f64)> = None;
    for &r in &sorted {
        let one = stability_probability(net, q, r, cfg, noise, replicates, target)?;
        let f = one.statistics["fraction"];
        let se = one.statistics["se"];
        report.stat(&format!("fraction[{r}]"), f);
        report.stat(&format!("se[{r}]"), se);
        if let Some((pf, pse)) = prev {
            let slack = DEFAULT_SLACK_SE * (se * se + pse * pse).sqrt();
            report.push(Check::at_least(&format!("monotone[{r}]"), f, pf, slack));
        }
        prev = Some((f, se));
    }
    Ok(report)
}

/// A random point at L¹ distance `radius` from `q`, on the segment from `q`
/// towards a random point of the face opposite `q`.
fn start_on_sphere<R: Rng + ?Sized>(net: &Network, q: &Flow, radius: f64, rng: &mut R) -> Vec<f64> {
    let qv = q.values();
    let mut xi = vec![0.0; qv.len()];
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        let mut s = 0.0;
        for a in r.clone() {
            if qv[a] <= 0.0 {
                let e: f64 = Exp1.sample(rng);
                xi[a] = e;
                s += e;
            }
        }
        for a in r {
            xi[a] *= u.rate / s;
        }
    }
    let d: f64 = xi.iter().zip(qv).map(|(a, b)| (a - b).abs()).sum();
    let t = radius / d;
    qv.iter().zip(&xi).map(|(a, b)| a + t * (b - a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    #[test]
    fn start_points_are_at_the_requested_distance() {
        let net = builtin::parallel2().network().unwrap();
        let q = net.flow(vec![1.0, 0.0]).unwrap();
        let mut r = rng::stream(1, 0);
        let x = start_on_sphere(&net, &q, 0.05, &mut r);
        assert!((x[0] - 0.975).abs() < 1e-15 && (x[1] - 0.025).abs() < 1e-15);
    }

    #[test]
    fn deterministic_runs_are_all_stable() {
        let net = builtin::parallel2().network().unwrap();
        let q = net.flow(vec![1.0, 0.0]).unwrap();
        let mut cfg = SimConfig::new(vec![0.1]);
        cfg.horizon = 100.0;
        let r = stability_probability(&net, &q, 0.05, &cfg, &NoiseSpec::zero(2), 10, 1.0).unwrap();
        assert_eq!(r.statistics["fraction"], 1.0);
        assert!(r.passed());
    }
}
