use rand::Rng;
use serde_json::json;

use super::{classify_reference, min_latency_slope, Check, ExperimentReport};
use crate::equilibria::Classification;
use crate::generators::random_ray;
use crate::latency::adjoint_potential;
use crate::net::{Flow, Network};
use crate::{rng, Error, Result};

const LEMMA_TOLERANCE: f64 = 1e-9;

/// Samples rays `q + t z` (`z` towards a random point of Δ, `t ∈ [0, 1]`) and
/// checks the lower bound on the adjoint potential that applies to `q`:
/// `L_q(q+tz) ≥ ½ Σ_i Δω_i ‖z_i‖₁ t` (strict) or `≥ ½ m ‖Pz‖² t²` (interior).
pub fn check_adjoint_lemmas(
    net: &Network,
    q: &Flow,
    samples: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if samples == 0 {
        return Err(Error::OutOfRange("sample count must be at least 1".into()));
    }
    let class = classify_reference(net, q)?;
    let strict = class.classification == Classification::Strict;
    let margins = class.margins.clone().unwrap_or_default();
    let m = min_latency_slope(net);

    let mut rng = rng::stream(seed, 0);
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    let mut x = q.clone();
    for k in 0..samples {
        let z = random_ray(net, q, &mut rng);
        let t: f64 = if k == 0 {
            0.0
        } else {
            rng.gen_range(0.0..=1.0)
        };
        for (xa, (qa, za)) in x.values_mut().iter_mut().zip(q.values().iter().zip(&z)) {
            *xa = (qa + t * za).max(0.0);
        }
        let lhs = adjoint_potential(net, q, &x)?;
        let rhs = if strict {
            0.5 * t
                * margins
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d * z[net.user_range(i)].iter().map(|v| v.abs()).sum::<f64>())
                    .sum::<f64>()
        } else {
            let w = net.apply_indicator(&z);
            0.5 * m * w.iter().map(|v| v * v).sum::<f64>() * t * t
        };
        let margin = lhs - rhs;
        worst = worst.min(margin);
        if margin < -LEMMA_TOLERANCE {
            violations += 1;
        }
    }

    let mut report = ExperimentReport::new(
        "adjoint-lemmas",
        json!({
            "q": q.values(),
            "case": if strict { "strict" } else { "interior" },
            "samples": samples,
            "seed": seed,
            "rng": rng::ALGORITHM,
        }),
    );
    report.stat("violations", violations as f64);
    report.stat("worst_margin", worst);
    if strict {
        for (i, d) in margins.iter().enumerate() {
            report.bound(&format!("delta_omega[{i}]"), *d);
        }
    } else {
        report.bound("m", m);
    }
    report.push(Check::at_least(
        "worst_margin",
        worst,
        -LEMMA_TOLERANCE,
        0.0,
    ));
    Ok(report)
}
