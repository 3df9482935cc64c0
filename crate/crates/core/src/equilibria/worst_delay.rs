use serde::{Deserialize, Serialize};

use crate::latency::path_delays;
use crate::net::{Flow, Network};
use crate::Result;

/// Grid step `ρ_i / 60`.
pub const DEFAULT_GRID_DIVISIONS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstDelayCheck {
    pub pass: bool,
    /// Largest decrease of some user's worst delay over all probes.
    pub best_improvement: f64,
    /// User and deviation flow (that user's coordinates) achieving it.
    pub best_deviation: Option<(usize, Vec<f64>)>,
    pub probes: usize,
    /// Probes skipped because they overload an M/M/1 edge.
    pub skipped: usize,
}

/// Brute-force check of the worst-delay Nash condition: no user can lower
/// its slowest used delay by more than `tol` through a unilateral deviation
/// to a point of the grid `ρ_i/divisions · ℕ^{A_i}`.
pub fn verify_worst_delay_equilibrium(
    net: &Network,
    x: &Flow,
    divisions: usize,
    tol: f64,
) -> Result<WorstDelayCheck> {
    net.check_flow(x)?;
    let base = path_delays(net, x)?;
    let divisions = divisions.max(1);
    let mut check = WorstDelayCheck {
        pass: true,
        best_improvement: 0.0,
        best_deviation: None,
        probes: 0,
        skipped: 0,
    };
    let mut probe = x.clone();
    for (i, u) in net.users().iter().enumerate() {
        let k = net.user_range(i).len();
        let step = u.rate / divisions as f64;
        let mut counts = vec![0usize; k];
        counts[k - 1] = divisions;
        loop {
            {
                let xi = probe.user_mut(i);
                for (v, &c) in xi.iter_mut().zip(&counts) {
                    *v = c as f64 * step;
                }
            }
            check.probes += 1;
            match path_delays(net, &probe) {
                Ok(d) => {
                    let gain = base.worst[i] - d.worst[i];
                    if gain > check.best_improvement {
                        check.best_improvement = gain;
                        check.best_deviation = Some((i, probe.user(i).to_vec()));
                    }
                }
                Err(_) => check.skipped += 1,
            }
            if !next_composition(&mut counts) {
                break;
            }
        }
        probe.user_mut(i).copy_from_slice(x.user(i));
    }
    check.pass = check.best_improvement <= tol;
    Ok(check)
}

/// Steps through all compositions of a fixed total into `counts.len()`
/// nonnegative parts; returns false after the last one.
fn next_composition(counts: &mut [usize]) -> bool {
    let k = counts.len();
    if k < 2 {
        return false;
    }
    // find the rightmost position (excluding the last) that can be increased
    let tail = counts[k - 1];
    if tail > 0 {
        // move one unit from the last slot into slot k-2
        counts[k - 1] -= 1;
        counts[k - 2] += 1;
        return true;
    }
    // last slot empty: carry
    let mut j = k - 2;
    loop {
        if counts[j] > 0 && j > 0 {
            let v = counts[j];
            counts[j] = 0;
            counts[j - 1] += 1;
            counts[k - 1] = v - 1;
            return true;
        }
        if j == 0 {
            return false;
        }
        j -= 1;
    }
}
