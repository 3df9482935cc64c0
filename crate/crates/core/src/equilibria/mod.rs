//! Wardrop equilibria, social optima and their certificates.
//!
//! Equilibria are minimizers of the Rosenthal potential over Δ; social
//! optima minimize the aggregate delay, which is the Rosenthal potential of
//! the marginal latencies. Both are computed by [`frank_wolfe`].

mod dimension;
mod frank_wolfe;
mod worst_delay;

pub use dimension::wardrop_set_dimension;
pub use frank_wolfe::{
    solve, solve_social_optimum, solve_wardrop, solve_wardrop_from, SolveTrace, SolverOptions,
    TieBreak,
};
pub use worst_delay::{verify_worst_delay_equilibrium, WorstDelayCheck, DEFAULT_GRID_DIVISIONS};

use serde::{Deserialize, Serialize};

use crate::latency::{path_delays_with, CostModel};
use crate::net::{essence, EssenceOptions, Flow, Network};
use crate::{Error, Result};

/// Tolerance on delay comparisons in [`verify_wardrop`] and
/// [`classify_equilibrium`] unless a caller chooses otherwise.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Interior,
    Strict,
    PureNonstrict,
    BoundaryMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub model: CostModel,
    pub flow: Flow,
    pub path_names: Vec<String>,
    /// y* (background included).
    pub loads: Vec<f64>,
    /// Path delays under the original latencies.
    pub delays: Vec<f64>,
    /// Absolute and relative gap under the solved cost model.
    pub gap: f64,
    pub relative_gap: f64,
    pub converged: bool,
    pub classification: Option<Classification>,
    /// Δω_i per user, strict equilibria only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<Vec<f64>>,
    /// Δω = ρ⁻¹ Σ_i ρ_i Δω_i, strict equilibria only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_margin: Option<f64>,
    /// ess(q), interior equilibria only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub essence: Option<f64>,
    pub redundancy: usize,
    pub wardrop_set_dimension: Option<usize>,
    /// Potential of the solved cost model at the flow.
    pub potential: f64,
    /// Σ_r y_r φ_r(y_r) under the original latencies.
    pub aggregate_delay: f64,
    pub iterations: usize,
    pub solve_seconds: f64,
}

/// Absolute gap Σ x_iα (c_iα − min_β c_iβ) and its ratio to Σ x_iα c_iα.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub absolute: f64,
    pub relative: f64,
}

pub fn wardrop_gap(net: &Network, x: &Flow) -> Result<Gap> {
    gap_with(net, x, CostModel::Latency)
}

pub fn gap_with(net: &Network, x: &Flow, model: CostModel) -> Result<Gap> {
    let d = path_delays_with(net, x, model)?;
    Ok(gap_from_costs(net, x.values(), &d.path))
}

pub(crate) fn gap_from_costs(net: &Network, x: &[f64], cost: &[f64]) -> Gap {
    let mut absolute = 0.0;
    let mut total = 0.0;
    for i in 0..net.user_count() {
        let r = net.user_range(i);
        let best = cost[r.clone()]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        for a in r {
            absolute += x[a] * (cost[a] - best);
            total += x[a] * cost[a];
        }
    }
    let relative = if total > 0.0 {
        absolute / total
    } else {
        absolute
    };
    Gap { absolute, relative }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub user: usize,
    /// Global index of the supported, slower path.
    pub path: usize,
    /// Global index of the user's fastest path.
    pub faster: usize,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WardropCheck {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

/// Checks that every supported path is within `tol` of its user's fastest
/// path.
pub fn verify_wardrop(net: &Network, x: &Flow, tol: f64) -> Result<WardropCheck> {
    verify_with(net, x, tol, CostModel::Latency)
}

pub(crate) fn verify_with(
    net: &Network,
    x: &Flow,
    tol: f64,
    model: CostModel,
) -> Result<WardropCheck> {
    net.check_flow(x)?;
    let d = path_delays_with(net, x, model)?;
    let mut violations = Vec::new();
    for i in 0..net.user_count() {
        let r = net.user_range(i);
        let faster = fastest(&d.path, r.clone());
        for a in r {
            let margin = d.path[a] - d.path[faster];
            if net.is_supported(x.values(), a) && margin > tol {
                violations.push(Violation {
                    user: i,
                    path: a,
                    faster,
                    margin,
                });
            }
        }
    }
    Ok(WardropCheck {
        pass: violations.is_empty(),
        violations,
    })
}

fn fastest(cost: &[f64], r: std::ops::Range<usize>) -> usize {
    let mut best = r.start;
    for a in r {
        if cost[a] < cost[best] {
            best = a;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classification: Classification,
    pub margins: Option<Vec<f64>>,
    pub aggregate_margin: Option<f64>,
    pub essence: Option<f64>,
}

/// Classifies a Wardrop flow as interior, strict, pure-nonstrict or
/// boundary-mixed.
pub fn classify_equilibrium(net: &Network, q: &Flow, tol: f64) -> Result<ClassReport> {
    classify_with(net, q, tol, CostModel::Latency)
}

pub(crate) fn classify_with(
    net: &Network,
    q: &Flow,
    tol: f64,
    model: CostModel,
) -> Result<ClassReport> {
    let check = verify_with(net, q, tol, model)?;
    if let Some(v) = check.violations.first() {
        return Err(Error::NotWardrop(format!(
            "path {} is slower than path {} by {}",
            net.path_name(v.path),
            net.path_name(v.faster),
            v.margin
        )));
    }
    let x = q.values();
    let supported: Vec<Vec<usize>> = (0..net.user_count())
        .map(|i| {
            net.user_range(i)
                .filter(|&a| net.is_supported(x, a))
                .collect()
        })
        .collect();

    if (0..net.path_count()).all(|a| net.is_supported(x, a)) {
        let kappa = if q.is_interior() {
            Some(essence(net, q, &EssenceOptions::default())?.kappa)
        } else {
            None
        };
        return Ok(ClassReport {
            classification: Classification::Interior,
            margins: None,
            aggregate_margin: None,
            essence: kappa,
        });
    }
    if supported.iter().all(|s| s.len() == 1) {
        let d = path_delays_with(net, q, model)?;
        let margins: Vec<f64> = supported
            .iter()
            .enumerate()
            .map(|(i, s)| {
                net.user_range(i)
                    .filter(|&b| b != s[0])
                    .map(|b| d.path[b] - d.path[s[0]])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        if margins.iter().all(|&m| m > tol) {
            let rho = net.total_rate();
            let aggregate = net
                .users()
                .iter()
                .zip(&margins)
                .map(|(u, m)| u.rate * m)
                .sum::<f64>()
                / rho;
            return Ok(ClassReport {
                classification: Classification::Strict,
                margins: Some(margins),
                aggregate_margin: Some(aggregate),
                essence: None,
            });
        }
        return Ok(ClassReport {
            classification: Classification::PureNonstrict,
            margins: None,
            aggregate_margin: None,
            essence: None,
        });
    }
    Ok(ClassReport {
        classification: Classification::BoundaryMixed,
        margins: None,
        aggregate_margin: None,
        essence: None,
    })
}
