//! Monte Carlo and analytical checks of the stability, hitting-time and
//! recurrence results, and of the adjoint-potential inequalities.
//!
//! Every experiment returns an [`ExperimentReport`]: inputs, empirical
//! statistics, theoretical bounds and a list of [`Check`]s, each comparing
//! one empirical value against one bound.

mod hitting;
mod invariant;
mod lemmas;
mod stability;

pub use hitting::{estimate_hitting_time, hitting_time_bound, HittingOptions};
pub use invariant::{estimate_invariant_measure, theta_lambda, InvariantOptions};
pub use lemmas::check_adjoint_lemmas;
pub use stability::{stability_by_radius, stability_probability};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::equilibria::{classify_equilibrium, ClassReport, Classification, DEFAULT_TOLERANCE};
use crate::latency::NoiseSpec;
use crate::net::{essence, EssenceOptions, Flow, Network};
use crate::{Error, Result};

/// Default statistical slack, in standard errors.
pub const DEFAULT_SLACK_SE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// One comparison `empirical <relation> bound` with the slack it allows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: String,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// `empirical − slack ≤ bound`.
    pub fn at_most(name: &str, empirical: f64, bound: f64, slack: f64) -> Check {
        Check {
            name: name.into(),
            relation: "<=".into(),
            empirical,
            bound,
            slack,
            verdict: pass_if(empirical - slack <= bound),
            note: String::new(),
        }
    }

    /// `empirical + slack ≥ bound`.
    pub fn at_least(name: &str, empirical: f64, bound: f64, slack: f64) -> Check {
        Check {
            name: name.into(),
            relation: ">=".into(),
            empirical,
            bound,
            slack,
            verdict: pass_if(empirical + slack >= bound),
            note: String::new(),
        }
    }

    /// `empirical < bound`, no slack.
    pub fn below(name: &str, empirical: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            relation: "<".into(),
            empirical,
            bound,
            slack: 0.0,
            verdict: pass_if(empirical < bound),
            note: String::new(),
        }
    }

    pub fn inconclusive(mut self, note: impl Into<String>) -> Check {
        self.verdict = Verdict::Inconclusive;
        self.note = note.into();
        self
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub inputs: Value,
    pub statistics: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    /// Per-replicate raw values (hitting times, final distances, ...).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

impl ExperimentReport {
    pub fn new(kind: &str, inputs: Value) -> ExperimentReport {
        ExperimentReport {
            kind: kind.into(),
            inputs,
            statistics: BTreeMap::new(),
            bounds: BTreeMap::new(),
            checks: Vec::new(),
            verdict: Verdict::Pass,
            samples: Vec::new(),
        }
    }

    pub fn stat(&mut self, name: &str, value: f64) {
        self.statistics.insert(name.into(), value);
    }

    pub fn bound(&mut self, name: &str, value: f64) {
        self.bounds.insert(name.into(), value);
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.verdict = combine(&self.checks);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Writes `samples` as a one-column CSV with a `replicate` index.
    pub fn write_samples_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "replicate,value")?;
        for (k, v) in self.samples.iter().enumerate() {
            writeln!(w, "{k},{}", crate::io::format_float(*v))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn combine(checks: &[Check]) -> Verdict {
    if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if checks.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates of the slow-learning conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlowLearning {
    pub classification: Classification,
    /// ρ = Σ_i ρ_i.
    pub rho: f64,
    /// σ² = Σ_r σ_r².
    pub sigma2: f64,
    /// λ̄ = ρ⁻¹ Σ_i ρ_i λ_i.
    pub lambda_bar: f64,
    /// Strict case: Δω = ρ⁻¹ Σ_i ρ_i Δω_i.
    pub delta_omega: Option<f64>,
    /// Interior case: m = inf φ_r′ over the used edges.
    pub m: Option<f64>,
    /// Interior case: κ = ess(q).
    pub kappa: Option<f64>,
    /// Compared quantity: λ̄σ² (strict) or λ̄ (interior).
    pub value: f64,
    /// Threshold: Δω (strict) or (4/5) m ρ κ² / σ² (interior).
    pub threshold: f64,
    pub margin: f64,
    pub pass: bool,
}

impl SlowLearning {
    /// m ρ κ² / (λ̄ σ²), the ratio entering θ_λ (interior case only).
    pub fn recurrence_ratio(&self) -> Option<f64> {
        Some(self.m? * self.rho * self.kappa?.powi(2) / (self.lambda_bar * self.sigma2))
    }

    pub fn report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new(
            "slow-learning",
            serde_json::json!({ "classification": self.classification }),
        );
        r.stat("rho", self.rho);
        r.stat("sigma2", self.sigma2);
        r.stat("lambda_bar", self.lambda_bar);
        if let Some(d) = self.delta_omega {
            r.stat("delta_omega", d);
        }
        if let Some(m) = self.m {
            r.stat("m", m);
        }
        if let Some(k) = self.kappa {
            r.stat("kappa", k);
        }
        r.bound("threshold", self.threshold);
        r.stat("margin", self.margin);
        let name = match self.classification {
            Classification::Strict => "lambda_bar*sigma2 < delta_omega",
            _ => "lambda_bar < 0.8*m*rho*kappa^2/sigma2",
        };
        r.push(Check::below(name, self.value, self.threshold));
        r
    }
}

/// inf φ_r′ over the edges some path uses.
pub fn min_latency_slope(net: &Network) -> f64 {
    net.used_edges()
        .into_iter()
        .map(|r| net.edges()[r].latency.min_derivative(net.max_edge_load(r)))
        .fold(f64::INFINITY, f64::min)
}

fn classify_reference(net: &Network, q: &Flow) -> Result<ClassReport> {
    let class = classify_equilibrium(net, q, DEFAULT_TOLERANCE)?;
    match class.classification {
        Classification::Strict | Classification::Interior => Ok(class),
        other => Err(Error::Unclassifiable(format!("{other:?}"))),
    }
}

/// Evaluates the slow-learning condition that applies to `q`: λ̄σ² < Δω for a
/// strict equilibrium, λ̄ < (4/5) m ρ κ² / σ² for an interior one.
pub fn slow_learning_check(
    net: &Network,
    q: &Flow,
    lambda: &[f64],
    noise: &NoiseSpec,
) -> Result<SlowLearning> {
    noise.validate(net.edge_count())?;
    if lambda.len() != net.user_count() {
        return Err(Error::DimensionMismatch {
            expected: net.user_count(),
            got: lambda.len(),
        });
    }
    let class = classify_reference(net, q)?;
    let rho = net.total_rate();
    let sigma2 = noise.total_variance();
    let lambda_bar = net
        .users()
        .iter()
        .zip(lambda)
        .map(|(u, l)| u.rate * l)
        .sum::<f64>()
        / rho;
    let mut out = SlowLearning {
        classification: class.classification,
        rho,
        sigma2,
        lambda_bar,
        delta_omega: None,
        m: None,
        kappa: None,
        value: 0.0,
        threshold: 0.0,
        margin: 0.0,
        pass: false,
    };
    match class.classification {
        Classification::Strict => {
            let d = class.aggregate_margin.expect("strict flows carry margins");
            out.delta_omega = Some(d);
            out.value = lambda_bar * sigma2;
            out.threshold = d;
        }
        _ => {
            let m = min_latency_slope(net);
            let kappa = match class.essence {
                Some(k) => k,
                None => essence(net, q, &EssenceOptions::default())?.kappa,
            };
            out.m = Some(m);
            out.kappa = Some(kappa);
            out.value = lambda_bar;
            out.threshold = if sigma2 > 0.0 {
                0.8 * m * rho * kappa * kappa / sigma2
            } else {
                f64::INFINITY
            };
        }
    }
    out.margin = out.threshold - out.value;
    out.pass = out.value < out.threshold;
    Ok(out)
}
