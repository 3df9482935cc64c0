//! Frank–Wolfe minimization of the Rosenthal potential.
//!
//! Each iteration moves towards the all-or-nothing assignment that sends
//! every user's rate down its currently fastest path, with an exact line
//! search on the potential. Plain Frank–Wolfe converges sublinearly near
//! interior minimizers, so every iteration also performs one pairwise
//! equilibration step per user: mass moves from the slowest used path to the
//! fastest one, again with an exact line search. Both steps are descent
//! steps for the potential.

use std::time::Instant;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    classify_with, dimension::dimension_with, gap_from_costs, EquilibriumReport, Gap,
    DEFAULT_TOLERANCE,
};
use crate::latency::{
    aggregate_delay, edge_costs_into, loads_feasible, path_delays, potential_of_loads, CostModel,
};
use crate::net::{Flow, Network};
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

/// How the all-or-nothing direction picks among equally fast paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    LowestIndex,
    /// Uniformly among paths within a relative 1e-12 of the fastest.
    Seeded(u64),
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Target relative gap.
    pub tol: f64,
    pub max_iters: usize,
    pub tie_break: TieBreak,
    /// Pairwise equilibration after each Frank–Wolfe step.
    pub equilibrate: bool,
    /// Delay tolerance for classification of the result.
    pub classify_tol: f64,
    /// Compute classification, essence and Wardrop-set dimension.
    pub analyze: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iters: 20_000,
            tie_break: TieBreak::LowestIndex,
            equilibrate: true,
            classify_tol: DEFAULT_TOLERANCE,
            analyze: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Raw solver output with per-iteration history.
#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub flow: Flow,
    pub iterations: usize,
    pub gap: Gap,
    pub converged: bool,
    /// Potential after each iteration (entry 0 is the start).
    pub potentials: Vec<f64>,
    /// Relative gap at each evaluated iterate.
    pub gaps: Vec<f64>,
}

struct Workspace<'a> {
    net: &'a Network,
    model: CostModel,
    x: Vec<f64>,
    y: Vec<f64>,
    edge: Vec<f64>,
    path: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn refresh(&mut self) -> Result<()> {
        edge_costs_into(self.net, &self.y, self.model, &mut self.edge)?;
        self.path = self.net.path_sums(&self.edge);
        Ok(())
    }

    fn potential(&self) -> Result<f64> {
        potential_of_loads(self.net, &self.y, self.model)
    }

    /// Largest γ ≤ `cap` that keeps `y + γw` inside every latency domain,
    /// then the exact minimizer of the potential on `[0, that]` by bisection
    /// on the directional derivative.
    fn line_search(&self, w: &[f64], cap: f64) -> f64 {
        let mut hi = cap;
        for (e, (&yr, &wr)) in self.net.edges().iter().zip(self.y.iter().zip(w)) {
            if let Some(mu) = e.latency.capacity() {
                if wr > 0.0 {
                    let room = (mu - 2.0 * crate::latency::CAPACITY_GUARD - yr) / wr;
                    hi = hi.min(room.max(0.0));
                }
            }
        }
        let slope = |g: f64| -> f64 {
            self.net
                .edges()
                .iter()
                .enumerate()
                .filter(|&(r, _)| w[r] != 0.0)
                .map(|(r, e)| w[r] * self.model.cost(&e.latency, self.y[r] + g * w[r]))
                .sum()
        };
        if hi <= 0.0 || slope(0.0) >= 0.0 {
            return 0.0;
        }
        if slope(hi) <= 0.0 {
            return hi;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn argmin(cost: &[f64], r: std::ops::Range<usize>, tie: &mut Option<StreamRng>) -> usize {
    let best = cost[r.clone()]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    match tie {
        None => r.clone().find(|&a| cost[a] == best).unwrap_or(r.start),
        Some(rng) => {
            let slack = 1e-12 * best.abs().max(1.0);
            let ties: Vec<usize> = r.filter(|&a| cost[a] <= best + slack).collect();
            ties[rng.gen_range(0..ties.len())]
        }
    }
}

fn initial_flow(net: &Network, model: CostModel, tie: &mut Option<StreamRng>) -> Result<Vec<f64>> {
    let bg = net.background().to_vec();
    if loads_feasible(net, &bg) {
        let mut edge = vec![0.0; net.edge_count()];
        edge_costs_into(net, &bg, model, &mut edge)?;
        let cost = net.path_sums(&edge);
        let mut x = vec![0.0; net.path_count()];
        for (i, u) in net.users().iter().enumerate() {
            x[argmin(&cost, net.user_range(i), tie)] = u.rate;
        }
        if loads_feasible(net, &net.loads(&x)) {
            return Ok(x);
        }
    }
    let uniform = net.uniform_flow().into_values();
    if loads_feasible(net, &net.loads(&uniform)) {
        return Ok(uniform);
    }
    // exhaustive pure assignments, bounded
    let sizes: Vec<usize> = (0..net.user_count())
        .map(|i| net.user_range(i).len())
        .collect();
    let mut choice = vec![0usize; sizes.len()];
    for _ in 0..100_000 {
        let x = net.pure_flow(&choice)?.into_values();
        if loads_feasible(net, &net.loads(&x)) {
            return Ok(x);
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Err(Error::NoFeasibleStart);
            }
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
    Err(Error::NoFeasibleStart)
}

/// Minimizes the potential of `model` over Δ.
pub fn solve(
    net: &Network,
    model: CostModel,
    start: Option<&Flow>,
    opts: &SolverOptions,
) -> Result<SolveTrace> {
    if net.user_count() == 0 {
        let flow = Flow::from_parts(Vec::new(), vec![0])?;
        let phi = potential_of_loads(net, net.background(), model)?;
        return Ok(SolveTrace {
            flow,
            iterations: 0,
            gap: Gap {
                absolute: 0.0,
                relative: 0.0,
            },
            converged: true,
            potentials: vec![phi],
            gaps: vec![0.0],
        });
    }
    let mut tie = match opts.tie_break {
        TieBreak::LowestIndex => None,
        TieBreak::Seeded(s) => Some(rng::stream(s, 0)),
    };
    let x0 = match start {
        Some(f) => {
            net.check_flow(f)?;
            f.values().to_vec()
        }
        None => initial_flow(net, model, &mut tie)?,
    };
    let mut ws = Workspace {
        net,
        model,
        y: net.loads(&x0),
        x: x0,
        edge: vec![0.0; net.edge_count()],
        path: Vec::new(),
    };
    ws.refresh()?;

    let mut potentials = vec![ws.potential()?];
    let mut gaps = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut w = vec![0.0; net.edge_count()];

    loop {
        let gap = gap_from_costs(net, &ws.x, &ws.path);
        gaps.push(gap.relative);
        if best.as_ref().is_none_or(|b| gap.relative < b.0) {
            best = Some((gap.relative, ws.x.clone()));
        }
        if gap.relative <= opts.tol || iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        // Frank–Wolfe step towards the all-or-nothing assignment
        let mut d = vec![0.0; net.path_count()];
        for (i, u) in net.users().iter().enumerate() {
            let r = net.user_range(i);
            let target = argmin(&ws.path, r.clone(), &mut tie);
            for a in r {
                d[a] = -ws.x[a];
            }
            d[target] += u.rate;
        }
        w.iter_mut().for_each(|v| *v = 0.0);
        net.accumulate_loads(&d, &mut w);
        let gamma = ws.line_search(&w, 1.0);
        if gamma > 0.0 {
            for (xa, da) in ws.x.iter_mut().zip(&d) {
                *xa = (*xa + gamma * da).max(0.0);
            }
            ws.y = net.loads(&ws.x);
            ws.refresh()?;
        }

        if opts.equilibrate {
            for i in 0..net.user_count() {
                pairwise_step(&mut ws, i, &mut tie, &mut w)?;
            }
        }
        potentials.push(ws.potential()?);
    }

    let gap = gap_from_costs(net, &ws.x, &ws.path);
    let converged = gap.relative <= opts.tol;
    let (flow_values, gap) = if converged {
        (ws.x, gap)
    } else {
        let (_, xb) = best.expect("at least one iterate");
        let f = Flow::from_parts(xb.clone(), net.offsets().to_vec())?;
        let g = super::gap_with(net, &f, model)?;
        (xb, g)
    };
    debug!(
        "solver finished after {iterations} iterations, relative gap {:e}",
        gap.relative
    );
    Ok(SolveTrace {
        flow: Flow::from_parts(flow_values, net.offsets().to_vec())?,
        iterations,
        gap,
        converged,
        potentials,
        gaps,
    })
}

/// Moves traffic of user `i` from its slowest used path to its fastest.
fn pairwise_step(
    ws: &mut Workspace,
    i: usize,
    tie: &mut Option<StreamRng>,
    w: &mut [f64],
) -> Result<()> {
    let net = ws.net;
    let r = net.user_range(i);
    let to = argmin(&ws.path, r.clone(), tie);
    let from = r
        .filter(|&a| ws.x[a] > 0.0 && a != to)
        .max_by(|&a, &b| ws.path[a].total_cmp(&ws.path[b]));
    let Some(from) = from else {
        return Ok(());
    };
    if ws.path[from] <= ws.path[to] {
        return Ok(());
    }
    w.iter_mut().for_each(|v| *v = 0.0);
    for &e in net.path_edges(to) {
        w[e] += 1.0;
    }
    for &e in net.path_edges(from) {
        w[e] -= 1.0;
    }
    let available = ws.x[from];
    let t = ws.line_search(w, available);
    if t <= 0.0 {
        return Ok(());
    }
    if t >= available {
        ws.x[to] += available;
        ws.x[from] = 0.0;
    } else {
        ws.x[from] -= t;
        ws.x[to] += t;
    }
    ws.y = net.loads(&ws.x);
    ws.refresh()
}

fn build_report(
    net: &Network,
    model: CostModel,
    trace: &SolveTrace,
    opts: &SolverOptions,
    started: Instant,
) -> Result<EquilibriumReport> {
    let q = &trace.flow;
    let delays = path_delays(net, q)?;
    let mut report = EquilibriumReport {
        model,
        flow: q.clone(),
        path_names: (0..net.path_count()).map(|a| net.path_name(a)).collect(),
        loads: delays.loads.clone(),
        delays: delays.path,
        gap: trace.gap.absolute,
        relative_gap: trace.gap.relative,
        converged: trace.converged,
        classification: None,
        margins: None,
        aggregate_margin: None,
        essence: None,
        redundancy: net.redundancy().redundancy,
        wardrop_set_dimension: None,
        potential: potential_of_loads(net, &delays.loads, model)?,
        aggregate_delay: aggregate_delay(net, q)?,
        iterations: trace.iterations,
        solve_seconds: 0.0,
    };
    if opts.analyze && trace.converged {
        if let Ok(c) = classify_with(net, q, opts.classify_tol, model) {
            report.classification = Some(c.classification);
            report.margins = c.margins;
            report.aggregate_margin = c.aggregate_margin;
            report.essence = c.essence;
        }
        report.wardrop_set_dimension = dimension_with(net, q, opts.classify_tol, model).ok();
    }
    report.solve_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

fn finish(
    net: &Network,
    model: CostModel,
    start: Option<&Flow>,
    opts: &SolverOptions,
) -> Result<EquilibriumReport> {
    let started = Instant::now();
    let trace = solve(net, model, start, opts)?;
    let report = build_report(net, model, &trace, opts, started)?;
    if trace.converged {
        Ok(report)
    } else {
        Err(Error::NotConverged {
            iterations: trace.iterations,
            gap: trace.gap.relative,
            best: Box::new(report),
        })
    }
}

/// Wardrop equilibrium from the default starting assignment.
pub fn solve_wardrop(net: &Network, opts: &SolverOptions) -> Result<EquilibriumReport> {
    finish(net, CostModel::Latency, None, opts)
}

pub fn solve_wardrop_from(
    net: &Network,
    x0: &Flow,
    opts: &SolverOptions,
) -> Result<EquilibriumReport> {
    finish(net, CostModel::Latency, Some(x0), opts)
}

/// Minimizer of the aggregate delay: the Wardrop equilibrium of the
/// marginal latencies. Refuses when some marginal latency decreases on the
/// range of loads its edge can carry.
pub fn solve_social_optimum(net: &Network, opts: &SolverOptions) -> Result<EquilibriumReport> {
    for (r, e) in net.edges().iter().enumerate() {
        if !e.latency.marginal_is_nondecreasing(net.max_edge_load(r)) {
            return Err(Error::MarginalNotMonotone(e.id.clone()));
        }
    }
    finish(net, CostModel::Marginal, None, opts)
}
