use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;

use crate::latency::{path_delays_with, CostModel};
use crate::net::{Flow, Network};
use crate::{Error, Result};

/// Dimension of the set of Wardrop flows containing `q`.
///
/// All Wardrop flows share the loads y* of `q`, so they form the polytope
/// `{q + z : Pz = 0, Σ_α z_iα = 0, z = 0 off the fastest paths, q + z ≥ 0}`.
/// Its dimension is that of the null space above after removing the
/// coordinates that no feasible z can make positive; each candidate
/// coordinate is tested with one linear program.
pub fn wardrop_set_dimension(net: &Network, q: &Flow, tol: f64) -> Result<usize> {
    dimension_with(net, q, tol, CostModel::Latency)
}

pub(crate) fn dimension_with(net: &Network, q: &Flow, tol: f64, model: CostModel) -> Result<usize> {
    net.check_flow(q)?;
    let d = path_delays_with(net, q, model)?;
    let n = net.path_count();
    let x = q.values();

    let mut slow = Vec::new();
    for i in 0..net.user_count() {
        let r = net.user_range(i);
        let best = d.path[r.clone()]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        for a in r {
            let is_slow = d.path[a] > best + tol;
            if is_slow && net.is_supported(x, a) {
                return Err(Error::NotWardrop(format!(
                    "path {} is used but slower than the fastest path",
                    net.path_name(a)
                )));
            }
            if is_slow {
                slow.push(a);
            }
        }
    }

    let base = constraint_rows(net, &slow);
    let basis = null_space(&base, n);
    if basis.is_empty() {
        return Ok(0);
    }

    // coordinates sitting at zero that might be pushed into the interior
    let mut pinned = Vec::new();
    for a in 0..n {
        if slow.contains(&a) || net.is_supported(x, a) {
            continue;
        }
        if !can_increase(&basis, x, a, net)? {
            pinned.push(a);
        }
    }
    if pinned.is_empty() {
        return Ok(basis.len());
    }
    let mut all = slow;
    all.extend(pinned);
    Ok(null_space(&constraint_rows(net, &all), n).len())
}

/// Rows of `P`, the per-user sums and the unit rows of `fixed`.
fn constraint_rows(net: &Network, fixed: &[usize]) -> DMatrix<f64> {
    let n = net.path_count();
    let p = net.indicator();
    let rows = p.nrows() + net.user_count() + fixed.len();
    let mut m = DMatrix::zeros(rows, n);
    m.view_mut((0, 0), (p.nrows(), n)).copy_from(&p);
    for i in 0..net.user_count() {
        for a in net.user_range(i) {
            m[(p.nrows() + i, a)] = 1.0;
        }
    }
    for (k, &a) in fixed.iter().enumerate() {
        m[(p.nrows() + net.user_count() + k, a)] = 1.0;
    }
    m
}

fn null_space(m: &DMatrix<f64>, n: usize) -> Vec<Vec<f64>> {
    if n == 0 {
        return Vec::new();
    }
    crate::net::null_space(m)
}

/// Whether some z in span(basis) with x + z ≥ 0 has z_a > 0.
fn can_increase(basis: &[Vec<f64>], x: &[f64], a: usize, net: &Network) -> Result<bool> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = basis
        .iter()
        .map(|b| {
            let c = if b[a].abs() > 1e-13 { b[a] } else { 0.0 };
            lp.add_var(c, (f64::NEG_INFINITY, f64::INFINITY))
        })
        .collect();
    for k in 0..x.len() {
        let expr: Vec<_> = vars
            .iter()
            .zip(basis)
            .filter(|(_, b)| b[k].abs() > 1e-13)
            .map(|(&v, b)| (v, b[k]))
            .collect();
        if expr.is_empty() {
            continue;
        }
        let floor = if net.is_supported(x, k) { -x[k] } else { 0.0 };
        lp.add_constraint(expr.clone(), ComparisonOp::Ge, floor);
        lp.add_constraint(expr, ComparisonOp::Le, 1.0);
    }
    match lp.solve() {
        Ok(sol) => Ok(sol.objective() > 1e-9),
        Err(minilp::Error::Unbounded) => Ok(true),
        Err(minilp::Error::Infeasible) => Ok(false),
    }
}
