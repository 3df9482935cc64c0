//! Projective distance and essence around an interior reference flow.
//!
//! Every `x ∈ Δ` can be written uniquely as `x = q + θz` with `θ ∈ [0, 1]`
//! and `q + z` on the boundary of Δ. `θ` is the projective distance
//! `Θ_q(x)`; it works out to `max_k (1 − x_k/q_k)`.
//!
//! The essence `ess(q) = ρ⁻¹ min{‖P z‖ : q + z ∈ ∂Δ}` is found facet by
//! facet: on the facet `{x_k = 0}` the problem is a convex quadratic program
//! over a product of simplices, solved by projected gradient descent.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{Flow, Network};
use crate::{rng, Error, Result};

pub fn projective_distance(q: &Flow, x: &Flow) -> Result<f64> {
    check_interior(q)?;
    if q.offsets() != x.offsets() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            got: x.len(),
        });
    }
    let theta = q
        .values()
        .iter()
        .zip(x.values())
        .map(|(qk, xk)| 1.0 - xk / qk)
        .fold(0.0, f64::max);
    Ok(theta.clamp(0.0, 1.0))
}

pub(crate) fn check_interior(q: &Flow) -> Result<()> {
    match q.values().iter().position(|&v| v.is_nan() || v <= 0.0) {
        Some(index) => Err(Error::NotInterior {
            index,
            value: q.values()[index],
        }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug)]
pub struct EssenceOptions {
    pub restarts: usize,
    /// Stop when the projected-gradient step norm falls below this.
    pub gradient_tolerance: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EssenceOptions {
    fn default() -> Self {
        EssenceOptions {
            restarts: 5,
            gradient_tolerance: 1e-10,
            max_iters: 200_000,
            seed: 0x0e55_e2ce,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssenceResult {
    pub kappa: f64,
    /// Global path index k of the minimizing facet `{x_k = 0}`.
    pub facet: usize,
    /// Minimizing boundary displacement z (path coordinates).
    pub direction: Vec<f64>,
}

pub fn essence(net: &Network, q: &Flow, opts: &EssenceOptions) -> Result<EssenceResult> {
    net.check_flow(q)?;
    check_interior(q)?;
    let rho = net.total_rate();

    if let Some(k) = net.redundancy().kernel_paths.first() {
        // a null direction scaled out to the boundary has zero load change
        let (facet, step) = ray_exit(q.values(), k)
            .or_else(|| {
                let neg: Vec<f64> = k.iter().map(|v| -v).collect();
                ray_exit(q.values(), &neg).map(|(f, s)| (f, -s))
            })
            .expect("nonzero tangent direction leaves the simplex");
        return Ok(EssenceResult {
            kappa: 0.0,
            facet,
            direction: k.iter().map(|v| v * step).collect(),
        });
    }

    let p = net.indicator();
    let gram = p.transpose() * &p;
    let lipschitz = 2.0 * gram.clone().symmetric_eigen().eigenvalues.max().max(1e-300);
    let step = 1.0 / lipschitz;

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for facet in 0..net.path_count() {
        let mut rng = rng::stream(opts.seed, facet as u64);
        for _ in 0..opts.restarts.max(1) {
            let x0 = random_facet_point(net, facet, &mut rng);
            let (value, x) = minimize_on_facet(net, &gram, q.values(), facet, x0, step, opts);
            if best.as_ref().is_none_or(|b| value < b.0) {
                let z = x.iter().zip(q.values()).map(|(a, b)| a - b).collect();
                best = Some((value, facet, z));
            }
        }
    }
    let (value, facet, direction) = best
        .ok_or_else(|| Error::Precondition("essence needs at least one strategic user".into()))?;
    Ok(EssenceResult {
        kappa: value.max(0.0).sqrt() / rho,
        facet,
        direction,
    })
}

/// First coordinate hit by the ray `q + t·d`, and the hitting time.
fn ray_exit(q: &[f64], d: &[f64]) -> Option<(usize, f64)> {
    q.iter()
        .zip(d)
        .enumerate()
        .filter(|(_, (_, &dk))| dk < 0.0)
        .map(|(k, (&qk, &dk))| (k, qk / -dk))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn random_facet_point(net: &Network, facet: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut x = vec![0.0; net.path_count()];
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        let mut total = 0.0;
        for a in r.clone() {
            if a != facet {
                let e: f64 = rng.sample(Exp1);
                x[a] = e;
                total += e;
            }
        }
        for a in r {
            x[a] *= u.rate / total;
        }
    }
    x
}

fn minimize_on_facet(
    net: &Network,
    gram: &DMatrix<f64>,
    q: &[f64],
    facet: usize,
    mut x: Vec<f64>,
    step: f64,
    opts: &EssenceOptions,
) -> (f64, Vec<f64>) {
    let n = x.len();
    let objective = |x: &[f64]| {
        let z: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
        net.apply_indicator(&z).iter().map(|w| w * w).sum::<f64>()
    };
    let mut grad = vec![0.0; n];
    for _ in 0..opts.max_iters {
        // ∇‖P(x − q)‖² = 2 PᵀP (x − q)
        for a in 0..n {
            grad[a] = 2.0 * (0..n).map(|b| gram[(a, b)] * (x[b] - q[b])).sum::<f64>();
        }
        let mut next: Vec<f64> = x.iter().zip(&grad).map(|(v, g)| v - step * g).collect();
        project_onto_facet(net, facet, &mut next);
        let moved = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x = next;
        if moved / step < opts.gradient_tolerance {
            break;
        }
    }
    (objective(&x), x)
}

fn project_onto_facet(net: &Network, facet: usize, x: &mut [f64]) {
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        if r.contains(&facet) {
            let keep: Vec<usize> = r.clone().filter(|&a| a != facet).collect();
            let mut sub: Vec<f64> = keep.iter().map(|&a| x[a]).collect();
            project_simplex(&mut sub, u.rate);
            x[facet] = 0.0;
            for (&a, v) in keep.iter().zip(sub) {
                x[a] = v;
            }
        } else {
            project_simplex(&mut x[r], u.rate);
        }
    }
}

/// Euclidean projection onto `{v ≥ 0, Σ v = total}` (sort-based).
pub(crate) fn project_simplex(v: &mut [f64], total: f64) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - total) / (k + 1) as f64;
        if s - t > 0.0 {
            shift = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - shift).max(0.0));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;
    use approx::assert_relative_eq;

    #[test]
    fn projective_distance_examples() {
        let net = builtin::parallel_affine(1.0, &[(1.0, 0.0), (1.0, 0.0)])
            .network()
            .unwrap();
        let q = net.flow(vec![0.5, 0.5]).unwrap();
        assert_eq!(projective_distance(&q, &q).unwrap(), 0.0);
        let x = net.flow(vec![0.25, 0.75]).unwrap();
        assert_relative_eq!(projective_distance(&q, &x).unwrap(), 0.5, epsilon = 1e-15);
        let edge = net.flow(vec![0.0, 1.0]).unwrap();
        assert_eq!(projective_distance(&q, &edge).unwrap(), 1.0);
        assert!(matches!(
            projective_distance(&edge, &q),
            Err(Error::NotInterior { .. })
        ));
    }

    #[test]
    fn essence_of_two_disjoint_links() {
        for (rate, q) in [(1.0, vec![0.5, 0.5]), (2.0, vec![1.0, 1.0])] {
            let net = builtin::parallel_affine(rate, &[(1.0, 0.0), (1.0, 0.0)])
                .network()
                .unwrap();
            let q = net.flow(q).unwrap();
            let e = essence(&net, &q, &EssenceOptions::default()).unwrap();
            assert_relative_eq!(e.kappa, 0.5f64.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn essence_vanishes_on_reducible_networks() {
        let net = builtin::fig1b().network().unwrap();
        let q = net.uniform_flow();
        let e = essence(&net, &q, &EssenceOptions::default()).unwrap();
        assert_eq!(e.kappa, 0.0);
        let w = net.apply_indicator(&e.direction);
        assert!(w.iter().all(|v| v.abs() < 1e-12));
        let x: Vec<f64> = q
            .values()
            .iter()
            .zip(&e.direction)
            .map(|(a, b)| a + b)
            .collect();
        assert!(x[e.facet].abs() < 1e-12);
    }

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.2, -0.1, 1.5];
        project_simplex(&mut v, 1.0);
        assert_relative_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(v.iter().all(|&x| x >= 0.0));
        let mut w = vec![0.3, 0.7];
        project_simplex(&mut w, 1.0);
        assert_relative_eq!(w[0], 0.3, epsilon = 1e-15);
    }
}
