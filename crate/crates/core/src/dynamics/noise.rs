use rand::Rng;
use rand_distr::StandardNormal;

use crate::latency::NoiseSpec;
use crate::net::Network;

/// Path increments `dU_α = Σ_r P_rα σ_r ΔW_r` with `ΔW_r ~ N(0, dt)` drawn
/// independently per edge.
pub fn noise_increments<R: Rng + ?Sized>(
    net: &Network,
    noise: &NoiseSpec,
    dt: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut dw = vec![0.0; net.edge_count()];
    let mut du = vec![0.0; net.path_count()];
    increments_into(net, noise, dt.sqrt(), rng, &mut dw, &mut du);
    du
}

pub(crate) fn increments_into<R: Rng + ?Sized>(
    net: &Network,
    noise: &NoiseSpec,
    sqrt_dt: f64,
    rng: &mut R,
    dw: &mut [f64],
    du: &mut [f64],
) {
    for (w, s) in dw.iter_mut().zip(&noise.sigma) {
        let z: f64 = rng.sample(StandardNormal);
        *w = s * sqrt_dt * z;
    }
    for (a, u) in du.iter_mut().enumerate() {
        *u = net.path_edges(a).iter().map(|&r| dw[r]).sum();
    }
}

/// σ_α² = Σ_{r∈α} σ_r² for every path.
pub fn path_variance(net: &Network, noise: &NoiseSpec) -> Vec<f64> {
    (0..net.path_count())
        .map(|a| {
            net.path_edges(a)
                .iter()
                .map(|&r| noise.sigma[r].powi(2))
                .sum()
        })
        .collect()
}
