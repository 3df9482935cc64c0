use crate::latency::{adjoint_potential, NoiseSpec};
use crate::net::{Flow, Network};
use crate::{Error, Result};

/// σ²_αβ = Σ_r P_rα P_rβ σ_r², the covariance rate of dU_α and dU_β.
pub fn noise_covariance(net: &Network, noise: &NoiseSpec) -> Vec<Vec<f64>> {
    let n = net.path_count();
    let mut cov = vec![vec![0.0; n]; n];
    for (a, row) in cov.iter_mut().enumerate() {
        for (b, c) in row.iter_mut().enumerate() {
            *c = net
                .path_edges(a)
                .iter()
                .filter(|r| net.path_edges(b).contains(r))
                .map(|&r| noise.sigma[r].powi(2))
                .sum();
        }
    }
    cov
}

/// Generator of the stochastic replicator dynamics applied to the
/// rate-adjusted relative entropy:
///
/// ```text
/// 𝓛H_q(x) = −L_q(x)
///         + ½ Σ_i (λ_i/ρ_i) Σ_βγ σ²_βγ (x_iβ − q_iβ)(x_iγ − q_iγ)
///         + ½ Σ_i (λ_i/ρ_i) Σ_βγ σ²_βγ q_iβ (ρ_i δ_βγ − q_iγ)
/// ```
pub fn entropy_generator(
    net: &Network,
    q: &Flow,
    x: &Flow,
    lambda: &[f64],
    noise: &NoiseSpec,
) -> Result<f64> {
    net.check_flow(q)?;
    net.check_flow(x)?;
    noise.validate(net.edge_count())?;
    if q.values()
        .iter()
        .zip(x.values())
        .any(|(&qa, &xa)| qa > 0.0 && xa <= 0.0)
    {
        return Err(Error::SupportViolation);
    }
    let cov = noise_covariance(net, noise);
    let (qv, xv) = (q.values(), x.values());
    let mut quadratic = 0.0;
    for (i, u) in net.users().iter().enumerate() {
        let r = net.user_range(i);
        let mut displacement = 0.0;
        let mut spread = 0.0;
        for b in r.clone() {
            spread += cov[b][b] * qv[b] * u.rate;
            for c in r.clone() {
                displacement += cov[b][c] * (xv[b] - qv[b]) * (xv[c] - qv[c]);
                spread -= cov[b][c] * qv[b] * qv[c];
            }
        }
        quadratic += 0.5 * lambda[i] / u.rate * (displacement + spread);
    }
    Ok(quadratic - adjoint_potential(net, q, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    #[test]
    fn disjoint_links_at_the_interior_equilibrium() {
        let net = builtin::parallel_affine(1.0, &[(1.0, 0.0), (1.0, 0.0)])
            .network()
            .unwrap();
        let q = net.flow(vec![0.5, 0.5]).unwrap();
        let g = entropy_generator(&net, &q, &q, &[1.0], &NoiseSpec::uniform(2, 1.0)).unwrap();
        assert_eq!(g, 0.25);
    }

    #[test]
    fn zero_noise_reduces_to_minus_adjoint() {
        let net = builtin::braess().network().unwrap();
        let q = net.flow(vec![2.0, 2.0, 2.0]).unwrap();
        let x = net.flow(vec![1.0, 2.0, 3.0]).unwrap();
        let g = entropy_generator(&net, &q, &x, &[1.0], &NoiseSpec::zero(5)).unwrap();
        assert_eq!(g, -adjoint_potential(&net, &q, &x).unwrap());
    }

    #[test]
    fn strict_equilibrium_is_a_zero() {
        let net = builtin::parallel2().network().unwrap();
        let q = net.flow(vec![1.0, 0.0]).unwrap();
        let g = entropy_generator(&net, &q, &q, &[0.1], &NoiseSpec::uniform(2, 0.5)).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn support_is_checked() {
        let net = builtin::parallel2().network().unwrap();
        let q = net.flow(vec![0.5, 0.5]).unwrap();
        let x = net.flow(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            entropy_generator(&net, &q, &x, &[1.0], &NoiseSpec::zero(2)),
            Err(Error::SupportViolation)
        ));
    }
}
