use nalgebra::DMatrix;

use super::Network;

/// Singular values below `RANK_TOLERANCE × σ_max` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// The restriction Q of the indicator map to the tangent space of Δ, in the
/// basis `e_iμ − e_i0` (μ ≥ 1) of each user's tangent space, with its rank
/// and null space.
#[derive(Clone, Debug, PartialEq)]
pub struct RedundancyInfo {
    /// Edges × Σ_i(|A_i| − 1); column `(i, μ)` is `P_{·,iμ} − P_{·,i0}`.
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    /// dim Z = Σ_i(|A_i| − 1).
    pub tangent_dimension: usize,
    /// red(Q) = dim Z − rank.
    pub redundancy: usize,
    /// Orthonormal basis of ker Q in tangent coordinates.
    pub kernel: Vec<Vec<f64>>,
    /// The same kernel mapped back to path coordinates (tangent to Δ, null
    /// for P).
    pub kernel_paths: Vec<Vec<f64>>,
}

impl Default for RedundancyInfo {
    fn default() -> Self {
        RedundancyInfo {
            matrix: DMatrix::zeros(0, 0),
            rank: 0,
            tangent_dimension: 0,
            redundancy: 0,
            kernel: Vec::new(),
            kernel_paths: Vec::new(),
        }
    }
}

impl RedundancyInfo {
    pub(crate) fn compute(net: &Network) -> RedundancyInfo {
        let edges = net.edge_count();
        // column (user, μ) → (base path, μ path) in global indices
        let mut columns = Vec::new();
        for i in 0..net.user_count() {
            let r = net.user_range(i);
            for a in r.start + 1..r.end {
                columns.push((r.start, a));
            }
        }
        let dim_z = columns.len();
        let mut q = DMatrix::zeros(edges, dim_z);
        for (c, &(base, a)) in columns.iter().enumerate() {
            for &r in net.path_edges(a) {
                q[(r, c)] += 1.0;
            }
            for &r in net.path_edges(base) {
                q[(r, c)] -= 1.0;
            }
        }

        let (rank, kernel) = rank_and_kernel(&q);
        let kernel_paths = kernel
            .iter()
            .map(|k| {
                let mut z = vec![0.0; net.path_count()];
                for (c, &(base, a)) in columns.iter().enumerate() {
                    z[a] += k[c];
                    z[base] -= k[c];
                }
                z
            })
            .collect();

        RedundancyInfo {
            matrix: q,
            rank,
            tangent_dimension: dim_z,
            redundancy: dim_z - rank,
            kernel,
            kernel_paths,
        }
    }

    pub fn is_reducible(&self) -> bool {
        self.redundancy > 0
    }

    /// Euclidean norm of the component of `z` (path coordinates) orthogonal
    /// to the path-space kernel.
    pub fn kernel_residual(&self, z: &[f64]) -> f64 {
        let basis = orthonormalize(&self.kernel_paths);
        let mut r = z.to_vec();
        for b in &basis {
            let c: f64 = b.iter().zip(&r).map(|(u, v)| u * v).sum();
            r.iter_mut().zip(b).for_each(|(v, u)| *v -= c * u);
        }
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Numerical rank by SVD with relative threshold [`RANK_TOLERANCE`], and an
/// orthonormal basis of the null space.
pub(crate) fn rank_and_kernel(m: &DMatrix<f64>) -> (usize, Vec<Vec<f64>>) {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return (0, Vec::new());
    }
    // pad with zero rows so that the SVD returns a full V
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("V requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = RANK_TOLERANCE * smax;
    let mut rank = 0;
    let mut kernel = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > threshold {
            rank += 1;
        } else {
            kernel.push(v_t.row(k).iter().copied().collect());
        }
    }
    (rank, kernel)
}

pub(crate) fn null_space(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    rank_and_kernel(m).1
}

fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in &out {
                let c: f64 = b.iter().zip(&w).map(|(u, v)| u * v).sum();
                w.iter_mut().zip(b).for_each(|(x, u)| *x -= c * u);
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            w.iter_mut().for_each(|x| *x /= n);
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::io::builtin;

    #[test]
    fn fig1_redundancies() {
        assert_eq!(
            builtin::fig1a().network().unwrap().redundancy().redundancy,
            0
        );
        let b = builtin::fig1b().network().unwrap();
        let info = b.redundancy();
        assert_eq!(info.redundancy, 1);
        assert_eq!(info.kernel_paths.len(), 1);
        // α10 + α21 + α31 = α11 + α20 + α30, path order (10, 11, 20, 21, 30, 31)
        let expected = [1.0, -1.0, -1.0, 1.0, -1.0, 1.0];
        let k = &info.kernel_paths[0];
        let scale = k[0] / expected[0];
        for (a, e) in k.iter().zip(expected) {
            assert!((a - scale * e).abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn kernel_directions_leave_loads_unchanged() {
        let net = builtin::fig1b().network().unwrap();
        for k in &net.redundancy().kernel_paths {
            let w = net.apply_indicator(k);
            assert!(w.iter().all(|v| v.abs() < 1e-12));
            for i in 0..net.user_count() {
                let s: f64 = k[net.user_range(i)].iter().sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_of_kernel_vector_is_zero() {
        let net = builtin::fig1b().network().unwrap();
        let info = net.redundancy();
        let z: Vec<f64> = info.kernel_paths[0].iter().map(|v| 3.0 * v).collect();
        assert!(info.kernel_residual(&z) < 1e-12);
        let mut off = z.clone();
        off[0] += 1.0;
        off[1] -= 1.0;
        assert!(info.kernel_residual(&off) > 0.1);
    }
}
