#![allow(dead_code)]

use wardrop_core::net::Network;

/// Rank of an integer matrix by fraction-free (Bareiss) elimination in i128.
pub fn exact_rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// The redundancy matrix built directly from the path lists: column (i, μ)
/// is the indicator of path μ minus that of the base path of user i.
pub fn integer_redundancy_matrix(net: &Network) -> Vec<Vec<i128>> {
    let mut columns = Vec::new();
    for i in 0..net.user_count() {
        let r = net.user_range(i);
        for a in r.start + 1..r.end {
            let mut col = vec![0i128; net.edge_count()];
            for &e in net.path_edges(a) {
                col[e] += 1;
            }
            for &e in net.path_edges(r.start) {
                col[e] -= 1;
            }
            columns.push(col);
        }
    }
    (0..net.edge_count())
        .map(|e| columns.iter().map(|c| c[e]).collect())
        .collect()
}

/// red(Q) = dim Z − rank Q in exact arithmetic.
pub fn exact_redundancy(net: &Network) -> usize {
    let m = integer_redundancy_matrix(net);
    let dim: usize = (0..net.user_count())
        .map(|i| net.user_range(i).len() - 1)
        .sum();
    dim - exact_rank(m)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
