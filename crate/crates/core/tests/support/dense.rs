//! Dense f64 message-passing oracles over an explicit adjacency matrix.

use graphrx::{Graph, Tensor};

pub type Matrix = Vec<Vec<f64>>;

pub fn from_tensor(t: &Tensor) -> Matrix {
    let cols = t.shape()[1];
    t.data()
        .chunks(cols.max(1))
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect()
}

/// Symmetric 0/1 adjacency ignoring self-loops and edge multiplicity.
pub fn adjacency(g: &Graph) -> Matrix {
    let n = g.num_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        if e.head != e.tail {
            a[e.head][e.tail] = 1.0;
            a[e.tail][e.head] = 1.0;
        }
    }
    a
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let k = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| (0..k).map(|p| row[p] * b[p][j]).sum())
                .collect()
        })
        .collect()
}

fn add_row(m: &Matrix, b: &[f64]) -> Matrix {
    m.iter()
        .map(|r| r.iter().zip(b).map(|(x, y)| x + y).collect())
        .collect()
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2} H W + b`.
pub fn gcn(a: &Matrix, h: &Matrix, w: &Matrix, b: &[f64]) -> Matrix {
    let n = a.len();
    let mut hat = a.clone();
    for (i, row) in hat.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let deg: Vec<f64> = hat.iter().map(|r| r.iter().sum()).collect();
    let norm: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| hat[i][j] / (deg[i] * deg[j]).sqrt())
                .collect()
        })
        .collect();
    add_row(&matmul(&matmul(&norm, h), w), b)
}

/// `relu((1 + ε) H + A H) W₁ + b₁` through relu, then `W₂ + b₂`.
pub fn gin(a: &Matrix, h: &Matrix, eps: f64, mlp: [(&Matrix, &[f64]); 2]) -> Matrix {
    let mut agg = matmul(a, h);
    for (row, own) in agg.iter_mut().zip(h) {
        for (x, y) in row.iter_mut().zip(own) {
            *x += (1.0 + eps) * y;
        }
    }
    let hidden = add_row(&matmul(&agg, mlp[0].0), mlp[0].1);
    let hidden: Matrix = hidden
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.max(0.0)).collect())
        .collect();
    add_row(&matmul(&hidden, mlp[1].0), mlp[1].1)
}

pub fn max_abs_diff(a: &Matrix, b: &Tensor) -> f64 {
    let b = from_tensor(b);
    assert_eq!(a.len(), b.len(), "row count");
    a.iter()
        .zip(&b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}
