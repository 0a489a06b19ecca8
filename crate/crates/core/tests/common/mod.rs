//! Test oracles that do not go through the library's linear algebra.
#![allow(dead_code)]

use pinmg_core::CommNetwork;
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

/// `L + diag(pin_gains)` built straight from the adjacency predicate.
pub fn pinned_laplacian(net: &CommNetwork, pin_gains: &[f64]) -> Mat {
    let n = net.len();
    let mut m = zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && net.a(i, j) {
                m[i][j] -= 1.0;
                m[i][i] += 1.0;
            }
        }
        m[i][i] += pin_gains[i];
    }
    m
}

pub fn gains_for(n: usize, pinned: &[usize], g: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &p in pinned {
        v[p] = g;
    }
    v
}

/// Cyclic Jacobi rotations on a symmetric matrix; eigenvalues ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut a = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Smallest eigenvalue of `L + G Z` for an undirected graph.
pub fn phi_oracle(net: &CommNetwork, pinned: &[usize], g: f64) -> f64 {
    let m = pinned_laplacian(net, &gains_for(net.len(), pinned, g));
    jacobi_eigenvalues(&m)[0]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// `exp(s A)` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &Mat, s: f64) -> Mat {
    let n = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * s.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = s / 2f64.powi(squarings as i32);
    let scaled: Mat = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut result = zeros(n);
    let mut term = zeros(n);
    for i in 0..n {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..=20 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// Random spanning tree plus extra edges with probability `p`.
pub fn random_connected_undirected<R: Rng>(rng: &mut R, n: usize, p: f64) -> CommNetwork {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        present[v][u] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.random::<f64>() < p {
                present[u][v] = true;
                present[v][u] = true;
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if present[u][v] {
                edges.push((u, v));
            }
        }
    }
    CommNetwork::build(n, &edges).unwrap()
}

/// All `m`-subsets of `0..n` by recursion.
pub fn all_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// `phi` for every `m`-subset, using the Jacobi oracle.
pub fn enumerate_phi(net: &CommNetwork, m: usize, g: f64) -> Vec<(Vec<usize>, f64)> {
    all_subsets(net.len(), m)
        .into_iter()
        .map(|s| {
            let v = phi_oracle(net, &s, g);
            (s, v)
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
