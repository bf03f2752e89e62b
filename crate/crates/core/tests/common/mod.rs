//! Independent oracles shared by the integration tests. Nothing here calls into the code
//! paths it is used to check.
#![allow(dead_code)]

use locfact::geometry::{Lattice, Region};
use locfact::linalg::CMat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UNREACHABLE: u64 = u64::MAX / 4;

/// Floyd–Warshall all-pairs shortest paths on an edge list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].saturating_add(d[k][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Random simple graph on `n` vertices with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `exp(-i h t)` by nalgebra's Padé scaling-and-squaring, independent of the eigen route.
pub fn pade_propagator(h: &CMat, t: f64) -> CMat {
    (h * Complex64::new(0.0, -t)).exp()
}

/// Largest |eigenvalue| of a Hermitian matrix, via the real symmetric 2n×2n embedding.
pub fn hermitian_norm_oracle(h: &CMat) -> f64 {
    let n = h.nrows();
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    real.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Operator norm through the largest eigenvalue of `A†A`.
pub fn norm_oracle(a: &CMat) -> f64 {
    hermitian_norm_oracle(&(a.adjoint() * a)).sqrt()
}

/// Embedding by explicit multi-index arithmetic: `out[i][j] = op[a(i)][a(j)]` when the
/// digits outside `support` agree, zero otherwise.
pub fn embed_oracle(op: &CMat, support: &[usize], volume: &[usize], dims: &[usize]) -> CMat {
    let vd: Vec<usize> = volume.iter().map(|&v| dims[v]).collect();
    let total: usize = vd.iter().product();
    let digits = |mut i: usize| {
        let mut out = vec![0; vd.len()];
        for k in (0..vd.len()).rev() {
            out[k] = i % vd[k];
            i /= vd[k];
        }
        out
    };
    let mut out = CMat::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (digits(i), digits(j));
            let mut same_rest = true;
            let (mut a, mut b) = (0, 0);
            for (k, &v) in volume.iter().enumerate() {
                if let Some(pos) = support.iter().position(|&z| z == v) {
                    let _ = pos;
                    a = a * vd[k] + di[k];
                    b = b * vd[k] + dj[k];
                } else if di[k] != dj[k] {
                    same_rest = false;
                }
            }
            if same_rest {
                out[(i, j)] = op[(a, b)];
            }
        }
    }
    out
}

/// Direct summation of the four convolution constants, written against the oracle distance table.
pub fn constants_oracle(d: &[Vec<u64>], f: impl Fn(f64) -> f64, xi: impl Fn(f64) -> f64) -> [f64; 4] {
    let n = d.len();
    let fxi = |r: f64| f(r) * xi(r);
    let mut norm_f: f64 = 0.0;
    let mut norm_fxi: f64 = 0.0;
    let mut conv_f: f64 = 0.0;
    let mut conv_xi: f64 = 0.0;
    for x in 0..n {
        let mut s = 0.0;
        let mut sx = 0.0;
        for y in 0..n {
            if d[x][y] < UNREACHABLE {
                s += f(d[x][y] as f64);
                sx += fxi(d[x][y] as f64);
            }
        }
        norm_f = norm_f.max(s);
        norm_fxi = norm_fxi.max(sx);
        for z in 0..n {
            if d[x][z] >= UNREACHABLE {
                continue;
            }
            let mut cf = 0.0;
            let mut cx = 0.0;
            for y in 0..n {
                if d[x][y] >= UNREACHABLE || d[y][z] >= UNREACHABLE {
                    continue;
                }
                let (a, b, c) = (d[x][y] as f64, d[y][z] as f64, d[x][z] as f64);
                cf += f(a) * f(b) / f(c);
                cx += fxi(a) * fxi(b) / fxi(c);
            }
            conv_f = conv_f.max(cf);
            conv_xi = conv_xi.max(cx);
        }
    }
    [norm_f, conv_f, conv_xi, norm_fxi]
}

pub fn region(v: &[usize]) -> Region {
    Region::from_vertices(v.iter().copied())
}

pub fn lattice_from(n: usize, edges: &[(usize, usize)]) -> Lattice {
    Lattice::from_edges(n, edges).unwrap()
}

/// `exp(-i h t)` from nalgebra's Hermitian eigendecomposition, `V e^{-iλt} V†`.
pub fn eigen_propagator(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}
